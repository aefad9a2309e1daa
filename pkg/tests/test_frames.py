"""Knowledge-base tests: inheritance, slot resolution, daemon-backed updates."""

from __future__ import annotations

import pytest

from goalsmith.frames import (
    Frame,
    FrameSet,
    INSTANCE,
    RangeViolationError,
    Slot,
    UndeclaredSlotError,
    UnknownFrameError,
    UpdateRequest,
    ValueUnavailable,
    validate_kb,
)
from goalsmith.rdr import Condition, NoChangeError, apply_update
from trained_trees import human_tree, human_tree_default


def human_kb(trained: bool = False) -> FrameSet:
    tree = human_tree() if trained else human_tree_default()
    human = Frame(
        "human",
        parents=("object",),
        slots={
            "type": Slot("type", range=("agent", "civilian")),
            "buriedness": Slot("buriedness", range=("non_buried", "buried")),
            "health": Slot("health", range=("dead", "critical", "injured", "healthy")),
            "goal": Slot(
                "goal",
                range=("none", "unbury"),
                if_needed=tree,
                if_replaced=("buriedness",),
            ),
        },
    )
    brigade = Frame(
        "human_937073426",
        INSTANCE,
        parents=("human",),
        slots={"buriedness": Slot("buriedness", value="buried")},
    )
    return FrameSet([human, brigade])


def test_goal_slot_defaults_to_none():
    kb = human_kb()
    assert kb.resolve_slot("human_937073426", "goal") == "none"


def test_local_value_needs_no_daemon():
    kb = human_kb()
    assert kb.resolve_slot("human_937073426", "buriedness") == "buried"


def test_trained_tree_changes_resolution():
    kb = human_kb(trained=True)
    assert kb.resolve_slot("human_937073426", "goal") == "unbury"
    kb.set_slot_value("human_937073426", "buriedness", "non_buried")
    assert kb.resolve_slot("human_937073426", "goal") == "none"


def test_resolution_is_repeatable():
    kb = human_kb(trained=True)
    first = kb.resolve_slot("human_937073426", "goal")
    assert all(kb.resolve_slot("human_937073426", "goal") == first for _ in range(5))


def test_case_projection_skips_daemon_slots():
    kb = human_kb()
    case = kb.case_of("human_937073426")
    assert case.bindings == {"buriedness": "buried"}


def test_undeclared_slot_rejected():
    kb = human_kb()
    with pytest.raises(UndeclaredSlotError):
        kb.resolve_slot("human_937073426", "altitude")
    with pytest.raises(UndeclaredSlotError):
        kb.set_slot_value("human_937073426", "altitude", "high")


def test_unset_slot_without_daemon_is_unavailable():
    kb = human_kb()
    with pytest.raises(ValueUnavailable):
        kb.resolve_slot("human_937073426", "health")


def test_range_violation_rejected():
    kb = human_kb()
    with pytest.raises(RangeViolationError):
        kb.set_slot_value("human_937073426", "health", "flying")


def test_plain_store_path():
    kb = human_kb()
    assert kb.set_slot_value("human_937073426", "health", "injured") is None
    assert kb.resolve_slot("human_937073426", "health") == "injured"


def test_override_of_daemon_slot_becomes_update_request():
    kb = human_kb()
    kb.set_slot_value("human_937073426", "health", "injured")
    kb.set_slot_value("human_937073426", "type", "agent")
    request = kb.set_slot_value("human_937073426", "goal", "unbury", at=12)
    assert isinstance(request, UpdateRequest)
    assert (request.owner, request.slot, request.frame) == ("human", "goal", "human_937073426")
    assert (request.current, request.proposed) == ("none", "unbury")
    assert request.case.created_at == 12
    # Hinted slot leads the candidate list even though others differ too.
    assert [str(l) for l in request.candidates] == [
        "this buriedness == buried",
        "this health == injured",
        "this type == agent",
    ]
    # Two-phase: nothing stored, nothing changed until the update is applied.
    assert kb.resolve_slot("human_937073426", "goal") == "none"
    taught = apply_update(
        kb.get("human").slots["goal"].if_needed,
        request.case,
        request.proposed,
        Condition((request.candidates[0],)),
    )
    kb.replace_tree(request.owner, request.slot, taught)
    assert kb.resolve_slot("human_937073426", "goal") == "unbury"


def test_no_change_override_rejected():
    kb = human_kb(trained=True)
    with pytest.raises(NoChangeError):
        kb.set_slot_value("human_937073426", "goal", "unbury")


def test_three_deep_shadowing():
    base = Frame("base", slots={"tone": Slot("tone", range=("low", "mid", "high"), value="low")})
    middle = Frame("middle", parents=("base",), slots={"tone": Slot("tone", value="mid")})
    leaf = Frame("leaf", INSTANCE, parents=("middle",))
    kb = FrameSet([base, middle, leaf])
    assert kb.resolve_slot("leaf", "tone") == "mid"
    kb.set_slot_value("leaf", "tone", "high")
    assert kb.resolve_slot("leaf", "tone") == "high"
    assert kb.resolve_slot("middle", "tone") == "mid"
    assert kb.resolve_slot("base", "tone") == "low"


def test_first_parent_wins_on_multiple_inheritance():
    left = Frame("left", slots={"hue": Slot("hue", value="red")})
    right = Frame("right", slots={"hue": Slot("hue", value="blue")})
    child = Frame("child", INSTANCE, parents=("left", "right"))
    kb = FrameSet([left, right, child])
    assert kb.resolve_slot("child", "hue") == "red"
    assert [f.id for f in kb.chain("child")] == ["child", "left", "right", "object"]


def test_overlay_resolves_through_base():
    knowledge = human_kb(trained=True)
    mirror = FrameSet(base=knowledge)
    mirror.add(
        Frame("human_11", INSTANCE, ("human",), {"buriedness": Slot("buriedness", value="buried")})
    )
    assert mirror.resolve_slot("human_11", "goal") == "unbury"
    assert "human_937073426" in mirror
    assert "human_11" not in knowledge.frames
    assert set(mirror.trees()) == {"human"}


def test_tree_owner_names_the_slot_carrying_each_tree():
    kb = human_kb()
    assert kb.tree_owner("human") == ("human", "goal")
    assert kb.tree_owner("weather") is None
    mirror = FrameSet(base=kb)
    assert mirror.tree_owner("human") == ("human", "goal")  # found through the base


def test_unknown_frame_and_parent_errors():
    kb = human_kb()
    with pytest.raises(UnknownFrameError):
        kb.resolve_slot("human_404", "goal")
    kb.add(Frame("orphan", INSTANCE, parents=("ghost",)))
    with pytest.raises(UnknownFrameError):
        validate_kb(kb)


def test_validate_accepts_diamonds_but_rejects_cycles():
    a = Frame("a")
    b = Frame("b", parents=("a",))
    c = Frame("c", parents=("a",))
    d = Frame("d", parents=("b", "c"))
    validate_kb(FrameSet([a, b, c, d]))
    x = Frame("x", parents=("y",))
    y = Frame("y", parents=("x",))
    with pytest.raises(ValueError):
        validate_kb(FrameSet([x, y]))


def test_validate_checks_tree_conclusions_against_range():
    kb = human_kb()
    validate_kb(kb)
    kb.get("human").slots["goal"].range = ("none",)  # unbury no longer allowed
    kb.replace_tree("human", "goal", human_tree())
    with pytest.raises(RangeViolationError):
        validate_kb(kb)


def test_validate_checks_hint_slots_exist():
    kb = human_kb()
    kb.get("human").slots["goal"].if_replaced = ("buriedness", "mood")
    with pytest.raises(UndeclaredSlotError):
        validate_kb(kb)
