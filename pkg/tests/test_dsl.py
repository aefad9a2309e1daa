"""DSL tests: published-listing parses, canonical layout, round-trip fixpoint."""

from __future__ import annotations

import pytest

from goalsmith.dsl import DslError, parse_frame_source, parse_tree_text, serialize_kb, tree_text
from goalsmith.frames import INSTANCE
from goalsmith.rdr import Case, evaluate
from kb_gen import random_kb
from trained_trees import building_tree, human_tree, ordering_tree, road_tree_extended

# The frame and rule texts below reproduce the shipped ruleset's layout,
# including the loose whitespace (trailing blanks, tabs, wrapped lines) that
# hand-written files accumulate; the parser must take them all.

HUMAN_FRAME_TEXT = """\
human ako object with
    type:
        range [agent, civilian]
    buriedness:
        range\t\t
            [non_buried, buried]
    health:
        range [dead, critical, injured, healthy]
    goal:
        range\t\t
            [none, unbury]
        if_needed\t
            if true then none because case0
        if_replaced
            rdr_frame([buriedness])
"""

BUILDING_RULES_TEXT = """\
if true then none because building0
    except
    if this scouted == no
        then scout because building1
    else
    if this fieryness == heating
        then douse because case_building_1
    else
    if this fieryness == burning
        then douse because case_building_2
    else
    if this fieryness == inferno
        then douse because case_building_3
"""

ORDERING_RULES_TEXT = """\
if true then false
\texcept
\tif GoalA == rescueGoal and GoalB == scoutGoal
\t    then true because before(rescueGoal, scoutGoal)
\telse
\tif GoalA == clearGoal and GoalB == scoutGoal
\t    then true because before(clearGoal, scoutGoal)
\telse
\tif GoalA == douseGoal and GoalB == scoutGoal
\t    then true because before(douseGoal, scoutGoal);
"""

ROAD_RULES_TEXT = """\
if true then none because road0
    except
    if this requested == yes and this blocked == yes
        then unblock because case_road_1
    else
    if this has_civilians == yes and this blocked == yes
        then unblock because case_road_2
"""

HUMAN_RULES_TEXT = """\
if true then none because case0
    except
    if this buriedness == buried
        then unbury because case_brigade_1
"""


def test_human_frame_listing_parses():
    kb = parse_frame_source(HUMAN_FRAME_TEXT)
    human = kb.get("human")
    assert list(human.slots) == ["type", "buriedness", "health", "goal"]
    assert human.parents == ("object",)
    goal = human.slots["goal"]
    assert goal.range == ("none", "unbury")
    assert goal.if_replaced == ("buriedness",)
    assert goal.if_needed.root.conclusion == "none"
    assert goal.if_needed.root.cornerstone_id == "case0"
    assert goal.if_needed.domain == "human"


def test_instance_listing_parses():
    kb = parse_frame_source(
        HUMAN_FRAME_TEXT + "\nframe(human_937073426, [human], [buriedness: buried]);\n"
    )
    instance = kb.get("human_937073426")
    assert instance.kind == INSTANCE
    assert instance.parents == ("human",)
    assert instance.slots["buriedness"].value == "buried"
    assert kb.resolve_slot("human_937073426", "goal") == "none"


def test_published_rule_listings_parse_to_the_trained_structures():
    pairs = [
        (BUILDING_RULES_TEXT, building_tree()),
        (ROAD_RULES_TEXT, road_tree_extended()),
        (HUMAN_RULES_TEXT, human_tree()),
        (ORDERING_RULES_TEXT, ordering_tree()),
    ]
    for text, want in pairs:
        got = parse_tree_text(text, want.domain)
        assert got.root == want.root, f"structure mismatch for {want.domain}"


def test_canonical_tree_layout():
    assert tree_text(building_tree()) == (
        "if true then none because building0\n"
        "    except\n"
        "    if this scouted == no then scout because building1\n"
        "    else\n"
        "    if this fieryness == heating then douse because case_building_1\n"
        "    else\n"
        "    if this fieryness == burning then douse because case_building_2\n"
        "    else\n"
        "    if this fieryness == inferno then douse because case_building_3"
    )
    assert tree_text(ordering_tree()) == (
        "if true then false\n"
        "    except\n"
        "    if GoalA == rescueGoal and GoalB == scoutGoal then true because before(rescueGoal, scoutGoal)\n"
        "    else\n"
        "    if GoalA == clearGoal and GoalB == scoutGoal then true because before(clearGoal, scoutGoal)\n"
        "    else\n"
        "    if GoalA == douseGoal and GoalB == scoutGoal then true because before(douseGoal, scoutGoal)"
    )


def test_canonical_frame_layout():
    kb = parse_frame_source(HUMAN_FRAME_TEXT)
    assert serialize_kb(kb) == (
        "human ako object with\n"
        "    type:\n"
        "        range [agent, civilian]\n"
        "    buriedness:\n"
        "        range [non_buried, buried]\n"
        "    health:\n"
        "        range [dead, critical, injured, healthy]\n"
        "    goal:\n"
        "        range [none, unbury]\n"
        "        if_needed\n"
        "            if true then none because case0\n"
        "        if_replaced\n"
        "            rdr_frame([buriedness])\n"
    )


def test_nested_exception_else_binds_by_column():
    text = (
        "if true then none because r0\n"
        "    except\n"
        "    if this a == x then one because c1\n"
        "        except\n"
        "        if this b == y then two because c2\n"
        "    else\n"
        "    if this a == z then three because c3\n"
    )
    tree = parse_tree_text(text, "t")
    outer = tree.root.except_child
    assert outer.cornerstone_id == "c1"
    assert outer.except_child.cornerstone_id == "c2"
    assert outer.except_child.else_child is None
    assert outer.else_child.cornerstone_id == "c3"

    deeper = text.replace("\n    else\n    if this a == z", "\n        else\n        if this a == z")
    tree = parse_tree_text(deeper, "t")
    outer = tree.root.except_child
    assert outer.else_child is None
    assert outer.except_child.else_child.cornerstone_id == "c3"


def test_unaligned_else_binds_to_nearest_rule():
    text = (
        "if true then none because r0\n"
        "    except\n"
        "    if this a == x then one because c1\n"
        "        except\n"
        "        if this b == y then two because c2\n"
        "  else\n"
        "  if this a == z then three because c3\n"
    )
    tree = parse_tree_text(text, "t")
    assert tree.root.except_child.except_child.else_child.cornerstone_id == "c3"


def test_round_trip_is_a_byte_fixpoint():
    for seed in range(40):
        kb = random_kb(seed)
        text = serialize_kb(kb)
        reparsed = parse_frame_source(text)
        assert reparsed == kb, f"structural round-trip failed for seed {seed}"
        assert serialize_kb(reparsed) == text, f"byte fixpoint failed for seed {seed}"


def test_round_trip_preserves_cornerstones_and_timestamps():
    kb = random_kb(11)
    text = serialize_kb(kb)
    reparsed = parse_frame_source(text)
    for domain, tree in kb.trees().items():
        again = reparsed.trees()[domain]
        assert dict(again.cornerstones) == dict(tree.cornerstones)


def test_round_trip_preserves_evaluation():
    kb = random_kb(23)
    reparsed = parse_frame_source(serialize_kb(kb))
    import random as _r

    rng = _r.Random(5)
    for domain, tree in kb.trees().items():
        again = reparsed.trees()[domain]
        slots = sorted({l.slot for n, _ in tree.walk() for l in n.condition.literals})
        for _ in range(50):
            case = Case(
                "p", {s: rng.choice(["alpha", "beta", "gamma", "delta"]) for s in slots if rng.random() < 0.7}
            )
            assert evaluate(tree, case).conclusion == evaluate(again, case).conclusion


def test_empty_text_and_empty_kb():
    kb = parse_frame_source("")
    assert list(kb) == []
    assert serialize_kb(kb) == ""


def test_comments_and_blank_lines_ignored():
    kb = parse_frame_source(
        "// a road with a goal slot\n\nroad ako object with\n"
        "    blocked:\n        range [yes, no]  // current state\n"
    )
    assert kb.get("road").slots["blocked"].range == ("yes", "no")


def test_syntax_error_reports_position():
    with pytest.raises(DslError) as err:
        parse_frame_source("road ako object with\n    blocked:\n        range yes, no]\n")
    assert err.value.line == 3


def test_unknown_parent_rejected():
    with pytest.raises(ValueError, match="ghost"):
        parse_frame_source("frame(r1, [ghost], [blocked: yes]);\n")


def test_value_outside_range_rejected():
    with pytest.raises(ValueError, match="outside range"):
        parse_frame_source(
            "road ako object with\n    blocked:\n        range [yes, no]\n        value maybe\n"
        )


def test_rule_conclusion_outside_range_rejected():
    with pytest.raises(ValueError, match="outside range"):
        parse_frame_source(
            "road ako object with\n    goal:\n        range [none, unblock]\n"
            "        if_needed\n            if true then destroy because road0\n"
        )


def test_stray_case_rejected():
    with pytest.raises(DslError, match="no rule"):
        parse_frame_source(
            "road ako object with\n    goal:\n        range [none]\n"
            "        if_needed\n            if true then none because road0\n"
            "\ncase road99:\n    blocked: yes\n"
        )


def test_bare_slot_literal_rejected():
    with pytest.raises(DslError, match="this"):
        parse_tree_text("if blocked == yes then unblock because c1", "road")


def test_cornerstone_blocks_round_trip_with_time():
    text = (
        "road ako object with\n"
        "    blocked:\n"
        "        range [yes, no]\n"
        "    goal:\n"
        "        range [none, unblock]\n"
        "        if_needed\n"
        "            if true then none because road0\n"
        "                except\n"
        "                if this blocked == yes then unblock because case_road_1\n"
        "\n"
        "case case_road_1 at 17:\n"
        "    blocked: yes\n"
    )
    kb = parse_frame_source(text)
    stone = kb.trees()["road"].cornerstones["case_road_1"]
    assert stone == Case("case_road_1", {"blocked": "yes"}, 17)
    assert serialize_kb(kb) == text
