"""Rescue-domain vocabulary: how simulator entities project into frames, which
agent kinds can serve which goals, and the starter knowledge base.

The knowledge base is layered: the durable part (generic frames carrying the
rule trees) comes from a ruleset file, and every reasoning pass lays a fresh
overlay of instance frames — one per believed entity — on top of it.
"""

from __future__ import annotations

from pathlib import Path

from .dsl import parse_frame_source, serialize_kb
from .frames import INSTANCE, Frame, FrameSet, Slot, validate_kb
from .rdr import Condition, RdrNode, RdrTree, Case
from .sim import Building, Civilian, Entity, PlatoonAgent, Road
from .belief import BeliefState

GOAL_TYPES = ("unbury", "unblock", "douse", "scout")

# goal type -> simulator action kind
ACTION_FOR_GOAL = {"unbury": "unbury", "unblock": "clear", "douse": "douse", "scout": "scout"}

# goal type -> agent kinds that can serve it
CAPABILITY_MAP = {
    "unbury": ("ambulance",),
    "unblock": ("police",),
    "douse": ("fire_brigade",),
    "scout": ("fire_brigade", "ambulance", "police"),
}

# goal type -> name used by the precedence rules
ORDER_NAME = {
    "unbury": "rescueGoal",
    "unblock": "clearGoal",
    "douse": "douseGoal",
    "scout": "scoutGoal",
}
GOAL_FOR_ORDER = {v: k for k, v in ORDER_NAME.items()}

DATA_DIR = Path(__file__).parent / "data"


def entity_variant(entity: Entity) -> str:
    if isinstance(entity, Building):
        return "building"
    if isinstance(entity, Road):
        return "road"
    return "human"


def case_attributes(entity: Entity) -> dict[str, str]:
    """The slots a believed entity exposes to the rules."""
    if isinstance(entity, Building):
        return {"fieryness": entity.fieryness, "scouted": entity.scouted}
    if isinstance(entity, Road):
        return {
            "blocked": entity.blocked,
            "requested": entity.requested,
            "has_civilians": entity.has_civilians,
        }
    return {
        "type": entity.type,
        "buriedness": entity.buriedness,
        "health": entity.health,
    }


def mirror_frame(eid: str, entity: Entity) -> Frame:
    slots = {
        name: Slot(name, value=value) for name, value in case_attributes(entity).items()
    }
    return Frame(eid, INSTANCE, (entity_variant(entity),), slots)


def build_view(knowledge: FrameSet, belief: BeliefState) -> FrameSet:
    """Project the current belief onto the knowledge base as instance frames."""
    view = FrameSet(base=knowledge)
    for eid, entity in belief.entities.items():
        view.add(mirror_frame(eid, entity))
    return view


# ---------------------------------------------------------------------------
# goal achievement predicates
# ---------------------------------------------------------------------------


def goal_satisfied(goal_type: str, entity: Entity) -> bool:
    if goal_type == "unbury":
        return entity.burial_depth == 0
    if goal_type == "douse":
        return entity.fieryness == "none"
    if goal_type == "unblock":
        return entity.blocked == "no"
    if goal_type == "scout":
        return entity.scouted == "yes"
    raise ValueError(f"unknown goal type {goal_type!r}")


def target_lost(goal_type: str, entity: Entity) -> bool:
    """True when the target entered an absorbing state that makes the goal moot."""
    if goal_type == "unbury":
        return entity.hp <= 0
    if goal_type == "douse":
        return entity.fieryness == "destroyed"
    return False


# ---------------------------------------------------------------------------
# knowledge base bootstrap
# ---------------------------------------------------------------------------

ORDER_VOCABULARY = ("rescueGoal", "clearGoal", "douseGoal", "scoutGoal")


def _default_tree(domain: str, conclusion: str, root_id: str) -> RdrTree:
    root = RdrNode(Condition.true(), conclusion, root_id)
    return RdrTree(root, domain, {root_id: Case(root_id, {})})


def starter_kb() -> FrameSet:
    """The untrained knowledge base: every goal tree answers `none` (and the
    precedence tree `false`) until a trainer teaches exceptions."""
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
                if_needed=_default_tree("human", "none", "case0"),
                if_replaced=("buriedness",),
            ),
        },
    )
    building = Frame(
        "building",
        parents=("object",),
        slots={
            "fieryness": Slot(
                "fieryness", range=("none", "heating", "burning", "inferno", "destroyed")
            ),
            "scouted": Slot("scouted", range=("yes", "no")),
            "goal": Slot(
                "goal",
                range=("none", "scout", "douse"),
                if_needed=_default_tree("building", "none", "building0"),
                if_replaced=("fieryness", "scouted"),
            ),
        },
    )
    road = Frame(
        "road",
        parents=("object",),
        slots={
            "blocked": Slot("blocked", range=("yes", "no")),
            "requested": Slot("requested", range=("yes", "no")),
            "has_civilians": Slot("has_civilians", range=("yes", "no")),
            "goal": Slot(
                "goal",
                range=("none", "unblock"),
                if_needed=_default_tree("road", "none", "road0"),
                if_replaced=("blocked", "requested", "has_civilians"),
            ),
        },
    )
    order = Frame(
        "order",
        parents=("object",),
        slots={
            "GoalA": Slot("GoalA", range=ORDER_VOCABULARY),
            "GoalB": Slot("GoalB", range=ORDER_VOCABULARY),
            "before": Slot(
                "before",
                range=("true", "false"),
                if_needed=_default_tree("order", "false", ""),
            ),
        },
    )
    kb = FrameSet([human, building, road, order])
    validate_kb(kb)
    return kb


def load_ruleset(path: str | Path) -> FrameSet:
    kb = parse_frame_source(Path(path).read_text())
    validate_kb(kb)
    return kb


def ruleset_text(kb: FrameSet) -> str:
    return serialize_kb(kb)


def packaged_ruleset(name: str) -> Path:
    path = DATA_DIR / f"{name}.fs"
    if not path.exists():
        available = sorted(p.stem for p in DATA_DIR.glob("*.fs"))
        raise FileNotFoundError(f"no packaged ruleset {name!r}; have {available}")
    return path
