"""Deterministic discrete-time rescue simulator.

Each step applies, in a fixed order: agent movement, terminal actions
(douse/unbury/clear/scout), fire escalation and spread, burial hp decay,
then the clock. Fire-spread randomness comes from a keyed hash over
(seed, step, source, target), so a draw never depends on iteration order
and any prefix of a run can be replayed bit-exactly.

The world is advanced functionally: step_world returns a fresh state and
the caller keeps every snapshot, which is what makes rewind a lookup.
"""

from __future__ import annotations

import copy
import hashlib
import json
from collections import deque
from dataclasses import asdict, dataclass, field

from .scenario import Dynamics, Scenario

FIERYNESS_LADDER = ("none", "heating", "burning", "inferno", "destroyed")

DEAD = "dead"
CRITICAL = "critical"
INJURED = "injured"
HEALTHY = "healthy"


def health_category(hp: int) -> str:
    if hp <= 0:
        return DEAD
    if hp <= 30:
        return CRITICAL
    if hp <= 70:
        return INJURED
    return HEALTHY


@dataclass
class Building:
    id: str
    node: str
    fieryness: str = "none"
    scouted: str = "no"
    steps_at_level: int = 0


@dataclass
class Road:
    id: str
    a: str
    b: str
    length: float
    blocked: str = "no"
    requested: str = "no"
    has_civilians: str = "no"


@dataclass
class Civilian:
    id: str
    node: str
    hp: int = 100
    burial_depth: int = 0

    type = "civilian"

    @property
    def buriedness(self) -> str:
        return "buried" if self.burial_depth > 0 else "non_buried"

    @property
    def health(self) -> str:
        return health_category(self.hp)


@dataclass
class PlatoonAgent:
    id: str
    node: str
    kind: str  # fire_brigade | ambulance | police
    hp: int = 100
    burial_depth: int = 0
    current_action: str = "idle"

    type = "agent"

    @property
    def buriedness(self) -> str:
        return "buried" if self.burial_depth > 0 else "non_buried"

    @property
    def health(self) -> str:
        return health_category(self.hp)


Entity = Building | Road | Civilian | PlatoonAgent


@dataclass(frozen=True)
class Action:
    kind: str  # move | douse | unbury | clear | scout | idle
    agent: str
    target: str | None = None
    path: tuple[str, ...] = ()  # nodes walked this step, starting point first

    def describe(self) -> str:
        if self.kind == "move":
            return f"move {'->'.join(self.path)}"
        return f"{self.kind} {self.target}" if self.target else self.kind


@dataclass(frozen=True)
class StaticMap:
    """Immutable map shared by every snapshot of a run."""

    nodes: tuple[str, ...]
    coords: dict[str, tuple[float, float]]
    adjacency: dict[str, tuple[tuple[str, str, float], ...]]  # node -> (neighbor, road, length)
    road_endpoints: dict[str, tuple[str, str]]
    dynamics: Dynamics
    step_budget: int
    name: str

    def neighbors(self, node: str) -> tuple[tuple[str, str, float], ...]:
        return self.adjacency.get(node, ())

    def nodes_within(self, start: str, hops: int) -> set[str]:
        seen = {start}
        frontier = deque([(start, 0)])
        while frontier:
            node, depth = frontier.popleft()
            if depth == hops:
                continue
            for neighbor, _, _ in self.neighbors(node):
                if neighbor not in seen:
                    seen.add(neighbor)
                    frontier.append((neighbor, depth + 1))
        return seen


@dataclass
class WorldState:
    time: int
    seed: int
    entities: dict[str, Entity]
    static: StaticMap
    commands: dict[str, Action] = field(default_factory=dict)  # submitted for the step ending here
    log: list[dict] = field(default_factory=list)  # execution records for that step

    def agents(self) -> list[PlatoonAgent]:
        return [e for e in self.entities.values() if isinstance(e, PlatoonAgent)]

    def humans(self) -> list[Civilian | PlatoonAgent]:
        return [e for e in self.entities.values() if isinstance(e, (Civilian, PlatoonAgent))]


def load_scenario(scenario: Scenario, seed: int) -> WorldState:
    adjacency: dict[str, list[tuple[str, str, float]]] = {n: [] for n in scenario.nodes}
    endpoints = {}
    for road in scenario.roads:
        a, b = road["between"]
        adjacency[a].append((b, road["id"], road["length"]))
        adjacency[b].append((a, road["id"], road["length"]))
        endpoints[road["id"]] = (a, b)
    static = StaticMap(
        nodes=tuple(scenario.nodes),
        coords=dict(scenario.nodes),
        adjacency={n: tuple(sorted(edges)) for n, edges in adjacency.items()},
        road_endpoints=endpoints,
        dynamics=scenario.dynamics,
        step_budget=scenario.step_budget,
        name=scenario.name,
    )

    entities: dict[str, Entity] = {}
    for b in scenario.buildings:
        state = scenario.building_states.get(b["id"], {})
        entities[b["id"]] = Building(
            b["id"],
            b["node"],
            fieryness=state.get("fieryness", "none"),
            scouted=state.get("scouted", "no"),
        )
    for r in scenario.roads:
        state = scenario.road_states.get(r["id"], {})
        a, b = r["between"]
        entities[r["id"]] = Road(
            r["id"],
            a,
            b,
            r["length"],
            blocked=state.get("blocked", "no"),
            requested=state.get("requested", "no"),
            has_civilians=state.get("has_civilians", "no"),
        )
    for c in scenario.civilians:
        entities[c["id"]] = Civilian(
            c["id"], c["node"], hp=c.get("hp", 100), burial_depth=c.get("burial_depth", 0)
        )
    for a in scenario.agents:
        entities[a["id"]] = PlatoonAgent(
            a["id"],
            a["node"],
            a["kind"],
            hp=a.get("hp", 100),
            burial_depth=a.get("burial_depth", 0),
        )
    return WorldState(time=0, seed=seed, entities=entities, static=static)


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

CAPABILITIES = {
    "douse": ("fire_brigade",),
    "unbury": ("ambulance",),
    "clear": ("police",),
    "scout": ("fire_brigade", "ambulance", "police"),
}


def step_world(state: WorldState, actions: dict[str, Action]) -> WorldState:
    world = WorldState(
        time=state.time,
        seed=state.seed,
        entities=copy.deepcopy(state.entities),
        static=state.static,
        commands=dict(actions),
    )
    log = world.log
    t = state.time  # draws for the step leaving time t

    for agent in world.agents():
        agent.current_action = "idle"

    moves, terminals = [], []
    for agent_id in sorted(actions):
        action = actions[agent_id]
        problem = _screen(world, agent_id, action)
        if problem:
            log.append(_record(action, "rejected", problem))
            continue
        if action.kind == "idle":
            log.append(_record(action, "executed"))
            continue
        (moves if action.kind == "move" else terminals).append(action)

    for action in moves:
        agent = world.entities[action.agent]
        problem = _check_route(world, agent, action.path)
        if problem:
            log.append(_record(action, "rejected", problem))
            continue
        agent.node = action.path[-1]
        agent.current_action = "move"
        log.append(_record(action, "executed"))

    doused: set[str] = set()
    for action in terminals:
        agent = world.entities[action.agent]
        problem = _apply_terminal(world, agent, action, doused)
        if problem:
            log.append(_record(action, "rejected", problem))
        else:
            agent.current_action = action.kind
            log.append(_record(action, "executed"))

    _fire_phase(world, t, doused)
    _decay_phase(world)
    world.time = t + 1
    return world


def _record(action: Action, status: str, reason: str | None = None) -> dict:
    entry = {
        "agent": action.agent,
        "action": action.kind,
        "target": action.target,
        "path": list(action.path),
        "status": status,
    }
    if reason:
        entry["reason"] = reason
    return entry


def _screen(world: WorldState, agent_id: str, action: Action) -> str | None:
    agent = world.entities.get(agent_id)
    if not isinstance(agent, PlatoonAgent):
        return "unknown_agent"
    if action.agent != agent_id:
        return "agent_mismatch"
    if agent.hp <= 0:
        return "dead_agent"
    if agent.burial_depth > 0:
        return "buried_agent"
    if action.kind == "idle":
        return None
    if action.kind == "move":
        speed = world.static.dynamics.agent_speed
        if len(action.path) < 2 or len(action.path) - 1 > speed:
            return "bad_path_length"
        if action.path[0] != agent.node:
            return "path_start_mismatch"
        return None
    if action.kind not in CAPABILITIES:
        return "unknown_action"
    if agent.kind not in CAPABILITIES[action.kind]:
        return "wrong_kind"
    if action.target not in world.entities:
        return "unknown_target"
    return None


def _check_route(world: WorldState, agent: PlatoonAgent, path: tuple[str, ...]) -> str | None:
    here = path[0]
    for nxt in path[1:]:
        edge = _open_edge(world, here, nxt)
        if edge is None:
            blocked = _any_edge(world, here, nxt)
            return f"blocked_road:{blocked}" if blocked else "no_such_road"
        here = nxt
    return None


def _open_edge(world: WorldState, a: str, b: str) -> str | None:
    for neighbor, road_id, _ in world.static.neighbors(a):
        if neighbor == b and world.entities[road_id].blocked == "no":
            return road_id
    return None


def _any_edge(world: WorldState, a: str, b: str) -> str | None:
    for neighbor, road_id, _ in world.static.neighbors(a):
        if neighbor == b:
            return road_id
    return None


def _adjacent(world: WorldState, node: str, other: str) -> bool:
    if node == other:
        return True
    return any(neighbor == other for neighbor, _, _ in world.static.neighbors(node))


def _apply_terminal(
    world: WorldState, agent: PlatoonAgent, action: Action, doused: set[str]
) -> str | None:
    target = world.entities[action.target]
    if action.kind == "douse":
        if not isinstance(target, Building):
            return "bad_target"
        if not _adjacent(world, agent.node, target.node):
            return "not_adjacent"
        if target.fieryness == "destroyed":
            return "target_destroyed"
        if target.fieryness != "none" and target.id not in doused:
            level = FIERYNESS_LADDER.index(target.fieryness)
            target.fieryness = FIERYNESS_LADDER[level - 1]
            target.steps_at_level = 0
            doused.add(target.id)
        return None
    if action.kind == "scout":
        if not isinstance(target, Building):
            return "bad_target"
        if not _adjacent(world, agent.node, target.node):
            return "not_adjacent"
        target.scouted = "yes"
        return None
    if action.kind == "unbury":
        if not isinstance(target, (Civilian, PlatoonAgent)):
            return "bad_target"
        if target.hp <= 0:
            return "target_dead"
        if agent.node != target.node:
            return "not_adjacent"
        if target.burial_depth > 0:
            target.burial_depth -= 1
        return None
    if action.kind == "clear":
        if not isinstance(target, Road):
            return "bad_target"
        if agent.node not in (target.a, target.b):
            return "not_adjacent"
        target.blocked = "no"
        target.requested = "no"
        return None
    return "unknown_action"


def _fire_phase(world: WorldState, t: int, doused: set[str]) -> None:
    dyn = world.static.dynamics
    buildings = [e for e in world.entities.values() if isinstance(e, Building)]
    for b in buildings:
        if b.id in doused or b.fieryness in ("none", "destroyed"):
            continue
        b.steps_at_level += 1
        if b.steps_at_level >= dyn.fire_escalation_interval:
            b.fieryness = FIERYNESS_LADDER[FIERYNESS_LADDER.index(b.fieryness) + 1]
            b.steps_at_level = 0
    sources = [b for b in buildings if b.fieryness in ("burning", "inferno")]
    if not sources or dyn.spread_probability <= 0:
        return
    ignited: set[str] = set()
    for src in sources:
        nearby = world.static.nodes_within(src.node, dyn.spread_radius)
        for b in buildings:
            if b.fieryness != "none" or b.id in ignited or b.id in doused:
                continue
            if b.node in nearby and spread_draw(world.seed, t, src.id, b.id) < dyn.spread_probability:
                ignited.add(b.id)
    for bid in ignited:
        building = world.entities[bid]
        building.fieryness = "heating"
        building.steps_at_level = 0


def spread_draw(seed: int, t: int, src: str, dst: str) -> float:
    digest = hashlib.sha256(f"{seed}:{t}:{src}:{dst}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def _decay_phase(world: WorldState) -> None:
    decay = world.static.dynamics.burial_decay
    for human in world.humans():
        if human.burial_depth > 0 and human.hp > 0:
            human.hp = max(0, human.hp - decay)


# ---------------------------------------------------------------------------
# observation & history
# ---------------------------------------------------------------------------


def observe(state: WorldState, agent_id: str) -> dict[str, Entity]:
    """Everything within sensor range of the agent: entities at nodes within
    H hops, roads with either endpoint in range."""
    agent = state.entities.get(agent_id)
    if not isinstance(agent, PlatoonAgent):
        raise KeyError(f"unknown agent {agent_id!r}")
    visible = state.static.nodes_within(agent.node, state.static.dynamics.sensor_range)
    seen: dict[str, Entity] = {}
    for entity in state.entities.values():
        if isinstance(entity, Road):
            if entity.a in visible or entity.b in visible:
                seen[entity.id] = copy.deepcopy(entity)
        elif entity.node in visible:
            seen[entity.id] = copy.deepcopy(entity)
    return seen


class History:
    """Every snapshot of a run, indexed by time; snapshot t is the state the
    step to t+1 started from."""

    def __init__(self, initial: WorldState):
        self.states = [initial]

    @property
    def current(self) -> WorldState:
        return self.states[-1]

    def append(self, state: WorldState) -> None:
        if state.time != len(self.states):
            raise ValueError(f"history expects time {len(self.states)}, got {state.time}")
        self.states.append(state)

    def rewind(self, t: int) -> WorldState:
        if not 0 <= t < len(self.states):
            raise IndexError(f"time {t} outside recorded range 0..{len(self.states) - 1}")
        return self.states[t]

    def truncate(self, t: int) -> list[WorldState]:
        """Drop snapshots after t, returning the archived tail."""
        tail = self.states[t + 1 :]
        self.states = self.states[: t + 1]
        return tail


def state_hash(state: WorldState) -> str:
    payload = {
        "time": state.time,
        "seed": state.seed,
        "entities": {eid: _entity_doc(e) for eid, e in sorted(state.entities.items())},
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _entity_doc(entity: Entity) -> dict:
    doc = asdict(entity)
    doc["variant"] = type(entity).__name__
    return doc


def entity_counts(state: WorldState) -> dict[str, int]:
    counts = {"civilians": 0, "agents": 0, "buildings": 0, "roads": 0}
    for entity in state.entities.values():
        if isinstance(entity, Civilian):
            counts["civilians"] += 1
        elif isinstance(entity, PlatoonAgent):
            counts["agents"] += 1
        elif isinstance(entity, Building):
            counts["buildings"] += 1
        else:
            counts["roads"] += 1
    return counts
