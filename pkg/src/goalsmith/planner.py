"""Route planning over the believed road graph, plan assembly, and PDDL
problem emission.

Plans are optimistic where belief is silent: a road no one has seen blocked is
treated as open. As a last resort a plan may end by crossing a road believed
blocked — that crossing will be rejected by the world, which is exactly the
event that flags the road for clearing and triggers replanning.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path

from .belief import BeliefState
from .domain import ACTION_FOR_GOAL
from .sim import Action, Building, Civilian, PlatoonAgent, Road

FIERYNESS_STEPS = {"none": 0, "heating": 1, "burning": 2, "inferno": 3, "destroyed": 4}


class RoadGraph:
    """Undirected weighted graph projected from belief roads."""

    def __init__(self) -> None:
        self.edges: dict[str, list[tuple[str, str, float, bool]]] = {}

    @classmethod
    def from_belief(cls, belief: BeliefState) -> "RoadGraph":
        graph = cls()
        for entity in belief.entities.values():
            if isinstance(entity, Road):
                blocked = entity.blocked == "yes"
                graph._add(entity.a, entity.b, entity.id, entity.length, blocked)
                graph._add(entity.b, entity.a, entity.id, entity.length, blocked)
        for bucket in graph.edges.values():
            bucket.sort()
        return graph

    def _add(self, a: str, b: str, road_id: str, length: float, blocked: bool) -> None:
        self.edges.setdefault(a, []).append((b, road_id, length, blocked))

    def neighbors(self, node: str) -> list[tuple[str, str, float, bool]]:
        return self.edges.get(node, [])

    def __contains__(self, node: str) -> bool:
        return node in self.edges


def plan_route(
    graph: RoadGraph, start: str, goal: str, traverse_blocked: bool = False
) -> tuple[float, tuple[str, ...]] | None:
    """Cheapest path by total length; ties broken by lexicographic node
    sequence so equal-cost routes always come out the same.

    Dijkstra keyed on (cost, path): edge lengths are strictly positive, so
    the first pop of a node carries its cheapest, lexicographically smallest
    path and the node can be settled outright.
    """
    if start == goal:
        return 0.0, (start,)
    frontier: list[tuple[float, tuple[str, ...]]] = [(0.0, (start,))]
    settled: set[str] = set()
    while frontier:
        cost, path = heapq.heappop(frontier)
        node = path[-1]
        if node == goal:
            return cost, path
        if node in settled:
            continue
        settled.add(node)
        for neighbor, _, length, blocked in graph.neighbors(node):
            if blocked and not traverse_blocked:
                continue
            if neighbor not in settled:
                heapq.heappush(frontier, (cost + length, path + (neighbor,)))
    return None


@dataclass(frozen=True)
class Plan:
    goal_id: str
    agent: str
    actions: tuple[Action, ...]
    cost: float

    def describe(self) -> str:
        return " | ".join(a.describe() for a in self.actions) or "(empty)"


def _chunk_moves(agent: str, path: tuple[str, ...], speed: int) -> list[Action]:
    moves = []
    for i in range(0, len(path) - 1, speed):
        leg = path[i : i + speed + 1]
        moves.append(Action("move", agent, path=tuple(leg)))
    return moves


def _terminal_count(goal_type: str, target) -> int:
    if goal_type == "douse":
        return max(1, FIERYNESS_STEPS.get(target.fieryness, 1))
    if goal_type == "unbury":
        return max(1, target.burial_depth)
    return 1


def _route_to_road(
    graph: RoadGraph, start: str, road: Road
) -> tuple[float, tuple[str, ...]] | None:
    """Route to the nearer endpoint of a road; when neither endpoint is
    reachable over open roads, allow the final hop to cross a blockage."""
    options = []
    for endpoint in sorted((road.a, road.b)):
        found = plan_route(graph, start, endpoint)
        if found:
            options.append(found)
    if options:
        return min(options)
    # optimistic fallback: open route to any node adjacent to an endpoint,
    # then one (possibly blocked) closing edge
    closing = []
    for endpoint in sorted((road.a, road.b)):
        for neighbor, _, length, _ in graph.neighbors(endpoint):
            found = plan_route(graph, start, neighbor)
            if found:
                cost, path = found
                closing.append((cost + length, path + (endpoint,)))
    return min(closing) if closing else None


def build_plan(goal, agent_id: str, belief: BeliefState, speed: int = 1) -> Plan | None:
    """Assemble moves plus the repeated terminal action for one goal, or
    None when the belief offers no way there."""
    target = belief.entities.get(goal.target)
    agent = belief.entities.get(agent_id)
    if target is None or not isinstance(agent, PlatoonAgent):
        return None
    graph = RoadGraph.from_belief(belief)

    if isinstance(target, Road):
        found = _route_to_road(graph, agent.node, target)
    elif isinstance(target, (Building, Civilian, PlatoonAgent)):
        found = plan_route(graph, agent.node, target.node)
    else:
        return None
    if found is None:
        return None
    cost, path = found

    actions = _chunk_moves(agent_id, path, speed)
    kind = ACTION_FOR_GOAL[goal.goal_type]
    actions.extend(
        Action(kind, agent_id, goal.target)
        for _ in range(_terminal_count(goal.goal_type, target))
    )
    return Plan(goal.id, agent_id, tuple(actions), cost)


def expansions(goal, agent_id: str, belief: BeliefState, speed: int = 1) -> list[Plan]:
    """All plans the planner offers, cheapest first."""
    plan = build_plan(goal, agent_id, belief, speed)
    return [plan] if plan else []


# ---------------------------------------------------------------------------
# PDDL emission
# ---------------------------------------------------------------------------

PDDL_DOMAIN_FOR_GOAL = {
    "douse": "douse",
    "unbury": "unbury",
    "unblock": "clear",
    "scout": "scout",
}

_GOAL_PREDICATE = {
    "douse": "extinguished",
    "unbury": "unburied",
    "unblock": "cleared",
    "scout": "scouted",
}

_TARGET_TYPE = {"douse": "building", "unbury": "human", "unblock": "road", "scout": "building"}

PDDL_DIR = Path(__file__).parent / "pddl"


def pddl_domain_text(goal_type: str) -> str:
    """The packaged domain file that emitted problems of this goal type pair with."""
    return (PDDL_DIR / f"{PDDL_DOMAIN_FOR_GOAL[goal_type]}.pddl").read_text()


def crossed_blocked_roads(plan: Plan, belief: BeliefState) -> tuple[str, ...]:
    """Roads the plan's moves cross despite being believed blocked — the
    optimistic assumptions a last-resort route makes."""
    by_pair: dict[frozenset[str], Road] = {}
    for entity in belief.entities.values():
        if isinstance(entity, Road):
            by_pair[frozenset((entity.a, entity.b))] = entity
    crossed = []
    for action in plan.actions:
        if action.kind != "move":
            continue
        for here, there in zip(action.path, action.path[1:]):
            road = by_pair.get(frozenset((here, there)))
            if road is not None and road.blocked == "yes" and road.id not in crossed:
                crossed.append(road.id)
    return tuple(crossed)


def emit_pddl_problem(
    goal, agent_id: str, belief: BeliefState, assume_open: tuple[str, ...] = ()
) -> str:
    """A typed STRIPS problem pairing with the shipped domain file for this
    goal type: map connectivity from open believed roads, one agent, one
    target. `assume_open` lists blocked roads the plan chose to treat as
    passable, so the problem encodes the same relaxation the plan relies on."""
    agent = belief.entities[agent_id]
    target = belief.entities[goal.target]
    domain = PDDL_DOMAIN_FOR_GOAL[goal.goal_type]

    nodes: set[str] = {agent.node}
    connected: list[tuple[str, str]] = []
    for entity in sorted(belief.entities.values(), key=lambda e: e.id):
        if isinstance(entity, Road):
            nodes.update((entity.a, entity.b))
            if entity.blocked == "no" or entity.id in assume_open:
                connected.append((entity.a, entity.b))
                connected.append((entity.b, entity.a))

    init: list[str] = [f"(at {agent_id} {agent.node})"]
    init.extend(f"(connected {a} {b})" for a, b in sorted(connected))

    if isinstance(target, Road):
        init.append(f"(endpoint {goal.target} {target.a})")
        init.append(f"(endpoint {goal.target} {target.b})")
    else:
        nodes.add(target.node)
        init.append(f"(located {goal.target} {target.node})")

    target_type = _TARGET_TYPE[goal.goal_type]
    objects = [f"{n} - node" for n in sorted(nodes)]
    objects.append(f"{agent_id} - agent")
    objects.append(f"{goal.target} - {target_type}")

    goal_fact = f"({_GOAL_PREDICATE[goal.goal_type]} {goal.target})"
    lines = [
        f"(define (problem {goal.id})",
        f"  (:domain {domain})",
        "  (:objects",
        *(f"    {obj}" for obj in objects),
        "  )",
        "  (:init",
        *(f"    {fact}" for fact in init),
        "  )",
        f"  (:goal {goal_fact})",
        ")",
    ]
    return "\n".join(lines) + "\n"
