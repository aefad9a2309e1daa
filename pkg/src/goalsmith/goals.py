"""Goal lifecycle: rule-driven formulation, precedence-ordered selection with
preemption, planner-backed expansion, and per-step dispatch with evaluation
loop-backs.

Each goal takes at most one lifecycle edge per reasoning tick (plus any
housekeeping drop); dispatched goals instead stream one plan action per tick
until they finish, fail, or are interrupted.

Blocked roads are handled in two layers: a plan that would cross a road we
believe blocked is never committed — the road is flagged for clearing and the
goal deferred — and when no plan exists at all, a hypothetical route that
ignores blockage is probed so every obstruction on it gets flagged.  Flagged
(requested) roads are what make the road rules formulate clearing goals, so
nested blockages unwind from the nearest reachable one outward.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .belief import BeliefState
from .domain import (
    CAPABILITY_MAP,
    ORDER_NAME,
    build_view,
    goal_satisfied,
    target_lost,
)
from .frames import FrameSet
from .planner import Plan, RoadGraph, crossed_blocked_roads, expansions, plan_route
from .rdr import RdrTree, evaluate_order
from .sim import Action, PlatoonAgent, Road

FORMULATED = "FORMULATED"
SELECTED = "SELECTED"
EXPANDED = "EXPANDED"
COMMITTED = "COMMITTED"
DISPATCHED = "DISPATCHED"
FINISHED = "FINISHED"
DROPPED = "DROPPED"
DEFERRED = "DEFERRED"

TERMINAL_MODES = (FINISHED, DROPPED)

ALLOWED_TRANSITIONS: dict[str, frozenset[str]] = {
    FORMULATED: frozenset({SELECTED, DROPPED}),
    SELECTED: frozenset({EXPANDED, DEFERRED, FORMULATED, DROPPED}),
    EXPANDED: frozenset({COMMITTED, DEFERRED, FORMULATED, DROPPED}),
    COMMITTED: frozenset({DISPATCHED, FORMULATED, DROPPED}),
    DISPATCHED: frozenset({FINISHED, EXPANDED, FORMULATED, DROPPED}),
    DEFERRED: frozenset({FORMULATED, DROPPED}),
    FINISHED: frozenset(),
    DROPPED: frozenset(),
}


class LifecycleError(RuntimeError):
    """An attempted goal-mode edge outside the allowed transition graph."""


@dataclass
class Goal:
    id: str
    goal_type: str
    target: str
    mode: str = FORMULATED
    assigned_agent: str | None = None
    plan: Plan | None = None
    plans: tuple[Plan, ...] = ()
    cursor: int = 0
    created_at: int = 0

    def is_active(self) -> bool:
        return self.mode not in TERMINAL_MODES

    def release(self) -> None:
        self.assigned_agent = None
        self.plan = None
        self.plans = ()
        self.cursor = 0


@dataclass(frozen=True)
class Transition:
    step: int
    goal_id: str
    frm: str
    to: str
    reason: str


@dataclass
class GoalLedger:
    goals: dict[str, Goal] = field(default_factory=dict)
    transitions: list[Transition] = field(default_factory=list)
    counter: int = 0

    def new_goal(self, goal_type: str, target: str, step: int) -> Goal:
        self.counter += 1
        goal = Goal(f"g{self.counter}", goal_type, target, created_at=step)
        self.goals[goal.id] = goal
        return goal

    def active(self) -> list[Goal]:
        return [g for g in self.goals.values() if g.is_active()]

    def move(self, goal: Goal, to: str, reason: str, step: int) -> None:
        if to not in ALLOWED_TRANSITIONS[goal.mode]:
            raise LifecycleError(f"{goal.id}: {goal.mode} -> {to} is not a lifecycle edge")
        self.transitions.append(Transition(step, goal.id, goal.mode, to, reason))
        goal.mode = to


# ---------------------------------------------------------------------------
# formulation
# ---------------------------------------------------------------------------


def formulate_goals(belief: BeliefState, kb: FrameSet, active: list[Goal]) -> list[tuple[str, str]]:
    """Ask the rules for every believed entity's goal; returns (type, target)
    pairs not already covered by an active goal."""
    covered = {(g.goal_type, g.target) for g in active}
    found: list[tuple[str, str]] = []
    for eid in sorted(belief.entities):
        conclusion = kb.resolve_slot(eid, "goal")
        if conclusion == "none":
            continue
        key = (conclusion, eid)
        if key not in covered:
            covered.add(key)
            found.append(key)
    return found


# ---------------------------------------------------------------------------
# ordering
# ---------------------------------------------------------------------------


def _order_matrix(order_tree: RdrTree, types: set[str]) -> dict[tuple[str, str], bool]:
    matrix = {}
    for a in types:
        for b in types:
            if a != b:
                matrix[(a, b)] = evaluate_order(order_tree, ORDER_NAME[a], ORDER_NAME[b])
    return matrix


def order_goals(goals: list[Goal], order_tree: RdrTree) -> list[Goal]:
    """Stable partial-order sort: a goal follows everything that must come
    before its type; otherwise input order is preserved."""
    types = {g.goal_type for g in goals}
    matrix = _order_matrix(order_tree, types)

    queues: dict[str, deque[tuple[int, Goal]]] = {t: deque() for t in types}
    for i, goal in enumerate(goals):
        queues[goal.goal_type].append((i, goal))
    remaining = {t: len(q) for t, q in queues.items()}

    out: list[Goal] = []
    while len(out) < len(goals):
        free = [
            t
            for t, q in queues.items()
            if q and not any(matrix[(o, t)] for o in types if o != t and remaining[o])
        ]
        if not free:
            raise LifecycleError("ordering rules form a cycle over " + ", ".join(sorted(types)))
        _, goal = min((queues[t][0] for t in free), key=lambda pair: pair[0])
        queues[goal.goal_type].popleft()
        remaining[goal.goal_type] -= 1
        out.append(goal)
    return out


def precedence_depth(goal_type: str, order_tree: RdrTree) -> int:
    """How many goal types outrank this one — higher means lower priority."""
    return sum(
        1
        for other in ORDER_NAME
        if other != goal_type
        and evaluate_order(order_tree, ORDER_NAME[other], ORDER_NAME[goal_type])
    )


# ---------------------------------------------------------------------------
# selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RosterEntry:
    agent_id: str
    kind: str
    current: Goal | None  # the active goal this agent is serving, if any


@dataclass(frozen=True)
class Assignment:
    goal: Goal
    agent_id: str
    preempted: Goal | None = None


def select_and_assign(
    ordered: list[Goal], roster: list[RosterEntry], cap: dict, order_tree: RdrTree
) -> list[Assignment]:
    """Greedy assignment down the ordered list; a goal that finds no free
    capable agent may bump an agent whose goal is strictly lower-ordered."""
    current: dict[str, Goal | None] = {e.agent_id: e.current for e in roster}
    kinds = {e.agent_id: e.kind for e in roster}
    matrix = _order_matrix(order_tree, set(ORDER_NAME))
    assignments: list[Assignment] = []

    def depth(goal_type: str) -> int:
        return sum(matrix.get((o, goal_type), False) for o in ORDER_NAME if o != goal_type)

    for goal in ordered:
        capable = sorted(a for a in current if kinds[a] in cap[goal.goal_type])
        free = [a for a in capable if current[a] is None]
        if free:
            chosen = free[0]
        else:
            victims = [
                a
                for a in capable
                if current[a] is not None
                and matrix.get((goal.goal_type, current[a].goal_type), False)
            ]
            if not victims:
                continue  # stays FORMULATED
            # bump whichever agent serves the lowest-ordered goal; break ties
            # toward the smaller agent id
            chosen = min(victims, key=lambda a: (-depth(current[a].goal_type), a))
        assignments.append(Assignment(goal, chosen, preempted=current[chosen]))
        current[chosen] = goal
    return assignments


# ---------------------------------------------------------------------------
# advancement
# ---------------------------------------------------------------------------


@dataclass
class StepOutcome:
    action: Action | None = None
    requests: tuple[str, ...] = ()  # road ids to flag for clearing


def advance_goal(
    goal: Goal, belief: BeliefState, ledger: GoalLedger, step: int, speed: int = 1
) -> StepOutcome:
    """One lifecycle edge (or one streamed action) for an assigned goal."""
    agent = belief.entities.get(goal.assigned_agent)
    if not isinstance(agent, PlatoonAgent) or agent.hp <= 0 or agent.burial_depth > 0:
        goal.release()
        ledger.move(goal, FORMULATED, "agent_incapacitated", step)
        return StepOutcome()

    if goal.mode == SELECTED:
        goal.plans = tuple(expansions(goal, goal.assigned_agent, belief, speed))
        if goal.plans:
            ledger.move(goal, EXPANDED, "plans_generated", step)
            return StepOutcome()
        requests = _hypothetical_obstructions(goal, agent, belief)
        goal.release()
        ledger.move(goal, DEFERRED, "no_plan", step)
        return StepOutcome(requests=requests)

    if goal.mode == EXPANDED:
        if not goal.plans:
            goal.plans = tuple(expansions(goal, goal.assigned_agent, belief, speed))
        if not goal.plans:
            requests = _hypothetical_obstructions(goal, agent, belief)
            goal.release()
            ledger.move(goal, DEFERRED, "no_plan", step)
            return StepOutcome(requests=requests)
        plan = goal.plans[0]
        crossed = crossed_blocked_roads(plan, belief)
        if crossed:
            # never commit a plan through a blockage: flag it and stand by
            goal.release()
            ledger.move(goal, DEFERRED, "route_blocked", step)
            return StepOutcome(requests=crossed)
        goal.plan = plan
        goal.cursor = 0
        ledger.move(goal, COMMITTED, "cheapest_expansion", step)
        return StepOutcome()

    if goal.mode == COMMITTED:
        ledger.move(goal, DISPATCHED, "dispatched", step)
        return _dispatch_step(goal, belief, ledger, step)

    if goal.mode == DISPATCHED:
        return _evaluate_then_step(goal, belief, ledger, step)

    raise LifecycleError(f"advance_goal on {goal.mode} goal {goal.id}")


def _evaluate_then_step(
    goal: Goal, belief: BeliefState, ledger: GoalLedger, step: int
) -> StepOutcome:
    target = belief.entities.get(goal.target)

    if target is None or target_lost(goal.goal_type, target):
        goal.release()
        ledger.move(goal, DROPPED, "target_lost", step)
        return StepOutcome()
    if goal_satisfied(goal.goal_type, target):
        goal.release()
        ledger.move(goal, FINISHED, "goal_condition_met", step)
        return StepOutcome()
    if goal.cursor >= len(goal.plan.actions):
        goal.plans = ()
        goal.plan = None
        goal.cursor = 0
        ledger.move(goal, EXPANDED, "plan_exhausted", step)
        return StepOutcome()
    return _dispatch_step(goal, belief, ledger, step)


def _dispatch_step(
    goal: Goal, belief: BeliefState, ledger: GoalLedger, step: int
) -> StepOutcome:
    action = goal.plan.actions[goal.cursor]
    agent = belief.entities[goal.assigned_agent]

    if action.kind == "move":
        if action.path[0] != agent.node:
            goal.plans = ()
            goal.plan = None
            goal.cursor = 0
            ledger.move(goal, EXPANDED, "position_drift", step)
            return StepOutcome()
        blocking = _blocked_on(action.path, belief)
        if blocking:
            # the route was clear when committed; a fresh observation says
            # otherwise, so flag the obstruction and replan
            goal.plans = ()
            goal.plan = None
            goal.cursor = 0
            ledger.move(goal, EXPANDED, "route_blocked", step)
            return StepOutcome(requests=tuple(blocking))

    goal.cursor += 1
    return StepOutcome(action=action)


def _blocked_on(path: tuple[str, ...], belief: BeliefState) -> list[str]:
    by_pair: dict[frozenset[str], Road] = {}
    for entity in belief.entities.values():
        if isinstance(entity, Road):
            by_pair[frozenset((entity.a, entity.b))] = entity
    blocking = []
    for here, there in zip(path, path[1:]):
        road = by_pair.get(frozenset((here, there)))
        if road is not None and road.blocked == "yes" and road.id not in blocking:
            blocking.append(road.id)
    return blocking


def _hypothetical_obstructions(
    goal: Goal, agent: PlatoonAgent, belief: BeliefState
) -> tuple[str, ...]:
    """When no plan exists, ask what a blockage-ignoring route would cross so
    those roads get flagged for clearing."""
    target = belief.entities.get(goal.target)
    if target is None:
        return ()
    destinations = [target.a, target.b] if isinstance(target, Road) else [target.node]
    graph = RoadGraph.from_belief(belief)
    routes = [plan_route(graph, agent.node, d, traverse_blocked=True) for d in destinations]
    routes = [r for r in routes if r is not None]
    if not routes:
        return ()
    _, path = min(routes)
    return tuple(_blocked_on(tuple(path), belief))


# ---------------------------------------------------------------------------
# per-step engine
# ---------------------------------------------------------------------------


@dataclass
class TickResult:
    actions: dict[str, Action] = field(default_factory=dict)
    requests: set[str] = field(default_factory=set)
    formulated: list[Goal] = field(default_factory=list)


def reason_step(
    ledger: GoalLedger,
    belief: BeliefState,
    knowledge: FrameSet,
    step: int,
    speed: int = 1,
) -> TickResult:
    """One full reasoning pass: housekeeping, formulation, ordering,
    selection, then one advancement per previously assigned goal."""
    result = TickResult()
    order_tree = knowledge.trees()["order"]

    _housekeeping(ledger, belief, step)
    _reconsider_deferred(ledger, belief, step)

    view = build_view(knowledge, belief)
    for goal_type, target in formulate_goals(belief, view, ledger.active()):
        result.formulated.append(ledger.new_goal(goal_type, target, step))

    pending = [g for g in ledger.goals.values() if g.mode == FORMULATED]
    ordered = order_goals(pending, order_tree)

    roster = _build_roster(ledger, belief)
    selected_now: set[str] = set()
    for assignment in select_and_assign(ordered, roster, CAPABILITY_MAP, order_tree):
        if assignment.preempted is not None:
            assignment.preempted.release()
            ledger.move(assignment.preempted, FORMULATED, "preempted", step)
        assignment.goal.assigned_agent = assignment.agent_id
        ledger.move(assignment.goal, SELECTED, "selected", step)
        selected_now.add(assignment.goal.id)

    for goal in list(ledger.goals.values()):
        if goal.id in selected_now:
            continue
        if goal.mode in (SELECTED, EXPANDED, COMMITTED, DISPATCHED):
            outcome = advance_goal(goal, belief, ledger, step, speed)
            if outcome.action is not None:
                result.actions[goal.assigned_agent] = outcome.action
            result.requests.update(outcome.requests)
    return result


def _housekeeping(ledger: GoalLedger, belief: BeliefState, step: int) -> None:
    for goal in ledger.active():
        target = belief.entities.get(goal.target)
        if target is None:
            continue
        if target_lost(goal.goal_type, target):
            goal.release()
            ledger.move(goal, DROPPED, "target_lost", step)
        elif goal.mode != DISPATCHED and goal_satisfied(goal.goal_type, target):
            goal.release()
            ledger.move(goal, DROPPED, "already_satisfied", step)


def _reconsider_deferred(ledger: GoalLedger, belief: BeliefState, step: int) -> None:
    deferred = [g for g in ledger.goals.values() if g.mode == DEFERRED]
    if not deferred:
        return
    components = _open_components(belief)
    live_kinds: dict[str, list[str]] = {}
    for entity in belief.entities.values():
        if isinstance(entity, PlatoonAgent) and entity.hp > 0 and entity.burial_depth == 0:
            live_kinds.setdefault(entity.kind, []).append(entity.node)

    for goal in deferred:
        target = belief.entities.get(goal.target)
        if target is None:
            continue
        nodes = _approach_nodes(target)
        agent_nodes = [
            node
            for kind in CAPABILITY_MAP[goal.goal_type]
            for node in live_kinds.get(kind, [])
        ]
        if any(
            components.get(a) is not None and components.get(a) == components.get(n)
            for a in agent_nodes
            for n in nodes
        ):
            ledger.move(goal, FORMULATED, "conditions_changed", step)


def _approach_nodes(target) -> list[str]:
    """Nodes from which the goal's terminal action can actually run (a road
    is cleared from one of its endpoints)."""
    if isinstance(target, Road):
        return [target.a, target.b]
    return [target.node]


def _open_components(belief: BeliefState) -> dict[str, int]:
    graph = RoadGraph.from_belief(belief)
    label: dict[str, int] = {}
    series = 0
    for start in sorted(graph.edges):
        if start in label:
            continue
        series += 1
        stack = [start]
        label[start] = series
        while stack:
            node = stack.pop()
            for neighbor, _, _, blocked in graph.neighbors(node):
                if not blocked and neighbor not in label:
                    label[neighbor] = series
                    stack.append(neighbor)
    return label


def _build_roster(ledger: GoalLedger, belief: BeliefState) -> list[RosterEntry]:
    serving: dict[str, Goal] = {}
    for goal in ledger.active():
        if goal.assigned_agent:
            serving[goal.assigned_agent] = goal
    roster = []
    for eid in sorted(belief.entities):
        entity = belief.entities[eid]
        if isinstance(entity, PlatoonAgent) and entity.hp > 0 and entity.burial_depth == 0:
            roster.append(RosterEntry(eid, entity.kind, serving.get(eid)))
    return roster
