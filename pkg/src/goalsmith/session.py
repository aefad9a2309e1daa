"""Trainer session host: one simulated run with pause/step/rewind controls,
the two-phase rule-update workflow, ruleset persistence, and an event log.

A session owns the world history, the shared belief, the goal ledger, and the
knowledge base, and advances them in lock-step: reason over the belief, flag
any roads the reasoner wants cleared, simulate one step, sense, checkpoint.
Checkpoints make every past step addressable — `query_state(t)` serves a
read-only view and `rewind(t)` forks the timeline there, archiving the
abandoned tail.  Re-running the same steps after a rewind reproduces the
original states exactly unless the rules were changed in between, which is
the point of changing them.

Belief checkpoints are shallow (entity objects are shared): the belief store
only ever replaces entities, never edits them, and the one in-place edit this
module makes (flagging a road as requested) copies the entity first.
"""

from __future__ import annotations

import copy
import math
import os
import threading
import time as _clock
from dataclasses import dataclass, field, replace as _dc_replace
from pathlib import Path

from .belief import BeliefState, initial_belief, sense_all
from .domain import (
    DATA_DIR,
    GOAL_TYPES,
    ORDER_VOCABULARY,
    build_view,
    load_ruleset,
    packaged_ruleset,
    ruleset_text,
    starter_kb,
)
from .dsl import tree_text
from .frames import FrameError, FrameSet
from .goals import DROPPED, EXPANDED, FINISHED, Goal, GoalLedger, Transition, reason_step
from .planner import crossed_blocked_roads, emit_pddl_problem, pddl_domain_text
from .rdr import (
    Case,
    Condition,
    Literal,
    RdrError,
    RdrNode,
    RdrTree,
    apply_update,
    candidate_differences,
    check_ordering_tree,
    evaluate,
    next_case_id,
    verify_cornerstones,
)
from .scenario import Scenario, load_scenario_file, parse_scenario
from .sim import (
    Building,
    Civilian,
    History,
    PlatoonAgent,
    Road,
    load_scenario,
    state_hash,
    step_world,
)


class SessionError(ValueError):
    """Anything a caller did wrong; `http_status` hints how an API maps it."""

    http_status = 400


class ControlError(SessionError):
    """A control command that is invalid for the session's current status."""

    http_status = 409


class NotFoundError(SessionError):
    """A reference (entity, tree, draft, time) that does not resolve."""

    http_status = 404


RUNNING = "running"
PAUSED = "paused"

# tree name -> (generic frame owning the slot, slot the tree computes)
TREE_SLOTS = {
    "human": ("human", "goal"),
    "building": ("building", "goal"),
    "road": ("road", "goal"),
    "order": ("order", "before"),
}

REQUIRED_TREES = frozenset(TREE_SLOTS)

_VARIANT_NAMES = {
    "Building": "building",
    "Road": "road",
    "Civilian": "civilian",
    "PlatoonAgent": "agent",
}


def _case_label(entity) -> str:
    """What a correction against this entity names its cornerstone after."""
    if isinstance(entity, PlatoonAgent):
        return {"fire_brigade": "brigade"}.get(entity.kind, entity.kind)
    if isinstance(entity, Civilian):
        return "civilian"
    return "building" if isinstance(entity, Building) else "road"


# ---------------------------------------------------------------------------
# update drafts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UpdateDraft:
    """Frozen raw material for one rule-tree update: the case as it stood at
    the chosen step, what the tree said, and the candidate differences the
    trainer picks conditions from. Commit or discard; never edited."""

    uid: str
    tree: str
    entity: str  # instance id, or "a,b" goal-type pair for the ordering tree
    time: int
    proposed: str
    current: str
    fired_node: str
    case: Case
    cornerstone: Case
    candidates: tuple[Literal, ...]
    owner: str
    slot: str
    case_label: str

    def doc(self) -> dict:
        return {
            "uid": self.uid,
            "tree": self.tree,
            "entity": self.entity,
            "time": self.time,
            "proposed": self.proposed,
            "current": self.current,
            "fired_node": self.fired_node,
            "case": {"id": self.case.id, "bindings": dict(self.case.bindings)},
            "cornerstone": {
                "id": self.cornerstone.id,
                "bindings": dict(self.cornerstone.bindings),
            },
            "candidates": [
                {"index": i, "slot": lit.slot, "value": lit.value, "text": str(lit)}
                for i, lit in enumerate(self.candidates)
            ],
        }


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Checkpoint:
    """Belief + ledger as they stood when the world reached one time index."""

    hash: str
    belief_entities: dict
    belief_observed: dict
    goals: dict[str, Goal]
    counter: int
    ntrans: int


def _percentile(sorted_ms: list[float], q: float) -> float:
    if not sorted_ms:
        return 0.0
    rank = max(1, math.ceil(q * len(sorted_ms)))
    return sorted_ms[rank - 1]


def latency_summary(samples: list[float]) -> dict:
    """Percentiles (milliseconds) over per-step reasoning times (seconds)."""
    ms = sorted(s * 1000.0 for s in samples)
    return {
        "steps": len(ms),
        "mean_ms": round(sum(ms) / len(ms), 3) if ms else 0.0,
        "p50_ms": round(_percentile(ms, 0.50), 3),
        "p90_ms": round(_percentile(ms, 0.90), 3),
        "p99_ms": round(_percentile(ms, 0.99), 3),
        "max_ms": round(ms[-1], 3) if ms else 0.0,
    }


# ---------------------------------------------------------------------------
# ruleset checks
# ---------------------------------------------------------------------------


def ruleset_problems(kb: FrameSet) -> list[str]:
    """Why this KB cannot drive a session: missing trees, cornerstones that
    no longer replay, ordering rules that contradict themselves."""
    problems = []
    trees = kb.trees()
    for name in sorted(REQUIRED_TREES - trees.keys()):
        problems.append(f"missing rule tree {name!r}")
    for domain in sorted(trees):
        for violation in verify_cornerstones(trees[domain]):
            problems.append(
                f"tree {domain!r}: cornerstone {violation.node_id} now concludes "
                f"{violation.actual!r}, expected {violation.expected!r}"
            )
    order = trees.get("order")
    if order is not None:
        try:
            for a, b in check_ordering_tree(order, ORDER_VOCABULARY):
                problems.append(f"ordering tree: {a} and {b} each precede the other")
        except RdrError as err:
            problems.append(f"ordering tree: {err}")
    return problems


def checked_ruleset(path: str | Path) -> FrameSet:
    """Parse and fully vet a ruleset file; any problem rejects it wholesale."""
    kb = load_ruleset(path)
    problems = ruleset_problems(kb)
    if problems:
        raise SessionError(f"ruleset {Path(path).name} rejected: " + "; ".join(problems))
    return kb


def resolve_scenario(ref: str | dict) -> Scenario:
    """A scenario document, a file path, or a packaged name like `test_city`."""
    if isinstance(ref, dict):
        return parse_scenario(ref)
    path = Path(ref)
    if path.exists():
        return load_scenario_file(path)
    packaged = DATA_DIR / f"{ref}.json"
    if packaged.exists():
        return load_scenario_file(packaged)
    available = sorted(p.stem for p in DATA_DIR.glob("*.json"))
    raise NotFoundError(f"no scenario {ref!r}: not a file, and packaged ones are {available}")


def resolve_ruleset(ref: str | None) -> FrameSet:
    """A ruleset file path or packaged name; None means the untrained KB."""
    if ref is None:
        return starter_kb()
    path = Path(ref)
    if path.exists():
        return checked_ruleset(path)
    try:
        return checked_ruleset(packaged_ruleset(ref))
    except FileNotFoundError as err:
        raise NotFoundError(str(err)) from None


# ---------------------------------------------------------------------------
# the session
# ---------------------------------------------------------------------------


class Session:
    """One run of one scenario under one knowledge base.

    All public methods are safe to call from any thread; a reentrant lock
    serializes them, so every response reflects a whole step. `start` spawns
    a background stepper; `step`/`rewind` demand the session be paused first.
    """

    def __init__(
        self,
        scenario: Scenario,
        kb: FrameSet,
        seed: int = 0,
        sid: str = "s1",
        step_delay: float = 0.0,
        pddl_dir: str | Path | None = None,
    ):
        self.id = sid
        self.scenario = scenario
        self.seed = seed
        self.kb = kb
        self.status = PAUSED
        self.step_delay = step_delay
        world = load_scenario(scenario, seed)
        self.history = History(world)
        self.belief = initial_belief(world)
        self.ledger = GoalLedger()
        self.pending_updates: dict[str, UpdateDraft] = {}
        self.audit_log: list[dict] = []
        self.events: list[dict] = []
        self.archives: list[dict] = []
        self.latencies: list[float] = []
        self._seq = 0
        self._uid = 0
        self._emitted = 0
        self._emitted_last: dict[tuple[str, str], str] = {}
        self._lock = threading.RLock()
        self._wake = threading.Condition(self._lock)
        self._runner: threading.Thread | None = None
        self._map_doc = {
            "nodes": {nid: {"x": x, "y": y} for nid, (x, y) in sorted(scenario.nodes.items())},
            "roads": [dict(r) for r in scenario.roads],
            "buildings": [dict(b) for b in scenario.buildings],
        }
        self.pddl_dir = Path(pddl_dir) if pddl_dir is not None else None
        if self.pddl_dir is not None:
            self.pddl_dir.mkdir(parents=True, exist_ok=True)
            for goal_type in sorted(GOAL_TYPES):
                name = f"domain_{goal_type}.pddl"
                (self.pddl_dir / name).write_text(pddl_domain_text(goal_type))
        self._checkpoints: list[_Checkpoint] = [self._checkpoint(state_hash(world))]

    # -- bookkeeping --------------------------------------------------------

    @property
    def time(self) -> int:
        return self.history.current.time

    def _checkpoint(self, state_digest: str) -> _Checkpoint:
        return _Checkpoint(
            hash=state_digest,
            belief_entities=dict(self.belief.entities),
            belief_observed=dict(self.belief.observed_at),
            goals={gid: copy.deepcopy(g) for gid, g in self.ledger.goals.items()},
            counter=self.ledger.counter,
            ntrans=len(self.ledger.transitions),
        )

    def _publish(self, kind: str, payload: dict) -> None:
        self._seq += 1
        self.events.append({"seq": self._seq, "event": kind, **payload})
        self._wake.notify_all()

    def state_hashes(self) -> list[str]:
        """One digest per recorded time index, 0..current."""
        with self._lock:
            return [cp.hash for cp in self._checkpoints]

    # -- stepping -----------------------------------------------------------

    def _advance_locked(self) -> None:
        state = self.history.current
        began = _clock.perf_counter()
        before = len(self.ledger.transitions)
        tick = reason_step(
            self.ledger,
            self.belief,
            self.kb,
            step=state.time,
            speed=self.scenario.dynamics.agent_speed,
        )
        self.latencies.append(_clock.perf_counter() - began)
        fresh = self.ledger.transitions[before:]
        if self.pddl_dir is not None:
            self._emit_problems(fresh)
        if tick.requests:
            # Flag the roads in the world so the next state carries the mark,
            # without editing the archived snapshot, and in the belief so the
            # road rules can react before anyone drives past the road again.
            state = _dc_replace(state, entities=copy.deepcopy(state.entities))
            for rid in sorted(tick.requests):
                state.entities[rid].requested = "yes"
                believed = self.belief.entities.get(rid)
                if isinstance(believed, Road):
                    marked = copy.deepcopy(believed)
                    marked.requested = "yes"
                    self.belief.entities[rid] = marked
        new_state = step_world(state, tick.actions)
        digest = state_hash(new_state)
        self.history.append(new_state)
        sense_all(self.belief, new_state)
        self._checkpoints.append(self._checkpoint(digest))
        for tr in fresh:
            goal = self.ledger.goals[tr.goal_id]
            self._publish(
                "goal_transition",
                {
                    "time": tr.step,
                    "goal": tr.goal_id,
                    "goal_type": goal.goal_type,
                    "target": goal.target,
                    "agent": goal.assigned_agent,
                    "from": tr.frm,
                    "to": tr.to,
                    "reason": tr.reason,
                },
            )
        self._publish(
            "step_completed",
            {
                "time": new_state.time,
                "hash": digest,
                "actions": {aid: act.describe() for aid, act in sorted(tick.actions.items())},
                "requests": sorted(tick.requests),
                "latency_ms": round(self.latencies[-1] * 1000.0, 3),
            },
        )

    def _emit_problems(self, fresh: list[Transition]) -> None:
        for tr in fresh:
            goal = self.ledger.goals[tr.goal_id]
            expanded = tr.to == EXPANDED and tr.reason == "plans_generated"
            recommitted = tr.frm == EXPANDED and tr.reason == "cheapest_expansion"
            if not (expanded or recommitted) or goal.assigned_agent is None:
                continue
            plan = goal.plan or (goal.plans[0] if goal.plans else None)
            if plan is None:
                continue
            crossed = crossed_blocked_roads(plan, self.belief)
            text = emit_pddl_problem(goal, goal.assigned_agent, self.belief, assume_open=crossed)
            key = (goal.id, goal.assigned_agent)
            if self._emitted_last.get(key) == text:
                continue  # committing a plan expanded last tick restates the same problem
            self._emitted_last[key] = text
            self._emitted += 1
            name = f"{self._emitted:04d}_t{tr.step:03d}_{goal.id}_{goal.assigned_agent}.pddl"
            (self.pddl_dir / name).write_text(text)

    def _run_loop(self) -> None:
        while True:
            with self._lock:
                if self.status != RUNNING:
                    break
                if self.time >= self.scenario.step_budget:
                    self.status = PAUSED
                    break
                self._advance_locked()
            if self.step_delay:
                _clock.sleep(self.step_delay)

    # -- control ------------------------------------------------------------

    def control_doc(self) -> dict:
        with self._lock:
            return {"session": self.id, "status": self.status, "time": self.time}

    def start(self) -> dict:
        with self._lock:
            if self.status != RUNNING:
                self.status = RUNNING
                self._runner = threading.Thread(
                    target=self._run_loop, name=f"{self.id}-stepper", daemon=True
                )
                self._runner.start()
            return {"session": self.id, "status": self.status, "time": self.time}

    resume = start

    def pause(self) -> dict:
        with self._lock:
            self.status = PAUSED
            runner, self._runner = self._runner, None
        if runner is not None and runner is not threading.current_thread():
            runner.join(timeout=30)
        return self.control_doc()

    def step(self, n: int = 1) -> dict:
        if n < 1:
            raise SessionError(f"step count must be positive, got {n}")
        with self._lock:
            if self.status != PAUSED:
                raise ControlError("step requires the session to be paused")
            for _ in range(n):
                self._advance_locked()
            return {"session": self.id, "status": self.status, "time": self.time}

    def rewind(self, t: int) -> dict:
        with self._lock:
            if self.status != PAUSED:
                raise ControlError("rewind requires the session to be paused")
            now = self.time
            if not 0 <= t <= now:
                raise ControlError(f"time {t} outside recorded range 0..{now}")
            if t < now:
                tail = self.history.truncate(t)
                old_transitions = self.ledger.transitions[self._checkpoints[t].ntrans :]
                self.archives.append(
                    {
                        "rewound_at": t,
                        "from_time": now,
                        "steps": [
                            {
                                "time": s.time,
                                "hash": self._checkpoints[s.time].hash,
                                "log": list(s.log),
                            }
                            for s in tail
                        ],
                        "transitions": [
                            {
                                "step": tr.step,
                                "goal": tr.goal_id,
                                "from": tr.frm,
                                "to": tr.to,
                                "reason": tr.reason,
                            }
                            for tr in old_transitions
                        ],
                    }
                )
                cp = self._checkpoints[t]
                self._checkpoints = self._checkpoints[: t + 1]
                self.latencies = self.latencies[:t]
                self.belief = BeliefState(dict(cp.belief_entities), dict(cp.belief_observed))
                self.ledger = GoalLedger(
                    goals={gid: copy.deepcopy(g) for gid, g in cp.goals.items()},
                    transitions=list(self.ledger.transitions[: cp.ntrans]),
                    counter=cp.counter,
                )
            expired = [uid for uid, d in self.pending_updates.items() if d.time > t]
            for uid in expired:
                del self.pending_updates[uid]
            return {
                "session": self.id,
                "status": self.status,
                "time": self.time,
                "expired_drafts": sorted(expired),
            }

    def control(self, command: str, arg: int | None = None) -> dict:
        if command in ("start", "resume"):
            return self.start()
        if command == "pause":
            return self.pause()
        if command == "step":
            return self.step(1 if arg is None else int(arg))
        if command == "rewind":
            if arg is None:
                raise SessionError("rewind needs a time argument")
            return self.rewind(int(arg))
        raise SessionError(f"unknown command {command!r}")

    # -- read-only views ----------------------------------------------------

    def query_state(self, t: int | None = None) -> dict:
        with self._lock:
            now = self.time
            at = now if t is None else t
            if not 0 <= at <= now:
                raise NotFoundError(f"time {at} outside recorded range 0..{now}")
            cp = self._checkpoints[at]
            entities = {
                eid: self._entity_doc(entity, cp.belief_observed.get(eid))
                for eid, entity in sorted(cp.belief_entities.items())
            }
            return {
                "session": self.id,
                "status": self.status,
                "time": now,
                "t": at,
                "seed": self.seed,
                "scenario": self.scenario.name,
                "step_budget": self.scenario.step_budget,
                "hash": cp.hash,
                "map": self._map_doc,
                "belief": {"entities": entities, "count": len(entities)},
                "goals": self._goal_docs(cp.goals),
                "trees": {name: tree_text(tree) for name, tree in sorted(self.kb.trees().items())},
                "pending_updates": sorted(self.pending_updates),
                "stats": latency_summary(self.latencies),
            }

    @staticmethod
    def _entity_doc(entity, observed_at) -> dict:
        doc = {"id": entity.id, "variant": _VARIANT_NAMES[type(entity).__name__]}
        for name, value in vars(entity).items():
            if name != "id":
                doc[name] = value
        doc["observed_at"] = observed_at
        return doc

    def _goal_docs(self, goals: dict[str, Goal]) -> list[dict]:
        docs = []
        for gid in sorted(goals, key=lambda g: int(g[1:])):
            goal = goals[gid]
            docs.append(
                {
                    "id": goal.id,
                    "type": goal.goal_type,
                    "target": goal.target,
                    "mode": goal.mode,
                    "agent": goal.assigned_agent,
                    "created_at": goal.created_at,
                    "plan": [a.describe() for a in goal.plan.actions] if goal.plan else [],
                    "cursor": goal.cursor,
                }
            )
        return docs

    def goal_ledger_doc(self) -> dict:
        with self._lock:
            return {
                "session": self.id,
                "time": self.time,
                "goals": self._goal_docs(self.ledger.goals),
                "transitions": [
                    {
                        "step": tr.step,
                        "goal": tr.goal_id,
                        "from": tr.frm,
                        "to": tr.to,
                        "reason": tr.reason,
                    }
                    for tr in self.ledger.transitions
                ],
            }

    def tree_doc(self, name: str) -> dict:
        with self._lock:
            trees = self.kb.trees()
            if name not in trees:
                raise NotFoundError(f"no rule tree {name!r}; have {sorted(trees)}")
            tree = trees[name]
            owner = self.kb.tree_owner(name)
            rng = self.kb.slot_range(*owner) if owner else None
            return {
                "tree": name,
                "size": tree.size(),
                "conclusions": sorted(tree.conclusions()),
                # every conclusion a proposal may use, not just those taught so far
                "range": list(rng) if rng else sorted(tree.conclusions()),
                "text": tree_text(tree),
                "root": self._node_doc(tree, tree.root),
            }

    def _node_doc(self, tree: RdrTree, node: RdrNode) -> dict:
        stone = tree.cornerstone_of(node)
        return {
            "case_id": node.cornerstone_id,
            "condition": str(node.condition),
            "literals": [
                {"slot": lit.slot, "value": lit.value} for lit in node.condition.literals
            ],
            "conclusion": node.conclusion,
            "cornerstone": dict(stone.bindings),
            "except": self._node_doc(tree, node.except_child) if node.except_child else None,
            "else": self._node_doc(tree, node.else_child) if node.else_child else None,
        }

    # -- two-phase rule updates ----------------------------------------------

    def begin_rule_update(
        self, entity: str, tree: str, proposed: str, time: int | None = None
    ) -> dict:
        with self._lock:
            if self.status != PAUSED:
                raise ControlError("rule updates require the session to be paused")
            if tree not in TREE_SLOTS:
                raise NotFoundError(f"no rule tree {tree!r}; have {sorted(TREE_SLOTS)}")
            now = self.time
            at = now if time is None else int(time)
            if not 0 <= at <= now:
                raise NotFoundError(f"time {at} outside recorded range 0..{now}")
            if tree == "order":
                draft = self._order_draft(entity, proposed, at)
            else:
                draft = self._entity_draft(entity, tree, proposed, at)
            self.pending_updates[draft.uid] = draft
            return draft.doc()

    def _entity_draft(self, entity: str, tree: str, proposed: str, at: int) -> UpdateDraft:
        cp = self._checkpoints[at]
        believed = cp.belief_entities.get(entity)
        if believed is None:
            raise NotFoundError(f"entity {entity!r} unknown to the belief at time {at}")
        owner, slot = TREE_SLOTS[tree]
        view = build_view(self.kb, BeliefState(dict(cp.belief_entities), dict(cp.belief_observed)))
        try:
            request = view.set_slot_value(entity, slot, proposed, at=at)
        except (FrameError, RdrError) as err:
            raise SessionError(str(err)) from None
        if request is None or request.owner != owner:
            governs = request.owner if request is not None else "a stored value"
            raise SessionError(f"tree {tree!r} does not govern {entity!r} (goal comes from {governs!r})")
        self._uid += 1
        return UpdateDraft(
            uid=f"u{self._uid}",
            tree=tree,
            entity=entity,
            time=at,
            proposed=proposed,
            current=request.current,
            fired_node=request.fired.node_id,
            case=request.case,
            cornerstone=request.cornerstone,
            candidates=request.candidates,
            owner=owner,
            slot=slot,
            case_label=_case_label(believed),
        )

    def _order_draft(self, entity: str, proposed: str, at: int) -> UpdateDraft:
        parts = [p.strip() for p in entity.split(",")]
        if len(parts) != 2 or not all(parts):
            raise SessionError(
                "ordering updates name a goal-type pair like 'rescueGoal,scoutGoal'"
            )
        a, b = parts
        for name in (a, b):
            if name not in ORDER_VOCABULARY:
                raise NotFoundError(f"unknown goal type {name!r}; have {list(ORDER_VOCABULARY)}")
        if a == b:
            raise SessionError("a goal type cannot precede itself")
        if proposed not in ("true", "false"):
            raise SessionError(f"ordering rules conclude true or false, not {proposed!r}")
        tree = self.kb.trees()["order"]
        case = Case(f"before({a}, {b})", {"GoalA": a, "GoalB": b}, at)
        fired = evaluate(tree, case)
        if fired.conclusion == proposed:
            raise SessionError(
                f"the ordering tree already concludes {proposed!r} for ({a}, {b})"
            )
        stone = tree.cornerstone_of(fired.node)
        owner, slot = TREE_SLOTS["order"]
        self._uid += 1
        return UpdateDraft(
            uid=f"u{self._uid}",
            tree="order",
            entity=f"{a},{b}",
            time=at,
            proposed=proposed,
            current=fired.conclusion,
            fired_node=fired.node_id,
            case=case,
            cornerstone=stone,
            candidates=tuple(candidate_differences(stone, case)),
            owner=owner,
            slot=slot,
            case_label="",
        )

    def discard_update(self, uid: str) -> dict:
        with self._lock:
            if uid not in self.pending_updates:
                raise NotFoundError(f"no pending update {uid!r}")
            del self.pending_updates[uid]
            return {"uid": uid, "discarded": True}

    def commit_rule_update(self, uid: str, literal_indices: list[int]) -> dict:
        with self._lock:
            if self.status != PAUSED:
                raise ControlError("rule updates require the session to be paused")
            draft = self.pending_updates.get(uid)
            if draft is None:
                raise NotFoundError(f"no pending update {uid!r} (committed, discarded, or expired)")
            if not literal_indices:
                raise SessionError("choose at least one condition literal")
            picked = sorted(set(literal_indices))
            for i in picked:
                if not 0 <= i < len(draft.candidates):
                    raise SessionError(
                        f"literal index {i} out of range 0..{len(draft.candidates) - 1}"
                    )
            chosen = Condition.of(*(draft.candidates[i] for i in picked))
            tree = self.kb.trees()[draft.tree]
            if draft.tree == "order":
                case_id = draft.case.id
                if case_id in tree.cornerstones:
                    raise SessionError(f"cornerstone {case_id!r} already in the ordering tree")
            else:
                case_id = next_case_id(tree, draft.case_label)
            try:
                updated = apply_update(tree, draft.case, draft.proposed, chosen, case_id=case_id)
            except RdrError as err:
                raise SessionError(str(err)) from None
            violations = verify_cornerstones(updated)
            if violations:
                rolled = "; ".join(
                    f"{v.node_id} would conclude {v.actual!r} instead of {v.expected!r}"
                    for v in violations
                )
                raise SessionError(f"update rolled back, cornerstones break: {rolled}")
            if draft.tree == "order":
                try:
                    clashes = check_ordering_tree(updated, ORDER_VOCABULARY)
                except RdrError as err:
                    raise SessionError(f"update rolled back: {err}") from None
                if clashes:
                    pairs = ", ".join(f"({a}, {b})" for a, b in clashes)
                    raise SessionError(
                        f"update rolled back, precedence now runs both ways for {pairs}"
                    )
            self.kb.replace_tree(draft.owner, draft.slot, updated)
            del self.pending_updates[uid]
            record = {
                "time": self.time,
                "uid": uid,
                "tree": draft.tree,
                "node": case_id,
                "entity": draft.entity,
                "conclusion": draft.proposed,
                "literals": [str(draft.candidates[i]) for i in picked],
            }
            self.audit_log.append(record)
            self._publish("rule_committed", dict(record))
            return {
                "tree": draft.tree,
                "node": case_id,
                "conclusion": draft.proposed,
                "literals": record["literals"],
                "size": updated.size(),
                "text": tree_text(updated),
            }

    # -- ruleset persistence --------------------------------------------------

    def save_ruleset(self, path: str | Path) -> dict:
        with self._lock:
            text = ruleset_text(self.kb)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        scratch = path.with_name(path.name + ".part")
        scratch.write_text(text)
        os.replace(scratch, path)
        return {"path": str(path), "bytes": len(text.encode())}

    def load_ruleset(self, path: str | Path) -> dict:
        if not Path(path).exists():
            raise NotFoundError(f"no ruleset file {path}")
        kb = checked_ruleset(path)
        with self._lock:
            self.kb = kb
            expired = sorted(self.pending_updates)
            self.pending_updates.clear()
            return {
                "path": str(path),
                "trees": sorted(kb.trees()),
                "expired_drafts": expired,
            }

    # -- events ----------------------------------------------------------------

    def events_since(self, seq: int = 0) -> list[dict]:
        with self._lock:
            return [e for e in self.events if e["seq"] > seq]

    def wait_events(self, seq: int, timeout: float = 5.0) -> list[dict]:
        """Events after `seq`, blocking up to `timeout` for the first one."""
        with self._wake:
            fresh = [e for e in self.events if e["seq"] > seq]
            if fresh:
                return fresh
            self._wake.wait(timeout)
            return [e for e in self.events if e["seq"] > seq]

    # -- report ------------------------------------------------------------------

    def report(self) -> dict:
        with self._lock:
            by_type: dict[str, int] = {}
            finished = dropped = 0
            for goal in self.ledger.goals.values():
                by_type[goal.goal_type] = by_type.get(goal.goal_type, 0) + 1
                if goal.mode == FINISHED:
                    finished += 1
                elif goal.mode == DROPPED:
                    dropped += 1
            return {
                "scenario": self.scenario.name,
                "seed": self.seed,
                "steps": self.time,
                "goals": {
                    "created": len(self.ledger.goals),
                    "by_type": {k: by_type[k] for k in sorted(by_type)},
                    "finished": finished,
                    "dropped": dropped,
                    "active": len(self.ledger.active()),
                },
                "transitions": len(self.ledger.transitions),
                "rule_updates": len(self.audit_log),
                "rewinds": len(self.archives),
                "latency": latency_summary(self.latencies),
            }
