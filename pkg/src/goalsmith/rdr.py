"""Ripple-down rule trees.

A tree is a nested if-then structure with two kinds of children: a wrong
conclusion is patched locally by attaching an exception rule under the node
that produced it, and alternative exceptions chain off one another through
else links. Every rule keeps a frozen copy of the case that justified its
creation (its cornerstone); later updates diff the new case against the
cornerstone of the rule that fired to propose discriminating conditions,
and the stored cornerstones let the whole tree be re-verified after any
change.

Trees are immutable values: updates return a new tree sharing unchanged
nodes, so evaluation is safe under concurrency and a rejected update simply
never replaces the old tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping

ORDER_VAR_SLOTS = ("GoalA", "GoalB")


class RdrError(ValueError):
    """Base class for rule-tree update errors."""


class NoChangeError(RdrError):
    """The proposed conclusion equals what the tree already concludes."""


class ConditionError(RdrError):
    """The selected condition does not hold on the case being taught."""


class NonDiscriminatingError(RdrError):
    """The selected condition also holds on the fired rule's cornerstone."""


@dataclass(frozen=True)
class Case:
    """Immutable slot-value snapshot of an entity (or goal pair) at a step."""

    id: str
    bindings: Mapping[str, str]
    created_at: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "bindings", dict(self.bindings))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Case):
            return NotImplemented
        return (
            self.id == other.id
            and dict(self.bindings) == dict(other.bindings)
            and self.created_at == other.created_at
        )

    def __hash__(self) -> int:
        return hash((self.id, frozenset(self.bindings.items()), self.created_at))


@dataclass(frozen=True)
class Literal:
    """One equality test. Scoped literals read a slot of the classified frame
    (rendered ``this <slot> == <value>``); unscoped ones name a goal variable
    (``GoalA == <value>``)."""

    slot: str
    value: str
    scoped: bool = True

    def holds(self, case: Case) -> bool:
        # A missing slot makes the literal false, never an error, so partially
        # observed entities can still be classified.
        return case.bindings.get(self.slot) == self.value

    def __str__(self) -> str:
        prefix = "this " if self.scoped else ""
        return f"{prefix}{self.slot} == {self.value}"


@dataclass(frozen=True)
class Condition:
    """Conjunction of equality literals; the empty conjunction is ``true``."""

    literals: tuple[Literal, ...] = ()

    @classmethod
    def true(cls) -> Condition:
        return cls(())

    @classmethod
    def of(cls, *literals: Literal) -> Condition:
        return cls(tuple(literals))

    @property
    def is_true(self) -> bool:
        return not self.literals

    def holds(self, case: Case) -> bool:
        return all(lit.holds(case) for lit in self.literals)

    def __str__(self) -> str:
        if self.is_true:
            return "true"
        return " and ".join(str(lit) for lit in self.literals)


@dataclass(frozen=True)
class RdrNode:
    condition: Condition
    conclusion: str
    cornerstone_id: str
    except_child: RdrNode | None = None
    else_child: RdrNode | None = None


# Path steps from the root to a node.
Path = tuple[str, ...]


@dataclass(frozen=True)
class EvalResult:
    conclusion: str
    path: Path
    node: RdrNode

    @property
    def node_id(self) -> str:
        return self.node.cornerstone_id


@dataclass(frozen=True)
class RdrTree:
    """A rule tree plus the store of every cornerstone case it references.

    ``domain`` tags what the tree classifies (a frame id such as ``building``,
    or ``order`` for the goal-precedence tree) and prefixes generated
    cornerstone ids.
    """

    root: RdrNode
    domain: str
    cornerstones: Mapping[str, Case] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.root.condition.is_true:
            raise ValueError("root rule must be the default `if true` rule")
        store = dict(self.cornerstones)
        for node, _ in self.walk():
            store.setdefault(node.cornerstone_id, Case(node.cornerstone_id, {}))
        object.__setattr__(self, "cornerstones", store)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RdrTree):
            return NotImplemented
        return (
            self.root == other.root
            and self.domain == other.domain
            and dict(self.cornerstones) == dict(other.cornerstones)
        )

    def walk(self) -> Iterator[tuple[RdrNode, Path]]:
        """Pre-order traversal: node, its exception subtree, its else subtree."""

        def visit(node: RdrNode, path: Path) -> Iterator[tuple[RdrNode, Path]]:
            yield node, path
            if node.except_child is not None:
                yield from visit(node.except_child, path + ("except",))
            if node.else_child is not None:
                yield from visit(node.else_child, path + ("else",))

        yield from visit(self.root, ())

    def node_at(self, path: Path) -> RdrNode:
        node = self.root
        for step in path:
            child = node.except_child if step == "except" else node.else_child
            if child is None:
                raise KeyError(f"no node at path {path!r}")
            node = child
        return node

    def cornerstone_of(self, node: RdrNode) -> Case:
        return self.cornerstones[node.cornerstone_id]

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def conclusions(self) -> set[str]:
        return {node.conclusion for node, _ in self.walk()}


def default_tree(domain: str, conclusion: str, root_id: str | None = None) -> RdrTree:
    """The starting tree: a single default rule concluding `conclusion`."""
    rid = root_id if root_id is not None else f"{domain}0"
    root = RdrNode(Condition.true(), conclusion, rid)
    return RdrTree(root, domain, {rid: Case(rid, {})})


def evaluate(tree: RdrTree, case: Case) -> EvalResult:
    """Classify a case: the deepest rule whose condition holds wins.

    At a satisfied rule the exception subtree is tried first and overrides;
    at a failed rule evaluation moves to the else alternative. The root's
    condition is ``true``, so some rule always fires.
    """

    def walk(node: RdrNode, path: Path) -> EvalResult | None:
        if node.condition.holds(case):
            if node.except_child is not None:
                deeper = walk(node.except_child, path + ("except",))
                if deeper is not None:
                    return deeper
            return EvalResult(node.conclusion, path, node)
        if node.else_child is not None:
            return walk(node.else_child, path + ("else",))
        return None

    result = walk(tree.root, ())
    assert result is not None, "default rule always fires"
    return result


def candidate_differences(
    cornerstone: Case, new_case: Case, hint_slots: tuple[str, ...] | list[str] = ()
) -> list[Literal]:
    """Literals distinguishing the new case from a cornerstone.

    One literal per slot the new case binds where the cornerstone differs or
    is silent. Hinted slots come first (in hint order), the rest in slot-name
    order.
    """
    differing = {
        slot: value
        for slot, value in new_case.bindings.items()
        if cornerstone.bindings.get(slot) != value
    }
    ordered = [s for s in hint_slots if s in differing]
    ordered += sorted(s for s in differing if s not in hint_slots)
    return [
        Literal(slot, differing[slot], scoped=slot not in ORDER_VAR_SLOTS)
        for slot in ordered
    ]


_CASE_COUNTER_RE = re.compile(r"^case_(?P<domain>.+)_(?P<n>\d+)$")


def next_case_id(tree: RdrTree, label: str | None = None) -> str:
    """Next `case_<label>_<n>` id, stable across serialization round-trips.

    The label defaults to the tree's domain; callers correcting a specific
    entity may label the case after it (a buried fire brigade yields
    `case_brigade_1` even though the tree's domain is `human`).
    """
    label = tree.domain if label is None else label
    taken = -1
    for cid in tree.cornerstones:
        m = _CASE_COUNTER_RE.match(cid)
        if m and m.group("domain") == label:
            taken = max(taken, int(m.group("n")))
    return f"case_{label}_{max(taken, 0) + 1}"


def apply_update(
    tree: RdrTree,
    case: Case,
    correct: str,
    selected: Condition,
    case_id: str | None = None,
) -> RdrTree:
    """Teach the tree that `case` should conclude `correct`.

    The new rule (condition `selected`, cornerstone = frozen copy of `case`)
    becomes the fired rule's exception, or chains onto the end of its existing
    exception alternatives via else links. Exactly one node and one
    cornerstone are added; every pre-existing node is shared unchanged.
    """
    fired = evaluate(tree, case)
    if fired.conclusion == correct:
        raise NoChangeError(
            f"tree already concludes {correct!r} for this case (rule {fired.node_id})"
        )
    if not selected.holds(case):
        raise ConditionError(f"condition [{selected}] does not hold on the new case")
    stone = tree.cornerstone_of(fired.node)
    if selected.holds(stone):
        raise NonDiscriminatingError(
            f"condition [{selected}] also holds on cornerstone {stone.id}; "
            "it cannot separate the cases"
        )

    new_id = case_id if case_id is not None else next_case_id(tree)
    if new_id in tree.cornerstones:
        raise RdrError(f"cornerstone id {new_id!r} already in use")
    frozen = Case(new_id, dict(case.bindings), case.created_at)
    new_node = RdrNode(selected, correct, new_id)

    def rebuild(node: RdrNode, path: Path) -> RdrNode:
        if path:
            step, rest = path[0], path[1:]
            if step == "except":
                return replace(node, except_child=rebuild(node.except_child, rest))
            return replace(node, else_child=rebuild(node.else_child, rest))
        if node.except_child is None:
            return replace(node, except_child=new_node)
        return replace(node, except_child=_append_else(node.except_child, new_node))

    store = dict(tree.cornerstones)
    store[new_id] = frozen
    return RdrTree(rebuild(tree.root, fired.path), tree.domain, store)


def _append_else(node: RdrNode, new_node: RdrNode) -> RdrNode:
    if node.else_child is None:
        return replace(node, else_child=new_node)
    return replace(node, else_child=_append_else(node.else_child, new_node))


@dataclass(frozen=True)
class Violation:
    node_id: str
    expected: str
    actual: str


def verify_cornerstones(tree: RdrTree) -> list[Violation]:
    """Replay every stored cornerstone; each must re-fire its own rule.

    Returns one violation per node whose cornerstone no longer reaches it or
    no longer receives its conclusion. A consistent tree returns [].
    """
    violations = []
    for node, path in tree.walk():
        stone = tree.cornerstone_of(node)
        result = evaluate(tree, stone)
        if result.path != path or result.conclusion != node.conclusion:
            violations.append(Violation(node.cornerstone_id, node.conclusion, result.conclusion))
    return violations


def evaluate_order(tree: RdrTree, a: str, b: str) -> bool:
    """True iff goal type `a` must precede goal type `b` under the tree."""
    result = evaluate(tree, Case("query", {"GoalA": a, "GoalB": b}))
    return result.conclusion == "true"


def check_ordering_tree(tree: RdrTree, vocabulary: tuple[str, ...]) -> list[tuple[str, str]]:
    """Consistency check for a goal-ordering tree.

    Raises on malformed conclusions; returns the pairs over `vocabulary` for
    which precedence holds in both directions (antisymmetry violations). A
    committable ordering tree returns [].
    """
    bad = tree.conclusions() - {"true", "false"}
    if bad:
        raise RdrError(f"ordering rules must conclude true or false, found {sorted(bad)}")
    if tree.root.conclusion != "false":
        raise RdrError("ordering tree default must conclude false")
    violations = []
    for i, a in enumerate(vocabulary):
        for b in vocabulary[i + 1 :]:
            if evaluate_order(tree, a, b) and evaluate_order(tree, b, a):
                violations.append((a, b))
    return violations
