"""Tiny STRIPS toolkit: parse PDDL domain/problem text and solve small
grounded instances by breadth-first search.

Covers exactly the subset the shipped domain files use — typed parameters,
conjunctive positive preconditions, add/delete effects — and serves as the
in-repo check that every emitted problem is actually solvable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product


class StripsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# s-expressions
# ---------------------------------------------------------------------------


def parse_sexp(text: str):
    """One top-level s-expression as nested lists of lowercase tokens."""
    tokens = _tokenize(text)
    if not tokens:
        raise StripsError("empty input")
    expr, rest = _read(tokens, 0)
    if rest != len(tokens):
        raise StripsError(f"trailing tokens after expression: {tokens[rest:][:5]}")
    return expr


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for raw_line in text.splitlines():
        line = raw_line.split(";", 1)[0]
        tokens.extend(line.replace("(", " ( ").replace(")", " ) ").split())
    return tokens


def _read(tokens: list[str], i: int):
    if tokens[i] != "(":
        return tokens[i].lower(), i + 1
    out = []
    i += 1
    while i < len(tokens) and tokens[i] != ")":
        item, i = _read(tokens, i)
        out.append(item)
    if i >= len(tokens):
        raise StripsError("unbalanced parentheses")
    return out, i + 1


def split_typed_list(items: list[str]) -> list[tuple[str, str]]:
    """Resolve PDDL's `a b - t c - u` notation into (name, type) pairs."""
    pairs: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        if items[i] == "-":
            if not pending or i + 1 >= len(items):
                raise StripsError("malformed typed list")
            for name in pending:
                pairs.append((name, items[i + 1]))
            pending = []
            i += 2
        else:
            pending.append(items[i])
            i += 1
    pairs.extend((name, "object") for name in pending)
    return pairs


# ---------------------------------------------------------------------------
# domain / problem model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]  # (?var, type)
    precondition: tuple[tuple[str, ...], ...]
    add: tuple[tuple[str, ...], ...]
    delete: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class Domain:
    name: str
    types: tuple[str, ...]
    predicates: dict[str, tuple[str, ...]]  # name -> parameter types
    actions: tuple[ActionSchema, ...]


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: dict[str, str]  # name -> type
    init: frozenset[tuple[str, ...]]
    goal: tuple[tuple[str, ...], ...]


def _conjuncts(expr) -> list[list[str]]:
    if not isinstance(expr, list) or not expr:
        raise StripsError(f"expected a formula, got {expr!r}")
    if expr[0] == "and":
        return [part for part in expr[1:]]
    return [expr]


def parse_domain(text: str) -> Domain:
    expr = parse_sexp(text)
    if expr[0] != "define" or expr[1][0] != "domain":
        raise StripsError("not a domain definition")
    name = expr[1][1]
    types: tuple[str, ...] = ()
    predicates: dict[str, tuple[str, ...]] = {}
    actions: list[ActionSchema] = []
    for section in expr[2:]:
        head = section[0]
        if head == ":requirements":
            continue
        if head == ":types":
            types = tuple(name for name, _ in split_typed_list(section[1:]))
        elif head == ":predicates":
            for pred in section[1:]:
                predicates[pred[0]] = tuple(t for _, t in split_typed_list(pred[1:]))
        elif head == ":action":
            actions.append(_parse_action(section))
        else:
            raise StripsError(f"unsupported domain section {head!r}")
    return Domain(name, types, predicates, tuple(actions))


def _parse_action(section) -> ActionSchema:
    name = section[1]
    fields = dict(zip(section[2::2], section[3::2]))
    params = tuple(split_typed_list(fields[":parameters"]))
    pre = tuple(tuple(atom) for atom in _conjuncts(fields[":precondition"]))
    add, delete = [], []
    for effect in _conjuncts(fields[":effect"]):
        if effect[0] == "not":
            delete.append(tuple(effect[1]))
        else:
            add.append(tuple(effect))
    return ActionSchema(name, params, pre, tuple(add), tuple(delete))


def parse_problem(text: str) -> Problem:
    expr = parse_sexp(text)
    if expr[0] != "define" or expr[1][0] != "problem":
        raise StripsError("not a problem definition")
    name = expr[1][1]
    domain_name = ""
    objects: dict[str, str] = {}
    init: set[tuple[str, ...]] = set()
    goal: tuple[tuple[str, ...], ...] = ()
    for section in expr[2:]:
        head = section[0]
        if head == ":domain":
            domain_name = section[1]
        elif head == ":objects":
            objects = dict(split_typed_list(section[1:]))
        elif head == ":init":
            init = {tuple(fact) for fact in section[1:]}
        elif head == ":goal":
            goal = tuple(tuple(atom) for atom in _conjuncts(section[1]))
        else:
            raise StripsError(f"unsupported problem section {head!r}")
    return Problem(name, domain_name, objects, frozenset(init), goal)


# ---------------------------------------------------------------------------
# grounding and search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    precondition: frozenset[tuple[str, ...]]
    add: frozenset[tuple[str, ...]]
    delete: frozenset[tuple[str, ...]]

    def __str__(self) -> str:
        return f"({self.name} {' '.join(self.args)})"


def ground(domain: Domain, problem: Problem) -> list[GroundAction]:
    by_type: dict[str, list[str]] = {}
    for obj, typ in problem.objects.items():
        by_type.setdefault(typ, []).append(obj)
    grounded: list[GroundAction] = []
    for schema in domain.actions:
        pools = [sorted(by_type.get(typ, [])) for _, typ in schema.params]
        var_names = [var for var, _ in schema.params]
        for combo in product(*pools):
            binding = dict(zip(var_names, combo))
            substitute = lambda atom: tuple(binding.get(part, part) for part in atom)
            grounded.append(
                GroundAction(
                    schema.name,
                    tuple(combo),
                    frozenset(map(substitute, schema.precondition)),
                    frozenset(map(substitute, schema.add)),
                    frozenset(map(substitute, schema.delete)),
                )
            )
    return grounded


def solve(domain: Domain, problem: Problem, max_states: int = 200_000) -> list[GroundAction] | None:
    """Breadth-first plan search over grounded actions; None when the goal is
    unreachable (or the state cap trips, which raises instead)."""
    actions = ground(domain, problem)
    goal = frozenset(problem.goal)
    start = problem.init
    if goal <= start:
        return []
    seen = {start}
    frontier: list[tuple[frozenset, list[GroundAction]]] = [(start, [])]
    while frontier:
        next_frontier: list[tuple[frozenset, list[GroundAction]]] = []
        for state, path in frontier:
            for action in actions:
                if not action.precondition <= state:
                    continue
                successor = (state - action.delete) | action.add
                if successor in seen:
                    continue
                if goal <= successor:
                    return path + [action]
                seen.add(successor)
                if len(seen) > max_states:
                    raise StripsError(f"state cap exceeded ({max_states})")
                next_frontier.append((successor, path + [action]))
        frontier = next_frontier
    return None
