"""Stand-alone PDDL syntax checker used as an oracle in planner tests.

Deliberately shares no code with the package: it re-reads domain and problem
text from scratch and reports every structural complaint it finds, so a bug
in the package's own PDDL handling can't hide itself.
"""

from __future__ import annotations

KEYWORD_SECTIONS_DOMAIN = {":requirements", ":types", ":predicates", ":action"}
KEYWORD_SECTIONS_PROBLEM = {":domain", ":objects", ":init", ":goal"}
SUPPORTED_REQUIREMENTS = {":strips", ":typing"}


def _tokenize(text):
    tokens = []
    for line in text.splitlines():
        bare = line.split(";", 1)[0]
        tokens.extend(bare.replace("(", " ( ").replace(")", " ) ").split())
    return tokens


def _parse(tokens, i=0):
    if i >= len(tokens):
        raise ValueError("unexpected end of input")
    if tokens[i] != "(":
        return tokens[i].lower(), i + 1
    out = []
    i += 1
    while i < len(tokens) and tokens[i] != ")":
        node, i = _parse(tokens, i)
        out.append(node)
    if i >= len(tokens):
        raise ValueError("unbalanced parentheses")
    return out, i + 1


def _read_all(text):
    tokens = _tokenize(text)
    node, i = _parse(tokens)
    if i != len(tokens):
        raise ValueError("text after top-level form")
    return node


def _typed_pairs(items, complaints, where):
    """(name, type) pairs from `a b - t ...`; untyped names default to object."""
    pairs = []
    pending = []
    i = 0
    while i < len(items):
        token = items[i]
        if not isinstance(token, str):
            complaints.append(f"{where}: nested form in typed list")
            return pairs
        if token == "-":
            if not pending:
                complaints.append(f"{where}: dangling '-' in typed list")
                return pairs
            if i + 1 >= len(items) or not isinstance(items[i + 1], str):
                complaints.append(f"{where}: missing type name after '-'")
                return pairs
            pairs.extend((name, items[i + 1]) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(token)
            i += 1
    pairs.extend((name, "object") for name in pending)
    return pairs


class DomainSummary:
    def __init__(self):
        self.name = None
        self.types = set()
        self.predicates = {}  # name -> tuple of param types


def check_domain(text):
    """Returns (summary, complaints). An empty complaints list means valid."""
    complaints = []
    summary = DomainSummary()
    try:
        top = _read_all(text)
    except ValueError as exc:
        return summary, [str(exc)]

    if not (isinstance(top, list) and top and top[0] == "define"):
        return summary, ["top-level form is not (define ...)"]
    if len(top) < 2 or not (isinstance(top[1], list) and top[1][:1] == ["domain"]):
        return summary, ["missing (domain <name>) header"]
    if len(top[1]) != 2:
        complaints.append("domain header must be exactly (domain <name>)")
    else:
        summary.name = top[1][1]

    actions = []
    for section in top[2:]:
        if not (isinstance(section, list) and section and isinstance(section[0], str)):
            complaints.append("domain section is not a keyword form")
            continue
        head = section[0]
        if head not in KEYWORD_SECTIONS_DOMAIN:
            complaints.append(f"unknown domain section {head}")
        elif head == ":requirements":
            for req in section[1:]:
                if req not in SUPPORTED_REQUIREMENTS:
                    complaints.append(f"unsupported requirement {req}")
        elif head == ":types":
            pairs = _typed_pairs(section[1:], complaints, ":types")
            summary.types = {name for name, _ in pairs} | {"object"}
        elif head == ":predicates":
            for form in section[1:]:
                if not (isinstance(form, list) and form and isinstance(form[0], str)):
                    complaints.append(":predicates entry is not (name ...)")
                    continue
                params = _typed_pairs(form[1:], complaints, f"predicate {form[0]}")
                for var, typ in params:
                    if not var.startswith("?"):
                        complaints.append(f"predicate {form[0]}: parameter {var} lacks '?'")
                    if typ not in summary.types:
                        complaints.append(f"predicate {form[0]}: unknown type {typ}")
                summary.predicates[form[0]] = tuple(typ for _, typ in params)
        else:
            actions.append(section)

    for section in actions:
        _check_action(section, summary, complaints)
    if not summary.predicates:
        complaints.append("domain declares no predicates")
    return summary, complaints


def _check_action(section, summary, complaints):
    if len(section) < 2 or not isinstance(section[1], str):
        complaints.append(":action missing name")
        return
    name = section[1]
    fields = {}
    rest = section[2:]
    for key, value in zip(rest[::2], rest[1::2]):
        fields[key] = value
    for required in (":parameters", ":precondition", ":effect"):
        if required not in fields:
            complaints.append(f"action {name}: missing {required}")
            return

    params = _typed_pairs(fields[":parameters"], complaints, f"action {name}")
    bound = set()
    for var, typ in params:
        if not var.startswith("?"):
            complaints.append(f"action {name}: parameter {var} lacks '?'")
        if typ not in summary.types:
            complaints.append(f"action {name}: unknown parameter type {typ}")
        bound.add(var)

    def check_atom(atom, negatable, where):
        if not (isinstance(atom, list) and atom and isinstance(atom[0], str)):
            complaints.append(f"{where}: malformed atom")
            return
        if atom[0] == "not":
            if not negatable:
                complaints.append(f"{where}: negation outside an effect")
            elif len(atom) != 2:
                complaints.append(f"{where}: (not ...) takes exactly one atom")
            else:
                check_atom(atom[1], False, where)
            return
        if atom[0] == "and":
            for sub in atom[1:]:
                check_atom(sub, negatable, where)
            return
        if atom[0] not in summary.predicates:
            complaints.append(f"{where}: undeclared predicate {atom[0]}")
            return
        arity = len(summary.predicates[atom[0]])
        if len(atom) - 1 != arity:
            complaints.append(f"{where}: {atom[0]} expects {arity} args, got {len(atom) - 1}")
        for arg in atom[1:]:
            if not isinstance(arg, str):
                complaints.append(f"{where}: nested term in atom args")
            elif arg.startswith("?") and arg not in bound:
                complaints.append(f"{where}: unbound variable {arg}")

    check_atom(fields[":precondition"], False, f"action {name} precondition")
    check_atom(fields[":effect"], True, f"action {name} effect")


def check_problem(text, domain_text):
    """Returns complaints for a problem checked against its domain's text."""
    summary, complaints = check_domain(domain_text)
    if complaints:
        return [f"(domain) {c}" for c in complaints]
    try:
        top = _read_all(text)
    except ValueError as exc:
        return [str(exc)]

    out = []
    if not (isinstance(top, list) and top and top[0] == "define"):
        return ["top-level form is not (define ...)"]
    if len(top) < 2 or not (isinstance(top[1], list) and top[1][:1] == ["problem"]):
        return ["missing (problem <name>) header"]

    objects = {}
    saw = set()
    for section in top[2:]:
        if not (isinstance(section, list) and section and isinstance(section[0], str)):
            out.append("problem section is not a keyword form")
            continue
        head = section[0]
        saw.add(head)
        if head not in KEYWORD_SECTIONS_PROBLEM:
            out.append(f"unknown problem section {head}")
        elif head == ":domain":
            if section[1:] != [summary.name]:
                out.append(f"problem names domain {section[1:]}, file defines {summary.name}")
        elif head == ":objects":
            for obj, typ in _typed_pairs(section[1:], out, ":objects"):
                if typ not in summary.types:
                    out.append(f"object {obj}: unknown type {typ}")
                if obj in objects:
                    out.append(f"object {obj} declared twice")
                objects[obj] = typ

    def check_ground(atom, where):
        if not (isinstance(atom, list) and atom and isinstance(atom[0], str)):
            out.append(f"{where}: malformed fact")
            return
        if atom[0] == "and":
            for sub in atom[1:]:
                check_ground(sub, where)
            return
        if atom[0] not in summary.predicates:
            out.append(f"{where}: undeclared predicate {atom[0]}")
            return
        signature = summary.predicates[atom[0]]
        if len(atom) - 1 != len(signature):
            out.append(f"{where}: {atom[0]} expects {len(signature)} args")
            return
        for arg, want in zip(atom[1:], signature):
            if arg not in objects:
                out.append(f"{where}: unknown object {arg}")
            elif want != "object" and objects[arg] != want:
                out.append(f"{where}: {arg} is {objects[arg]}, {atom[0]} wants {want}")

    for section in top[2:]:
        if isinstance(section, list) and section and section[0] == ":init":
            for fact in section[1:]:
                check_ground(fact, ":init")
        if isinstance(section, list) and section and section[0] == ":goal":
            if len(section) != 2:
                out.append(":goal takes exactly one formula")
            else:
                check_ground(section[1], ":goal")

    for required in (":domain", ":objects", ":init", ":goal"):
        if required not in saw:
            out.append(f"missing {required} section")
    return out
