"""Rule-DSL parsing and canonical serialization.

The text format carries everything a ruleset needs: generic frames with slot
facets, instance frames, rule trees inside if_needed facets, and the stored
cornerstone cases that justify each rule. Parsing is two-phase (build, then
validate) so declarations may reference frames defined later in the file.

Rule bodies are laid out by indentation: an `except` is indented deeper than
the rule it refines, an `else` aligns with the rule it offers an alternative
to. The serializer always emits that canonical layout — 4-space steps, one
line per rule — so serialize∘parse∘serialize is a byte-level fixpoint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .frames import Frame, FrameSet, GENERIC, INSTANCE, Slot, validate_kb
from .rdr import Case, Condition, Literal, RdrNode, RdrTree

INDENT = 4
FACETS = ("range", "value", "if_needed", "if_replaced")


class DslError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | punct
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"==|[(),;:\[\]]|[A-Za-z_][A-Za-z0-9_]*|[0-9]+")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.expandtabs(INDENT)
        comment = line.find("//")
        if comment >= 0:
            line = line[:comment]
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(line, pos)
            if not m:
                raise DslError(f"unexpected character {line[pos]!r}", lineno, pos)
            text_ = m.group()
            kind = "number" if text_[0].isdigit() else ("ident" if text_[0].isalpha() or text_[0] == "_" else "punct")
            tokens.append(Token(kind, text_, lineno, pos))
            pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.cases: dict[str, Case] = {}
        # Trees cannot be built until cornerstone cases are known, so rule
        # roots are collected per (frame, slot) and wired to RdrTree at the end.
        self.tree_roots: list[tuple[Frame, str, RdrNode]] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("punct", "", 0, 0)
            raise DslError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise DslError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.next()
        if tok.kind != "ident":
            raise DslError(f"expected {what}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def at(self, text: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok is not None and tok.text == text

    # -- grammar -----------------------------------------------------------

    def parse(self) -> FrameSet:
        kb = FrameSet()
        while self.peek() is not None:
            if self.at("frame") and self.at("(", 1):
                kb.add(self.instance_frame())
            elif self.at("case") and (tok := self.peek(1)) is not None and tok.kind == "ident":
                self.case_block()
            else:
                kb.add(self.generic_frame())
        self.finish_trees()
        validate_kb(kb)
        return kb

    def generic_frame(self) -> Frame:
        name = self.ident("frame name")
        self.expect("ako")
        parents = self.parent_list()
        self.expect("with")
        frame = Frame(name.text, GENERIC, parents)
        while self.starts_slot_block():
            self.slot_block(frame)
        return frame

    def parent_list(self) -> tuple[str, ...]:
        if not self.at("["):
            return (self.ident("parent frame").text,)
        self.expect("[")
        parents = []
        while not self.at("]"):
            parents.append(self.ident("parent frame").text)
            if not self.at("]"):
                self.expect(",")
        self.expect("]")
        return tuple(parents)

    def starts_slot_block(self) -> bool:
        tok, after = self.peek(), self.peek(1)
        if tok is None or tok.kind != "ident" or after is None or after.text != ":":
            return False
        # `x ako`, `frame(`, and `case <id>` all end the frame body; an
        # ident followed by a colon can only be a slot declaration here.
        return True

    def slot_block(self, frame: Frame) -> None:
        name = self.ident("slot name")
        self.expect(":")
        slot = Slot(name.text)
        frame.slots[name.text] = slot
        saw_facet = False
        while True:
            tok, after = self.peek(), self.peek(1)
            if tok is None or tok.kind != "ident" or tok.text not in FACETS:
                break
            if after is not None and after.text == ":":
                break  # a slot that happens to share a facet keyword's name
            saw_facet = True
            self.next()
            if tok.text == "range":
                slot.range = self.atom_list()
            elif tok.text == "value":
                slot.value = self.ident("atom").text
            elif tok.text == "if_needed":
                self.tree_roots.append((frame, name.text, self.rule_chain(())))
            else:  # if_replaced
                self.expect("rdr_frame")
                self.expect("(")
                slot.if_replaced = self.atom_list()
                self.expect(")")
        if not saw_facet:
            raise DslError(f"slot {name.text!r} declares no facets", name.line, name.col)

    def atom_list(self) -> tuple[str, ...]:
        self.expect("[")
        atoms = []
        while not self.at("]"):
            atoms.append(self.ident("atom").text)
            if not self.at("]"):
                self.expect(",")
        self.expect("]")
        return tuple(atoms)

    def instance_frame(self) -> Frame:
        self.expect("frame")
        self.expect("(")
        name = self.ident("frame name")
        self.expect(",")
        self.expect("[")
        parents = []
        while not self.at("]"):
            parents.append(self.ident("parent frame").text)
            if not self.at("]"):
                self.expect(",")
        self.expect("]")
        slots: dict[str, Slot] = {}
        if self.at(","):
            self.next()
            self.expect("[")
            while not self.at("]"):
                slot = self.ident("slot name")
                self.expect(":")
                value = self.ident("atom")
                slots[slot.text] = Slot(slot.text, value=value.text)
                if not self.at("]"):
                    self.expect(",")
            self.expect("]")
        self.expect(")")
        self.expect(";")
        return Frame(name.text, INSTANCE, tuple(parents), slots)

    def case_block(self) -> None:
        self.expect("case")
        tok = self.peek()
        case_id = self.case_ref()
        created_at = 0
        if self.at("at"):
            self.next()
            num = self.next()
            if num.kind != "number":
                raise DslError("expected a step number after 'at'", num.line, num.col)
            created_at = int(num.text)
        self.expect(":")
        bindings: dict[str, str] = {}
        while (slot := self.peek()) is not None and slot.kind == "ident" and self.at(":", 1):
            self.next()
            self.expect(":")
            bindings[slot.text] = self.ident("atom").text
        if case_id in self.cases:
            raise DslError(f"duplicate case {case_id!r}", tok.line, tok.col)
        self.cases[case_id] = Case(case_id, bindings, created_at)

    def case_ref(self) -> str:
        name = self.ident("case id")
        if not self.at("("):
            return name.text
        self.expect("(")
        first = self.ident("atom")
        self.expect(",")
        second = self.ident("atom")
        self.expect(")")
        return f"{name.text}({first.text}, {second.text})"

    # -- rule trees ----------------------------------------------------------

    def rule_chain(self, enclosing_cols: tuple[int, ...]) -> RdrNode:
        """Parse a rule and its else-linked alternatives. An `else` whose
        column matches an enclosing chain belongs there; otherwise it binds
        to this (nearest) chain."""
        head = self.peek()
        if head is None or head.text != "if":
            tok = head or Token("punct", "", 0, 0)
            raise DslError("expected a rule starting with 'if'", tok.line, tok.col)
        chain_col = head.col
        first = self.rule(chain_col, enclosing_cols)
        links = [first]
        while self.at("else"):
            col = self.peek().col
            if col != chain_col and col in enclosing_cols:
                break
            self.next()
            links.append(self.rule(chain_col, enclosing_cols))
        node = links[-1]
        for prev in reversed(links[:-1]):
            node = _with_else(prev, node)
        return node

    def rule(self, my_col: int, enclosing_cols: tuple[int, ...]) -> RdrNode:
        self.expect("if")
        condition = self.condition()
        self.expect("then")
        conclusion = self.ident("conclusion atom").text
        case_id = ""
        if self.at("because"):
            self.next()
            case_id = self.case_ref()
        if self.at(";"):
            self.next()
        except_child = None
        if self.at("except") and self.peek().col > my_col:
            self.next()
            except_child = self.rule_chain(enclosing_cols + (my_col,))
        return RdrNode(condition, conclusion, case_id, except_child=except_child)

    def condition(self) -> Condition:
        if self.at("true"):
            self.next()
            return Condition.true()
        literals = [self.literal()]
        while self.at("and"):
            self.next()
            literals.append(self.literal())
        return Condition(tuple(literals))

    def literal(self) -> Literal:
        if self.at("this"):
            self.next()
            slot = self.ident("slot name")
            if slot.text in ("GoalA", "GoalB"):
                raise DslError(f"{slot.text} is a goal variable, not a slot", slot.line, slot.col)
            self.expect("==")
            return Literal(slot.text, self.ident("atom").text, scoped=True)
        subject = self.ident("'this' or a goal variable")
        if subject.text not in ("GoalA", "GoalB"):
            raise DslError(
                f"slot tests need 'this' (got bare {subject.text!r})", subject.line, subject.col
            )
        self.expect("==")
        return Literal(subject.text, self.ident("atom").text, scoped=False)

    # -- finalization --------------------------------------------------------

    def finish_trees(self) -> None:
        referenced: set[str] = set()
        for frame, slot_name, root in self.tree_roots:
            stones = {}
            for node_id in _because_ids(root):
                referenced.add(node_id)
                if node_id in self.cases:
                    stones[node_id] = self.cases[node_id]
            tree = RdrTree(root, frame.id, stones)
            frame.slots[slot_name].if_needed = tree
        stray = set(self.cases) - referenced
        if stray:
            raise DslError(f"cases referenced by no rule: {sorted(stray)}")


def _because_ids(node: RdrNode) -> list[str]:
    ids = [node.cornerstone_id]
    if node.except_child is not None:
        ids.extend(_because_ids(node.except_child))
    if node.else_child is not None:
        ids.extend(_because_ids(node.else_child))
    return ids


def _with_else(node: RdrNode, else_child: RdrNode) -> RdrNode:
    return RdrNode(node.condition, node.conclusion, node.cornerstone_id, node.except_child, else_child)


def parse_frame_source(text: str) -> FrameSet:
    return _Parser(tokenize(text)).parse()


def parse_tree_text(text: str, domain: str, cornerstones: dict[str, Case] | None = None) -> RdrTree:
    """Parse a bare rule tree (as displayed in tree views) into an RdrTree."""
    parser = _Parser(tokenize(text))
    root = parser.rule_chain(())
    if parser.peek() is not None:
        tok = parser.peek()
        raise DslError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return RdrTree(root, domain, cornerstones or {})


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------


def tree_text(tree: RdrTree, indent: int = 0) -> str:
    lines: list[str] = []
    _emit_chain(tree.root, indent, lines)
    return "\n".join(lines)


def _emit_chain(node: RdrNode | None, col: int, lines: list[str]) -> None:
    pad = " " * col
    while node is not None:
        because = f" because {node.cornerstone_id}" if node.cornerstone_id else ""
        lines.append(f"{pad}if {node.condition} then {node.conclusion}{because}")
        if node.except_child is not None:
            lines.append(f"{pad}{' ' * INDENT}except")
            _emit_chain(node.except_child, col + INDENT, lines)
        node = node.else_child
        if node is not None:
            lines.append(f"{pad}else")


def serialize_kb(kb: FrameSet) -> str:
    blocks: list[str] = []
    for frame in kb:
        if frame.kind == INSTANCE:
            blocks.append(_instance_text(frame))
        else:
            blocks.append(_generic_text(frame))
            blocks.extend(_case_blocks(frame))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def _instance_text(frame: Frame) -> str:
    for slot in frame.slots.values():
        if slot.range or slot.if_needed or slot.if_replaced:
            raise DslError(
                f"instance frame {frame.id!r} carries facets the frame(...) syntax cannot express"
            )
    bindings = ", ".join(f"{s.name}: {s.value}" for s in frame.slots.values())
    parents = ", ".join(frame.parents)
    return f"frame({frame.id}, [{parents}], [{bindings}]);"


def _generic_text(frame: Frame) -> str:
    parents = frame.parents[0] if len(frame.parents) == 1 else f"[{', '.join(frame.parents)}]"
    lines = [f"{frame.id} ako {parents} with"]
    pad, deep = " " * INDENT, " " * (2 * INDENT)
    for slot in frame.slots.values():
        if not (slot.range or slot.value or slot.if_needed or slot.if_replaced):
            raise DslError(f"slot {frame.id}.{slot.name} has no facets to serialize")
        lines.append(f"{pad}{slot.name}:")
        if slot.range is not None:
            lines.append(f"{deep}range [{', '.join(slot.range)}]")
        if slot.value is not None:
            lines.append(f"{deep}value {slot.value}")
        if slot.if_needed is not None:
            lines.append(f"{deep}if_needed")
            lines.append(tree_text(slot.if_needed, indent=3 * INDENT))
        if slot.if_replaced is not None:
            lines.append(f"{deep}if_replaced")
            lines.append(f"{' ' * 3 * INDENT}rdr_frame([{', '.join(slot.if_replaced)}])")
    return "\n".join(lines)


def _case_blocks(frame: Frame) -> list[str]:
    blocks = []
    for slot in frame.slots.values():
        if slot.if_needed is None:
            continue
        for node, _ in slot.if_needed.walk():
            stone = slot.if_needed.cornerstones[node.cornerstone_id]
            if not stone.bindings and stone.created_at == 0:
                continue  # empty default cases are implicit
            header = f"case {stone.id}"
            if stone.created_at:
                header += f" at {stone.created_at}"
            body = [f"{' ' * INDENT}{name}: {stone.bindings[name]}" for name in sorted(stone.bindings)]
            blocks.append("\n".join([header + ":"] + body))
    return blocks
