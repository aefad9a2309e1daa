"""Frame knowledge base: generic/instance frames, slot facets, inheritance.

Frames hold both world knowledge (entity attributes as slot values) and the
decision knowledge itself (rule trees attached to slots as if_needed daemons,
with if_replaced hints steering the update dialog). Inheritance follows `ako`
links, depth-first with first-parent priority, rooted at a built-in `object`
frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .rdr import Case, EvalResult, Literal, NoChangeError, RdrTree, candidate_differences, evaluate

GENERIC = "generic"
INSTANCE = "instance"


class FrameError(ValueError):
    """Base class for knowledge-base errors."""


class UnknownFrameError(FrameError):
    pass


class UndeclaredSlotError(FrameError):
    pass


class RangeViolationError(FrameError):
    pass


class ValueUnavailable(FrameError):
    """The slot has no value anywhere in the chain and no daemon to compute one."""


@dataclass
class Slot:
    name: str
    range: tuple[str, ...] | None = None
    value: str | None = None
    if_needed: RdrTree | None = None
    if_replaced: tuple[str, ...] | None = None


@dataclass
class Frame:
    id: str
    kind: str = GENERIC
    parents: tuple[str, ...] = ()
    slots: dict[str, Slot] = field(default_factory=dict)

    def slot(self, name: str) -> Slot:
        if name not in self.slots:
            self.slots[name] = Slot(name)
        return self.slots[name]


OBJECT_FRAME = Frame("object", GENERIC, ())


@dataclass(frozen=True)
class UpdateRequest:
    """Returned when overriding a daemon-computed slot: the raw material for
    one rule-tree update, to be confirmed (condition chosen) and committed."""

    owner: str  # generic frame whose slot holds the tree
    slot: str
    frame: str  # the instance being corrected
    case: Case
    current: str
    proposed: str
    fired: EvalResult
    cornerstone: Case
    candidates: tuple[Literal, ...]


class FrameSet:
    """An ordered collection of frames, optionally layered over a base set.

    The overlay pattern keeps transient world mirrors (instance frames per
    simulation entity) separate from the durable knowledge (generic frames
    and their rule trees), so saving a ruleset never drags the world along.
    """

    def __init__(self, frames: list[Frame] | None = None, base: FrameSet | None = None):
        self.frames: dict[str, Frame] = {}
        self.base = base
        for frame in frames or []:
            self.add(frame)

    def add(self, frame: Frame) -> Frame:
        if frame.id in self.frames:
            raise FrameError(f"duplicate frame id {frame.id!r}")
        self.frames[frame.id] = frame
        return frame

    def get(self, frame_id: str) -> Frame:
        if frame_id in self.frames:
            return self.frames[frame_id]
        if self.base is not None:
            return self.base.get(frame_id)
        if frame_id == OBJECT_FRAME.id:
            return OBJECT_FRAME
        raise UnknownFrameError(f"unknown frame {frame_id!r}")

    def __contains__(self, frame_id: str) -> bool:
        try:
            self.get(frame_id)
        except UnknownFrameError:
            return False
        return True

    def __iter__(self) -> Iterator[Frame]:
        yield from self.frames.values()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameSet):
            return NotImplemented
        return self.frames == other.frames and self.base == other.base

    # -- inheritance ------------------------------------------------------

    def chain(self, frame_id: str) -> list[Frame]:
        """The frame followed by its ancestors, depth-first, first parent
        winning ties; `object` closes the chain."""
        seen: dict[str, Frame] = {}

        def visit(fid: str) -> None:
            if fid in seen:
                return
            frame = self.get(fid)
            seen[fid] = frame
            for parent in frame.parents:
                visit(parent)

        visit(frame_id)
        seen.setdefault(OBJECT_FRAME.id, self.get(OBJECT_FRAME.id))
        return list(seen.values())

    def declared_slots(self, frame_id: str) -> list[str]:
        names: list[str] = []
        for frame in self.chain(frame_id):
            for name in frame.slots:
                if name not in names:
                    names.append(name)
        return names

    def _nearest(self, frame_id: str, slot: str, facet: str):
        for frame in self.chain(frame_id):
            if slot in frame.slots:
                got = getattr(frame.slots[slot], facet)
                if got is not None:
                    return frame, got
        return None, None

    def _require_declared(self, frame_id: str, slot: str) -> None:
        if not any(slot in frame.slots for frame in self.chain(frame_id)):
            raise UndeclaredSlotError(f"frame {frame_id!r} declares no slot {slot!r}")

    # -- queries ----------------------------------------------------------

    def case_of(self, frame_id: str, at: int = 0) -> Case:
        """Project a frame to a plain case: every slot whose value is stored
        somewhere in the chain, without running any daemon (a daemon being
        asked about its own frame must not recurse into itself)."""
        bindings = {}
        for slot in self.declared_slots(frame_id):
            _, value = self._nearest(frame_id, slot, "value")
            if value is not None:
                bindings[slot] = value
        return Case(frame_id, bindings, at)

    def resolve_slot(self, frame_id: str, slot: str) -> str:
        """Stored value first (nearest in the chain), then the nearest
        if_needed rule tree evaluated on the frame's projection."""
        self._require_declared(frame_id, slot)
        _, value = self._nearest(frame_id, slot, "value")
        if value is not None:
            return value
        _, tree = self._nearest(frame_id, slot, "if_needed")
        if tree is not None:
            return evaluate(tree, self.case_of(frame_id)).conclusion
        raise ValueUnavailable(f"{frame_id}.{slot} has no value and no daemon")

    def slot_range(self, frame_id: str, slot: str) -> tuple[str, ...] | None:
        _, rng = self._nearest(frame_id, slot, "range")
        return rng

    # -- mutation ---------------------------------------------------------

    def set_slot_value(self, frame_id: str, slot: str, value: str, at: int = 0) -> UpdateRequest | None:
        """Store a plain value, or — when the slot is daemon-computed and
        carries an if_replaced hint — turn the override into an update request
        against the daemon's rule tree instead of storing anything."""
        frame = self.get(frame_id)
        self._require_declared(frame_id, slot)
        rng = self.slot_range(frame_id, slot)
        if rng is not None and value not in rng:
            raise RangeViolationError(
                f"{frame_id}.{slot} = {value!r} outside range [{', '.join(rng)}]"
            )
        _, hints = self._nearest(frame_id, slot, "if_replaced")
        owner, tree = self._nearest(frame_id, slot, "if_needed")
        if hints is not None and tree is not None:
            case = self.case_of(frame_id, at)
            fired = evaluate(tree, case)
            if fired.conclusion == value:
                raise NoChangeError(
                    f"{frame_id}.{slot} already evaluates to {value!r}"
                )
            stone = tree.cornerstone_of(fired.node)
            return UpdateRequest(
                owner=owner.id,
                slot=slot,
                frame=frame_id,
                case=case,
                current=fired.conclusion,
                proposed=value,
                fired=fired,
                cornerstone=stone,
                candidates=tuple(candidate_differences(stone, case, hints)),
            )
        frame.slot(slot).value = value
        return None

    def replace_tree(self, owner_id: str, slot: str, tree: RdrTree) -> None:
        self.get(owner_id).slots[slot].if_needed = tree

    def trees(self) -> dict[str, RdrTree]:
        """Every rule tree in the set (and its base), keyed by domain."""
        found: dict[str, RdrTree] = {} if self.base is None else self.base.trees()
        for frame in self:
            for slot in frame.slots.values():
                if slot.if_needed is not None:
                    found[slot.if_needed.domain] = slot.if_needed
        return found

    def tree_owner(self, domain: str) -> tuple[str, str] | None:
        """(frame id, slot name) carrying the rule tree for `domain`, if any."""
        found = None if self.base is None else self.base.tree_owner(domain)
        for frame in self:
            for slot in frame.slots.values():
                if slot.if_needed is not None and slot.if_needed.domain == domain:
                    found = (frame.id, slot.name)
        return found


def validate_kb(kb: FrameSet) -> None:
    """Structural checks: parents resolve acyclically, stored values and rule
    conclusions sit inside their slot's declared range, hints name real slots."""
    cleared: set[str] = set()

    def visit(fid: str, walking: tuple[str, ...]) -> None:
        if fid in walking:
            raise FrameError(f"inheritance cycle through {fid!r}")
        if fid in cleared:
            return
        for parent in kb.get(fid).parents:
            visit(parent, walking + (fid,))
        cleared.add(fid)

    for frame in kb:
        visit(frame.id, ())
    tree_domains: set[str] = set()
    for frame in kb:
        declared = kb.declared_slots(frame.id)
        for slot in frame.slots.values():
            if slot.if_needed is not None:
                domain = slot.if_needed.domain
                if domain != frame.id:
                    raise FrameError(
                        f"tree on {frame.id}.{slot.name} is tagged for domain {domain!r}"
                    )
                if domain in tree_domains:
                    raise FrameError(f"two rule trees share the domain {domain!r}")
                tree_domains.add(domain)
            rng = kb.slot_range(frame.id, slot.name)
            if rng is not None and slot.value is not None and slot.value not in rng:
                raise RangeViolationError(
                    f"{frame.id}.{slot.name} value {slot.value!r} outside range"
                )
            if slot.if_needed is not None and rng is not None:
                stray = slot.if_needed.conclusions() - set(rng)
                if stray:
                    raise RangeViolationError(
                        f"{frame.id}.{slot.name} rules conclude {sorted(stray)} outside range"
                    )
            for hint in slot.if_replaced or ():
                if hint not in declared:
                    raise UndeclaredSlotError(
                        f"{frame.id}.{slot.name} if_replaced names unknown slot {hint!r}"
                    )
