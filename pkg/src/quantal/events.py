"""Finite Boolean event algebra over a labelled history space.

Events are stored as integer bit masks: bit ``i`` is set when history ``i``
(in the order the labels were given) belongs to the event.  Every event keeps
a reference to its space and refuses to combine with events from another one.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import MixedSpaceError, OverCapError, PartitionError, SpaceError

MAX_HISTORIES = 20


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def iter_submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` in ascending numeric order (including 0)."""
    bits = list(iter_bits(mask))
    for j in range(1 << len(bits)):
        sub = 0
        for k, b in enumerate(bits):
            if j >> k & 1:
                sub |= 1 << b
        yield sub


def is_submask(a: int, b: int) -> bool:
    return a & ~b == 0


@dataclass(frozen=True)
class HistorySpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise SpaceError("history space needs at least one history")
        for lab in self.labels:
            if not isinstance(lab, str) or not lab:
                raise SpaceError(f"history labels must be nonempty strings, got {lab!r}")
        dups = [lab for lab, n in Counter(self.labels).items() if n > 1]
        if dups:
            raise SpaceError(f"duplicate history label {dups[0]!r}")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.labels)) - 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SpaceError(f"unknown history label {label!r}") from None

    def event(self, members: Iterable[str | int] = ()) -> Event:
        """Build an event from labels and/or indices."""
        mask = 0
        for m in members:
            i = m if isinstance(m, int) else self.index(m)
            if not 0 <= i < self.size:
                raise SpaceError(f"history index {i} out of range")
            mask |= 1 << i
        return Event(self, mask)

    def from_mask(self, mask: int) -> Event:
        return Event(self, mask)

    @property
    def empty(self) -> Event:
        return Event(self, 0)

    @property
    def omega(self) -> Event:
        return Event(self, self.full_mask)

    def all_events(self) -> list[Event]:
        return [Event(self, m) for m in range(1 << self.size)]

    def check_cap(self, cap: int = MAX_HISTORIES) -> None:
        if self.size > cap:
            raise OverCapError(f"{self.size} histories exceeds the cap of {cap}")


def make_space(labels: Sequence[str], cap: int = MAX_HISTORIES) -> HistorySpace:
    if len(labels) > cap:
        raise OverCapError(f"{len(labels)} histories exceeds the cap of {cap}")
    return HistorySpace(tuple(labels))


def same_space(*spaces: HistorySpace) -> HistorySpace:
    first = spaces[0]
    for s in spaces[1:]:
        if s is not first and s != first:
            raise MixedSpaceError("operands belong to different history spaces")
    return first


@dataclass(frozen=True)
class Event:
    space: HistorySpace
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.space.size:
            raise SpaceError(f"mask {self.mask:#x} has bits outside a space of size {self.space.size}")

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(self.space.labels[i] for i in iter_bits(self.mask))

    def __len__(self) -> int:
        return popcount(self.mask)

    def __contains__(self, label: str) -> bool:
        return bool(self.mask >> self.space.index(label) & 1)

    def __or__(self, other: Event) -> Event:
        return union(self, other)

    def __and__(self, other: Event) -> Event:
        return intersect(self, other)

    def __xor__(self, other: Event) -> Event:
        return symmetric_difference(self, other)

    def __invert__(self) -> Event:
        return complement(self)

    def __le__(self, other: Event) -> bool:
        return is_subset(self, other)

    def label(self) -> str:
        """Compact display form, e.g. ``{A,C}``."""
        return "{" + ",".join(self.members) + "}"

    def __repr__(self) -> str:
        return f"Event({self.label()})"


def union(a: Event, b: Event) -> Event:
    return Event(same_space(a.space, b.space), a.mask | b.mask)


def intersect(a: Event, b: Event) -> Event:
    return Event(same_space(a.space, b.space), a.mask & b.mask)


def complement(a: Event) -> Event:
    return Event(a.space, a.space.full_mask & ~a.mask)


def symmetric_difference(a: Event, b: Event) -> Event:
    return Event(same_space(a.space, b.space), a.mask ^ b.mask)


def implies_event(a: Event, b: Event) -> Event:
    """The material implication ``not a or b`` as an event."""
    return union(complement(a), b)


def is_subset(a: Event, b: Event) -> bool:
    same_space(a.space, b.space)
    return is_submask(a.mask, b.mask)


@dataclass(frozen=True)
class Partition:
    space: HistorySpace
    blocks: tuple[Event, ...]

    def __post_init__(self):
        seen = 0
        for blk in self.blocks:
            same_space(self.space, blk.space)
            if blk.mask == 0:
                raise PartitionError("partition blocks must be nonempty")
            if blk.mask & seen:
                raise PartitionError(f"block {blk.label()} overlaps an earlier block")
            seen |= blk.mask
        if seen != self.space.full_mask:
            raise PartitionError("partition blocks do not cover the history space")
        ordered = tuple(sorted(self.blocks, key=lambda e: (e.mask & -e.mask)))
        object.__setattr__(self, "blocks", ordered)

    @classmethod
    def from_labels(cls, space: HistorySpace, blocks: Iterable[Iterable[str]]) -> Partition:
        return cls(space, tuple(space.event(b) for b in blocks))

    @classmethod
    def trivial(cls, space: HistorySpace) -> Partition:
        return cls(space, (space.omega,))

    @classmethod
    def discrete(cls, space: HistorySpace) -> Partition:
        return cls(space, tuple(Event(space, 1 << i) for i in range(space.size)))

    def block_of(self, mask: int) -> Event | None:
        """The block containing every history of ``mask``, if there is one."""
        for blk in self.blocks:
            if is_submask(mask, blk.mask):
                return blk
        return None


@dataclass(frozen=True)
class Subalgebra:
    partition: Partition

    @property
    def space(self) -> HistorySpace:
        return self.partition.space

    def masks(self) -> list[int]:
        blocks = [b.mask for b in self.partition.blocks]
        out = []
        for pattern in range(1 << len(blocks)):
            m = 0
            for k, bm in enumerate(blocks):
                if pattern >> k & 1:
                    m |= bm
            out.append(m)
        return out

    def __contains__(self, e: Event) -> bool:
        same_space(self.space, e.space)
        return all(is_submask(b.mask, e.mask) or not (b.mask & e.mask) for b in self.partition.blocks)


def subalgebra_events(s: Subalgebra | Partition) -> list[Event]:
    """All unions of partition blocks, indexed by block-inclusion bit pattern."""
    if isinstance(s, Partition):
        s = Subalgebra(s)
    return [Event(s.space, m) for m in s.masks()]
