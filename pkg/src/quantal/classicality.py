"""Restriction of coevents to coarse-grained subalgebras, and the separability conditions.

The two sufficient conditions checked here:

* bipartition condition: an event is precluded iff both of its pieces
  (intersections with the two sides) are precluded;
* local condition on a side ``S``: whenever ``A <= S`` lies inside some
  precluded event, it already lies inside a precluded event contained in ``S``.

When the first holds, or the second holds for both sides, every primitive
support should sit inside one side.  These functions check instances; they
prove nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coevents import Check, Coevent, PrimitiveSet, evaluate
from .errors import PartitionError, QuantalError
from .events import MAX_HISTORIES, Event, HistorySpace, Partition, Subalgebra, is_submask, same_space
from .measure import MeasureSpec, NullStructure, enumerate_precluded


@dataclass(frozen=True)
class Bipartition:
    space: HistorySpace
    omega1: Event
    omega2: Event

    def __post_init__(self):
        same_space(self.space, self.omega1.space, self.omega2.space)
        if not self.omega1.mask or not self.omega2.mask:
            raise PartitionError("both sides of a bipartition must be nonempty")
        if self.omega1.mask & self.omega2.mask:
            raise PartitionError("bipartition sides overlap")
        if self.omega1.mask | self.omega2.mask != self.space.full_mask:
            raise PartitionError("bipartition sides do not cover the history space")

    @classmethod
    def from_side(cls, side: Event) -> Bipartition:
        return cls(side.space, side, ~side)

    def as_partition(self) -> Partition:
        return Partition(self.space, (self.omega1, self.omega2))


@dataclass(frozen=True)
class RestrictionReport:
    coevent: Coevent
    partition: Partition
    classical: bool
    containing_block: Event | None
    witness: Event | None = None


def restrict_and_check(phi: Coevent, p: Partition) -> RestrictionReport:
    """Is ``phi`` restricted to the block-union subalgebra a unital homomorphism?

    Decided twice, once by brute force over the subalgebra and once by asking
    whether the support fits inside a single block.  Disagreement is a bug.
    """
    space = same_space(phi.space, p.space)
    sub = Subalgebra(p).masks()
    val = {m: evaluate(phi, Event(space, m)) for m in sub}
    full = space.full_mask
    witness = None
    direct = val[full] == 1
    if direct:
        for m in sub:
            if val[full & ~m] == val[m]:
                witness = Event(space, m)
                direct = False
                break
    if direct:
        direct = all(val[x & y] == val[x] * val[y] for x in sub for y in sub)
    block = p.block_of(phi.support_mask)
    if direct != (block is not None):
        raise QuantalError(f"restriction check disagrees with the support criterion for {phi!r}")
    return RestrictionReport(phi, p, direct, block, witness)


def _nulls(source: MeasureSpec | NullStructure, cap: int) -> NullStructure:
    if isinstance(source, NullStructure):
        source.space.check_cap(cap)
        return source
    return enumerate_precluded(source, cap=cap)


def precluded_table(nulls: NullStructure) -> np.ndarray:
    table = np.zeros(1 << nulls.space.size, dtype=bool)
    table[list(nulls.precluded_masks)] = True
    return table


def superset_any(table: np.ndarray, n: int) -> np.ndarray:
    """``out[m]`` is true when ``table`` is true at some superset of ``m``."""
    out = table.copy()
    for i in range(n):
        bit = 1 << i
        view = out.reshape(-1, 2, bit)
        view[:, 0, :] |= view[:, 1, :]
    return out


def check_theorem1_condition(source: MeasureSpec | NullStructure, b: Bipartition, cap: int = MAX_HISTORIES) -> Check:
    """Precluded(A) iff precluded(A & side1) and precluded(A & side2), for every event A."""
    nulls = _nulls(source, cap)
    space = same_space(nulls.space, b.space)
    pre = precluded_table(nulls)
    masks = np.arange(1 << space.size, dtype=np.int64)
    bad = pre != (pre[masks & b.omega1.mask] & pre[masks & b.omega2.mask])
    idx = np.flatnonzero(bad)
    if idx.size:
        return Check(False, (Event(space, int(idx[0])),))
    return Check(True)


def check_theorem2_condition(source: MeasureSpec | NullStructure, s: Event, cap: int = MAX_HISTORIES) -> Check:
    """Every A <= s lying in a precluded event also lies in a precluded C with C <= s."""
    nulls = _nulls(source, cap)
    space = same_space(nulls.space, s.space)
    n = space.size
    pre = precluded_table(nulls)
    masks = np.arange(1 << n, dtype=np.int64)
    inside = (masks & ~s.mask) == 0
    anywhere = superset_any(pre, n)
    local = superset_any(pre & inside, n)
    idx = np.flatnonzero(inside & anywhere & ~local)
    if idx.size:
        return Check(False, (Event(space, int(idx[0])),))
    return Check(True)


def verify_separability(prims: PrimitiveSet, b: Bipartition) -> Check:
    """Every primitive support lies inside one side of ``b``; failures list the straddling supports."""
    space = same_space(prims.nulls.space, b.space)
    bad = tuple(
        Event(space, f)
        for f in prims.supports
        if not (is_submask(f, b.omega1.mask) or is_submask(f, b.omega2.mask))
    )
    return Check(not bad, bad)
