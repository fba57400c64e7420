"""Multiplicative coevents and the classical-logic checkers.

A multiplicative coevent ``F*`` is fixed by its support ``F``: it affirms an
event exactly when the event contains ``F``.  ``F*`` is preclusive when ``F``
lies inside no precluded event, and primitive when ``F`` is minimal with that
property.  Primitive supports are therefore the minimal hitting sets of the
hypergraph whose edges are the complements of the maximal precluded events;
:func:`enumerate_primitives` finds them by branch and bound and
:func:`brute_force_primitives` re-derives them by scanning every subset.

Why single deletions decide primitivity: "F lies inside no precluded event" is
upward closed in F, so if some proper subset F' of F were still free, every set
between F' and F would be too, in particular some F minus one history.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NotPreclusive, OverCapError, QuantalError, TotalPreclusion
from .events import MAX_HISTORIES, Event, HistorySpace, is_submask, iter_bits, popcount, same_space
from .measure import ORACLE_CAP, NullStructure

EXHAUSTIVE_PAIR_CAP = 10
RANDOM_PAIRS = 20000


@dataclass(frozen=True)
class Coevent:
    space: HistorySpace
    support_mask: int

    def __post_init__(self):
        if self.support_mask == 0:
            raise QuantalError("a multiplicative coevent needs a nonempty support")
        if self.support_mask >> self.space.size:
            raise QuantalError("support has bits outside the history space")

    @classmethod
    def of(cls, support: Event) -> Coevent:
        return cls(support.space, support.mask)

    @property
    def support(self) -> Event:
        return Event(self.space, self.support_mask)

    def __call__(self, a: Event) -> int:
        return evaluate(self, a)

    def __repr__(self) -> str:
        return f"Coevent({self.support.label()}*)"


@dataclass(frozen=True)
class PrimitiveSet:
    nulls: NullStructure
    primitives: tuple[Coevent, ...]

    @property
    def supports(self) -> list[int]:
        return [p.support_mask for p in self.primitives]

    def __len__(self) -> int:
        return len(self.primitives)

    def __iter__(self):
        return iter(self.primitives)


@dataclass(frozen=True)
class Check:
    """Outcome of a checker: ``passed`` plus the offending events on failure."""

    passed: bool
    witness: tuple[Event, ...] = ()
    note: str = ""

    def __bool__(self) -> bool:
        return self.passed


def evaluate(phi: Coevent, a: Event) -> int:
    same_space(phi.space, a.space)
    return 1 if is_submask(phi.support_mask, a.mask) else 0


def is_preclusive(phi: Coevent, nulls: NullStructure) -> bool:
    same_space(phi.space, nulls.space)
    return not nulls.covers(phi.support_mask)


def is_primitive(phi: Coevent, nulls: NullStructure) -> bool:
    if not is_preclusive(phi, nulls):
        raise NotPreclusive(f"{phi!r} affirms a precluded event")
    f = phi.support_mask
    for x in iter_bits(f):
        smaller = f & ~(1 << x)
        if smaller and not nulls.covers(smaller):
            return False
    return True


# -- enumeration ------------------------------------------------------------


def _hyperedges(nulls: NullStructure) -> list[int]:
    full = nulls.space.full_mask
    if nulls.omega_precluded:
        raise TotalPreclusion("the whole history space is precluded; no preclusive coevent exists")
    edges = sorted({full & ~z for z in nulls.maximal_masks}, key=lambda e: (popcount(e), e))
    # an edge containing a smaller edge is hit automatically
    kept: list[int] = []
    for e in edges:
        if not any(is_submask(k, e) for k in kept):
            kept.append(e)
    return kept


def _keeps_private_edges(old: int, new: int, edges: list[int]) -> bool:
    # each member of old still needs an edge that new hits only through it
    for u in iter_bits(old):
        bit = 1 << u
        if not any(e & new == bit for e in edges):
            return False
    return True


def _transversal_dfs(edges: list[int], rank: dict[int, int], start: int, forbidden: int) -> list[int]:
    found: list[int] = []

    def dfs(s: int, forb: int) -> None:
        best = None
        best_cands = 0
        for e in edges:
            if e & s:
                continue
            cands = e & ~forb
            if best is None or popcount(cands) < popcount(best_cands):
                best, best_cands = e, cands
                if cands == 0:
                    return
        if best is None:
            found.append(s)
            return
        for v in sorted(iter_bits(best_cands), key=rank.__getitem__):
            bit = 1 << v
            s2 = s | bit
            if _keeps_private_edges(s, s2, edges):
                dfs(s2, forb)
            forb |= bit

    dfs(start, forbidden)
    return found


def _branches(edges: list[int], rank: dict[int, int]) -> list[tuple[int, int]]:
    """Top-level (partial set, forbidden) pairs; their subtrees partition the search."""
    first = min(edges, key=lambda e: (popcount(e), e))
    out = []
    forb = 0
    for v in sorted(iter_bits(first), key=rank.__getitem__):
        out.append((1 << v, forb))
        forb |= 1 << v
    return out


def minimal_transversals(edges: list[int], n: int, workers: int = 1) -> list[int]:
    """All inclusion-minimal hitting sets of ``edges`` (bit masks over ``n`` vertices), ascending."""
    if not edges:
        return [0]
    freq = [sum(1 for e in edges if e >> v & 1) for v in range(n)]
    order = sorted(range(n), key=lambda v: (-freq[v], v))
    rank = {v: k for k, v in enumerate(order)}
    branches = _branches(edges, rank)
    if workers <= 1 or len(branches) == 1:
        found = [t for s, forb in branches for t in _transversal_dfs(edges, rank, s, forb)]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(branches))) as pool:
            futs = [pool.submit(_transversal_dfs, edges, rank, s, forb) for s, forb in branches]
            found = [t for f in futs for t in f.result()]
    return sorted(found)


def enumerate_primitives(nulls: NullStructure, workers: int = 1, cap: int = MAX_HISTORIES) -> PrimitiveSet:
    space = nulls.space
    space.check_cap(cap)
    edges = _hyperedges(nulls)
    supports = minimal_transversals(edges, space.size, workers=workers)
    return PrimitiveSet(nulls, tuple(Coevent(space, m) for m in supports))


def brute_force_primitives(nulls: NullStructure) -> PrimitiveSet:
    """Scan every nonempty subset; keep the free ones that have no free proper subset."""
    space = nulls.space
    if space.size > ORACLE_CAP:
        raise OverCapError(f"brute-force oracle is limited to {ORACLE_CAP} histories")
    if nulls.omega_precluded:
        raise TotalPreclusion("the whole history space is precluded; no preclusive coevent exists")
    maximal = nulls.maximal_masks
    free = [m for m in range(1, 1 << space.size) if not any(m & ~z == 0 for z in maximal)]
    free.sort(key=lambda m: (popcount(m), m))
    minimal: list[int] = []
    for m in free:
        if not any(k & ~m == 0 for k in minimal):
            minimal.append(m)
    return PrimitiveSet(nulls, tuple(Coevent(space, m) for m in sorted(minimal)))


# -- classical-logic checkers ------------------------------------------------


def _values(phi: Coevent) -> np.ndarray:
    masks = np.arange(1 << phi.space.size, dtype=np.int64)
    return (masks & phi.support_mask) == phi.support_mask


def _pairs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray, bool]:
    size = 1 << n
    if n <= EXHAUSTIVE_PAIR_CAP:
        a, b = np.meshgrid(np.arange(size, dtype=np.int64), np.arange(size, dtype=np.int64), indexing="ij")
        return a.ravel(), b.ravel(), True
    rng = np.random.default_rng(seed)
    a = rng.integers(0, size, RANDOM_PAIRS, dtype=np.int64)
    b = rng.integers(0, size, RANDOM_PAIRS, dtype=np.int64)
    return a, b, False


def _first(bad: np.ndarray) -> int | None:
    idx = np.flatnonzero(bad)
    return int(idx[0]) if idx.size else None


def is_homomorphic(phi: Coevent, nulls: NullStructure | None = None, seed: int = 0) -> Check:
    """Test the unital Boolean homomorphism conditions directly on events.

    Complements are checked on every event; intersections on every pair when
    ``N <= 10`` and on a seeded random sample of pairs otherwise.
    """
    space = phi.space
    if nulls is not None:
        same_space(space, nulls.space)
    full = space.full_mask
    v = _values(phi)
    ev = lambda m: Event(space, int(m))
    if not v[full]:
        return Check(False, (space.omega,), "phi(Omega) = 0")
    masks = np.arange(1 << space.size, dtype=np.int64)
    bad = v[full & ~masks] == v
    i = _first(bad)
    if i is not None:
        return Check(False, (ev(i),), "phi(A) and phi(not A) agree")
    a, b, exhaustive = _pairs(space.size, seed)
    i = _first(v[a & b] != (v[a] & v[b]))
    if i is not None:
        return Check(False, (ev(a[i]), ev(b[i])), "phi(A and B) != phi(A) phi(B)")
    return Check(True, note="" if exhaustive else "pairs sampled")


@dataclass(frozen=True)
class RuleReport:
    r1a: Check
    r1b: Check
    r1c: Check
    multiplicativity: Check
    monotonicity: Check
    exhaustive: bool = True
    preclusive: bool | None = None

    def as_dict(self) -> dict[str, Check]:
        return {
            "r1a": self.r1a,
            "r1b": self.r1b,
            "r1c": self.r1c,
            "multiplicativity": self.multiplicativity,
            "monotonicity": self.monotonicity,
        }


def check_rules(phi: Coevent, nulls: NullStructure | None = None, seed: int = 0) -> RuleReport:
    """Evaluate modus ponens (1a), negation (1b), phi(0)=0 (1c), multiplicativity and monotonicity."""
    space = phi.space
    full = space.full_mask
    v = _values(phi)
    masks = np.arange(1 << space.size, dtype=np.int64)
    a, b, exhaustive = _pairs(space.size, seed)
    ev = lambda m: Event(space, int(m))

    def pair_check(bad) -> Check:
        i = _first(bad)
        return Check(True) if i is None else Check(False, (ev(a[i]), ev(b[i])))

    implication = (full & ~a) | b
    r1a = pair_check(v[a] & v[implication] & ~v[b])
    i = _first(~v & ~v[full & ~masks])
    r1b = Check(True) if i is None else Check(False, (ev(i),), "phi(A) = 0 and phi(not A) = 0")
    r1c = Check(True) if not v[0] else Check(False, (space.empty,))
    mult = pair_check(v[a & b] != (v[a] & v[b]))
    subset = (a & ~b) == 0
    mono = pair_check(subset & v[a] & ~v[b])
    preclusive = None if nulls is None else is_preclusive(phi, nulls)
    return RuleReport(r1a, r1b, r1c, mult, mono, exhaustive, preclusive)


def affirmed_filter(phi: Coevent) -> list[Event]:
    """Every event containing the support (the principal filter of F), ascending."""
    f = phi.support_mask
    rest = phi.space.full_mask & ~f
    out = []
    bits = list(iter_bits(rest))
    for j in range(1 << len(bits)):
        m = f
        for k, bpos in enumerate(bits):
            if j >> k & 1:
                m |= 1 << bpos
        out.append(m)
    return [Event(phi.space, m) for m in sorted(out)]


def is_maximal_preclusive_filter(events, nulls: NullStructure, cap: int = EXHAUSTIVE_PAIR_CAP) -> bool:
    """Check the filter clauses, preclusivity and maximality of a family of events."""
    space = nulls.space
    if space.size > cap:
        raise OverCapError(f"exhaustive filter checks are limited to {cap} histories")
    events = list(events)
    same_space(space, *(e.space for e in events))
    fam = {e.mask for e in events}
    if not fam:
        return False
    for x in fam:
        for y in fam:
            if x & y not in fam:
                return False
    for x in fam:
        for i in range(space.size):
            if x | (1 << i) not in fam:
                return False
    precluded = set(nulls.precluded_masks)
    if fam & precluded:
        return False
    # a finite filter is principal; enlarging it by E adds everything above (least & E)
    least = space.full_mask
    for x in fam:
        least &= x
    for e in range(1 << space.size):
        if e in fam:
            continue
        if not nulls.covers(least & e):
            return False
    return True
