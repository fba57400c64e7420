"""Quantal measures on a finite history space.

A :class:`MeasureSpec` is one of three kinds:

* ``classical``: nonnegative weights per history, ``mu(E) = sum of weights``;
* ``amplitude``: one complex amplitude per history, ``mu(E) = |sum of amps|^2``;
* ``decoherence``: a Hermitian matrix ``D``, ``mu(E) = sum_{g,h in E} Re D[g][h]``.

Values are either exact (``Fraction``, complex numbers as ``(re, im)`` pairs of
fractions) or double precision.  A spec never mixes the two.  In exact mode an
event is precluded only when its measure is literally zero; the ``Epsilon``
tolerance treats ``mu(E) <= eps * mu(Omega)`` as precluded instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

from .errors import (
    MeasureError,
    NotDisjoint,
    NotWeaklyPositive,
    OverCapError,
)
from .events import MAX_HISTORIES, Event, HistorySpace, is_submask, iter_bits, popcount, same_space

DEFAULT_EPSILON = 1e-9
HERMITIAN_RTOL = 1e-12
ORACLE_CAP = 12

Real = Union[Fraction, float]


@dataclass(frozen=True)
class Exact:
    pass


@dataclass(frozen=True)
class Epsilon:
    eps: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.eps >= 0:
            raise MeasureError(f"epsilon must be >= 0, got {self.eps!r}")


Tolerance = Union[Exact, Epsilon]


def parse_real(x) -> tuple[Real, bool]:
    """Parse a real literal, returning ``(value, is_exact)``.

    Integers, ``Fraction`` objects and ``"p/q"`` / integer strings are exact.
    Floats and decimal strings are not.
    """
    if isinstance(x, bool):
        raise MeasureError(f"not a number: {x!r}")
    if isinstance(x, Rational):
        return Fraction(x), True
    if isinstance(x, float):
        if not math.isfinite(x):
            raise MeasureError(f"non-finite value {x!r}")
        return x, False
    if isinstance(x, str):
        s = x.strip()
        try:
            if any(ch in s for ch in ".eE") or s.lower() in ("inf", "-inf", "nan"):
                v = float(s)
                if not math.isfinite(v):
                    raise MeasureError(f"non-finite value {x!r}")
                return v, False
            return Fraction(s), True
        except (ValueError, ZeroDivisionError):
            raise MeasureError(f"cannot parse number {x!r}") from None
    raise MeasureError(f"not a number: {x!r}")


def parse_complex(x) -> tuple[tuple[Real, Real], bool]:
    """Complex literal: a real, a Python ``complex`` or a ``[re, im]`` pair."""
    if isinstance(x, complex):
        return (x.real, x.imag), False
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise MeasureError(f"complex values are [re, im] pairs, got {x!r}")
        (re, e1), (im, e2) = parse_real(x[0]), parse_real(x[1])
        return (re, im), e1 and e2
    v, exact = parse_real(x)
    return (v, Fraction(0) if exact else 0.0), exact


def _as_float(v):
    return float(v) if isinstance(v, Fraction) else v


def _lcm_denominators(values: Sequence[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v.denominator)
    return out


@dataclass(frozen=True)
class _Kernel:
    """Measure data rescaled for fast sweeps.

    ``raw`` values are integers in exact mode (all inputs multiplied by a common
    denominator) and floats otherwise; ``mu = raw_value / scale``.
    """

    kind: str
    n: int
    weights: tuple = ()       # classical
    amp_re: tuple = ()        # amplitude
    amp_im: tuple = ()
    cols: tuple = ()          # decoherence: cols[h][g] = Re D[g][h]
    scale: object = 1
    negative_tol: float = 0.0

    def raw(self, mask: int):
        if self.kind == "classical":
            return sum(self.weights[i] for i in iter_bits(mask))
        if self.kind == "amplitude":
            sr = sum(self.amp_re[i] for i in iter_bits(mask))
            si = sum(self.amp_im[i] for i in iter_bits(mask))
            return sr * sr + si * si
        idx = list(iter_bits(mask))
        return sum(self.cols[h][g] for h in idx for g in idx)


@dataclass(frozen=True)
class MeasureSpec:
    space: HistorySpace
    kind: str
    data: tuple
    exact: bool
    tolerance: Tolerance = field(default=None)

    def __post_init__(self):
        if self.kind not in ("classical", "amplitude", "decoherence"):
            raise MeasureError(f"unknown measure kind {self.kind!r}")
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", Exact() if self.exact else Epsilon())
        object.__setattr__(self, "_kernel", self._build_kernel())

    # -- constructors ----------------------------------------------------

    @classmethod
    def classical(cls, space: HistorySpace, weights, tolerance: Tolerance | None = None) -> MeasureSpec:
        if len(weights) != space.size:
            raise MeasureError(f"expected {space.size} weights, got {len(weights)}")
        parsed = [parse_real(w) for w in weights]
        exact = all(e for _, e in parsed)
        vals = tuple(v if exact else _as_float(v) for v, _ in parsed)
        for lab, v in zip(space.labels, vals):
            if v < 0:
                raise MeasureError(f"classical weight of {lab!r} is negative")
        return cls(space, "classical", vals, exact, tolerance)

    @classmethod
    def amplitude(cls, space: HistorySpace, amps, tolerance: Tolerance | None = None) -> MeasureSpec:
        if len(amps) != space.size:
            raise MeasureError(f"expected {space.size} amplitudes, got {len(amps)}")
        parsed = [parse_complex(a) for a in amps]
        exact = all(e for _, e in parsed)
        vals = tuple(v if exact else (_as_float(v[0]), _as_float(v[1])) for v, _ in parsed)
        return cls(space, "amplitude", vals, exact, tolerance)

    @classmethod
    def decoherence(cls, space: HistorySpace, matrix, tolerance: Tolerance | None = None) -> MeasureSpec:
        """Decoherence-matrix spec.  Hermiticity is not enforced here; see :func:`validate`."""
        n = space.size
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise MeasureError(f"decoherence matrix must be {n}x{n}")
        parsed = [[parse_complex(x) for x in row] for row in matrix]
        exact = all(e for row in parsed for _, e in row)
        vals = tuple(
            tuple(v if exact else (_as_float(v[0]), _as_float(v[1])) for v, _ in row) for row in parsed
        )
        return cls(space, "decoherence", vals, exact, tolerance)

    # -- internals -------------------------------------------------------

    def _build_kernel(self) -> _Kernel:
        n = self.space.size
        if self.kind == "classical":
            if self.exact:
                scale = _lcm_denominators(self.data)
                w = tuple(int(v * scale) for v in self.data)
                return _Kernel("classical", n, weights=w, scale=scale)
            tol = HERMITIAN_RTOL * max(sum(self.data), 1.0)
            return _Kernel("classical", n, weights=self.data, scale=1.0, negative_tol=tol)
        if self.kind == "amplitude":
            if self.exact:
                d = _lcm_denominators([x for a in self.data for x in a])
                re = tuple(int(a[0] * d) for a in self.data)
                im = tuple(int(a[1] * d) for a in self.data)
                return _Kernel("amplitude", n, amp_re=re, amp_im=im, scale=d * d)
            re = tuple(a[0] for a in self.data)
            im = tuple(a[1] for a in self.data)
            return _Kernel("amplitude", n, amp_re=re, amp_im=im, scale=1.0)
        # Re D is symmetric for Hermitian D; the imaginary parts cancel in the double sum.
        if self.exact:
            d = _lcm_denominators([x[0] for row in self.data for x in row])
            cols = tuple(tuple(int(self.data[g][h][0] * d) for g in range(n)) for h in range(n))
            return _Kernel("decoherence", n, cols=cols, scale=d)
        cols = tuple(tuple(self.data[g][h][0] for g in range(n)) for h in range(n))
        size = sum(abs(x) for c in cols for x in c)
        return _Kernel("decoherence", n, cols=cols, scale=1.0, negative_tol=HERMITIAN_RTOL * max(size, 1.0))

    @property
    def kernel(self) -> _Kernel:
        return self._kernel

    def value(self, raw) -> Real:
        if self.exact:
            return Fraction(raw, self._kernel.scale)
        return raw / self._kernel.scale

    def _raw_threshold(self, raw_omega):
        if isinstance(self.tolerance, Exact):
            return None
        if self.exact:
            return Fraction(self.tolerance.eps) * raw_omega
        return self.tolerance.eps * raw_omega

    def as_decoherence(self) -> MeasureSpec:
        """Equivalent decoherence-matrix spec (rank one for amplitudes, diagonal for weights)."""
        n = self.space.size
        zero = Fraction(0) if self.exact else 0.0
        if self.kind == "decoherence":
            return self
        if self.kind == "classical":
            mat = [[(self.data[i], zero) if i == j else (zero, zero) for j in range(n)] for i in range(n)]
        else:
            mat = []
            for a in self.data:
                row = []
                for b in self.data:
                    # a * conj(b)
                    row.append((a[0] * b[0] + a[1] * b[1], a[1] * b[0] - a[0] * b[1]))
                mat.append(row)
        return MeasureSpec(self.space, "decoherence", tuple(tuple(r) for r in mat), self.exact, self.tolerance)


def _check_space(spec: MeasureSpec, e: Event) -> None:
    same_space(spec.space, e.space)


def mu(spec: MeasureSpec, e: Event) -> Real:
    """Quantal measure of ``e`` by direct summation."""
    _check_space(spec, e)
    raw = spec.kernel.raw(e.mask)
    if raw < -spec.kernel.negative_tol:
        raise NotWeaklyPositive(f"mu({e.label()}) = {spec.value(raw)} < 0", witness=e)
    v = spec.value(raw)
    return max(v, 0.0) if not spec.exact and v < 0 else v


def mu_omega(spec: MeasureSpec) -> Real:
    return mu(spec, spec.space.omega)


def is_precluded(spec: MeasureSpec, e: Event) -> bool:
    _check_space(spec, e)
    raw = spec.kernel.raw(e.mask)
    thr = spec._raw_threshold(spec.kernel.raw(spec.space.full_mask))
    return raw == 0 if thr is None else raw <= thr


# -- Gray-code sweep -------------------------------------------------------


def gray(i: int) -> int:
    return i ^ (i >> 1)


def _sweep_range(kernel: _Kernel, threshold, lo: int, hi: int):
    """Walk Gray-code indices ``lo..hi-1`` and collect precluded masks.

    Returns ``(precluded, negative)`` where ``negative`` is the first mask
    (in walk order) whose measure fell below the negativity tolerance.
    """
    exact_zero = threshold is None
    neg_tol = kernel.negative_tol
    out: list[int] = []
    negative = None
    if lo >= hi:
        return out, negative
    mask = gray(lo)
    kind = kernel.kind

    if kind == "classical":
        w = kernel.weights
        raw = kernel.raw(mask)
    elif kind == "amplitude":
        are, aim = kernel.amp_re, kernel.amp_im
        sr = sum(are[i] for i in iter_bits(mask))
        si = sum(aim[i] for i in iter_bits(mask))
        raw = sr * sr + si * si
    else:
        cols = kernel.cols
        n = kernel.n
        # run[h] = sum over g in E of Re D[g][h]
        run = [sum(cols[h][g] for g in iter_bits(mask)) for h in range(n)]
        raw = sum(run[h] for h in iter_bits(mask))

    i = lo
    while True:
        if exact_zero:
            if raw == 0:
                out.append(mask)
        elif raw <= threshold:
            out.append(mask)
        if raw < -neg_tol and negative is None:
            negative = mask
        i += 1
        if i >= hi:
            break
        h = (i & -i).bit_length() - 1
        bit = 1 << h
        adding = not mask & bit
        mask ^= bit
        if kind == "classical":
            raw = raw + w[h] if adding else raw - w[h]
        elif kind == "amplitude":
            if adding:
                sr += are[h]
                si += aim[h]
            else:
                sr -= are[h]
                si -= aim[h]
            raw = sr * sr + si * si
        else:
            col = cols[h]
            if adding:
                raw += 2 * run[h] + col[h]
                run = [r + c for r, c in zip(run, col)]
            else:
                raw += col[h] - 2 * run[h]
                run = [r - c for r, c in zip(run, col)]
    return out, negative


def _split_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step = -(-total // parts)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def sweep(spec: MeasureSpec, workers: int = 1, cap: int = MAX_HISTORIES) -> tuple[list[int], int | None]:
    """Precluded masks (ascending) and the smallest negative-measure mask, if any."""
    n = spec.space.size
    if n > cap:
        raise OverCapError(f"{n} histories exceeds the cap of {cap}")
    kernel = spec.kernel
    threshold = spec._raw_threshold(kernel.raw(spec.space.full_mask))
    ranges = _split_ranges(1 << n, workers)
    if len(ranges) == 1:
        results = [_sweep_range(kernel, threshold, *ranges[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(ranges)) as pool:
            futs = [pool.submit(_sweep_range, kernel, threshold, lo, hi) for lo, hi in ranges]
            results = [f.result() for f in futs]
    precluded = sorted(m for part, _ in results for m in part)
    negatives = [neg for _, neg in results if neg is not None]
    return precluded, (min(negatives) if negatives else None)


# -- null structure --------------------------------------------------------


def maximal_antichain(masks) -> list[int]:
    """Inclusion-maximal members of ``masks``, in ascending order."""
    kept: list[int] = []
    for m in sorted(set(masks), key=lambda x: (-popcount(x), x)):
        if not any(is_submask(m, k) for k in kept):
            kept.append(m)
    return sorted(kept)


@dataclass(frozen=True)
class NullStructure:
    space: HistorySpace
    precluded_masks: tuple[int, ...]
    maximal_masks: tuple[int, ...]

    @classmethod
    def from_masks(cls, space: HistorySpace, masks) -> NullStructure:
        ms = set(masks)
        ms.add(0)
        return cls(space, tuple(sorted(ms)), tuple(maximal_antichain(ms)))

    @classmethod
    def from_events(cls, space: HistorySpace, events) -> NullStructure:
        events = list(events)
        same_space(space, *(e.space for e in events))
        return cls.from_masks(space, [e.mask for e in events])

    @property
    def precluded(self) -> list[Event]:
        return [Event(self.space, m) for m in self.precluded_masks]

    @property
    def maximal(self) -> list[Event]:
        return [Event(self.space, m) for m in self.maximal_masks]

    def covers(self, mask: int) -> bool:
        """True when ``mask`` lies inside some precluded event."""
        return any(is_submask(mask, z) for z in self.maximal_masks)

    @property
    def omega_precluded(self) -> bool:
        return self.space.full_mask in self.maximal_masks


def enumerate_precluded(spec: MeasureSpec, workers: int = 1, cap: int = MAX_HISTORIES) -> NullStructure:
    precluded, negative = sweep(spec, workers=workers, cap=cap)
    if negative is not None:
        e = Event(spec.space, negative)
        raise NotWeaklyPositive(f"mu({e.label()}) < 0", witness=e)
    return NullStructure.from_masks(spec.space, precluded)


def naive_precluded(spec: MeasureSpec) -> list[int]:
    """Precluded masks by direct summation over every event (oracle for :func:`sweep`)."""
    if spec.space.size > ORACLE_CAP:
        raise OverCapError(f"direct-summation oracle is limited to {ORACLE_CAP} histories")
    return [m for m in range(1 << spec.space.size) if is_precluded(spec, Event(spec.space, m))]


# -- validation -----------------------------------------------------------


@dataclass
class ValidationReport:
    hermitian: bool = True
    hermitian_witness: tuple[int, int] | None = None
    weakly_positive: bool = True
    positivity_witness: Event | None = None
    within_cap: bool = True

    @property
    def ok(self) -> bool:
        return self.hermitian and self.weakly_positive and self.within_cap

    def errors(self) -> list[str]:
        out = []
        if not self.within_cap:
            out.append("history count exceeds the enumeration cap")
        if not self.hermitian:
            i, j = self.hermitian_witness
            out.append(f"decoherence matrix is not Hermitian at entry ({i}, {j})")
        if not self.weakly_positive:
            out.append(f"measure is negative on {self.positivity_witness.label()}")
        return out


def _hermitian_witness(spec: MeasureSpec) -> tuple[int, int] | None:
    d = spec.data
    n = spec.space.size
    if spec.exact:
        tol = 0
    else:
        biggest = max((abs(complex(*x)) for row in d for x in row), default=0.0)
        tol = HERMITIAN_RTOL * max(biggest, 1.0)
    for i in range(n):
        for j in range(i, n):
            a, b = d[i][j], d[j][i]
            # a must equal conj(b)
            if abs(a[0] - b[0]) > tol or abs(a[1] + b[1]) > tol:
                return (j, i)
    return None


def validate(spec: MeasureSpec, cap: int = MAX_HISTORIES) -> ValidationReport:
    rep = ValidationReport()
    if spec.kind == "decoherence":
        w = _hermitian_witness(spec)
        if w is not None:
            rep.hermitian = False
            rep.hermitian_witness = w
    if spec.space.size > cap:
        rep.within_cap = False
        return rep
    _, negative = sweep(spec, cap=cap)
    if negative is not None:
        # report the canonical (smallest) witness, not the first one in walk order
        k = spec.kernel
        first = next(m for m in range(1 << spec.space.size) if k.raw(m) < -k.negative_tol)
        rep.weakly_positive = False
        rep.positivity_witness = Event(spec.space, first)
    return rep


# -- interference ---------------------------------------------------------


def _pairwise_disjoint(*events: Event) -> None:
    for i, a in enumerate(events):
        for b in events[i + 1:]:
            if a.mask & b.mask:
                raise NotDisjoint(f"{a.label()} and {b.label()} overlap")


def interference2(spec: MeasureSpec, a: Event, b: Event) -> Real:
    same_space(spec.space, a.space, b.space)
    _pairwise_disjoint(a, b)
    return mu(spec, a | b) - mu(spec, a) - mu(spec, b)


def interference3(spec: MeasureSpec, a: Event, b: Event, c: Event) -> Real:
    same_space(spec.space, a.space, b.space, c.space)
    _pairwise_disjoint(a, b, c)
    m = lambda e: mu(spec, e)
    return m(a | b | c) - m(a | b) - m(b | c) - m(a | c) + m(a) + m(b) + m(c)
