"""Sequence spaces ``S(m)`` with ultrametric ``alpha(v(x, y))`` and their dimensions.

Covering numbers, ball masses and the dimension sequences are evaluated by
closed formulas in the log domain, so they remain exact at scales no float
can hold.  :func:`enumerate_space` materializes a finite truncation for
cross-checking against the generic oracles of :mod:`cantorgh.metric`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from ..metric import FiniteMetricSpace, SizeError
from . import numbers as nb
from .sequences import BranchingSequence, Log2Radius, ShrinkingSequence

ENUMERATION_LIMIT = 10 ** 6
INF = math.inf


@dataclass(frozen=True)
class CantorSpec:
    """``S(m)`` with the ultrametric ``alpha(v(x, y))``, truncated at ``depth``."""

    m: BranchingSequence
    alpha: ShrinkingSequence
    depth: int = 8

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be at least 1")

    @property
    def point_count_log2(self):
        return self.m.S(self.depth - 1)

    @property
    def enumerable(self) -> bool:
        s = self.point_count_log2
        return nb.le(s, nb.log2(Fraction(ENUMERATION_LIMIT)))

    def with_depth(self, depth: int) -> "CantorSpec":
        return CantorSpec(self.m, self.alpha, depth)

    def snowflake(self, gamma) -> "CantorSpec":
        return CantorSpec(self.m, self.alpha.snowflake(gamma), self.depth)

    def shifted(self, k: int) -> "CantorSpec":
        m = self.m
        shifted_m = BranchingSequence(L=lambda n: m.L(n + k), descriptor=f"shift{k}({m.descriptor})",
                                      m=(lambda n: m.m(n + k)))
        return CantorSpec(shifted_m, self.alpha.shifted(k), max(1, self.depth - k))


class CountLog(NamedTuple):
    """A covering count with its exact (or 100-bit) base-2 logarithm."""

    count: int | None
    log2: object


def _count(m: BranchingSequence, lo: int, hi: int) -> CountLog:
    log = nb.sub(m.S(hi), m.S(lo - 1)) if hi >= lo else Fraction(0)
    return CountLog(m.product(lo, hi), log)


def covering_formula(spec: CantorSpec, r, truncated: bool = False) -> CountLog:
    """``N(S(m), r) = m_0 ... m_n`` where ``alpha(n+1) <= r < alpha(n)``.

    With ``truncated`` the count is for the depth-``spec.depth`` enumeration
    (indices capped at ``depth - 1``).
    """
    if isinstance(r, (int, float, Fraction)) and r <= 0:
        raise ValueError("radius must be positive")
    n = spec.alpha.gap(r)
    if truncated:
        n = min(n, spec.depth - 1)
    return _count(spec.m, 0, n)


def ball_covering_formula(spec: CantorSpec, R, r, truncated: bool = False) -> CountLog:
    """``N(B(x, R), r) = m_{n+1} ... m_{n'}`` for ``R`` in gap ``n`` and ``r`` in gap ``n'``.

    The result does not depend on the centre (balls of equal radius are
    isometric).  ``R >= alpha(0)`` is gap ``-1`` (the ball is the whole space).
    """
    n = spec.alpha.gap(R)
    n2 = spec.alpha.gap(r)
    if n2 < n:
        raise ValueError("ball radius R must exceed the covering radius r")
    if truncated:
        n = min(n, spec.depth - 1)
        n2 = min(n2, spec.depth - 1)
    return _count(spec.m, n + 1, n2)


def measure_ball(spec: CantorSpec, n: int) -> Fraction:
    """Mass ``1/(m_0 ... m_n)`` of any ball ``B(x, alpha(n+1))`` under the uniform measure."""
    if n < 0:
        raise ValueError("n must be non-negative")
    p = spec.m.product(0, n)
    if p is None:
        raise OverflowError("mass denominator too large to materialize")
    return Fraction(1, p)


def enumerate_space(spec: CantorSpec, max_points: int = ENUMERATION_LIMIT) -> FiniteMetricSpace:
    """All prefixes of length ``depth`` with distance ``alpha(first disagreement)``.

    Labels are tuples of digits in lexicographic order.  Exact sequences
    yield exact matrices; ``mpf`` scales are rounded to binary64.
    """
    sizes = [spec.m.m(i) for i in range(spec.depth)]
    total = math.prod(sizes)
    if total > max_points or not spec.enumerable:
        raise SizeError(f"enumeration of {total} points exceeds the budget of {max_points}")
    digits = np.array(list(np.ndindex(*sizes)), dtype=np.int64).reshape(total, spec.depth)
    v = np.full((total, total), spec.depth, dtype=np.int64)
    for level in range(spec.depth - 1, -1, -1):
        col = digits[:, level]
        v[col[:, None] != col[None, :]] = level
    values = [spec.alpha.alpha(i) for i in range(spec.depth)]
    if all(isinstance(x, Fraction) for x in values):
        table = np.empty(spec.depth + 1, dtype=object)
        table[:spec.depth] = values
        table[spec.depth] = Fraction(0)
    else:
        table = np.array([nb.to_float(x) for x in values] + [0.0])
    dist = table[v]
    labels = tuple(tuple(int(d) for d in row) for row in digits)
    return FiniteMetricSpace(labels, dist, "ultrametric")


def ball_labels(space: FiniteMetricSpace, center, R) -> list:
    """Labels of the closed ball ``B(center, R)`` in an enumerated space."""
    i = space.index(center)
    row = space.dist[i]
    tol = space.tolerance
    return [lab for lab, d in zip(space.labels, row) if d <= R + tol]


# ---------------------------------------------------------------------------
# Dimension sequences and Assouad estimates
# ---------------------------------------------------------------------------

class DimRow(NamedTuple):
    n: int
    h: object
    p: object


def dim_sequences(spec: CantorSpec, N: int, start: int = 0) -> list[DimRow]:
    """Rows ``(n, h_n, p_n)`` with ``h_n = S(n)/E(n+1)`` and ``p_n = S(n)/E(n)``.

    ``S(n) = log2(m_0 ... m_n)``.  Indices with ``alpha(n) >= 1`` are skipped.
    """
    rows = []
    for n in range(start, N + 1):
        e = spec.alpha.E(n)
        if not nb.lt(0, e):
            continue
        s = spec.m.S(n)
        rows.append(DimRow(n, nb.div(s, spec.alpha.E(n + 1)), nb.div(s, e)))
    return rows


def window_estimates(rows: Sequence[DimRow], N: int | None = None) -> tuple:
    """``(min h_n, max p_n)`` over the tail window ``n >= N // 2``."""
    if not rows:
        raise ValueError("empty table")
    if N is None:
        N = rows[-1].n
    tail = [r for r in rows if r.n >= N // 2] or list(rows)
    hmin = tail[0].h
    pmax = tail[0].p
    for r in tail[1:]:
        if nb.lt(r.h, hmin):
            hmin = r.h
        if nb.lt(pmax, r.p):
            pmax = r.p
    return hmin, pmax


class ThetaRow(NamedTuple):
    eps: object
    theta_log2: object
    eta: object
    argmax: int


def scale_counts(spec: CantorSpec, eps, window: range) -> list[tuple[int, CountLog]]:
    """Ball counts ``N(B(x, alpha(n)), eps * alpha(n))`` for ``n`` in ``window``."""
    out = []
    for n in window:
        R = spec.alpha.scaled_radius(n, Fraction(1))
        r = spec.alpha.scaled_radius(n, eps)
        out.append((n, ball_covering_formula(spec, R, r)))
    return out


def theta_eta(spec: CantorSpec, eps, window: range | int = 200) -> ThetaRow:
    """Certified lower bound for ``Theta(eps)`` over ball scales ``alpha(n)``, ``n`` in ``window``.

    ``eta = log Theta / -log eps``.
    """
    eps = Fraction(eps) if isinstance(eps, (int, float, str)) else eps
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    if isinstance(window, int):
        window = range(window + 1)
    best_n, best = None, None
    for n, c in scale_counts(spec, eps, window):
        if best is None or nb.lt(best.log2, c.log2):
            best_n, best = n, c
    denom = nb.mul(-1, nb.log2(eps))
    return ThetaRow(eps, best.log2, nb.div(best.log2, denom), best_n)


def non_doubling_flag(spec: CantorSpec, eps=Fraction(1, 2), window: range | int = 60) -> bool:
    """True when the per-scale counts at ``eps`` still set records in the last quarter of the window.

    Bounded counts stop setting records early; a record late in the window is
    the finite-resolution witness of ``Theta(eps) = inf``.
    """
    if isinstance(window, int):
        window = range(window + 1)
    counts = [c.log2 for _, c in scale_counts(spec, eps, window)]
    cut = len(counts) - max(1, len(counts) // 4)
    record = counts[0]
    for c in counts[1:cut]:
        if nb.lt(record, c):
            record = c
    return any(nb.lt(record, c) for c in counts[cut:])


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _parse_dim(x) -> Fraction | float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "oo", "i"):
        return INF
    if x == INF:
        return INF
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class DimensionalType:
    """``(a1, a2, a3, a4)`` = (Hausdorff, packing, upper box, Assouad) with optional ``tdim`` label ``l``."""

    a1: object
    a2: object
    a3: object
    a4: object
    l: object = None

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "a3", "a4"):
            object.__setattr__(self, name, _parse_dim(getattr(self, name)))
        if self.l is not None:
            l = INF if self.l == INF or str(self.l).lower() in ("inf", "i") else int(self.l)
            object.__setattr__(self, "l", l)
        vals = self.values
        if any(v < 0 for v in vals):
            raise ValueError("dimensions must be non-negative")
        names = ["a1", "a2", "a3", "a4"]
        for (x, nx), (y, ny) in zip(zip(vals, names), zip(vals[1:], names[1:])):
            if x > y:
                raise ValueError(f"ordering violated: {nx} <= {ny} fails ({nx}={_fmt(x)}, {ny}={_fmt(y)})")
        if self.l is not None and self.l > self.a1:
            raise ValueError(f"ordering violated: l <= a1 fails (l={_fmt(self.l)}, a1={_fmt(self.a1)})")

    @classmethod
    def parse(cls, text: str, l=None) -> "DimensionalType":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) == 5:
            l, parts = parts[0], parts[1:]
        if len(parts) != 4:
            raise ValueError("a dimensional type needs four comma-separated values")
        return cls(*parts, l=l)

    @property
    def values(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4)

    def scaled(self, eta) -> "DimensionalType":
        """Type after snowflaking an ultrametric by exponent ``1/eta``."""
        return DimensionalType(*[v if v in (0, INF) else v * eta for v in self.values])

    def maximum(self, other: "DimensionalType") -> "DimensionalType":
        return DimensionalType(*[max(a, b) for a, b in zip(self.values, other.values)])

    def __str__(self) -> str:
        body = ", ".join(_fmt(v) for v in self.values)
        return f"({_fmt(self.l)}; {body})" if self.l is not None else f"({body})"


def _fmt(v) -> str:
    if v == INF:
        return "inf"
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    return str(v)


@dataclass
class DimensionReport:
    """Analytic target plus computed sequence tables and window estimates."""

    target: DimensionalType | None
    rows: list
    h_liminf: object
    p_limsup: object
    assouad: list = field(default_factory=list)
    non_doubling: bool = False
    window: tuple = ()

    def summary(self) -> str:
        h = nb.fmt(self.h_liminf, 8)
        p = nb.fmt(self.p_limsup, 8)
        parts = [f"window n in [{self.window[0]}, {self.window[1]}]",
                 f"liminf h ~ {h}", f"limsup p ~ {p}"]
        if self.rows:
            last = self.rows[-1]
            parts.append(f"h_{last.n} = {nb.fmt(last.h, 8)}, p_{last.n} = {nb.fmt(last.p, 8)}")
        if self.target is not None:
            parts.append(f"target {self.target}")
        parts.append(f"non_doubling={'yes' if self.non_doubling else 'no'}")
        return "; ".join(parts)


def dimension_report(spec: CantorSpec, N: int, eps_list=(), target: DimensionalType | None = None,
                     theta_window: int = 200, doubling_window: int = 60) -> DimensionReport:
    rows = dim_sequences(spec, N)
    h, p = window_estimates(rows, N)
    table = [theta_eta(spec, e, theta_window) for e in eps_list]
    flag = non_doubling_flag(spec, Fraction(1, 2), doubling_window)
    return DimensionReport(target, rows, h, p, table, flag, (N // 2, N))
