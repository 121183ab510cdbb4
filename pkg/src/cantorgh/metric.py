"""Finite (pseudo-)metric spaces and the algebra used to build them.

A :class:`FiniteMetricSpace` is a labelled point set with a symmetric
distance matrix.  Matrices are held either exactly (numpy object arrays of
:class:`fractions.Fraction`) or as binary64.  Exact matrices are compared
exactly; float matrices use the tolerance ``max(1e-12, 1e-12 * diameter)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

KINDS = ("metric", "ultrametric", "pseudo-metric", "pseudo-ultrametric")
ULTRA_KINDS = ("ultrametric", "pseudo-ultrametric")
PSEUDO_KINDS = ("pseudo-metric", "pseudo-ultrametric")

EXACT_COVER_LIMIT = 24


class MalformedSpaceError(ValueError):
    """Distance data that is not a symmetric, non-negative, finite matrix."""


class KindMismatchError(ValueError):
    """An operation received spaces whose declared kinds it cannot combine."""


class KindError(ValueError):
    """A space fails the axioms of the kind it declares."""


class SizeError(ValueError):
    """A requested construction exceeds the configured point budget."""


def is_exact_number(x: Any) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def as_fraction(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact number: {x!r}")


def _coerce_matrix(matrix: Any) -> np.ndarray:
    if isinstance(matrix, np.ndarray) and matrix.dtype != object:
        arr = np.array(matrix, dtype=float)
        return arr
    if isinstance(matrix, np.ndarray) and matrix.ndim == 2 and all(
            type(x) is Fraction for x in matrix.flat):
        return matrix.copy()
    rows = [list(r) for r in matrix]
    if not rows:
        return np.zeros((0, 0))
    flat = [x for r in rows for x in r]
    if flat and all(is_exact_number(x) or isinstance(x, str) for x in flat):
        arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                arr[i, j] = as_fraction(x)
        return arr
    return np.array([[float(x) for x in r] for r in rows], dtype=float).reshape(len(rows), -1)


def float_tolerance(diameter: float) -> float:
    return max(1e-12, 1e-12 * float(diameter))


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labelled point set with a symmetric distance matrix.

    Parameters
    ----------
    labels : sequence of hashable
        Distinct point identifiers, in matrix order.
    dist : array
        ``n x n`` matrix; an object array of ``Fraction`` for exact data,
        otherwise ``float64``.
    kind : str
        One of ``metric``, ``ultrametric``, ``pseudo-metric``,
        ``pseudo-ultrametric``.  Only the structural invariants (symmetry,
        zero diagonal, non-negativity) are checked on construction; use
        :func:`validate` for the triangle axioms.
    """

    labels: tuple
    dist: np.ndarray
    kind: str = "metric"
    _index: dict = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        dist = _coerce_matrix(self.dist)
        n = len(labels)
        if dist.shape != (n, n):
            raise MalformedSpaceError(f"matrix shape {dist.shape} does not match {n} labels")
        if len(set(labels)) != n:
            raise MalformedSpaceError("labels must be distinct")
        if self.kind not in KINDS:
            raise MalformedSpaceError(f"unknown kind {self.kind!r}")
        if dist.dtype != object:
            if not np.all(np.isfinite(dist)):
                raise MalformedSpaceError("matrix has non-finite entries")
            if np.any(dist < 0):
                raise MalformedSpaceError("matrix has negative entries")
            if not np.array_equal(dist, dist.T):
                raise MalformedSpaceError("matrix is not symmetric")
            if np.any(np.diag(dist) != 0):
                raise MalformedSpaceError("diagonal is not zero")
        elif n:
            if np.any(np.diag(dist) != 0):
                raise MalformedSpaceError("diagonal is not zero")
            if np.any(dist != dist.T):
                raise MalformedSpaceError("matrix is not symmetric")
            if np.any(dist < 0):
                raise MalformedSpaceError("matrix has negative entries")
        dist.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})
        object.__setattr__(self, "_cache", {})

    @classmethod
    def from_matrix(cls, matrix, labels: Sequence[Hashable] | None = None,
                    kind: str = "metric") -> "FiniteMetricSpace":
        arr = _coerce_matrix(matrix)
        if labels is None:
            labels = range(arr.shape[0])
        return cls(tuple(labels), arr, kind)

    @classmethod
    def point(cls, label: Hashable = 0) -> "FiniteMetricSpace":
        return cls((label,), np.array([[Fraction(0)]], dtype=object), "ultrametric")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def exact(self) -> bool:
        return self.dist.dtype == object

    def index(self, label: Hashable) -> int:
        return self._index[label]

    def d(self, x: Hashable, y: Hashable):
        return self.dist[self._index[x], self._index[y]]

    @property
    def diameter(self):
        if len(self) == 0:
            return Fraction(0)
        return self.dist.max() if self.dist.size else Fraction(0)

    @property
    def tolerance(self) -> float:
        return 0 if self.exact else float_tolerance(self.diameter)

    def within(self, r) -> np.ndarray:
        """Boolean matrix of ``d(x, y) <= r`` (exact for exact matrices, else up to tolerance)."""
        if not self.exact:
            return self.dist <= r + self.tolerance
        if "int" not in self._cache:
            self._cache["int"] = _integer_form(self.dist)
        ints, den = self._cache["int"]
        bound = math.floor(as_fraction(r) * den)
        return ints <= bound

    def as_float(self) -> "FiniteMetricSpace":
        if not self.exact:
            return self
        return FiniteMetricSpace(self.labels, self.dist.astype(float), self.kind)

    def with_kind(self, kind: str) -> "FiniteMetricSpace":
        return FiniteMetricSpace(self.labels, self.dist, kind)

    def relabel(self, mapping: Mapping | None = None, order: Sequence[int] | None = None
                ) -> "FiniteMetricSpace":
        """Rename and/or reorder points (``order`` is a permutation of indices)."""
        idx = list(order) if order is not None else list(range(len(self)))
        labels = [self.labels[i] for i in idx]
        if mapping is not None:
            labels = [mapping[lab] for lab in labels]
        if sorted(idx) != list(range(len(self))):
            raise ValueError("order must be a permutation of the point indices")
        return _sub_space(self, tuple(labels), idx)

    def distance_multiset(self) -> list:
        iu = np.triu_indices(len(self), 1)
        return sorted(self.dist[iu].tolist())

    def __repr__(self) -> str:
        return (f"FiniteMetricSpace(n={len(self)}, kind={self.kind!r}, "
                f"exact={self.exact}, diameter={self.diameter})")


def _common(*spaces: FiniteMetricSpace) -> list[np.ndarray]:
    """Matrices of ``spaces`` in a shared representation (all exact or all float)."""
    if all(s.exact for s in spaces):
        return [s.dist for s in spaces]
    return [s.dist.astype(float) for s in spaces]


def _integer_form(dist: np.ndarray) -> tuple[np.ndarray, int]:
    """Exact matrix scaled to integers by the common denominator ``den``; returns ``(ints, den)``.

    The integer array is int64 when it fits, else Python ints.
    """
    den = 1
    for x in dist.flat:
        den = math.lcm(den, x.denominator)
    ints = [[x.numerator * (den // x.denominator) for x in row] for row in dist]
    biggest = max((abs(v) for row in ints for v in row), default=0)
    if biggest < 2 ** 60:
        return np.array(ints, dtype=np.int64).reshape(dist.shape), den
    arr = np.empty(dist.shape, dtype=object)
    for i, row in enumerate(ints):
        for j, v in enumerate(row):
            arr[i, j] = v
    return arr, den


class Violation(NamedTuple):
    triple: tuple
    excess: Any


@dataclass(frozen=True)
class ValidationReport:
    is_pseudo_metric: bool
    is_metric: bool
    is_pseudo_ultrametric: bool
    is_ultrametric: bool
    worst_triangle: Violation | None = None
    worst_strong_triangle: Violation | None = None
    zero_pair: tuple | None = None

    @property
    def worst_violating_triple(self) -> tuple | None:
        if self.worst_triangle is not None:
            return self.worst_triangle.triple
        if self.worst_strong_triangle is not None:
            return self.worst_strong_triangle.triple
        return None

    def satisfies(self, kind: str) -> bool:
        return {
            "metric": self.is_metric,
            "ultrametric": self.is_ultrametric,
            "pseudo-metric": self.is_pseudo_metric,
            "pseudo-ultrametric": self.is_pseudo_ultrametric,
        }[kind]


def validate(space: FiniteMetricSpace) -> ValidationReport:
    """Exhaustively check the (strong) triangle inequality and positivity.

    Every flag is the exact truth value over all ordered triples (exact
    matrices) or holds up to the float tolerance.  The most violated triple
    ``(x, y, z)`` with ``d(x, y) > d(x, z) + d(z, y)`` (resp. ``max``) is
    reported for each failing axiom.
    """
    n = len(space)
    labels = space.labels
    if space.exact:
        D = _integer_form(space.dist)[0] if n else np.zeros((0, 0), dtype=np.int64)
        tol = 0
    else:
        D = space.dist
        tol = space.tolerance
    worst_tri = (tol, None)
    worst_strong = (tol, None)
    for z in range(n):
        col = D[:, z]
        through = col[:, None] + col[None, :]
        excess = D - through
        k = int(np.argmax(excess))
        if excess.flat[k] > worst_tri[0]:
            worst_tri = (excess.flat[k], (k // n, k % n, z))
        through = np.maximum(col[:, None], col[None, :])
        excess = D - through
        k = int(np.argmax(excess))
        if excess.flat[k] > worst_strong[0]:
            worst_strong = (excess.flat[k], (k // n, k % n, z))

    def scaled(v):
        if not space.exact:
            return float(v)
        den = 1
        for x in space.dist.flat:
            den = math.lcm(den, x.denominator)
        return Fraction(int(v), den)

    tri = None
    if worst_tri[1] is not None:
        i, j, z = worst_tri[1]
        tri = Violation((labels[i], labels[j], labels[z]), scaled(worst_tri[0]))
    strong = None
    if worst_strong[1] is not None:
        i, j, z = worst_strong[1]
        strong = Violation((labels[i], labels[j], labels[z]), scaled(worst_strong[0]))

    zero_pair = None
    for i in range(n):
        for j in range(i + 1, n):
            v = space.dist[i, j]
            if (v == 0) if space.exact else (v <= tol):
                zero_pair = (labels[i], labels[j])
                break
        if zero_pair:
            break

    pseudo = tri is None
    pseudo_ultra = strong is None and pseudo
    return ValidationReport(
        is_pseudo_metric=pseudo,
        is_metric=pseudo and zero_pair is None,
        is_pseudo_ultrametric=pseudo_ultra,
        is_ultrametric=pseudo_ultra and zero_pair is None,
        worst_triangle=tri,
        worst_strong_triangle=strong,
        zero_pair=zero_pair,
    )


def check_kind(space: FiniteMetricSpace) -> FiniteMetricSpace:
    """Return ``space`` unchanged if it satisfies its declared kind, else raise."""
    report = validate(space)
    if not report.satisfies(space.kind):
        raise KindError(
            f"space declared {space.kind!r} fails validation: "
            f"triangle={report.worst_triangle}, strong={report.worst_strong_triangle}, "
            f"zero_pair={report.zero_pair}")
    return space


# ---------------------------------------------------------------------------
# Amalgamation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GlueExponent:
    """Combiner ``a (+)_p b = (a^p + b^p)^(1/p)``; ``p=1`` adds, ``p=inf`` takes max."""

    p: float | int | Fraction = 1

    def __post_init__(self) -> None:
        if not self.p >= 1:
            raise ValueError(f"glue exponent must be >= 1, got {self.p}")

    @property
    def ultra(self) -> bool:
        return self.p == math.inf

    def combine(self, *values):
        if self.p == 1:
            return sum(values[1:], values[0])
        if self.p == math.inf:
            return max(values)
        p = float(self.p)
        return sum(float(v) ** p for v in values) ** (1.0 / p)


@dataclass(frozen=True)
class BasepointedFamily:
    """Spaces ``X_i`` with basepoints ``p_i`` and a glue metric on the index set."""

    spaces: tuple
    basepoints: tuple
    glue: FiniteMetricSpace

    def __post_init__(self) -> None:
        object.__setattr__(self, "spaces", tuple(self.spaces))
        object.__setattr__(self, "basepoints", tuple(self.basepoints))
        if len(self.spaces) != len(self.basepoints):
            raise ValueError("one basepoint per space is required")
        if len(self.glue) != len(self.spaces):
            raise ValueError("glue must have one point per space")
        for sp, bp in zip(self.spaces, self.basepoints):
            if bp not in sp._index:
                raise ValueError(f"basepoint {bp!r} is not a point of its space")


def discrete_glue(n: int, value=Fraction(1)) -> FiniteMetricSpace:
    """Equilateral metric on ``n`` indices; an ultrametric for any ``value > 0``."""
    exact = is_exact_number(value)
    arr = np.empty((n, n), dtype=object) if exact else np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            arr[i, j] = (Fraction(0) if exact else 0.0) if i == j else value
    return FiniteMetricSpace(tuple(range(n)), arr, "ultrametric")


def p_amalgam(family: BasepointedFamily, p: GlueExponent | float | int = 1) -> FiniteMetricSpace:
    """Glue ``family`` along its basepoints.

    Within a component distances are unchanged; for ``x`` in ``X_i`` and
    ``y`` in ``X_j`` the distance is ``d_i(x, p_i) (+)_p r(i, j) (+)_p
    d_j(p_j, y)``.  Labels of the result are ``(i, label)``.
    """
    if not isinstance(p, GlueExponent):
        p = GlueExponent(p)
    spaces, glue = family.spaces, family.glue
    if p.ultra:
        bad = [s.kind for s in spaces if s.kind not in ULTRA_KINDS]
        if bad or glue.kind not in ULTRA_KINDS:
            raise KindMismatchError(
                "p=inf gluing requires pseudo-ultrametric components and an ultrametric glue")
    pseudo = any(s.kind in PSEUDO_KINDS for s in spaces) or glue.kind in PSEUDO_KINDS
    if p.ultra:
        kind = "pseudo-ultrametric" if pseudo else "ultrametric"
    else:
        kind = "pseudo-metric" if pseudo else "metric"

    exact = all(s.exact for s in spaces) and glue.exact and p.p in (1, math.inf)
    sizes = [len(s) for s in spaces]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    total = int(offsets[-1])
    out = np.empty((total, total), dtype=object) if exact else np.zeros((total, total))
    mats = [s.dist if exact else s.dist.astype(float) for s in spaces]
    gmat = glue.dist if exact else glue.dist.astype(float)
    to_base = [m[:, s.index(bp)] for m, s, bp in zip(mats, spaces, family.basepoints)]

    for i, mi in enumerate(mats):
        a, b = offsets[i], offsets[i + 1]
        out[a:b, a:b] = mi
        for j in range(len(spaces)):
            if j == i:
                continue
            c, e = offsets[j], offsets[j + 1]
            r = gmat[i, j]
            left = to_base[i][:, None]
            right = to_base[j][None, :]
            if p.p == 1:
                block = left + r + right
            elif p.ultra:
                block = np.maximum(np.maximum(left, right), r)
            else:
                q = float(p.p)
                block = (left.astype(float) ** q + float(r) ** q
                         + right.astype(float) ** q) ** (1.0 / q)
            out[a:b, c:e] = block
    if not exact:
        out = (out + out.T) / 2  # symmetric up to rounding of the p-th root
    labels = tuple((i, lab) for i, s in enumerate(spaces) for lab in s.labels)
    return FiniteMetricSpace(labels, out, kind)


# ---------------------------------------------------------------------------
# Products, powers, scalings, quotients
# ---------------------------------------------------------------------------

def _product_kind(a: str, b: str) -> str:
    pseudo = a in PSEUDO_KINDS or b in PSEUDO_KINDS
    ultra = a in ULTRA_KINDS and b in ULTRA_KINDS
    if ultra:
        return "pseudo-ultrametric" if pseudo else "ultrametric"
    return "pseudo-metric" if pseudo else "metric"


def linf_product(a: FiniteMetricSpace, b: FiniteMetricSpace) -> FiniteMetricSpace:
    """Cartesian product with ``max`` of the coordinate distances."""
    da, db = _common(a, b)
    na, nb = len(a), len(b)
    big = np.maximum(np.repeat(np.repeat(da, nb, axis=0), nb, axis=1),
                     np.tile(db, (na, na)))
    labels = tuple((x, y) for x in a.labels for y in b.labels)
    return FiniteMetricSpace(labels, big, _product_kind(a.kind, b.kind))


def _exact_power(x: Fraction, gamma: Fraction) -> Fraction | None:
    if x == 0:
        return Fraction(0)
    if gamma.denominator == 1:
        return x ** int(gamma)
    num, den = x.numerator, x.denominator
    root = gamma.denominator
    rn, rd = round(num ** (1 / root)), round(den ** (1 / root))
    for cand_n in (rn - 1, rn, rn + 1):
        if cand_n > 0 and cand_n ** root == num:
            for cand_d in (rd - 1, rd, rd + 1):
                if cand_d > 0 and cand_d ** root == den:
                    return Fraction(cand_n, cand_d) ** gamma.numerator
    return None


def _dyadic_power(x: Fraction, gamma: Fraction) -> Fraction | None:
    """``x ** gamma`` exactly when ``x`` is a power of two with a compatible exponent."""
    if x == 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    if num & (num - 1) or den & (den - 1):
        return None
    e = (num.bit_length() - 1) - (den.bit_length() - 1)
    scaled = e * gamma
    if scaled.denominator != 1:
        return None
    return Fraction(2) ** int(scaled)


class SnowflakeError(ValueError):
    """Raising distances to a power > 1 broke the triangle inequality."""


def snowflake(a: FiniteMetricSpace, gamma) -> FiniteMetricSpace:
    """Raise every distance to the power ``gamma > 0``.

    Ultrametric kinds are preserved for every ``gamma``.  For ``gamma > 1``
    on a non-ultrametric input the result is validated and a
    :class:`SnowflakeError` is raised if it is no longer a pseudo-metric.
    Exact arithmetic is kept when every entry has an exact ``gamma``-th power.
    """
    if not gamma > 0:
        raise ValueError("snowflake exponent must be positive")
    result = None
    if a.exact and is_exact_number(gamma):
        g = as_fraction(gamma)
        vals = {}
        for x in set(a.dist.flat):
            y = _dyadic_power(x, g)
            if y is None:
                y = _exact_power(x, g)
            if y is None:
                vals = None
                break
            vals[x] = y
        if vals is not None:
            out = np.empty(a.dist.shape, dtype=object)
            for idx, x in np.ndenumerate(a.dist):
                out[idx] = vals[x]
            result = FiniteMetricSpace(a.labels, out, a.kind)
    if result is None:
        out = a.dist.astype(float) ** float(gamma)
        result = FiniteMetricSpace(a.labels, out, a.kind)
    if gamma > 1 and a.kind not in ULTRA_KINDS:
        report = validate(result)
        if not report.is_pseudo_metric:
            raise SnowflakeError(
                f"exponent {gamma} breaks the triangle inequality at {report.worst_triangle}")
    return result


def dilate(a: FiniteMetricSpace, lam) -> FiniteMetricSpace:
    """Scale all distances by ``lam >= 0``; ``lam = 0`` collapses to a pseudo-metric."""
    if lam < 0:
        raise ValueError("dilation factor must be non-negative")
    if a.exact and is_exact_number(lam):
        out = a.dist * as_fraction(lam)
    else:
        out = a.dist.astype(float) * float(lam)
    kind = a.kind
    if lam == 0 and len(a) > 1:
        kind = "pseudo-ultrametric"
    return FiniteMetricSpace(a.labels, out, kind)


def quotient(a: FiniteMetricSpace, atol: float = 0.0) -> tuple[FiniteMetricSpace, dict]:
    """Identify points at distance zero.

    Returns the metric quotient (labelled by the first member of each class)
    and a map from every original label to its class label.  For float
    matrices distances ``<= atol`` count as zero.
    """
    n = len(a)
    D = a.dist
    zero = (lambda v: v == 0) if a.exact else (lambda v: v <= atol)
    rep = list(range(n))
    reps: list[int] = []
    for i in range(n):
        for r in reps:
            if zero(D[i, r]):
                rep[i] = r
                break
        else:
            reps.append(i)
    members = {r: [i for i in range(n) if rep[i] == r] for r in reps}
    tol = a.tolerance if not a.exact else 0
    for r, s in itertools.combinations(reps, 2):
        ref = D[r, s]
        for i in members[r]:
            for j in members[s]:
                if (D[i, j] != ref) if a.exact else abs(D[i, j] - ref) > max(tol, 2 * atol):
                    raise AssertionError(
                        f"representatives disagree: d{a.labels[i], a.labels[j]} != "
                        f"d{a.labels[r], a.labels[s]}")
    sub = D[np.ix_(reps, reps)].copy()
    kind = "ultrametric" if a.kind in ULTRA_KINDS else "metric"
    space = FiniteMetricSpace(tuple(a.labels[r] for r in reps), sub, kind)
    return space, {a.labels[i]: a.labels[rep[i]] for i in range(n)}


def restrict(a: FiniteMetricSpace, subset: Iterable[Hashable]) -> FiniteMetricSpace:
    """Induced subspace on ``subset`` (labels), in the order given."""
    subset = list(subset)
    if not subset:
        raise ValueError("cannot restrict to an empty subset")
    idx = [a.index(x) for x in subset]
    return _sub_space(a, tuple(subset), idx)


def _sub_space(a: FiniteMetricSpace, labels: tuple, idx: list) -> FiniteMetricSpace:
    """Principal submatrix of an already validated space: only label distinctness is rechecked."""
    if len(set(labels)) != len(labels):
        raise MalformedSpaceError("labels must be distinct")
    out = object.__new__(FiniteMetricSpace)
    dist = a.dist[np.ix_(idx, idx)].copy()
    dist.setflags(write=False)
    object.__setattr__(out, "labels", labels)
    object.__setattr__(out, "dist", dist)
    object.__setattr__(out, "kind", a.kind)
    object.__setattr__(out, "_index", {lab: i for i, lab in enumerate(labels)})
    cache = {}
    if "int" in a._cache:
        ints, den = a._cache["int"]
        cache["int"] = (ints[np.ix_(idx, idx)], den)
    object.__setattr__(out, "_cache", cache)
    return out


# ---------------------------------------------------------------------------
# Covering numbers
# ---------------------------------------------------------------------------

class CoverBounds(NamedTuple):
    """Certified interval for a covering number too large to solve exactly."""

    lower: int
    upper: int


def _ball_masks(a: FiniteMetricSpace, r) -> list[int]:
    inside = a.within(r)
    return [sum(1 << int(j) for j in np.flatnonzero(row)) for row in inside]


def _greedy_cover(masks: list[int], full: int) -> int:
    uncovered, count = full, 0
    while uncovered:
        best = max(masks, key=lambda m: bin(m & uncovered).count("1"))
        uncovered &= ~best
        count += 1
    return count


def _exact_cover(masks: list[int], n: int) -> int:
    full = (1 << n) - 1
    best = _greedy_cover(masks, full)
    biggest = max(bin(m).count("1") for m in masks)
    containing = [[m for m in masks if m >> j & 1] for j in range(n)]
    for lst in containing:
        lst.sort(key=lambda m: -bin(m).count("1"))

    def search(uncovered: int, used: int) -> None:
        nonlocal best
        if not uncovered:
            best = min(best, used)
            return
        left = bin(uncovered).count("1")
        if used + -(-left // biggest) >= best:
            return
        # branch on the uncovered point lying in the fewest balls
        j = min((k for k in range(n) if uncovered >> k & 1), key=lambda k: len(containing[k]))
        for m in containing[j]:
            search(uncovered & ~m, used + 1)

    search(full, 0)
    return best


def covering_oracle(a: FiniteMetricSpace, r) -> int | CoverBounds:
    """Least cardinality of an ``r``-net of ``a`` (closed balls, centres in ``a``).

    Ultrametric inputs: closed ``r``-balls partition the space, so the answer
    is the number of classes of ``d(x, y) <= r``.  Other inputs with at most
    24 points are solved by exact set cover; larger ones return
    :class:`CoverBounds` (greedy upper bound, max of greedy/H_n and a
    ``2r``-packing lower bound).
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    n = len(a)
    if n == 0:
        return 0
    D = a.dist
    tol = a.tolerance
    ultra = a.kind in ULTRA_KINDS
    if not ultra and n > EXACT_COVER_LIMIT:
        ultra = validate(a).is_pseudo_ultrametric
    if ultra:
        inside = a.within(r)
        assigned = np.zeros(n, dtype=bool)
        classes = 0
        for i in range(n):
            if not assigned[i]:
                classes += 1
                assigned |= inside[i]
        return classes
    masks = _ball_masks(a, r)
    if n <= EXACT_COVER_LIMIT:
        return _exact_cover(masks, n)
    full = (1 << n) - 1
    upper = _greedy_cover(masks, full)
    harmonic = sum(1 / k for k in range(1, n + 1))
    lower = math.ceil(upper / harmonic)
    packed: list[int] = []
    for i in range(n):
        if all(D[i, j] > 2 * r + tol for j in packed):
            packed.append(i)
    return CoverBounds(max(lower, len(packed), 1), upper)


# ---------------------------------------------------------------------------
# Isometry test
# ---------------------------------------------------------------------------

def isometry_check(a: FiniteMetricSpace, b: FiniteMetricSpace) -> dict | None:
    """Distance-preserving bijection ``a -> b`` as a label map, or ``None``.

    Backtracking over candidates with equal sorted distance profiles.
    """
    n = len(a)
    if n != len(b):
        return None
    if n == 0:
        return {}
    da, db = _common(a, b)
    exact = da.dtype == object
    tol = 0 if exact else max(float_tolerance(np.max(da)), float_tolerance(np.max(db)))

    def close(x, y) -> bool:
        return x == y if exact else abs(x - y) <= tol

    def same_profile(u, v) -> bool:
        if exact:
            return u == v
        return len(u) == len(v) and all(abs(x - y) <= tol for x, y in zip(u, v))

    if not same_profile(sorted(da[np.triu_indices(n, 1)].tolist()),
                        sorted(db[np.triu_indices(n, 1)].tolist())):
        return None
    prof_a = [sorted(da[i].tolist()) for i in range(n)]
    prof_b = [sorted(db[j].tolist()) for j in range(n)]
    cands = [[j for j in range(n) if same_profile(prof_a[i], prof_b[j])] for i in range(n)]
    if any(not c for c in cands):
        return None
    order = sorted(range(n), key=lambda i: len(cands[i]))
    assign: dict[int, int] = {}
    used = [False] * n

    def extend(k: int) -> bool:
        if k == n:
            return True
        i = order[k]
        for j in cands[i]:
            if used[j]:
                continue
            if all(close(da[i, i2], db[j, j2]) for i2, j2 in assign.items()):
                assign[i] = j
                used[j] = True
                if extend(k + 1):
                    return True
                del assign[i]
                used[j] = False
        return False

    if not extend(0):
        return None
    return {a.labels[i]: b.labels[j] for i, j in assign.items()}
