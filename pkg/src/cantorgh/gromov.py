"""Gromov-Hausdorff and non-Archimedean Gromov-Hausdorff computations on finite spaces.

``gh_exact`` uses the identity ``d_GH = 1/2 min dis(R)`` over correspondences
``R`` and finds the minimum by branch and bound.  Every correspondence
contains one of the form ``graph(f) u graph(g)^T`` for maps ``f: X -> Y`` and
``g: Y -> X``, and shrinking a relation never increases its distortion, so
the search assigns one partner to every point of ``X`` and then one to every
still-uncovered point of ``Y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np

from .metric import (
    ULTRA_KINDS, FiniteMetricSpace, KindError, _common, dilate, float_tolerance, isometry_check,
    quotient, validate,
)

GH_GUARD = 14
NODE_BUDGET = 200_000


@dataclass(frozen=True)
class Correspondence:
    """Relation between two point sets, surjective onto both."""

    pairs: frozenset

    @classmethod
    def from_pairs(cls, pairs, a: FiniteMetricSpace, b: FiniteMetricSpace) -> "Correspondence":
        pairs = frozenset(pairs)
        left = {x for x, _ in pairs}
        right = {y for _, y in pairs}
        if left != set(a.labels) or right != set(b.labels):
            raise ValueError("relation is not a correspondence (not surjective on both sides)")
        return cls(pairs)

    def distortion(self, a: FiniteMetricSpace, b: FiniteMetricSpace):
        pairs = sorted(self.pairs, key=repr)
        da, db = _common(a, b)
        worst = _zero(da)
        for x, y in pairs:
            i, j = a.index(x), b.index(y)
            for x2, y2 in pairs:
                v = abs(da[i, a.index(x2)] - db[j, b.index(y2)])
                if v > worst:
                    worst = v
        return worst


@dataclass(frozen=True)
class GhResult:
    """Exact value (``lower == upper == value``) or certified interval."""

    lower: object
    upper: object
    method: str
    witness: Correspondence | Mapping | None = None

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self):
        if not self.exact:
            raise ValueError(f"only an interval is known: [{self.lower}, {self.upper}]")
        return self.lower

    def to_dict(self) -> dict:
        from .io import fraction_to_str

        def enc(v):
            return fraction_to_str(v) if isinstance(v, Fraction) else float(v)
        if self.exact:
            out = {"value": enc(self.lower), "method": self.method}
        else:
            out = {"lower": enc(self.lower), "upper": enc(self.upper), "method": self.method}
        if isinstance(self.witness, Correspondence):
            out["witness"] = sorted([list(map(_json_label, p)) for p in self.witness.pairs], key=repr)
        elif isinstance(self.witness, Mapping):
            out["witness"] = sorted([[_json_label(k), _json_label(v)]
                                     for k, v in self.witness.items()], key=repr)
        return out


def _json_label(x):
    from .io import _label_to_json
    return _label_to_json(x)


def _zero(mat):
    return Fraction(0) if mat.dtype == object else 0.0


def _half(v):
    return v / 2 if isinstance(v, Fraction) else v / 2.0


def distortion(f: Mapping[Hashable, Hashable], a: FiniteMetricSpace, b: FiniteMetricSpace):
    """``dis(f) = max |d(x, y) - e(f(x), f(y))|`` over pairs of ``a``."""
    if set(f) != set(a.labels):
        raise ValueError("map must be defined on every point of the domain")
    da, db = _common(a, b)
    src = [a.index(x) for x in a.labels]
    dst = [b.index(f[x]) for x in a.labels]
    sub = db[np.ix_(dst, dst)]
    diff = da[np.ix_(src, src)] - sub
    return abs(diff).max() if len(src) else _zero(da)


def gh_upper_via_surjection(f: Mapping, a: FiniteMetricSpace, b: FiniteMetricSpace) -> GhResult:
    """Upper bound ``2 dis(f)`` for a surjection ``f: a -> b``."""
    if set(f.values()) != set(b.labels):
        raise ValueError("map is not surjective")
    dis = distortion(f, a, b)
    lower = _half(abs(a.diameter - b.diameter)) if a.exact == b.exact else abs(
        float(a.diameter) - float(b.diameter)) / 2
    upper = 2 * dis
    return GhResult(min(lower, upper), upper, "surjection:2dis", dict(f))


def sup_distance(d: FiniteMetricSpace, e: FiniteMetricSpace):
    """``max |d(x, y) - e(x, y)|`` for two metrics on the same labels."""
    if set(d.labels) != set(e.labels) or len(d) != len(e):
        raise ValueError("sup distance needs the same point set")
    order = [e.index(x) for x in d.labels]
    e2 = e.relabel(order=order)
    dd, ee = _common(d, e2)
    return abs(dd - ee).max() if len(d) else Fraction(0)


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------

class _Search:
    def __init__(self, a: FiniteMetricSpace, b: FiniteMetricSpace, node_budget: int | None):
        da, db = _common(a, b)
        self.exact = da.dtype == object
        self.da = da.tolist()
        self.db = db.tolist()
        self.na, self.nb = len(a), len(b)
        tol = 0 if self.exact else max(float_tolerance(a.diameter), float_tolerance(b.diameter))
        self.tol = tol
        self.node_budget = node_budget
        self.nodes = 0
        self.exhausted = False
        # descending eccentricity, ties by label order
        ecc_a = [max(row) if row else 0 for row in self.da]
        ecc_b = [max(row) if row else 0 for row in self.db]
        self.order_a = sorted(range(self.na), key=lambda i: (-ecc_a[i], i))
        self.order_b = sorted(range(self.nb), key=lambda j: (-ecc_b[j], j))
        self.ecc_a, self.ecc_b = ecc_a, ecc_b
        diam_a = max(ecc_a) if ecc_a else 0
        diam_b = max(ecc_b) if ecc_b else 0
        self.root = abs(diam_a - diam_b)
        # trivial correspondence: everything related to everything
        self.best = max(diam_a, diam_b)
        self.best_pairs = [(i, j) for i in range(self.na) for j in range(self.nb)]

    def cost(self, pairs, i, j, cap):
        worst = 0
        da_i, db_j = self.da[i], self.db[j]
        for i2, j2 in pairs:
            v = da_i[i2] - db_j[j2]
            if v < 0:
                v = -v
            if v > worst:
                worst = v
                if worst >= cap:
                    return worst
        return worst

    def run(self):
        if self.best <= self.root + self.tol:
            return
        self._x_phase(0, [], 0)

    def _budget(self) -> bool:
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            self.exhausted = True
            return False
        return True

    def _x_phase(self, k, pairs, cur):
        if self.exhausted or not self._budget():
            return
        if k == self.na:
            covered = {j for _, j in pairs}
            self._y_phase([j for j in self.order_b if j not in covered], 0, pairs, cur)
            return
        i = self.order_a[k]
        opts = []
        for j in range(self.nb):
            c = max(cur, self.cost(pairs, i, j, self.best))
            if c < self.best:
                # prefer partners of similar eccentricity, then label order
                opts.append((c, abs(self.ecc_a[i] - self.ecc_b[j]), j))
        opts.sort()
        for c, _, j in opts:
            if c >= self.best:
                break
            pairs.append((i, j))
            self._x_phase(k + 1, pairs, c)
            pairs.pop()
            if self.best <= self.root + self.tol or self.exhausted:
                return

    def _y_phase(self, todo, k, pairs, cur):
        if self.exhausted or not self._budget():
            return
        if k == len(todo):
            if cur < self.best:
                self.best = cur
                self.best_pairs = list(pairs)
            return
        j = todo[k]
        opts = []
        for i in range(self.na):
            c = max(cur, self.cost(pairs, i, j, self.best))
            if c < self.best:
                opts.append((c, i))
        opts.sort()
        for c, i in opts:
            if c >= self.best:
                break
            pairs.append((i, j))
            self._y_phase(todo, k + 1, pairs, c)
            pairs.pop()
            if self.best <= self.root + self.tol or self.exhausted:
                return


def _as_result_value(v, exact: bool):
    return Fraction(v) if exact else float(v)


def gh_exact(a: FiniteMetricSpace, b: FiniteMetricSpace, guard: int = GH_GUARD,
             node_budget: int = NODE_BUDGET) -> GhResult:
    """Gromov-Hausdorff distance: exact with a witness when ``|a| + |b| <= guard``.

    Larger inputs get a certified interval: lower ``1/2 |diam a - diam b|``,
    upper ``1/2 dis`` of the best correspondence found within ``node_budget``.
    """
    if len(a) == 0 or len(b) == 0:
        raise ValueError("spaces must be non-empty")
    exact_input = a.exact and b.exact
    within = len(a) + len(b) <= guard
    search = _Search(a, b, None if within else node_budget)
    search.run()
    la, lb = a.labels, b.labels
    witness = Correspondence(frozenset((la[i], lb[j]) for i, j in search.best_pairs))
    upper = _half(_as_result_value(search.best, exact_input))
    if within or not search.exhausted:
        return GhResult(upper, upper, "branch-and-bound", witness)
    lower = _half(_as_result_value(search.root, exact_input))
    return GhResult(lower, upper, "interval:diameter-bound/heuristic", witness)


# ---------------------------------------------------------------------------
# Non-Archimedean GH
# ---------------------------------------------------------------------------

def _require_ultra(space: FiniteMetricSpace) -> None:
    if not validate(space).is_ultrametric:
        raise KindError("u_GH needs ultrametric inputs")


def ugh(a: FiniteMetricSpace, b: FiniteMetricSpace, guard: int = GH_GUARD) -> GhResult:
    """Non-Archimedean GH distance.

    Distinct diameters give the exact value ``max(diam a, diam b)``.  Equal
    diameters give ``0`` for isometric inputs and otherwise the interval
    ``[2 GH-lower, diam]``; no exact algorithm is attempted there.
    """
    _require_ultra(a)
    _require_ultra(b)
    exact_input = a.exact and b.exact
    da, db = a.diameter, b.diameter
    if not exact_input:
        da, db = float(da), float(db)
        same = abs(da - db) <= max(float_tolerance(da), float_tolerance(db))
    else:
        same = da == db
    if not same:
        v = max(da, db)
        return GhResult(v, v, "diameter")
    iso = isometry_check(a, b)
    if iso is not None:
        z = Fraction(0) if exact_input else 0.0
        return GhResult(z, z, "isometry", iso)
    g = gh_exact(a, b, guard)
    return GhResult(2 * g.lower, da, "interval:2gh/diameter")


@dataclass
class AxiomAudit:
    values: tuple
    passed: bool | None
    reason: str = ""


def ugh_ultrametric_axiom_audit(a, b, c) -> AxiomAudit:
    """Strong triangle inequality on the three pairwise ``u_GH`` values when all are exact."""
    results = (ugh(a, b), ugh(b, c), ugh(a, c))
    if not all(r.exact for r in results):
        return AxiomAudit(tuple(results), None, "some pair has only an interval")
    x, y, z = (r.value for r in results)
    ok = x <= max(y, z) and y <= max(x, z) and z <= max(x, y)
    return AxiomAudit((x, y, z), ok)


@dataclass
class QiuRow:
    eps: object
    delta: object
    gh_upper: object
    gh_exact: object
    ugh: object
    certified_ratio: object


def qiu_demo(x: FiniteMetricSpace, epsilons: Sequence, guard: int = GH_GUARD) -> list[QiuRow]:
    """For each ``eps``: ``d_eps = (1+eps) d`` has ``u_GH = (1+eps) diam``, ``GH <= eps diam``.

    ``certified_ratio = u_GH / (eps diam) = (1+eps)/eps`` is a lower bound for
    ``u_GH / GH``.
    """
    if len(x) < 2:
        raise ValueError("the demonstration needs at least two points")
    _require_ultra(x)
    rows = []
    delta = x.diameter
    for eps in epsilons:
        e = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
        if e <= 0:
            raise ValueError("eps must be positive")
        y = dilate(x, 1 + e) if x.exact else dilate(x, float(1 + e))
        if not validate(y).is_ultrametric:
            raise AssertionError("dilated space is not ultrametric")
        u = ugh(x, y, guard).value
        upper = e * delta if x.exact else float(e) * float(delta)
        g = None
        if 2 * len(x) <= guard:
            g = gh_exact(x, y, guard).value
        rows.append(QiuRow(e, delta, upper, g, u, u / upper))
    return rows


def quotient_audit(d: FiniteMetricSpace, e: FiniteMetricSpace) -> tuple[GhResult, object]:
    """GH between the metric quotient of pseudo-metric ``d`` and ``(X, e)``, with bound ``2 D(d, e)``."""
    q, cls = quotient(d)
    s = sup_distance(d, e)
    return gh_exact(q, e), 2 * s


def ensure_ultra_kind(space: FiniteMetricSpace) -> bool:
    return space.kind in ULTRA_KINDS
