"""Telescope spaces, their fingerprints, and the simplex-path metric family.

A telescope space has an accumulation point ``inf`` and, at each level
``j``, an isosceles triangle with legs ``2**(-j-1)`` and apex angle
``theta(q_j) = (pi/6)(q_j + 1)``.  The parameters ``(q, K)`` can be read back
from the distance matrix alone (:func:`fingerprint`), which is what makes the
simplex-path family injective across branches.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .cantor.sequences import constant_branching, square
from .cantor.space import CantorSpec, enumerate_space
from .metric import (
    BasepointedFamily, FiniteMetricSpace, GlueExponent, dilate, discrete_glue, isometry_check,
    linf_product, p_amalgam, quotient, restrict,
)
from .gromov import sup_distance

INF_LABEL = "inf"
FLAVORS = ("u", "v")
FINGERPRINT_TOL = 1e-9


def ell(x: float) -> float:
    """Chord length ``sqrt(2 - 2 cos x)`` of the unit circle."""
    return math.sqrt(2.0 - 2.0 * math.cos(x))


def theta(t: float) -> float:
    return (math.pi / 6.0) * (t + 1.0)


def _flavor(f: str) -> str:
    f = f.lower()
    if f in ("u", "metric", "metric-u"):
        return "u"
    if f in ("v", "ultrametric", "ultrametric-v"):
        return "v"
    raise ValueError(f"unknown telescope flavor {f!r}")


@dataclass(frozen=True)
class TelescopeSpec:
    """Parameters ``q`` (levels ``0..J``), flavor ``u``/``v`` and scale ``K``."""

    q: tuple
    levels: int
    flavor: str = "u"
    K: float = 1.0

    def __post_init__(self) -> None:
        q = tuple(float(x) for x in self.q)
        if any(not (0.0 <= x <= 1.0) for x in q):
            raise ValueError("q entries must lie in [0, 1]")
        if self.levels < 1:
            raise ValueError("need at least one level beyond the top (J >= 1)")
        if len(q) < self.levels + 1:
            q = q + (0.0,) * (self.levels + 1 - len(q))
        if not float(self.K) > 0:
            raise ValueError("scale K must be positive")
        object.__setattr__(self, "q", q[: self.levels + 1])
        object.__setattr__(self, "flavor", _flavor(self.flavor))


def telescope_labels(J: int) -> tuple:
    return (INF_LABEL,) + tuple((o, j) for j in range(J + 1) for o in (1, 2, 3))


def telescope(spec: TelescopeSpec) -> FiniteMetricSpace:
    """Distance matrix of ``K * u[q]`` or ``K * v[q]`` on ``{inf} u {1,2,3} x {0..J}``."""
    J = spec.levels
    labels = telescope_labels(J)
    n = len(labels)
    lev = np.array([-1] + [j for j in range(J + 1) for _ in range(3)])
    ori = np.array([0] + [o for _ in range(J + 1) for o in (1, 2, 3)])
    scale = np.where(lev >= 0, 2.0 ** (-lev.astype(float)), 0.0)
    D = np.zeros((n, n))
    li, lj = lev[:, None], lev[None, :]
    si, sj = scale[:, None], scale[None, :]
    cross = (li != lj) & (li >= 0) & (lj >= 0)
    if spec.flavor == "u":
        D[cross] = np.abs(si - sj)[cross]
    else:
        D[cross] = np.maximum(si, sj)[cross]
    # accumulation point
    D[0, 1:] = scale[1:]
    D[1:, 0] = scale[1:]
    for j in range(J + 1):
        leg = 2.0 ** (-j - 1)
        base = leg * ell(theta(spec.q[j]))
        idx = {o: 1 + 3 * j + (o - 1) for o in (1, 2, 3)}
        for a, b in ((1, 2), (2, 3)):
            D[idx[a], idx[b]] = D[idx[b], idx[a]] = leg
        D[idx[1], idx[3]] = D[idx[3], idx[1]] = base
    D *= float(spec.K)
    kind = "metric" if spec.flavor == "u" else "ultrametric"
    return FiniteMetricSpace(labels, D, kind)


# ---------------------------------------------------------------------------
# Fingerprint
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fingerprint:
    q: tuple
    K: float
    flavor: str
    levels: int
    inf_label: Hashable
    assignment: dict = field(repr=False, default_factory=dict)

    def close_to(self, other: "Fingerprint", tol: float = FINGERPRINT_TOL) -> bool:
        return (self.levels == other.levels and
                all(abs(a - b) <= tol for a, b in zip(self.q, other.q)))


class FingerprintError(ValueError):
    """The space does not have the shape of a telescope truncation."""


def _try_center(space: FiniteMetricSpace, c: int, J: int, tol: float):
    D = np.asarray(space.dist, dtype=float)
    n = len(space)
    row = D[c]
    others = [i for i in range(n) if i != c]
    K = max(row[i] for i in others)
    if not K > 0:
        return None
    levels: dict[int, list[int]] = {}
    for i in others:
        ratio = row[i] / K
        if ratio <= 0:
            return None
        j = -math.log2(ratio)
        jr = round(j)
        if abs(j - jr) > 1e-6 or not 0 <= jr <= J:
            return None
        levels.setdefault(jr, []).append(i)
    if sorted(levels) != list(range(J + 1)) or any(len(v) != 3 for v in levels.values()):
        return None
    q, assignment = [], {space.labels[c]: INF_LABEL}
    for j in range(J + 1):
        pts = levels[j]
        pairs = [(D[a, b], a, b) for a, b in itertools.combinations(pts, 2)]
        pairs.sort()
        base, a, b = pairs[0]
        apex = next(p for p in pts if p not in (a, b))
        leg = K * 2.0 ** (-j - 1)
        arg = 1.0 - (base / leg) ** 2 / 2.0
        arg = min(1.0, max(-1.0, arg))
        qj = (6.0 / math.pi) * math.acos(arg) - 1.0
        if qj < -1e-6 or qj > 1 + 1e-6:
            return None
        q.append(min(1.0, max(0.0, qj)))
        assignment[space.labels[a]] = (1, j)
        assignment[space.labels[apex]] = (2, j)
        assignment[space.labels[b]] = (3, j)
    return tuple(q), K, assignment


def fingerprint(space: FiniteMetricSpace, subset: Sequence[Hashable] | None = None,
                tol: float = FINGERPRINT_TOL) -> Fingerprint:
    """Recover ``(q, K)`` from a (relabelled) telescope truncation.

    Level ``j`` is read from the distance ``K 2**-j`` to the accumulation
    point; ``q_j = (6/pi) arccos(1 - (base/leg)**2 / 2) - 1`` from the
    level's triangle.  The candidate is accepted only if rebuilding the
    telescope reproduces the input distances under the found assignment.
    ``subset`` restricts to the labels of an embedded copy; when omitted and
    the whole space is not a telescope, groups of labels sharing the same
    first component (amalgam labels ``(i, x)``) are tried in turn.
    """
    if subset is not None:
        return _fingerprint_full(restrict(space, subset), tol)
    try:
        return _fingerprint_full(space, tol)
    except FingerprintError:
        groups: dict = {}
        for lab in space.labels:
            if isinstance(lab, tuple) and lab:
                groups.setdefault(lab[0], []).append(lab)
        for key in sorted(groups, key=repr):
            labs = groups[key]
            if len(labs) >= 7 and (len(labs) - 1) % 3 == 0:
                try:
                    return _fingerprint_full(restrict(space, labs), tol)
                except FingerprintError:
                    continue
        raise


def _fingerprint_full(space: FiniteMetricSpace, tol: float) -> Fingerprint:
    n = len(space)
    if n < 7 or (n - 1) % 3:
        raise FingerprintError(f"{n} points cannot form a telescope truncation")
    J = (n - 1) // 3 - 1
    D = np.asarray(space.dist, dtype=float)
    for c in range(n):
        got = _try_center(space, c, J, tol)
        if got is None:
            continue
        q, K, assignment = got
        for flavor in FLAVORS:
            ref = telescope(TelescopeSpec(q, J, flavor, K))
            perm = [space.index(lab) for lab in _preimage(assignment, ref.labels)]
            diff = np.abs(D[np.ix_(perm, perm)] - ref.dist).max()
            if diff <= max(tol, 1e-9 * K) * 10:
                inf_label = space.labels[c]
                return Fingerprint(q, K, flavor, J, inf_label, assignment)
    raise FingerprintError("no point of the space organizes it as a telescope")


def _preimage(assignment: dict, targets: Sequence) -> list:
    inv = {v: k for k, v in assignment.items()}
    return [inv[t] for t in targets]


# ---------------------------------------------------------------------------
# Simplex-path family
# ---------------------------------------------------------------------------

def simplex_point(coords) -> tuple:
    s = tuple(Fraction(c) if not isinstance(c, float) else Fraction(str(c)) for c in coords)
    if any(c < 0 for c in s) or sum(s) != 1:
        raise ValueError("barycentric coordinates must be non-negative and sum to 1")
    return s


def vertex(i: int, n: int) -> tuple:
    """Vertex ``v_i`` (1-based) of the ``n``-simplex."""
    return tuple(Fraction(int(j == i - 1)) for j in range(n + 1))


def xi(s) -> Fraction:
    return 1 - max(s)


def zeta(i: int, s) -> Fraction:
    """``max(s_i, 1 - max s)`` for the 1-based index ``i``."""
    return max(s[i - 1], 1 - max(s))


def tau(s, k: int, m: int) -> tuple:
    """``(s_1..s_{n+1}, xi [k=1], ..., xi [k=m])``: injective on the glued simplices."""
    x = xi(s)
    return tuple(s) + tuple(x if j == k else Fraction(0) for j in range(1, m + 1))


def cantor_piece(depth: int = 2) -> FiniteMetricSpace:
    """Depth-limited ``S(2, 2**-(n**2))``: the ``(0,0,0,0)`` factor ``P``."""
    return enumerate_space(CantorSpec(constant_branching(2), square(), depth))


@dataclass
class PathSpec:
    """Inputs of ``D_{s,k}``: spaces ``X_1..X_{n+1}``, branch count ``m``, glue, ``P``, levels."""

    spaces: list
    m: int
    flavor: str = "metric"
    glue: FiniteMetricSpace | None = None
    basepoints: list | None = None
    P: FiniteMetricSpace | None = None
    levels: int | None = None

    def __post_init__(self) -> None:
        if len(self.spaces) < 2:
            raise ValueError("need at least two component spaces (n >= 1)")
        if self.m < 2:
            raise ValueError("need at least two branches")
        self.flavor = "ultrametric" if _flavor(self.flavor) == "v" else "metric"
        if self.glue is None:
            self.glue = discrete_glue(self.n + 2)
        if len(self.glue) != self.n + 2:
            raise ValueError("glue must have n + 2 points")
        if self.basepoints is None:
            self.basepoints = [x.labels[0] for x in self.spaces]
        if self.P is None:
            self.P = cantor_piece(2)
        need = self.n + 1 + self.m
        if self.levels is None:
            self.levels = need - 1
        if self.levels + 1 < need:
            raise ValueError(f"telescope needs at least {need} levels to carry tau(s, k)")

    @property
    def n(self) -> int:
        return len(self.spaces) - 1


@dataclass
class SimplexMetric:
    space: FiniteMetricSpace
    quotient: FiniteMetricSpace
    class_map: dict
    q: tuple
    xi: Fraction
    zeta: tuple
    telescope_labels: tuple


def simplex_metric(path: PathSpec, s, k: int) -> SimplexMetric:
    """The pseudo-metric ``D_{s,k}`` and its metric quotient."""
    s = simplex_point(s)
    if len(s) != path.n + 1:
        raise ValueError(f"point has {len(s)} coordinates, expected {path.n + 1}")
    if not 1 <= k <= path.m:
        raise ValueError(f"branch index must lie in 1..{path.m}")
    x = xi(s)
    zs = tuple(zeta(i, s) for i in range(1, path.n + 2))
    ultra = path.flavor == "ultrametric"
    comps, bps = [], []
    P = path.P
    for X, bp, z in zip(path.spaces, path.basepoints, zs):
        Y = dilate(linf_product(X, dilate(P, x)), z)
        comps.append(Y)
        bps.append((bp, P.labels[0]))
    q = tau(s, k, path.m)
    tel = telescope(TelescopeSpec(tuple(float(c) for c in q), path.levels, "v" if ultra else "u"))
    tel = dilate(tel, float(x))
    comps.append(tel)
    bps.append(INF_LABEL)
    glue = dilate(path.glue, x)
    D = p_amalgam(BasepointedFamily(comps, bps, glue), GlueExponent(math.inf if ultra else 1))
    if x > 0:
        D = D.with_kind("ultrametric" if ultra else "metric")
    Q, cls = quotient(D)
    tlabels = tuple((path.n + 1, lab) for lab in tel.labels)
    return SimplexMetric(D, Q, cls, q, x, zs, tlabels)


@dataclass
class AuditRow:
    t: Fraction
    sup_distance: float
    gh_bound: float


def _segment(a, b, t: Fraction) -> tuple:
    return tuple((1 - t) * x + t * y for x, y in zip(a, b))


def path_continuity_audit(path: PathSpec, start, end, grid: int = 100, k: int = 1) -> list[AuditRow]:
    """Sup distances between ``D`` at consecutive grid points of the segment ``start -> end``.

    Row ``t`` compares ``s(t - 1/grid)`` with ``s(t)``; ``gh_bound`` is
    ``2 sup_distance``, a bound on the GH distance of the metric quotients.
    """
    start, end = simplex_point(start), simplex_point(end)
    prev = simplex_metric(path, start, k).space
    rows = [AuditRow(Fraction(0), 0.0, 0.0)]
    for i in range(1, grid + 1):
        t = Fraction(i, grid)
        cur = simplex_metric(path, _segment(start, end, t), k).space
        sd = float(sup_distance(prev, cur))
        rows.append(AuditRow(t, sd, 2 * sd))
        prev = cur
    return rows


def refinement_ratio(path: PathSpec, start, end, grid: int = 100, k: int = 1) -> float:
    """``max sup_distance`` at ``grid`` divided by that at ``2 * grid``."""
    coarse = max(r.sup_distance for r in path_continuity_audit(path, start, end, grid, k))
    fine = max(r.sup_distance for r in path_continuity_audit(path, start, end, 2 * grid, k))
    return coarse / fine if fine > 0 else math.inf


class PreconditionError(ValueError):
    pass


def interior_sample(n: int, denominator: int) -> list[tuple]:
    """Rational points of the simplex with the given denominator, vertices excluded."""
    out = []
    for c in itertools.product(range(denominator + 1), repeat=n):
        rest = denominator - sum(c)
        if rest < 0:
            continue
        s = tuple(Fraction(v, denominator) for v in c + (rest,))
        if max(s) < 1:
            out.append(s)
    return out


@dataclass
class BranchSelection:
    k: int
    collisions: dict
    sample_size: int


def vertex_branch_selection(path: PathSpec, denominator: int | None = None) -> BranchSelection:
    """Smallest branch whose sampled interior spaces avoid the vertex spaces and each other.

    A collision is an interior quotient isometric to some ``X_i`` or two
    sampled parameters with the same telescope fingerprint.
    """
    if path.m != path.n + 2:
        raise PreconditionError(f"branch count must be n + 2 = {path.n + 2}")
    for a, b in itertools.combinations(range(len(path.spaces)), 2):
        if isometry_check(path.spaces[a], path.spaces[b]) is not None:
            raise PreconditionError(f"X_{a + 1} and X_{b + 1} are isometric")
    if denominator is None:
        denominator = {1: 8, 2: 6}.get(path.n, 4)
    sample = interior_sample(path.n, denominator)
    collisions = {}
    for k in range(1, path.m + 1):
        count = 0
        seen: list[Fingerprint] = []
        for s in sample:
            sm = simplex_metric(path, s, k)
            if any(len(sm.quotient) == len(X) and isometry_check(sm.quotient, X.as_float())
                   for X in path.spaces):
                count += 1
            fp = fingerprint(sm.space, subset=sm.telescope_labels)
            if any(fp.close_to(o) for o in seen):
                count += 1
            seen.append(fp)
        collisions[k] = count
    chosen = next((k for k in sorted(collisions) if collisions[k] == 0), None)
    if chosen is None:
        raise AssertionError("every branch collides on the sample")
    return BranchSelection(chosen, collisions, len(sample))
