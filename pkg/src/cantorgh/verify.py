"""Seeded invariant suites for every module, with JUnit-style reporting.

Each suite is a list of named checks; a check returns ``(passed, detail)``.
Suites are deterministic for a given seed and case count.
"""

from __future__ import annotations

import math
import random
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .cantor import numbers as nb
from .cantor.factory import prescribed_factory
from .cantor.sequences import constant_branching, explicit
from .cantor.space import (
    CantorSpec, ball_covering_formula, ball_labels, covering_formula, dim_sequences,
    enumerate_space, measure_ball, theta_eta,
)
from .gromov import gh_exact, gh_upper_via_surjection, ugh
from .metric import (
    BasepointedFamily, FiniteMetricSpace, GlueExponent, covering_oracle, dilate, discrete_glue,
    isometry_check, linf_product, p_amalgam, quotient, restrict, snowflake, validate,
)
from .telescope import (
    PathSpec, TelescopeSpec, fingerprint, simplex_metric, telescope, vertex,
)

DEFAULT_SEED = 20240601
DEFAULT_CASES = 1000
SUITES = ("metric", "cantor", "gromov", "telescope")


# ---------------------------------------------------------------------------
# Random generators (shared with the test-suite)
# ---------------------------------------------------------------------------

def random_ultrametric(rng: random.Random, n: int, exact: bool = True) -> FiniteMetricSpace:
    """Random ultrametric from a random binary merge tree with dyadic heights."""
    clusters = [[i] for i in range(n)]
    dist = np.empty((n, n), dtype=object) if exact else np.zeros((n, n))
    for i in range(n):
        dist[i, i] = Fraction(0) if exact else 0.0
    height = Fraction(0)
    while len(clusters) > 1:
        height += Fraction(rng.randint(1, 4), 4)
        a, b = rng.sample(range(len(clusters)), 2)
        A, B = clusters[a], clusters[b]
        for i in A:
            for j in B:
                dist[i, j] = dist[j, i] = height if exact else float(height)
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [A + B]
    return FiniteMetricSpace(tuple(range(n)), dist, "ultrametric")


def random_metric(rng: random.Random, n: int, exact: bool = True) -> FiniteMetricSpace:
    """Shortest-path metric of a random complete graph with rational weights."""
    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = Fraction(rng.randint(1, 8), 4)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if w[i][k] + w[k][j] < w[i][j]:
                    w[i][j] = w[i][k] + w[k][j]
    if not exact:
        w = [[float(x) for x in row] for row in w]
    return FiniteMetricSpace.from_matrix(w, kind="metric")


def random_cantor_spec(rng: random.Random, depth: int) -> CantorSpec:
    """Random ``(m, alpha)`` prefix: ``m_i in {2, 3}``, rational decreasing ``alpha``."""
    alphas = [Fraction(rng.randint(1, 3), 1)]
    for _ in range(depth + 3):
        alphas.append(alphas[-1] * Fraction(rng.randint(1, 5), rng.randint(6, 9)))
    ms = [rng.choice((2, 2, 3)) for _ in range(depth + 3)]
    m, a = explicit(alphas, ms)
    return CantorSpec(m, a, depth)


def random_composition(rng: random.Random, budget: int = 40) -> tuple[FiniteMetricSpace, str]:
    """Random composite of the space-building operations, with its declared kind."""
    op = rng.choice(("amalgam1", "amalgamInf", "product", "snowflake", "telescope", "simplex",
                     "amalgamP"))
    if op in ("amalgam1", "amalgamInf", "amalgamP"):
        ultra = op == "amalgamInf"
        k = rng.randint(2, 4)
        parts = [random_ultrametric(rng, rng.randint(1, 5)) if ultra or rng.random() < 0.5
                 else random_metric(rng, rng.randint(1, 5)) for _ in range(k)]
        glue = random_ultrametric(rng, k)
        bps = [rng.choice(p.labels) for p in parts]
        p = {"amalgam1": 1, "amalgamInf": math.inf, "amalgamP": rng.choice((2, 3, 1.5))}[op]
        out = p_amalgam(BasepointedFamily(parts, bps, glue), GlueExponent(p))
        return out, out.kind
    if op == "product":
        a = random_ultrametric(rng, rng.randint(1, 5)) if rng.random() < 0.5 else random_metric(rng, rng.randint(1, 5))
        b = random_ultrametric(rng, rng.randint(1, 5)) if rng.random() < 0.5 else random_metric(rng, rng.randint(1, 5))
        out = linf_product(a, b)
        return out, out.kind
    if op == "snowflake":
        if rng.random() < 0.5:
            a = random_ultrametric(rng, rng.randint(2, 7))
            g = rng.choice((Fraction(1, 2), Fraction(2), Fraction(3), Fraction(1, 3), 0.7))
        else:
            a = random_metric(rng, rng.randint(2, 7))
            g = rng.choice((Fraction(1, 2), Fraction(1, 3), 0.7, Fraction(1)))
        out = snowflake(a, g)
        return out, out.kind
    if op == "telescope":
        J = rng.randint(1, 10)
        flavor = rng.choice("uv")
        out = telescope(TelescopeSpec([rng.random() for _ in range(J + 1)], J, flavor,
                                      rng.uniform(0.1, 5)))
        return out, out.kind
    flavor = rng.choice(("metric", "ultrametric"))
    n = rng.randint(1, 2)
    gen = random_ultrametric if flavor == "ultrametric" else random_metric
    spaces = [gen(rng, rng.randint(1, 3)) for _ in range(n + 1)]
    path = PathSpec(spaces, n + 2, flavor, P=enumerate_space(
        CantorSpec(constant_branching(2), _square(), 1)))
    den = rng.randint(2, 6)
    s = _random_simplex_point(rng, n, den)
    out = simplex_metric(path, s, rng.randint(1, n + 2)).space
    return out, out.kind


def _square():
    from .cantor.sequences import square
    return square()


def _random_simplex_point(rng: random.Random, n: int, den: int) -> tuple:
    cuts = sorted(rng.randint(0, den) for _ in range(n))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return tuple(Fraction(p, den) for p in parts)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str
    seconds: float


Check = Callable[[random.Random, int], tuple]


def _metric_fuzz(rng, cases, fault=False):
    bad = 0
    first = ""
    for c in range(cases):
        space, kind = random_composition(rng)
        if fault and c == 0:
            space, kind = _inject(random_ultrametric(rng, 6)), "ultrametric"
        rep = validate(space)
        if not rep.satisfies(kind):
            bad += 1
            if not first:
                which = ("strong triangle" if kind in ("ultrametric", "pseudo-ultrametric")
                         and rep.worst_strong_triangle else "triangle")
                first = (f"case {c}: declared {kind}, {which} inequality fails on triple "
                         f"{rep.worst_violating_triple}")
    return bad == 0, first or f"{cases} compositions valid"


def _inject(space: FiniteMetricSpace) -> FiniteMetricSpace:
    """Inflate the largest entry by 3/2: the triangle inequality survives, the strong one fails."""
    D = np.array(space.dist, dtype=object)
    i, j = np.unravel_index(np.argmax(np.asarray(space.dist, dtype=float)), D.shape)
    D[i, j] = D[j, i] = D[i, j] * Fraction(3, 2)
    return FiniteMetricSpace(space.labels, D, space.kind)


def _metric_covering(rng, cases):
    for _ in range(min(cases, 100)):
        X = random_ultrametric(rng, rng.randint(2, 8)) if rng.random() < 0.5 else random_metric(rng, rng.randint(2, 8))
        radii = sorted({Fraction(rng.randint(1, 40), 8) for _ in range(6)})
        counts = [covering_oracle(X, r) for r in radii]
        if any(b > a for a, b in zip(counts, counts[1:])):
            return False, f"non-monotone counts {counts}"
        if covering_oracle(X, X.diameter) != 1:
            return False, "r >= diameter must give 1"
        pos = [d for d in X.dist.flat if d > 0]
        if covering_oracle(X, min(pos) / 2) != len(X):
            return False, "small radius must give the point count"
    return True, "monotone, 1 at diameter, n below min distance"


def _metric_algebra(rng, cases):
    for _ in range(min(cases, 100)):
        X = random_ultrametric(rng, rng.randint(2, 6))
        g = rng.choice((Fraction(2), Fraction(3)))
        Y = snowflake(snowflake(X, g), 1 / g)
        if not all(Y.dist.flat[i] == X.dist.flat[i] for i in range(X.dist.size)):
            return False, "snowflake round trip is not exact"
        lam = Fraction(rng.randint(1, 9), 4)
        Q, _ = quotient(dilate(X, lam))
        if len(Q) != len(X):
            return False, "quotient of positive dilation changed the point count"
        perm = list(range(len(X)))
        rng.shuffle(perm)
        Z = X.relabel(order=perm)
        iso = isometry_check(X, Z)
        if iso is None or X.distance_multiset() != Z.distance_multiset():
            return False, "isometry under relabelling missed"
        sub = rng.sample(X.labels, rng.randint(1, len(X)))
        if not validate(restrict(X, sub)).is_pseudo_ultrametric:
            return False, "restriction broke the strong triangle inequality"
    return True, "snowflake round trip, quotient, isometry, restriction"


def _cantor_formula(rng, cases):
    for _ in range(min(cases, 20)):
        spec = random_cantor_spec(rng, rng.randint(1, 5))
        X = enumerate_space(spec)
        for _ in range(10):
            r = Fraction(rng.randint(1, 400), 100) * spec.alpha.alpha(rng.randint(0, spec.depth))
            if covering_formula(spec, r, truncated=True).count != covering_oracle(X, r):
                return False, f"covering mismatch at r={r}"
    return True, "formula = oracle"


def _cantor_sequences(rng, cases):
    for _ in range(min(cases, 20)):
        spec = random_cantor_spec(rng, 6)
        rows = dim_sequences(spec, 30)
        if any(nb.lt(r.p, r.h) for r in rows):
            return False, "h_n > p_n"
        eta = rng.choice((Fraction(1, 2), Fraction(2), Fraction(3)))
        rows2 = dim_sequences(spec.snowflake(1 / eta), 30)
        for a, b in zip(rows, rows2):
            if nb.is_exact(a.h) and (b.h != a.h * eta or b.p != a.p * eta):
                return False, "snowflake scaling not exact"
        for n in range(4):
            parent = measure_ball(spec, n)
            children = measure_ball(spec, n + 1) * spec.m.m(n + 1)
            if children != parent:
                return False, "sibling masses do not sum to the parent"
        prev = None
        for k in (8, 6, 4, 2, 1):
            th = theta_eta(spec, Fraction(1, 2 ** k), 20).theta_log2
            if prev is not None and nb.lt(prev, th):
                return False, "Theta increased with eps"
            prev = th
    return True, "h<=p, exact snowflake scaling, masses, Theta monotone"


def _cantor_factory(rng, cases):
    for _ in range(min(cases, 10)):
        vals = sorted(Fraction(rng.randint(0, 8), 4) for _ in range(4))
        asm = prescribed_factory(",".join(str(v) for v in vals))
        if list(asm.declared_target.values) != vals:
            return False, f"max rule failed for {vals}"
        X = asm.truncation(2)
        if not validate(X).is_ultrametric:
            return False, f"assembly for {vals} is not ultrametric"
    return True, "declared target = requested, truncations ultrametric"


def _gh_axioms(rng, cases):
    for _ in range(min(cases, 40)):
        a, b, c = (random_metric(rng, rng.randint(1, 4)) for _ in range(3))
        ab, bc, ac = gh_exact(a, b).value, gh_exact(b, c).value, gh_exact(a, c).value
        if gh_exact(b, a).value != ab:
            return False, "not symmetric"
        if ac > ab + bc:
            return False, "triangle inequality failed"
        if ab < abs(a.diameter - b.diameter) / 2:
            return False, "below the diameter bound"
        if gh_exact(a, a).value != 0:
            return False, "gh(a, a) != 0"
        f = {x: rng.choice(b.labels) for x in a.labels}
        if set(f.values()) == set(b.labels) and ab > gh_upper_via_surjection(f, a, b).upper:
            return False, "exceeds the surjection bound"
    return True, "symmetry, triangle, diameter bound, surjection bound"


def _ugh_axioms(rng, cases):
    for _ in range(min(cases, 100)):
        xs = []
        while len({x.diameter for x in xs}) < 3:
            xs = [random_ultrametric(rng, rng.randint(2, 5)) for _ in range(3)]
        vals = [ugh(xs[0], xs[1]).value, ugh(xs[1], xs[2]).value, ugh(xs[0], xs[2]).value]
        x, y, z = vals
        if not (x <= max(y, z) and y <= max(x, z) and z <= max(x, y)):
            return False, f"strong triangle failed on {vals}"
    return True, "strong triangle on exact values"


def _telescope_shapes(rng, cases):
    for _ in range(min(cases, 30)):
        J = rng.randint(1, 12)
        q = [rng.random() for _ in range(J + 1)]
        K = rng.uniform(0.1, 5)
        for fl in "uv":
            T = telescope(TelescopeSpec(q, J, fl, K))
            rep = validate(T)
            if fl == "u" and not (rep.is_metric and not rep.is_ultrametric):
                return False, "u flavor must be metric and not ultrametric"
            if fl == "v" and not rep.is_ultrametric:
                return False, "v flavor must be ultrametric"
            perm = list(range(len(T)))
            rng.shuffle(perm)
            fp = fingerprint(T.relabel(order=perm))
            if max(abs(a - b) for a, b in zip(fp.q, q)) > 1e-9 or abs(fp.K - K) > 1e-9:
                return False, "fingerprint round trip failed"
    return True, "flavors and fingerprint round trip"


def _telescope_path(rng, cases):
    def tri(a, b, c):
        return FiniteMetricSpace.from_matrix([[0, a, b], [a, 0, c], [b, c, 0]])
    spaces = [tri(1, 1, 1), tri(1, 1, Fraction(3, 2)), tri(1, 2, 2)]
    path = PathSpec(spaces, 4)
    for i in range(1, 4):
        for k in range(1, 5):
            sm = simplex_metric(path, vertex(i, 2), k)
            if isometry_check(sm.quotient, spaces[i - 1].as_float()) is None:
                return False, f"vertex {i} quotient is not X_{i}"
    for _ in range(min(cases, 10)):
        s = _random_simplex_point(rng, 2, 5)
        if max(s) == 1:
            continue
        sm = simplex_metric(path, s, rng.randint(1, 4))
        if not validate(sm.space).is_metric:
            return False, f"D at {s} is not a metric"
    return True, "vertex quotients, interior metrics"


SUITE_CHECKS: dict[str, list[tuple[str, Check]]] = {
    "metric": [("composition_fuzz", _metric_fuzz), ("covering_oracle", _metric_covering),
               ("algebra", _metric_algebra)],
    "cantor": [("formula_vs_oracle", _cantor_formula), ("sequences", _cantor_sequences),
               ("factory", _cantor_factory)],
    "gromov": [("gh_axioms", _gh_axioms), ("ugh_axioms", _ugh_axioms)],
    "telescope": [("shapes_fingerprint", _telescope_shapes), ("simplex_path", _telescope_path)],
}


def run_suites(names=None, seed: int = DEFAULT_SEED, cases: int = DEFAULT_CASES,
               inject_fault: bool = False) -> list[CheckResult]:
    names = list(names or SUITES)
    out = []
    for suite in names:
        if suite not in SUITE_CHECKS:
            raise KeyError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
        for name, check in SUITE_CHECKS[suite]:
            rng = random.Random(f"{seed}:{suite}:{name}")
            t0 = time.perf_counter()
            try:
                if check is _metric_fuzz:
                    ok, detail = check(rng, cases, inject_fault)
                else:
                    ok, detail = check(rng, cases)
            except Exception as exc:  # a crash is a failed check, reported as such
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            out.append(CheckResult(suite, name, bool(ok), detail, time.perf_counter() - t0))
    return out


def junit_xml(results: list[CheckResult]) -> str:
    root = ET.Element("testsuites")
    by_suite: dict[str, list[CheckResult]] = {}
    for r in results:
        by_suite.setdefault(r.suite, []).append(r)
    for suite, rs in by_suite.items():
        el = ET.SubElement(root, "testsuite", name=suite, tests=str(len(rs)),
                           failures=str(sum(not r.passed for r in rs)))
        for r in rs:
            case = ET.SubElement(el, "testcase", classname=suite, name=r.name,
                                 time=f"{r.seconds:.3f}")
            if not r.passed:
                fail = ET.SubElement(case, "failure", message=r.detail)
                fail.text = r.detail
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"
