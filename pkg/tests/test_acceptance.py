"""Acceptance criteria 1-13, one test each.

Every test records a PASS/FAIL line (with runtime against its budget) that is
printed in the terminal summary under "acceptance criteria".
"""

import random
from fractions import Fraction

import pytest

from cantorgh.cantor import numbers as nb
from cantorgh.cantor.blocks import building_block, upadim2_certificate
from cantorgh.cantor.factory import component_bounds_ok, prescribed_factory
from cantorgh.cantor.sequences import Log2Radius, constant_branching, explicit, family, geometric
from cantorgh.cantor.space import (
    CantorSpec, DimensionalType, ball_covering_formula, ball_labels, covering_formula,
    dim_sequences, enumerate_space, non_doubling_flag, window_estimates,
)
from cantorgh.gromov import gh_exact, gh_upper_via_surjection, qiu_demo, ugh
from cantorgh.metric import FiniteMetricSpace, covering_oracle, isometry_check, restrict, validate
from cantorgh.telescope import (
    PathSpec, TelescopeSpec, fingerprint, path_continuity_audit, refinement_ratio, simplex_metric,
    telescope, vertex,
)
from cantorgh.verify import random_composition

import oracles

FINGERPRINT_TOL = 1e-9
DIM_TOL = Fraction(1, 20)


def _random_small_spec(rng):
    """Depth <= 8, at most 256 points, rational strictly decreasing alpha."""
    depth = rng.randint(1, 8)
    ms = []
    for i in range(depth):
        ms.append(3 if rng.random() < 0.3 and 3 * _prod(ms) * 2 ** (depth - i - 1) <= 256 else 2)
    alphas = [Fraction(rng.randint(1, 4), rng.randint(1, 2))]
    for _ in range(depth + 2):
        alphas.append(alphas[-1] * Fraction(rng.randint(1, 7), 8))
    m, a = explicit(alphas, ms + [2, 2])
    return CantorSpec(m, a, depth), alphas, ms


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def _radii(rng, alphas, depth, count=24):
    rs = set(alphas[: depth + 1])
    rs.add(alphas[0] * 2)
    while len(rs) < count:
        i = rng.randint(0, depth)
        lo = alphas[i + 1]
        rs.add(lo + (alphas[i] - lo) * Fraction(rng.randint(1, 99), 100))
    return sorted(rs)


def test_criterion_01_formula_matches_oracle(criterion):
    rng = random.Random(101)
    with criterion(1, "covering formulas equal covering_oracle (50 specs x >= 20 radii)", 10):
        for _ in range(50):
            spec, alphas, ms = _random_small_spec(rng)
            X = enumerate_space(spec)
            radii = _radii(rng, alphas, spec.depth)
            assert len(radii) >= 20
            for r in radii:
                want = covering_oracle(X, r)
                assert covering_formula(spec, r, truncated=True).count == want, (alphas, ms, r)
            for _ in range(20):
                R, r = sorted(rng.sample(radii, 2), reverse=True)
                centre = rng.choice(X.labels)
                ball = restrict(X, ball_labels(X, centre, R))
                got = ball_covering_formula(spec, R, r, truncated=True).count
                assert got == covering_oracle(ball, r), (alphas, ms, R, r)


def test_criterion_02_type0001_ball_counts(criterion):
    m, alpha = family("lemma0001")
    spec = CantorSpec(m, alpha, 8)
    with criterion(2, "type-0001 family ball counts log2 = n+1 for n <= 40", 1):
        got = {n: ball_covering_formula(spec, Log2Radius(n ** 3), Log2Radius(n ** 3 + n)).log2
               for n in range(1, 41)}
        wrong = {n: v for n, v in got.items() if v != n + 1}
        assert not wrong, f"log2 count is n, not n+1 (closed balls), e.g. n=1 -> {got[1]}"


def _random_target_equal_middle(rng):
    vals = sorted(Fraction(rng.randint(0, 25), 10) for _ in range(3))
    return DimensionalType(vals[0], vals[1], vals[1], vals[2])


def test_criterion_03_factory_convergence(criterion):
    rng = random.Random(303)
    targets = [DimensionalType.parse("0.5,0.7,1.3,2.0")]
    targets += [_random_target_equal_middle(rng) for _ in range(10)]
    with criterion(3, "factory components within 0.05 at N = 10^4; exact max rule", 60):
        for t in targets:
            asm = prescribed_factory(t)
            assert asm.declared_target == t
            for comp in asm.components:
                if comp.block.skeleton is not None:
                    continue  # the a2 < a3 block is certified separately (criterion 4)
                rep = comp.report(10_000)
                assert component_bounds_ok(rep, DIM_TOL), (str(t), comp.block.tag,
                                                           nb.to_float(rep.h_liminf),
                                                           nb.to_float(rep.p_limsup))


def test_criterion_04_gap_between_p_and_ubdim(criterion):
    with criterion(4, "(0,0,1,1): ubdim >= 0.95, adim <= 1, hdim = pdim = 0", 60):
        asm = prescribed_factory("0,0,1,1")
        assert asm.declared_target == DimensionalType(0, 0, 1, 1)
        (comp,) = asm.components
        sk = comp.block.skeleton
        assert sk is not None
        assert sk.designed_ratio(100) >= 1 - DIM_TOL
        assert nb.to_float(sk.ubdim_certificate(100)) >= 1 - DIM_TOL
        assert upadim2_certificate(sk.ambient, 10_000)
        for s in range(1, 6):
            rows = dim_sequences(sk.piece_spec(s), 10_000)
            h, p = window_estimates(rows, 10_000)
            assert nb.to_float(p) <= DIM_TOL and nb.to_float(h) <= DIM_TOL


def _random_dyadic_spec(rng):
    exps = [rng.randint(0, 2)]
    for _ in range(40):
        exps.append(exps[-1] + rng.randint(1, 4))
    ms = [rng.choice((2, 4, 8)) for _ in range(41)]
    m, a = explicit([Fraction(1, 2 ** e) for e in exps], ms)
    return CantorSpec(m, a, 8)


def test_criterion_05_snowflake_identity(criterion):
    rng = random.Random(505)
    with criterion(5, "h_n, p_n scale by exactly eta under snowflaking", 5):
        for _ in range(20):
            spec = _random_dyadic_spec(rng)
            base = dim_sequences(spec, 38)
            for eta in (Fraction(1, 2), Fraction(2), Fraction(3)):
                flaked = dim_sequences(spec.snowflake(1 / eta), 38)
                assert len(flaked) == len(base)
                for r0, r1 in zip(base, flaked):
                    assert isinstance(r1.h, Fraction) and isinstance(r1.p, Fraction)
                    assert r1.h == eta * r0.h and r1.p == eta * r0.p


def test_criterion_06_non_doubling(criterion):
    m, alpha = family("lemma000i")
    spec = CantorSpec(m, alpha, 8)
    with criterion(6, "type-000i family flag trips; Theta(1/2) level counts = 2^(n+1), n <= 60", 1):
        assert non_doubling_flag(spec, Fraction(1, 2), 60)
        got = {n: ball_covering_formula(spec, Log2Radius(n ** 3), Log2Radius(n ** 3 + 1)).log2
               for n in range(1, 61)}
        wrong = {n: v for n, v in got.items() if v != n + 1}
        assert not wrong, f"flag trips, but log2 count is n, not n+1 (closed balls), e.g. n=1 -> {got[1]}"


def _random_metric_space(rng, max_points=4):
    n = rng.randint(1, max_points)
    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = Fraction(rng.randint(1, 6), 2)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                w[i][j] = min(w[i][j], w[i][k] + w[k][j])
    return FiniteMetricSpace.from_matrix(w)


def test_criterion_07_gh_sanity(criterion):
    rng = random.Random(707)
    with criterion(7, "GH: 2pt vs 1pt = 1/2, gh(a,a) = 0, triangle, surjection bound", 120):
        two = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]])
        assert gh_exact(two, FiniteMetricSpace.point()).value == Fraction(1, 2)
        a = _random_metric_space(rng)
        self_res = gh_exact(a, a)
        assert self_res.value == 0 and self_res.witness is not None
        for _ in range(200):
            x, y, z = (_random_metric_space(rng) for _ in range(3))
            assert gh_exact(x, z).value <= gh_exact(x, y).value + gh_exact(y, z).value
        checked = 0
        while checked < 200:
            x, y = _random_metric_space(rng), _random_metric_space(rng)
            if len(y) > len(x):
                x, y = y, x
            targets = list(y.labels) + [rng.choice(y.labels) for _ in range(len(x) - len(y))]
            rng.shuffle(targets)
            f = dict(zip(x.labels, targets))
            assert gh_exact(x, y).value <= gh_upper_via_surjection(f, x, y).upper
            checked += 1


def test_criterion_08_qiu_ratio(criterion):
    spec = CantorSpec(constant_branching(2), geometric(1, 1), 4)
    with criterion(8, "Qiu table: u_GH = 0.505 and ratio >= 101 at eps = 0.01", 1):
        X = enumerate_space(spec)
        assert len(X) == 16 and X.diameter == Fraction(1, 2)
        rows = {r.eps: r for r in qiu_demo(X, ["1", "0.1", "0.01"])}
        assert rows[Fraction(1, 100)].ugh == Fraction(505, 1000)
        assert rows[Fraction(1, 100)].certified_ratio >= 101
        assert rows[Fraction(1, 10)].certified_ratio >= 11
        assert rows[Fraction(1)].certified_ratio >= 2


def _random_ultra(rng, n):
    matrix = [[Fraction(0)] * n for _ in range(n)]
    clusters = [[i] for i in range(n)]
    h = Fraction(0)
    while len(clusters) > 1:
        h += Fraction(rng.randint(1, 5), 4)
        a, b = sorted(rng.sample(range(len(clusters)), 2))
        for i in clusters[a]:
            for j in clusters[b]:
                matrix[i][j] = matrix[j][i] = h
        clusters[a] = clusters[a] + clusters.pop(b)
    return FiniteMetricSpace.from_matrix(matrix, kind="ultrametric")


def test_criterion_09_ugh_strong_triangle(criterion):
    rng = random.Random(909)
    with criterion(9, "u_GH strong triangle on 100 triples with distinct diameters", 5):
        done = 0
        while done < 100:
            xs = [_random_ultra(rng, rng.randint(2, 5)) for _ in range(3)]
            if len({x.diameter for x in xs}) < 3:
                continue
            ab, bc, ac = ugh(xs[0], xs[1]), ugh(xs[1], xs[2]), ugh(xs[0], xs[2])
            assert ab.exact and bc.exact and ac.exact
            x, y, z = ab.value, bc.value, ac.value
            assert x <= max(y, z) and y <= max(x, z) and z <= max(x, y)
            done += 1


def test_criterion_10_fingerprint(criterion):
    rng = random.Random(1010)
    with criterion(10, "telescope fingerprint recovers (q, K) within 1e-9", 5):
        for _ in range(100):
            q = [rng.random() for _ in range(13)]
            K = rng.uniform(0.05, 10)
            for flavor in "uv":
                T = telescope(TelescopeSpec(q, 12, flavor, K))
                perm = list(range(len(T)))
                rng.shuffle(perm)
                fp = fingerprint(T.relabel(order=perm))
                assert max(abs(a - b) for a, b in zip(fp.q, q)) <= FINGERPRINT_TOL
                assert abs(fp.K - K) <= FINGERPRINT_TOL


def _three_point(a, b, c):
    return FiniteMetricSpace.from_matrix([[0, a, b], [a, 0, c], [b, c, 0]])


THREE_SPACES = [_three_point(1, 1, 1), _three_point(1, 1, Fraction(3, 2)), _three_point(1, 2, 2)]


def test_criterion_11_vertex_quotients(criterion):
    with criterion(11, "quotient(D_{v_i,k}) is isometric to X_i for all i, k", 10):
        path = PathSpec(THREE_SPACES, 4)
        for i in range(1, 4):
            for k in range(1, 5):
                sm = simplex_metric(path, vertex(i, 2), k)
                witness = isometry_check(sm.quotient, THREE_SPACES[i - 1].as_float())
                assert witness is not None, (i, k)


def test_criterion_12_path_continuity(criterion):
    with criterion(12, "edge v1->v2: refinement ratio in [1.5, 2.5], endpoint quotients", 30):
        path = PathSpec(THREE_SPACES, 4)
        ratio = refinement_ratio(path, vertex(1, 2), vertex(2, 2), 100)
        assert 1.5 <= ratio <= 2.5, ratio
        for i in (1, 2):
            sm = simplex_metric(path, vertex(i, 2), 1)
            assert isometry_check(sm.quotient, THREE_SPACES[i - 1].as_float()) is not None


def test_criterion_13_composition_fuzz(criterion):
    rng = random.Random(1313)
    with criterion(13, "1000 random compositions validate for their declared kind", 60):
        violations = []
        for c in range(1000):
            space, kind = random_composition(rng)
            if not validate(space).satisfies(kind):
                violations.append((c, kind))
        assert not violations, violations[:5]
