from fractions import Fraction

import pytest

from cantorgh.cantor import numbers as nb
from cantorgh.cantor.sequences import (
    Log2Radius, constant_branching, explicit, family, geometric, harmonic, lemma0iii, mild_0111,
    square,
)
from cantorgh.cantor.space import (
    INF, CantorSpec, DimensionalType, ball_covering_formula, covering_formula, dim_sequences,
    dimension_report, enumerate_space, measure_ball, non_doubling_flag, theta_eta,
    window_estimates,
)
from cantorgh.metric import SizeError, validate

import oracles

# (alpha prefix, m prefix, depth) whose covering counts were computed with the
# brute-force oracle on the explicit digit-tuple matrix and frozen here.
FROZEN_ALPHA = [Fraction(1), Fraction(1, 2), Fraction(1, 5), Fraction(1, 7), Fraction(1, 20)]
FROZEN_M = [2, 3, 2, 2]
FROZEN_COUNTS = {
    Fraction(1): 1, Fraction(3, 4): 2, Fraction(1, 2): 2, Fraction(1, 3): 6, Fraction(1, 5): 6,
    Fraction(1, 6): 12, Fraction(1, 7): 12, Fraction(1, 10): 24, Fraction(1, 20): 24,
    Fraction(1, 100): 24,
}


def frozen_spec():
    m, a = explicit(FROZEN_ALPHA, FROZEN_M)
    return CantorSpec(m, a, 4)


def two_adic(depth=8):
    return CantorSpec(constant_branching(2), geometric(1, 1), depth)


class TestSequences:
    def test_gap_half_open(self):
        a = geometric(1, 1)  # alpha(n) = 2**-(n+1)
        assert a.gap(Fraction(1, 2)) == -1
        assert a.gap(Fraction(1, 4)) == 0
        assert a.gap(Fraction(3, 8)) == 0
        assert a.gap(Fraction(1, 8)) == 1

    def test_gap_giant_exponent(self):
        e = 10 ** 12
        assert geometric(1, 1).gap(Log2Radius(e)) == e - 2

    def test_snowflake_scales_exponents(self):
        a = square().snowflake(Fraction(1, 3))
        assert a.E(6) == Fraction(36, 3)

    def test_harmonic_alpha_exact(self):
        h = harmonic()
        assert h.alpha(3) == Fraction(1, 4)
        assert not nb.is_exact(h.E(2))

    def test_mild_0111_matches_definition(self):
        seq = mild_0111()
        for n in list(range(0, 40)) + [8191, 8192, 8193, 8194, 10_000]:
            assert seq.E(n) == oracles.mild_0111_E(n)

    def test_lemma0iii_giant_exponents_increase(self):
        m, a = lemma0iii()
        values = [a.E(n) for n in range(6)]
        assert all(nb.lt(x, y) for x, y in zip(values, values[1:]))
        assert not nb.is_exact(values[-1])

    def test_explicit_rejects_non_decreasing(self):
        with pytest.raises(ValueError):
            explicit([1, 1], [2, 2])

    def test_unknown_family(self):
        with pytest.raises(KeyError):
            family("nope")


class TestCovering:
    @pytest.mark.parametrize("r, count", sorted(FROZEN_COUNTS.items()))
    def test_frozen_counts(self, r, count):
        assert covering_formula(frozen_spec(), r, truncated=True).count == count

    def test_enumeration_matches_digit_tuples(self):
        X = enumerate_space(frozen_spec())
        pts, M = oracles.cantor_matrix(FROZEN_ALPHA, FROZEN_M, 4)
        assert list(X.labels) == pts
        assert [[X.dist[i, j] for j in range(len(pts))] for i in range(len(pts))] == M
        assert validate(X).is_ultrametric

    def test_ball_counts_match_oracle(self):
        spec = frozen_spec()
        X = enumerate_space(spec)
        for R in (Fraction(1), Fraction(1, 2), Fraction(1, 5)):
            for r in (Fraction(1, 5), Fraction(1, 7), Fraction(1, 20)):
                if r >= R:
                    continue
                ball = [i for i in range(len(X)) if X.dist[0, i] <= R]
                rows = [[X.dist[i, j] for j in ball] for i in ball]
                assert ball_covering_formula(spec, R, r, truncated=True).count == \
                    oracles.ultra_cover(rows, r)

    def test_depth5_dyadic_count(self):
        # closed balls of radius alpha(3) = 2**-4 are the 8 length-3 cylinders
        alphas = [Fraction(1, 2 ** (n + 1)) for n in range(6)]
        _, M = oracles.cantor_matrix(alphas, [2] * 5, 5)
        assert oracles.ultra_cover(M, Fraction(1, 16)) == 8
        assert covering_formula(two_adic(5), Fraction(1, 16), truncated=True).count == 8

    def test_whole_space_ball(self):
        spec = two_adic()
        assert ball_covering_formula(spec, Fraction(1), Fraction(1, 8)).count == \
            covering_formula(spec, Fraction(1, 8)).count

    def test_ball_radius_order(self):
        with pytest.raises(ValueError):
            ball_covering_formula(two_adic(), Fraction(1, 8), Fraction(1, 2))

    def test_giant_count_is_log_only(self):
        c = covering_formula(two_adic(), Log2Radius(10 ** 9))
        assert c.log2 == 10 ** 9 - 1 and c.count is None

    def test_measure(self):
        spec = frozen_spec()
        assert measure_ball(spec, 1) == Fraction(1, 6)
        assert measure_ball(spec, 3) == Fraction(1, 24)

    def test_enumeration_budget(self):
        with pytest.raises(SizeError):
            enumerate_space(two_adic(30), max_points=1000)


class TestDimensions:
    def test_lemma1111_terms(self):
        # alpha(n) = 2**-(n+1), m = 2: h_n = (n+1)/(n+2), p_n = 1
        rows = dim_sequences(CantorSpec(*family("lemma1111"), 8), 50)
        for r in rows:
            assert r.h == Fraction(r.n + 1, r.n + 2) and r.p == 1

    def test_lemma1111_summary(self):
        rep = dimension_report(CantorSpec(*family("lemma1111"), 8), 1000)
        assert 1 - rep.rows[-1].h <= Fraction(1, 1001)
        assert "h_1000 = 1001/1002" in rep.summary()

    def test_mild_0111_window(self):
        rows = dim_sequences(CantorSpec(constant_branching(2), mild_0111(), 8), 10_000)
        h, p = window_estimates(rows, 10_000)
        # frozen from the oracle sequence mild_0111_E
        assert float(h) == pytest.approx(0.0153825068, abs=1e-9)
        assert float(p) == pytest.approx(0.9836715092, abs=1e-9)

    def test_h_le_p(self):
        for name in ("geometric", "harmonic", "square", "lemma0001", "lemma000i"):
            for r in dim_sequences(CantorSpec(*family(name), 8), 200):
                assert nb.le(r.h, r.p)

    def test_theta_geometric(self):
        row = theta_eta(two_adic(), Fraction(1, 4), 50)
        assert row.theta_log2 == 2 and row.eta == 1

    def test_theta_lemma0001_eta_one(self):
        spec = CantorSpec(*family("lemma0001"), 8)
        for k in (1, 3, 6):
            assert theta_eta(spec, Fraction(1, 2 ** k), 60).eta == 1

    def test_non_doubling_flag(self):
        assert non_doubling_flag(CantorSpec(*family("lemma000i"), 8))
        assert not non_doubling_flag(CantorSpec(*family("lemma0001"), 8))
        assert not non_doubling_flag(two_adic())

    def test_theta_eps_range(self):
        with pytest.raises(ValueError):
            theta_eta(two_adic(), Fraction(3, 2))


class TestDimensionalType:
    def test_parse(self):
        t = DimensionalType.parse("0.5,0.7,1.3,inf")
        assert t.values == (Fraction(1, 2), Fraction(7, 10), Fraction(13, 10), INF)

    @pytest.mark.parametrize("text, fragment", [
        ("1,0.5,1,1", "a1 <= a2"), ("0,1,0.5,1", "a2 <= a3"), ("0,0,2,1", "a3 <= a4"),
    ])
    def test_ordering_errors_name_the_inequality(self, text, fragment):
        with pytest.raises(ValueError, match=fragment):
            DimensionalType.parse(text)

    def test_tdim_label_bound(self):
        with pytest.raises(ValueError, match="l <= a1"):
            DimensionalType.parse("1,1,1,1", l=2)

    def test_scaled_and_max(self):
        a = DimensionalType(0, 1, 1, 1).scaled(Fraction(7, 10))
        b = DimensionalType(0, 0, 0, 1).scaled(2)
        assert a.maximum(b) == DimensionalType(0, Fraction(7, 10), Fraction(7, 10), 2)

    def test_infinite_scale(self):
        assert DimensionalType(0, 0, 0, INF).scaled(3).a4 == INF

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            DimensionalType.parse("-1,0,0,0")
