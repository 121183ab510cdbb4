import random
from fractions import Fraction

import pytest

from cantorgh.gromov import (
    Correspondence, distortion, gh_exact, gh_upper_via_surjection, qiu_demo, quotient_audit,
    sup_distance, ugh, ugh_ultrametric_axiom_audit,
)
from cantorgh.metric import FiniteMetricSpace, KindError, dilate

import oracles


def sp(rows, kind="metric"):
    return FiniteMetricSpace.from_matrix(rows, kind=kind)


TWO = sp([[0, 1], [1, 0]], "ultrametric")
POINT = FiniteMetricSpace.point()
EQUI = sp([[0, 1, 1], [1, 0, 1], [1, 1, 0]], "ultrametric")
ISO = sp([[0, 1, 2], [1, 0, 2], [2, 2, 0]], "ultrametric")


def rand_space(rng, n):
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rows[i][j] = rows[j][i] = Fraction(rng.randint(1, 4), 2)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                rows[i][j] = min(rows[i][j], rows[i][k] + rows[k][j])
    return rows


class TestGh:
    def test_two_points_vs_point(self):
        assert gh_exact(TWO, POINT).value == Fraction(1, 2)

    def test_self_distance_zero(self):
        res = gh_exact(ISO, ISO)
        assert res.value == 0
        assert res.witness.distortion(ISO, ISO) == 0

    # values from the brute-force relation enumeration in tests/oracles.py
    @pytest.mark.parametrize("a, b, value", [
        (EQUI, ISO, Fraction(1, 2)),
        (EQUI, TWO, Fraction(1, 2)),
        (ISO, sp([[0, "3/2"], ["3/2", 0]]), Fraction(1, 2)),
    ])
    def test_frozen_values(self, a, b, value):
        assert gh_exact(a, b).value == value

    def test_matches_brute_force(self):
        rng = random.Random(11)
        for _ in range(60):
            A = rand_space(rng, rng.randint(1, 3))
            B = rand_space(rng, rng.randint(1, 3))
            got = gh_exact(sp(A), sp(B))
            assert got.value == oracles.gh_brute(A, B)
            assert 2 * got.value == got.witness.distortion(sp(A), sp(B))

    def test_surjection_bound(self):
        f = {0: 0, 1: 0, 2: 1}
        up = gh_upper_via_surjection(f, ISO, TWO)
        assert up.upper == 2 * distortion(f, ISO, TWO)
        assert gh_exact(ISO, TWO).value <= up.upper

    def test_non_surjective_map_rejected(self):
        with pytest.raises(ValueError):
            gh_upper_via_surjection({0: 0, 1: 0, 2: 0}, ISO, TWO)

    def test_interval_above_guard(self):
        pts = [Fraction(i) for i in range(9)]
        A = sp([[abs(x - y) for y in pts] for x in pts])
        B = sp([[abs(x - y) * 2 for y in pts[:7]] for x in pts[:7]])
        res = gh_exact(A, B, guard=14, node_budget=2000)
        assert res.lower <= res.upper
        assert res.lower >= abs(A.diameter - B.diameter) / 2

    def test_correspondence_must_cover(self):
        with pytest.raises(ValueError):
            Correspondence.from_pairs([(0, 0)], TWO, TWO)

    def test_sup_distance(self):
        assert sup_distance(ISO, dilate(ISO, 2)) == 2


class TestUgh:
    def test_distinct_diameters(self):
        assert ugh(TWO, ISO).value == 2

    def test_isometric(self):
        res = ugh(ISO, ISO.relabel(order=[2, 0, 1]))
        assert res.value == 0 and res.method == "isometry"

    def test_equal_diameter_interval(self):
        other = sp([[0, "1/2", 1], ["1/2", 0, 1], [1, 1, 0]], "ultrametric")
        res = ugh(EQUI, other)
        assert not res.exact
        assert res.lower == 2 * gh_exact(EQUI, other).value == Fraction(1, 2)
        assert res.upper == 1

    def test_requires_ultrametric(self):
        with pytest.raises(KindError):
            ugh(sp([[0, 1, 2], [1, 0, 1], [2, 1, 0]]), TWO)

    def test_axiom_audit(self):
        audit = ugh_ultrametric_axiom_audit(TWO, ISO, dilate(ISO, 3))
        assert audit.passed is True

    def test_qiu_rows(self):
        rows = qiu_demo(EQUI, [Fraction(1, 10)])
        (row,) = rows
        assert row.ugh == Fraction(11, 10)
        assert row.gh_upper == Fraction(1, 10)
        assert row.gh_exact == Fraction(1, 20)
        assert row.certified_ratio == 11


def test_quotient_audit():
    d = sp([[0, 0, 1], [0, 0, 1], [1, 1, 0]], "pseudo-metric")
    e = sp([[0, Fraction(1, 10), 1], [Fraction(1, 10), 0, 1], [1, 1, 0]])
    gh, bound = quotient_audit(d, e)
    assert gh.value <= bound == Fraction(1, 5)
