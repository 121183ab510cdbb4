from fractions import Fraction

from hypothesis import given, settings, strategies as st

from cantorgh.cantor.sequences import explicit
from cantorgh.cantor.space import CantorSpec, covering_formula
from cantorgh.gromov import gh_exact, ugh
from cantorgh.metric import FiniteMetricSpace, covering_oracle, snowflake, validate
from cantorgh.telescope import TelescopeSpec, fingerprint, telescope

import oracles

SETTINGS = settings(max_examples=60, deadline=None)


@st.composite
def weights(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = Fraction(draw(st.integers(1, 8)), 2)
    return w


def closure(w, combine):
    n = len(w)
    d = [row[:] for row in w]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                d[i][j] = min(d[i][j], combine(d[i][k], d[k][j]))
    return d


def metrics(**kw):
    return weights(**kw).map(lambda w: FiniteMetricSpace.from_matrix(
        closure(w, lambda a, b: a + b)))


def ultrametrics(**kw):
    return weights(**kw).map(lambda w: FiniteMetricSpace.from_matrix(
        closure(w, max), kind="ultrametric"))


radii = st.fractions(Fraction(1, 4), Fraction(5), max_denominator=8)


@SETTINGS
@given(ultrametrics())
def test_minimax_closure_is_ultrametric(X):
    rep = validate(X)
    assert rep.is_ultrametric and rep.is_metric


@SETTINGS
@given(metrics(), radii, radii)
def test_covering_monotone_in_radius(X, r, s):
    lo, hi = sorted((r, s))
    assert covering_oracle(X, hi) <= covering_oracle(X, lo)


@SETTINGS
@given(metrics(), radii)
def test_covering_matches_subset_search(X, r):
    rows = [[X.dist[i, j] for j in range(len(X))] for i in range(len(X))]
    assert covering_oracle(X, r) == oracles.min_cover(rows, r)


@SETTINGS
@given(ultrametrics())
def test_snowflake_round_trip_exact(X):
    Y = snowflake(snowflake(X, 2), Fraction(1, 2))
    assert Y.exact and (Y.dist == X.dist).all()


@SETTINGS
@given(metrics(max_n=3), metrics(max_n=3))
def test_gh_symmetric(A, B):
    assert gh_exact(A, B).value == gh_exact(B, A).value


@SETTINGS
@given(metrics(max_n=3), metrics(max_n=3), metrics(max_n=3))
def test_gh_triangle(A, B, C):
    assert gh_exact(A, C).value <= gh_exact(A, B).value + gh_exact(B, C).value


@SETTINGS
@given(ultrametrics(max_n=3), ultrametrics(max_n=3), ultrametrics(max_n=3))
def test_ugh_strong_triangle(A, B, C):
    assert ugh(A, C).lower <= max(ugh(A, B).upper, ugh(B, C).upper)


@SETTINGS
@given(st.lists(st.floats(0, 1), min_size=2, max_size=8), st.sampled_from("uv"),
       st.floats(0.5, 4))
def test_fingerprint_recovers_q(q, flavor, K):
    fp = fingerprint(telescope(TelescopeSpec(q, len(q) - 1, flavor, K)))
    assert fp.flavor == flavor
    assert max(abs(a - b) for a, b in zip(fp.q, q)) < 1e-7


@SETTINGS
@given(st.lists(st.integers(2, 3), min_size=3, max_size=3),
       st.lists(st.integers(1, 5), min_size=3, max_size=3), radii)
def test_cantor_formula_matches_enumeration(ms, steps, r):
    alphas = [Fraction(1)]
    for s in steps:
        alphas.append(alphas[-1] / (1 + s))
    m, a = explicit(alphas, ms)
    _, M = oracles.cantor_matrix(alphas, ms, 3)
    r = r / 8
    assert covering_formula(CantorSpec(m, a, 3), r, truncated=True).count == \
        oracles.ultra_cover(M, r)
