import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from momentnorm.distributions import AlternativeSpec, Family, RngStream, sample_block, sample_from
from momentnorm.errors import DegenerateSample, InvalidN, OutOfDomain, PerfectCorrelation
from momentnorm.moments import CumulantEstimates, sample_cumulants
from momentnorm.statistics import (
    Kind,
    Tail,
    TestStatistic,
    batch_statistics,
    comparison_stats,
    compute_statistic,
    directional_tail,
    fisher_z,
    jackknife_z2,
    jackknife_z3,
    z2_prime,
    z3_prime,
)
from momentnorm.theory import rho3_limit
from momentnorm.distributions import population_cumulants
from oracles import naive_jackknife_r, naive_jackknife_z2, naive_jackknife_z3

ALL_KINDS = list(Kind)
SIGN_FLIPPING = {Kind.Z2P, Kind.SQRT_B1, Kind.Z2}


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def test_z2_prime_examples():
    assert z2_prime(sample_cumulants([0, 0, 1, 1])).value == 0.0
    assert z2_prime(sample_cumulants([0, 0, 0, 1])).value == pytest.approx(0.8165, abs=5e-5)


def test_z3_prime_examples():
    assert z3_prime(sample_cumulants([0, 0, 1, 1])).value == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
    assert z3_prime(CumulantEstimates(0.0, 0.0, 0.0, 50)).value == 0.0


def test_comparison_stats_examples():
    c = comparison_stats(CumulantEstimates(0.0, 0.0, 0.0, 20))
    assert (c.sqrt_b1, c.b2, c.lm) == (0.0, 0.0, 0.0)
    assert comparison_stats(CumulantEstimates(2.0, 6.0, 0.0, 20)).lm == pytest.approx(43.3333, abs=5e-5)
    c = comparison_stats(sample_cumulants([0, 0, 1, 1]))
    assert (c.sqrt_b1, c.b2) == (0.0, -2.0)
    assert c.lm == pytest.approx(2 / 3, abs=1e-12)


def test_fisher_z():
    assert fisher_z(0.0) == 0.0
    assert fisher_z(0.5) == pytest.approx(0.5 * math.log(3), abs=1e-15)
    assert fisher_z(0.5) == pytest.approx(0.5493, abs=5e-5)
    assert fisher_z(-0.9) == pytest.approx(-1.4722, abs=5e-5)
    for bad in (1.0, -1.0, 1.5):
        with pytest.raises(OutOfDomain):
            fisher_z(bad)


@settings(max_examples=100)
@given(a=st.floats(-0.999, 0.999), b=st.floats(-0.999, 0.999))
def test_fisher_z_odd_and_increasing(a, b):
    assert fisher_z(-a) == -fisher_z(a)
    if a < b:
        assert fisher_z(a) < fisher_z(b)


def test_jackknife_z2_perfect_correlation():
    # leave-one-out variances 4.5, 4.5, 0 are an exact linear function of X
    assert naive_jackknife_r([0, 0, 3]) == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(PerfectCorrelation):
        jackknife_z2([0, 0, 3])


def test_jackknife_examples_match_oracle():
    x = [0, 1, 2, 4]
    assert jackknife_z2(x).value == pytest.approx(naive_jackknife_z2(x), abs=1e-12)
    assert jackknife_z3(x).value == pytest.approx(naive_jackknife_z3(x), abs=1e-12)
    assert jackknife_z2(x).value == pytest.approx(-0.65384, abs=1e-5)


def test_two_valued_sample_is_a_perfect_z3_correlation():
    # every two-valued sample makes Y_i an affine function of X_i
    assert abs(naive_jackknife_r([0, 0, 1, 1], third=True)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(PerfectCorrelation):
        jackknife_z3([0, 0, 1, 1])


def test_jackknife_degenerate_cases():
    # symmetric two-point: all leave-one-out variances equal
    with pytest.raises(DegenerateSample):
        jackknife_z2([0, 0, 1, 1])
    # leave-one-out third moments all equal
    with pytest.raises(DegenerateSample):
        jackknife_z3([6, 6, -2, -2, -2, -2, -2, -2])
    with pytest.raises(DegenerateSample):
        jackknife_z2([3, 3, 3, 3])
    with pytest.raises(InvalidN):
        jackknife_z3([1, 2, 3])


def test_batch_jackknife_marks_degenerate_and_perfect():
    out = batch_statistics(np.array([[0.0, 0, 1, 1], [0, 1, 2, 4], [5, 5, 5, 5]]), [Kind.Z2, Kind.Z3])
    assert np.isnan(out[Kind.Z2][0]) and np.isinf(out[Kind.Z3][0])
    assert np.isfinite(out[Kind.Z2][1])
    assert np.isnan(out[Kind.Z2][2]) and np.isnan(out[Kind.Z3][2])


def test_jackknife_matches_oracle_on_random_samples():
    rng = np.random.default_rng(5)
    for i in range(200):
        n = int(rng.integers(4, 40))
        x = [rng.standard_normal(n), rng.exponential(size=n), rng.standard_cauchy(n), rng.random(n)][i % 4]
        assert close(jackknife_z2(x).value, naive_jackknife_z2(x), 1e-12)
        assert close(jackknife_z3(x).value, naive_jackknife_z3(x), 1e-12)


def test_batch_agrees_with_single_sample_paths():
    x = np.random.default_rng(8).gamma(3.0, size=(40, 25))
    out = batch_statistics(x, ALL_KINDS)
    for i in range(len(x)):
        for kind in ALL_KINDS:
            assert close(out[kind][i], compute_statistic(x[i], kind).value, 1e-9), kind


def test_statistic_validation():
    with pytest.raises(ValueError):
        TestStatistic(Kind.Z2P, 1.0, 10)
    with pytest.raises(ValueError):
        TestStatistic(Kind.LM, -0.1, 10)
    with pytest.raises(ValueError):
        TestStatistic(Kind.Z2, math.inf, 10)


def test_kind_and_tail_parsing():
    assert Kind.parse("Z2'") is Kind.Z2P
    assert Kind.parse("lm") is Kind.LM
    assert Tail.parse("two-sided") is Tail.TWO_SIDED
    with pytest.raises(ValueError):
        Kind.parse("z9")


def test_directional_tails():
    assert directional_tail(Kind.Z2P, 2.0, 6.0) is Tail.UPPER
    assert directional_tail(Kind.Z2P, -0.5, 6.0) is Tail.LOWER
    assert directional_tail(Kind.Z3P, 0.0, -1.2) is Tail.LOWER
    assert directional_tail(Kind.Z2, 2.0, 6.0) is Tail.LOWER
    assert directional_tail(Kind.Z3, 0.0, -1.2) is Tail.UPPER
    assert directional_tail(Kind.LM, 0.0, -1.2) is Tail.UPPER
    assert directional_tail(Kind.Z3P, math.nan, math.nan) is Tail.UPPER


samples = st.lists(st.floats(-1e3, 1e3, allow_subnormal=False), min_size=4, max_size=40)


@settings(max_examples=200, deadline=None)
@given(xs=samples, a=st.floats(0.05, 20), b=st.floats(-100, 100), flip=st.booleans())
def test_affine_behavior(xs, a, b, flip):
    x = np.asarray(xs)
    assume(np.ptp(x) > 1e-3 * max(1.0, np.max(np.abs(x))))
    moment_kinds = [k for k in ALL_KINDS if k not in (Kind.Z2, Kind.Z3)]
    scale = -a if flip else a
    before = batch_statistics(x[None, :], moment_kinds)
    after = batch_statistics((scale * x + b)[None, :], moment_kinds)
    for kind in moment_kinds:
        expect = -before[kind][0] if flip and kind in SIGN_FLIPPING else before[kind][0]
        assert close(after[kind][0], expect, 1e-10), kind


@settings(max_examples=200, deadline=None)
@given(
    xs=st.lists(st.floats(-1e3, 1e3, allow_subnormal=False), min_size=2, max_size=40)
    | st.tuples(st.floats(-10, 10), st.floats(0.1, 10), st.integers(1, 20), st.integers(1, 20)).map(
        lambda t: [t[0]] * t[2] + [t[0] + t[1]] * t[3]
    )
)
def test_z2_prime_bounded_and_z3_radicand_positive(xs):
    x = np.asarray(xs)
    assume(np.ptp(x) > 1e-6 * max(1.0, np.max(np.abs(x))))
    c = sample_cumulants(x)
    assert abs(z2_prime(c).value) < 1
    if c.n >= 3:
        n = c.n
        radicand = c.lambda_hat + 9 * n / (n - 1) * (c.kappa_hat + c.gamma_hat**2) + 6 * n * n / ((n - 1) * (n - 2))
        assert radicand > 0
        assert abs(z3_prime(c).value) <= 1


def test_z2_prime_consistent_on_large_normal_sample():
    x = np.random.default_rng(2024).standard_normal(10**6)
    assert abs(z2_prime(sample_cumulants(x)).value) < 0.005


def test_z3_prime_consistent_on_large_laplace_sample():
    spec = AlternativeSpec(Family.LAPLACE)
    x = sample_from(spec, 10**6, RngStream(0))
    target = rho3_limit(population_cumulants(spec))
    assert target == pytest.approx(0.378, abs=5e-4)
    assert z3_prime(sample_cumulants(x)).value == pytest.approx(target, abs=0.01)


def test_null_jackknife_z3_is_reflection_invariant():
    # x -> -x flips both X_i and the leave-one-out third moments, so r3 is unchanged;
    # Z3 therefore has no reason to be centred at zero in small samples
    x = sample_block(AlternativeSpec(Family.NORMAL), 20, 31, range(500))
    a = batch_statistics(x, [Kind.Z3])[Kind.Z3]
    b = batch_statistics(-x, [Kind.Z3])[Kind.Z3]
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_null_jackknife_z3_mean_matches_oracle_and_vanishes_with_n():
    rng = np.random.default_rng(77)
    oracle_mean = np.mean([naive_jackknife_z3(row) for row in rng.standard_normal((3000, 20))])
    means = {}
    for n in (20, 200, 1000):
        x = sample_block(AlternativeSpec(Family.NORMAL), n, 31, range(20_000))
        means[n] = batch_statistics(x, [Kind.Z3])[Kind.Z3].mean()
    # 3000 oracle draws: standard error about 0.008
    assert means[20] == pytest.approx(oracle_mean, abs=0.03)
    assert means[20] > means[200] > abs(means[1000])
    assert abs(means[1000]) < 0.01


def test_jackknife_sign_is_opposite_to_moment_statistic():
    x = sample_block(AlternativeSpec(Family.EXPONENTIAL), 20, 4, range(2000))
    out = batch_statistics(x, [Kind.Z2, Kind.Z2P])
    assert np.corrcoef(out[Kind.Z2], out[Kind.Z2P])[0, 1] < -0.8
