import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from momentnorm import moments
from momentnorm.errors import DegenerateSample, EmptySample, NonFiniteInput
from momentnorm.moments import (
    Sample,
    batch_cumulants,
    central_moments,
    sample_cumulants,
    standardized_cumulants,
)
from oracles import mp_central_moments

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


def spread_ok(xs):
    xs = np.asarray(xs)
    return np.ptp(xs) > 1e-6 * max(1.0, np.max(np.abs(xs)))


def test_two_point_moments():
    m = central_moments([0, 0, 1, 1])
    assert m.n == 4
    assert m.mean == 0.5
    assert (m.m2, m.m3, m.m4, m.m6) == (0.25, 0.0, 0.0625, 0.015625)
    assert m.s2_unbiased == pytest.approx(1 / 3)


def test_constant_sample_has_zero_moments():
    m = central_moments([2.7] * 9)
    assert (m.m2, m.m3, m.m4, m.m6) == (0.0, 0.0, 0.0, 0.0)
    assert m.mean == 2.7
    with pytest.raises(DegenerateSample):
        standardized_cumulants(m)


def test_degenerate_error_for_ones():
    with pytest.raises(DegenerateSample):
        sample_cumulants([1, 1, 1, 1])


def test_moments_match_extended_precision_oracle():
    x = np.random.default_rng(20240601).random(1000)
    got = central_moments(x)
    want = mp_central_moments(x)
    assert got.mean == pytest.approx(want["mean"], rel=1e-12)
    for k in ("m2", "m3", "m4", "m6"):
        assert getattr(got, k) == pytest.approx(want[k], rel=1e-12), k


def test_moments_oracle_with_large_offset():
    # a big common offset is where one-pass formulas lose digits
    x = 1e6 + np.random.default_rng(7).standard_normal(500)
    got = central_moments(x)
    want = mp_central_moments(x)
    for k in ("m2", "m4", "m6"):
        assert getattr(got, k) == pytest.approx(want[k], rel=1e-9), k


def test_cumulant_examples():
    c = sample_cumulants([0, 0, 1, 1])
    assert (c.gamma_hat, c.kappa_hat, c.lambda_hat) == (0.0, -2.0, 16.0)
    c = sample_cumulants([0, 0, 0, 1])
    assert c.gamma_hat == pytest.approx(2 / np.sqrt(3), abs=1e-12)
    assert c.kappa_hat == pytest.approx(-2 / 3, abs=1e-12)
    assert c.gamma_hat**2 == pytest.approx(c.kappa_hat + 2, abs=1e-12)


def test_scipy_agrees_on_skew_and_kurtosis():
    from scipy import stats

    x = np.random.default_rng(3).gamma(2.0, size=300)
    c = sample_cumulants(x)
    assert c.gamma_hat == pytest.approx(stats.skew(x), rel=1e-12)
    assert c.kappa_hat == pytest.approx(stats.kurtosis(x), rel=1e-12)


def test_sample_validation():
    with pytest.raises(EmptySample):
        Sample([])
    with pytest.raises(NonFiniteInput):
        Sample([1.0, float("nan")])
    with pytest.raises(NonFiniteInput):
        Sample([float("inf"), 1.0])
    s = Sample([1, 2, 3])
    assert s.n == 3
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_unbiased_estimators_absent_for_tiny_samples():
    m = central_moments([1.0])
    assert m.s2_unbiased is None and m.mu3_unbiased is None
    m = central_moments([1.0, 3.0])
    assert m.s2_unbiased == 2.0 and m.mu3_unbiased is None


def test_batch_matches_single():
    x = np.random.default_rng(11).exponential(size=(50, 17))
    g, k, lam, _ = batch_cumulants(x)
    for i in range(len(x)):
        c = sample_cumulants(x[i])
        assert g[i] == pytest.approx(c.gamma_hat, abs=1e-12)
        assert k[i] == pytest.approx(c.kappa_hat, abs=1e-12)
        assert lam[i] == pytest.approx(c.lambda_hat, rel=1e-11, abs=1e-10)


def test_batch_flags_constant_rows():
    g, k, lam, _ = batch_cumulants(np.array([[1.0, 1.0, 1.0], [0.0, 1.0, 5.0]]))
    assert np.isnan(g[0]) and np.isnan(k[0]) and np.isnan(lam[0])
    assert np.isfinite(g[1])


@settings(max_examples=200, deadline=None)
@given(
    xs=st.lists(finite, min_size=3, max_size=40),
    a=st.floats(min_value=1e-2, max_value=1e2),
    b=st.floats(min_value=-1e3, max_value=1e3),
)
def test_location_scale_invariance(xs, a, b):
    assume(spread_ok(xs))
    x = np.asarray(xs)
    c0 = sample_cumulants(x)
    c1 = sample_cumulants(a * x + b)
    assume(spread_ok(a * x + b))
    tol = 1e-10
    assert abs(c0.gamma_hat - c1.gamma_hat) <= tol * max(1, abs(c0.gamma_hat))
    assert abs(c0.kappa_hat - c1.kappa_hat) <= tol * max(1, abs(c0.kappa_hat))
    assert abs(c0.lambda_hat - c1.lambda_hat) <= tol * max(1, abs(c0.lambda_hat))


@settings(max_examples=300, deadline=None)
@given(xs=st.lists(finite, min_size=2, max_size=60))
def test_empirical_cumulant_inequalities(xs):
    assume(spread_ok(xs))
    c = sample_cumulants(xs)
    scale = max(1.0, c.kappa_hat**2)
    assert c.gamma_hat**2 <= c.kappa_hat + 2 + 1e-9 * max(1.0, c.kappa_hat)
    assert c.kappa_hat**2 <= c.lambda_hat + 9 * (c.kappa_hat + c.gamma_hat**2) + 6 + 1e-9 * scale


@settings(max_examples=200, deadline=None)
@given(
    lo=st.floats(-100, 100),
    gap=st.floats(1e-2, 100),
    n_lo=st.integers(1, 30),
    n_hi=st.integers(1, 30),
)
def test_two_point_samples_attain_equality(lo, gap, n_lo, n_hi):
    c = sample_cumulants([lo] * n_lo + [lo + gap] * n_hi)
    assert c.gamma_hat**2 == pytest.approx(c.kappa_hat + 2, abs=1e-9 * max(1, c.kappa_hat))
    rhs = c.lambda_hat + 9 * (c.kappa_hat + c.gamma_hat**2) + 6
    assert c.kappa_hat**2 == pytest.approx(rhs, abs=1e-9 * max(1, c.kappa_hat**2))


def test_module_exports():
    for name in moments.__all__:
        assert hasattr(moments, name)
