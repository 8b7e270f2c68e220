"""Test statistics for normality built from sample moments.

Two families live here:

* the smooth moment statistics ``Z2'`` and ``Z3'``, which estimate the
  correlation of the sample mean with the unbiased variance and with the
  unbiased third central moment;
* the jackknife statistics ``Z2`` and ``Z3``, which correlate each
  observation with its leave-one-out variance (cube-rooted) or third moment
  and apply Fisher's z-transform.

The comparison statistics sqrt(b1), b2 and the Jarque-Bera LM are included
because the power study ranks against them.

Every statistic has a single-sample entry point that raises on degenerate
input and a vectorized row-wise kernel (``batch_statistics``) for Monte
Carlo work, where degeneracy is encoded in the values instead: NaN for a
zero variance, +-inf for a jackknife correlation of exactly +-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import DegenerateSample, InvalidN, OutOfDomain, PerfectCorrelation
from .moments import CumulantEstimates, Sample, as_sample, batch_cumulants, sample_cumulants

__all__ = [
    "Kind",
    "Tail",
    "TestStatistic",
    "ComparisonStats",
    "z2_prime",
    "z3_prime",
    "jackknife_z2",
    "jackknife_z3",
    "fisher_z",
    "comparison_stats",
    "compute_statistic",
    "batch_statistics",
    "jackknife_value",
    "directional_tail",
    "MIN_N",
]

# |r| within this distance of 1 counts as a perfect correlation
PERFECT_TOL = 1e-12
# leave-one-out quantities whose spread is below this fraction of their scale are constant
CONSTANT_TOL = 1e-10


class Kind(str, Enum):
    Z2P = "z2p"
    Z3P = "z3p"
    Z2 = "z2"
    Z3 = "z3"
    SQRT_B1 = "sqrt_b1"
    B2 = "b2"
    LM = "lm"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "Kind":
        key = text.strip().lower().replace("'", "p").replace("-", "_")
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown statistic {text!r}; choose from {[k.value for k in cls]}")


_LABELS = {
    Kind.Z2P: "Z2'",
    Kind.Z3P: "Z3'",
    Kind.Z2: "Z2",
    Kind.Z3: "Z3",
    Kind.SQRT_B1: "sqrt(b1)",
    Kind.B2: "b2",
    Kind.LM: "LM",
}


class Tail(str, Enum):
    UPPER = "upper"
    LOWER = "lower"
    TWO_SIDED = "two-sided"

    @classmethod
    def parse(cls, text: str) -> "Tail":
        key = text.strip().lower().replace("_", "-")
        aliases = {"two": "two-sided", "twosided": "two-sided", "both": "two-sided"}
        key = aliases.get(key, key)
        for tail in cls:
            if key == tail.value:
                return tail
        raise ValueError(f"unknown tail {text!r}; choose from {[t.value for t in cls]}")


MIN_N = {
    Kind.Z2P: 2,
    Kind.Z3P: 3,
    Kind.Z2: 3,
    Kind.Z3: 4,
    Kind.SQRT_B1: 2,
    Kind.B2: 2,
    Kind.LM: 2,
}

# Which population cumulant pushes each statistic away from zero, and in
# which direction. The jackknife statistics correlate X_i (not the
# leave-one-out mean, a decreasing function of X_i) with Y_i, so they move
# opposite to the population correlation.
_DIRECTION = {
    Kind.Z2P: ("gamma", 1),
    Kind.SQRT_B1: ("gamma", 1),
    Kind.Z2: ("gamma", -1),
    Kind.Z3P: ("kappa", 1),
    Kind.B2: ("kappa", 1),
    Kind.Z3: ("kappa", -1),
}


def directional_tail(kind: Kind, gamma: float, kappa: float) -> Tail:
    """One-tailed rejection region pointing toward an alternative.

    A statistic that grows with skewness rejects in the upper tail against
    right-skewed alternatives and in the lower tail against left-skewed
    ones; likewise for kurtosis. Undefined (NaN) or zero cumulants count as
    non-negative, so heavy-tailed laws without moments get the upper tail.
    LM is always upper-tailed.
    """
    if kind is Kind.LM:
        return Tail.UPPER
    moment, orientation = _DIRECTION[kind]
    value = gamma if moment == "gamma" else kappa
    sign = -1 if value < 0 else 1
    return Tail.UPPER if sign * orientation > 0 else Tail.LOWER


@dataclass(frozen=True)
class TestStatistic:
    """A computed statistic together with its kind and sample size."""

    __test__ = False  # not a pytest class

    kind: Kind
    value: float
    n: int

    def __post_init__(self):
        v = self.value
        if not math.isfinite(v):
            raise ValueError(f"{self.kind.label} value must be finite, got {v}")
        if self.kind is Kind.Z2P and not abs(v) < 1.0:
            raise ValueError(f"Z2' must lie strictly inside (-1, 1), got {v}")
        if self.kind is Kind.Z3P and not abs(v) <= 1.0:
            raise ValueError(f"Z3' must lie in [-1, 1], got {v}")
        if self.kind is Kind.LM and v < 0.0:
            raise ValueError(f"LM must be non-negative, got {v}")


@dataclass(frozen=True)
class ComparisonStats:
    sqrt_b1: float
    b2: float
    lm: float


def _check_n(kind, n):
    if n < MIN_N[kind]:
        raise InvalidN(f"{kind.label} needs n >= {MIN_N[kind]}, got {n}")


def _z2p(gamma, kappa, n):
    return gamma / np.sqrt(kappa + 3.0 - (n - 3) / (n - 1))


def _z3p_radicand(gamma, kappa, lam, n):
    return lam + 9.0 * n / (n - 1) * (kappa + gamma * gamma) + 6.0 * n * n / ((n - 1) * (n - 2))


def _lm(gamma, kappa, n):
    return n * (gamma * gamma / 6.0 + kappa * kappa / 24.0)


def z2_prime(cum: CumulantEstimates) -> TestStatistic:
    """Z2' = gamma_hat / sqrt(kappa_hat + 3 - (n-3)/(n-1)).

    Strictly inside (-1, 1) for every non-degenerate sample because
    gamma_hat**2 <= kappa_hat + 2 on any empirical distribution.
    """
    _check_n(Kind.Z2P, cum.n)
    return TestStatistic(Kind.Z2P, float(_z2p(cum.gamma_hat, cum.kappa_hat, cum.n)), cum.n)


def z3_prime(cum: CumulantEstimates) -> TestStatistic:
    """Z3' = kappa_hat / sqrt(lambda_hat + 9n/(n-1)(kappa_hat + gamma_hat**2) + 6n**2/((n-1)(n-2)))."""
    _check_n(Kind.Z3P, cum.n)
    radicand = _z3p_radicand(cum.gamma_hat, cum.kappa_hat, cum.lambda_hat, cum.n)
    if not radicand > 0.0:
        raise DegenerateSample(f"Z3' radicand is not positive ({radicand})")
    return TestStatistic(Kind.Z3P, float(cum.kappa_hat / math.sqrt(radicand)), cum.n)


def comparison_stats(cum: CumulantEstimates) -> ComparisonStats:
    """sqrt(b1) = gamma_hat, b2 = kappa_hat and LM = n(gamma_hat**2/6 + kappa_hat**2/24)."""
    return ComparisonStats(
        sqrt_b1=float(cum.gamma_hat),
        b2=float(cum.kappa_hat),
        lm=float(_lm(cum.gamma_hat, cum.kappa_hat, cum.n)),
    )


def fisher_z(r: float) -> float:
    """Fisher's variance-stabilizing transform 0.5*log((1+r)/(1-r))."""
    if not -1.0 < r < 1.0:
        raise OutOfDomain(f"Fisher z needs |r| < 1, got {r}")
    return math.atanh(r)


def _jackknife_y_var(d, m2_sum, n):
    # S2_{-i} = (sum_j d_j**2 - n d_i**2 / (n-1)) / (n-2)
    s2 = (m2_sum[:, None] - n / (n - 1) * d * d) / (n - 2)
    y = np.cbrt(np.maximum(s2, 0.0))
    scale = np.max(np.abs(y), axis=1)
    return y, scale


def _jackknife_y_third(d, m2_sum, m3_sum, n):
    # third moment of the other n-1 points about their own mean, divisor n-1
    d3 = d * d * d
    total = (
        m3_sum[:, None]
        - d3
        + 3.0 * d * (m2_sum[:, None] - d * d) / (n - 1)
        - 2.0 * d3 / (n - 1) ** 2
    )
    y = total / (n - 1)
    scale = np.max(np.abs(d3), axis=1)
    return y, scale


def _correlation_z(d, y, scale, constant_x):
    n = d.shape[1]
    yc = y - y.mean(axis=1, keepdims=True)
    sxx = (d * d).sum(axis=1)
    syy = (yc * yc).sum(axis=1)
    sxy = (d * yc).sum(axis=1)
    constant_y = np.sqrt(syy / n) <= CONSTANT_TOL * scale
    degenerate = constant_x | constant_y | ~(sxx > 0) | ~(syy > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.clip(sxy / np.sqrt(sxx * syy), -1.0, 1.0)
        perfect = 1.0 - np.abs(r) <= PERFECT_TOL
        z = np.where(perfect, np.copysign(np.inf, r), np.arctanh(np.where(perfect, 0.0, r)))
    z[degenerate] = np.nan
    return z


def batch_statistics(samples: np.ndarray, kinds: Iterable[Kind]) -> dict[Kind, np.ndarray]:
    """Row-wise statistics for a 2-D array of samples (one sample per row).

    Rows that are degenerate for a statistic yield NaN; jackknife rows with
    a perfect correlation yield +-inf.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n = x.shape[1]
    kinds = [Kind(k) for k in kinds]
    for kind in kinds:
        _check_n(kind, n)
    gamma, kappa, lam, _ = batch_cumulants(x)
    out: dict[Kind, np.ndarray] = {}
    with np.errstate(invalid="ignore", divide="ignore"):
        for kind in kinds:
            if kind is Kind.Z2P:
                out[kind] = _z2p(gamma, kappa, n)
            elif kind is Kind.Z3P:
                radicand = _z3p_radicand(gamma, kappa, lam, n)
                out[kind] = np.where(radicand > 0, kappa / np.sqrt(radicand), np.nan)
            elif kind is Kind.SQRT_B1:
                out[kind] = gamma.copy()
            elif kind is Kind.B2:
                out[kind] = kappa.copy()
            elif kind is Kind.LM:
                out[kind] = _lm(gamma, kappa, n)
    out.update(_jackknife(x, kinds, np.float64))
    return {k: out[k] for k in kinds}


def _jackknife(x, kinds, dtype):
    """Jackknife Fisher z values for the Z2/Z3 members of ``kinds``, row-wise."""
    out = {}
    jack = [k for k in kinds if k in (Kind.Z2, Kind.Z3)]
    if not jack:
        return out
    x = np.asarray(x, dtype=dtype)
    n = x.shape[1]
    d = x - x.mean(axis=1, keepdims=True)
    constant_x = np.ptp(x, axis=1) == 0
    m2_sum = (d * d).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        if Kind.Z2 in jack:
            y, scale = _jackknife_y_var(d, m2_sum, n)
            out[Kind.Z2] = _correlation_z(d, y, scale, constant_x).astype(np.float64)
        if Kind.Z3 in jack:
            m3_sum = (d * d * d).sum(axis=1)
            y, scale = _jackknife_y_third(d, m2_sum, m3_sum, n)
            out[Kind.Z3] = _correlation_z(d, y, scale, constant_x).astype(np.float64)
    return out


def jackknife_value(sample: Sample | Iterable[float], kind: Kind) -> float:
    """Single-sample Z2 or Z3 in extended precision; NaN if degenerate, +-inf if perfect."""
    sample = as_sample(sample)
    kind = Kind(kind)
    _check_n(kind, sample.n)
    return float(_jackknife(sample.values[None, :], [kind], np.longdouble)[kind][0])


def _single_jackknife(sample, kind):
    sample = as_sample(sample)
    value = jackknife_value(sample, kind)
    if math.isnan(value):
        raise DegenerateSample(
            f"{kind.label}: a variance in the jackknife correlation is zero"
        )
    if math.isinf(value):
        raise PerfectCorrelation(
            f"{kind.label}: jackknife correlation is {'+' if value > 0 else '-'}1"
        )
    return TestStatistic(kind, value, sample.n)


def jackknife_z2(sample: Sample | Iterable[float]) -> TestStatistic:
    """Fisher z of corr(X_i, (S2_{-i})**(1/3)), with S2_{-i} the divisor n-2 variance of the other points.

    Uses O(n) leave-one-out updates rather than recomputing each deleted
    sample.
    """
    return _single_jackknife(sample, Kind.Z2)


def jackknife_z3(sample: Sample | Iterable[float]) -> TestStatistic:
    """Fisher z of corr(X_i, mu3_{-i}), mu3_{-i} the divisor n-1 third moment of the other points."""
    return _single_jackknife(sample, Kind.Z3)


def compute_statistic(sample: Sample | Iterable[float], kind: Kind) -> TestStatistic:
    kind = Kind(kind)
    if kind is Kind.Z2:
        return jackknife_z2(sample)
    if kind is Kind.Z3:
        return jackknife_z3(sample)
    sample = as_sample(sample)
    _check_n(kind, sample.n)
    cum = sample_cumulants(sample)
    if kind is Kind.Z2P:
        return z2_prime(cum)
    if kind is Kind.Z3P:
        return z3_prime(cum)
    comp = comparison_stats(cum)
    value = {Kind.SQRT_B1: comp.sqrt_b1, Kind.B2: comp.b2, Kind.LM: comp.lm}[kind]
    return TestStatistic(kind, value, sample.n)
