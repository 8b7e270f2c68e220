"""Central moments and standardized sample cumulants.

Moments are computed in two passes (mean first, then powers of the
deviations) with accumulation in ``numpy.longdouble``. Sixth powers amplify
any cancellation, so one-pass updating formulas are deliberately avoided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DegenerateSample, EmptySample, NonFiniteInput

__all__ = [
    "Sample",
    "MomentSummary",
    "CumulantEstimates",
    "as_sample",
    "central_moments",
    "standardized_cumulants",
    "sample_cumulants",
]


@dataclass(frozen=True)
class Sample:
    """An ordered, read-only collection of finite observations."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        if arr.size == 0:
            raise EmptySample("sample contains no observations")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise NonFiniteInput(f"observation {bad} is not finite ({arr[bad]})")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n


def as_sample(data: Sample | Iterable[float]) -> Sample:
    if isinstance(data, Sample):
        return data
    if not isinstance(data, (np.ndarray, list, tuple)):
        data = list(data)
    return Sample(data)


@dataclass(frozen=True)
class MomentSummary:
    """Sample mean and divisor-``n`` central moments ``mk = sum((x - xbar)**k) / n``.

    ``s2_unbiased`` uses divisor ``n - 1`` and ``mu3_unbiased`` the factor
    ``n / ((n - 1)(n - 2))``; they are ``None`` when ``n`` is too small.
    """

    n: int
    mean: float
    m2: float
    m3: float
    m4: float
    m6: float
    s2_unbiased: float | None
    mu3_unbiased: float | None


@dataclass(frozen=True)
class CumulantEstimates:
    """Sample skewness, excess kurtosis and sixth standardized cumulant."""

    gamma_hat: float
    kappa_hat: float
    lambda_hat: float
    n: int


def central_moments(sample: Sample | Iterable[float]) -> MomentSummary:
    """Two-pass central moments of a sample.

    Raises
    ------
    EmptySample
        If the sample has no observations.
    NonFiniteInput
        If any observation is NaN or infinite.
    """
    sample = as_sample(sample)
    x = sample.values
    n = sample.n
    if np.all(x == x[0]):
        # exact zeros; a longdouble mean of repeated 0.1 need not equal 0.1
        mean = float(x[0])
        m2 = m3 = m4 = m6 = 0.0
    else:
        xl = x.astype(np.longdouble)
        mean_l = xl.sum() / n
        d = xl - mean_l
        d2 = d * d
        m2 = float(d2.sum() / n)
        m3 = float((d2 * d).sum() / n)
        m4 = float((d2 * d2).sum() / n)
        m6 = float((d2 * d2 * d2).sum() / n)
        mean = float(mean_l)
    s2 = m2 * n / (n - 1) if n >= 2 else None
    mu3 = m3 * n * n / ((n - 1) * (n - 2)) if n >= 3 else None
    return MomentSummary(n, mean, m2, m3, m4, m6, s2, mu3)


def standardized_cumulants(moments: MomentSummary) -> CumulantEstimates:
    """Map divisor-``n`` moments to (gamma_hat, kappa_hat, lambda_hat).

    Raises ``DegenerateSample`` when ``m2 == 0``: every observation is equal
    and none of the standardized quantities exist.
    """
    m2 = moments.m2
    if not m2 > 0.0:
        raise DegenerateSample("all observations are equal; sample variance is zero")
    gamma = moments.m3 / m2**1.5
    kappa = moments.m4 / (m2 * m2) - 3.0
    lam = moments.m6 / (m2 * m2 * m2) - 15.0 * kappa - 10.0 * gamma * gamma - 15.0
    return CumulantEstimates(gamma, kappa, lam, moments.n)


def sample_cumulants(sample: Sample | Iterable[float]) -> CumulantEstimates:
    return standardized_cumulants(central_moments(sample))


def batch_cumulants(samples: np.ndarray):
    """Row-wise (gamma_hat, kappa_hat, lambda_hat, m2) for a 2-D array.

    Float64 throughout; rows with zero variance get NaN cumulants. Used by
    the Monte Carlo kernels where millions of rows are processed.
    """
    x = np.asarray(samples, dtype=np.float64)
    d = x - x.mean(axis=1, keepdims=True)
    d2 = d * d
    m2 = d2.mean(axis=1)
    m3 = (d2 * d).mean(axis=1)
    m4 = (d2 * d2).mean(axis=1)
    m6 = (d2 * d2 * d2).mean(axis=1)
    constant = np.ptp(x, axis=1) == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        m2_safe = np.where(constant, np.nan, m2)
        gamma = m3 / m2_safe**1.5
        kappa = m4 / (m2_safe * m2_safe) - 3.0
        lam = m6 / (m2_safe * m2_safe * m2_safe) - 15.0 * kappa - 10.0 * gamma * gamma - 15.0
    return gamma, kappa, lam, m2_safe
