"""Exact correlations between the sample mean and sample moments.

``rho2`` is corr(mean, unbiased variance) and ``rho3`` is corr(mean,
unbiased third central moment) for an i.i.d. sample of size ``n``, written
in terms of the population's standardized cumulants. The ``*_limit``
functions are their ``n -> infinity`` limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidCumulants, InvalidN, MomentOrderTooLow

__all__ = [
    "PopulationCumulants",
    "CumulantBounds",
    "BOUND_TOLERANCE",
    "rho2",
    "rho2_limit",
    "rho3",
    "rho3_limit",
    "check_cumulant_bounds",
]

BOUND_TOLERANCE = 1e-9
MOMENT_ORDERS = (0, 2, 3, 4, 6, math.inf)


@dataclass(frozen=True)
class PopulationCumulants:
    """Standardized cumulants of a distribution.

    ``finite_moment_order`` is the highest order in ``MOMENT_ORDERS`` whose
    moment is guaranteed finite. Cumulants beyond that order are ``nan``.
    The cumulant inequalities are not enforced here; use
    ``check_cumulant_bounds``.
    """

    gamma: float
    kappa: float
    lam: float
    finite_moment_order: float = math.inf

    def __post_init__(self):
        if self.finite_moment_order not in MOMENT_ORDERS:
            raise InvalidCumulants(
                f"finite_moment_order must be one of {MOMENT_ORDERS}, "
                f"got {self.finite_moment_order}"
            )
        if self.finite_moment_order >= 4:
            if not math.isfinite(self.gamma) or not math.isfinite(self.kappa):
                raise InvalidCumulants("gamma and kappa must be finite with 4 moments")
        if self.finite_moment_order >= 6 and not math.isfinite(self.lam):
            raise InvalidCumulants("lambda must be finite with 6 moments")


@dataclass(frozen=True)
class CumulantBounds:
    holds_i: bool
    slack_i: float
    holds_ii: bool | None = None
    slack_ii: float | None = None


def _require(pop, order, what):
    if pop.finite_moment_order < order:
        raise MomentOrderTooLow(
            f"{what} needs a finite moment of order {order}; "
            f"population only guarantees order {pop.finite_moment_order}"
        )


def _slack_ii(pop):
    return pop.lam + 9.0 * (pop.kappa + pop.gamma**2) + 6.0 - pop.kappa**2


def _check_n(n, minimum):
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise InvalidN(f"n must be an integer >= {minimum}, got {n!r}")
    return int(n)


def rho2(pop: PopulationCumulants, n: int) -> float:
    """corr(sample mean, S**2) = gamma / sqrt(kappa + 3 - (n-3)/(n-1))."""
    _require(pop, 4, "rho2")
    n = _check_n(n, 2)
    return pop.gamma / math.sqrt(pop.kappa + 3.0 - (n - 3) / (n - 1))


def rho2_limit(pop: PopulationCumulants) -> float:
    """Large-sample limit gamma / sqrt(kappa + 2)."""
    _require(pop, 4, "rho2_limit")
    if not pop.kappa > -2.0:
        # kappa == -2 only for the symmetric two-point law, where this is 0/0
        raise InvalidCumulants("rho2_limit needs kappa > -2")
    return pop.gamma / math.sqrt(pop.kappa + 2.0)


def rho3(pop: PopulationCumulants, n: int) -> float:
    """corr(sample mean, unbiased third central moment) at sample size ``n``."""
    _require(pop, 6, "rho3")
    n = _check_n(n, 3)
    radicand = (
        pop.lam
        + 9.0 * n / (n - 1) * (pop.kappa + pop.gamma**2)
        + 6.0 * n * n / ((n - 1) * (n - 2))
    )
    return pop.kappa / math.sqrt(radicand)


def rho3_limit(pop: PopulationCumulants) -> float:
    _require(pop, 6, "rho3_limit")
    radicand = pop.lam + 9.0 * (pop.kappa + pop.gamma**2) + 6.0
    if radicand <= 0.0:
        raise InvalidCumulants(f"rho3_limit radicand is not positive ({radicand})")
    return pop.kappa / math.sqrt(radicand)


def check_cumulant_bounds(pop: PopulationCumulants) -> CumulantBounds:
    """Slack in gamma**2 <= kappa + 2 and kappa**2 <= lambda + 9(kappa + gamma**2) + 6.

    Both hold for every distribution with enough moments and are tight for
    two-point laws. The second check is skipped (``None``) when the sixth
    moment is not finite.
    """
    _require(pop, 4, "the cumulant bounds")
    slack_i = pop.kappa + 2.0 - pop.gamma**2
    bounds = CumulantBounds(holds_i=slack_i >= -BOUND_TOLERANCE, slack_i=slack_i)
    if pop.finite_moment_order >= 6:
        slack_ii = _slack_ii(pop)
        bounds = CumulantBounds(
            bounds.holds_i, slack_i, holds_ii=slack_ii >= -BOUND_TOLERANCE, slack_ii=slack_ii
        )
    return bounds
