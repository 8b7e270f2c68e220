"""Moment-based tests for normality.

The statistics Z2' and Z3' estimate the correlation between the sample mean
and the sample variance or third central moment, as smooth functions of the
sample skewness, kurtosis and sixth cumulant. Their jackknife counterparts
Z2 and Z3, the exact finite-sample correlations they estimate, and a
Monte Carlo engine for critical values and power studies are included.
"""

from .distributions import AlternativeSpec, RngStream, parse_spec, population_cumulants, sample_from
from .errors import (
    DegenerateSample,
    EmptySample,
    InvalidSpec,
    MomentNormError,
    MomentOrderTooLow,
    NonFiniteInput,
    PerfectCorrelation,
)
from .moments import CumulantEstimates, MomentSummary, Sample, central_moments, standardized_cumulants
from .montecarlo import CriticalValueTable, PowerStudyConfig, calibrate, p_value, power_study
from .statistics import (
    Kind,
    Tail,
    TestStatistic,
    comparison_stats,
    fisher_z,
    jackknife_z2,
    jackknife_z3,
    z2_prime,
    z3_prime,
)
from .theory import PopulationCumulants, check_cumulant_bounds, rho2, rho2_limit, rho3, rho3_limit

__version__ = "0.1.0"
