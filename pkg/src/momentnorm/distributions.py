"""Alternative distributions: seeded samplers and closed-form cumulants.

Distributions are described by an :class:`AlternativeSpec`, which
round-trips through a short case-insensitive text form such as
``chisq(4)``, ``weibull(0.5,1)``, ``lognormal(0.25)``, ``beta(2,3)``,
``t(5)`` or ``mix(0.9,0,4)``.

Random draws come from an :class:`RngStream`, a ``(seed, stream_id)`` pair
mapped onto an independent numpy PCG64 generator through
``SeedSequence(seed, spawn_key=(stream_id,))``. A given pair always yields
the same draws, whatever else is running.

Generation methods:

=============  =====================================================
normal         numpy ziggurat ``standard_normal``
chisq(k)       ``2 * standard_gamma(k/2)``
beta(a,b)      ``Ga / (Ga + Gb)`` from two gamma draws
t(k)           ``Z / sqrt(chisq(k) / k)``
lognormal(s)   ``exp(s * Z)``
mix(w,a,b)     component pick by uniform, then ``mean + Z``
others         inversion of the CDF on uniform draws
=============  =====================================================
"""

from __future__ import annotations

import math
import re
import zlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidN, InvalidSeed, InvalidSpec
from .moments import Sample
from .theory import PopulationCumulants

__all__ = [
    "Family",
    "AlternativeSpec",
    "RngStream",
    "parse_spec",
    "format_spec",
    "sample_from",
    "sample_block",
    "population_cumulants",
    "derive_seed",
    "NORMAL",
    "STUDY_ALTERNATIVES",
]


class Family(str, Enum):
    NORMAL = "normal"
    CHISQ = "chisq"
    EXPONENTIAL = "exp"
    WEIBULL = "weibull"
    LOGNORMAL = "lognormal"
    BETA = "beta"
    UNIFORM = "uniform"
    T = "t"
    CAUCHY = "cauchy"
    LAPLACE = "laplace"
    LOGISTIC = "logistic"
    MIXTURE = "mix"


_ARITY = {
    Family.NORMAL: 0,
    Family.CHISQ: 1,
    Family.EXPONENTIAL: 0,
    Family.WEIBULL: 2,
    Family.LOGNORMAL: 1,
    Family.BETA: 2,
    Family.UNIFORM: 0,
    Family.T: 1,
    Family.CAUCHY: 0,
    Family.LAPLACE: 0,
    Family.LOGISTIC: 0,
    Family.MIXTURE: 3,
}

_ALIASES = {
    "norm": Family.NORMAL,
    "gaussian": Family.NORMAL,
    "chi2": Family.CHISQ,
    "chisquare": Family.CHISQ,
    "exponential": Family.EXPONENTIAL,
    "weib": Family.WEIBULL,
    "ln": Family.LOGNORMAL,
    "lnorm": Family.LOGNORMAL,
    "unif": Family.UNIFORM,
    "student": Family.T,
    "mixture": Family.MIXTURE,
}


@dataclass(frozen=True)
class AlternativeSpec:
    """A distribution family with its parameters.

    ``weibull(shape, scale)``; ``lognormal(sigma)`` with log-mean 0;
    ``mix(w, mu1, mu2)`` is ``w N(mu1, 1) + (1 - w) N(mu2, 1)``.
    """

    family: Family
    params: tuple[float, ...] = ()

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise InvalidSpec(f"unknown family {self.family!r}") from None
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", params)
        if len(params) != _ARITY[family]:
            raise InvalidSpec(
                f"{family.value} takes {_ARITY[family]} parameter(s), got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise InvalidSpec(f"non-finite parameter in {family.value}{params}")
        ok = {
            Family.CHISQ: lambda k: k > 0,
            Family.WEIBULL: lambda k, s: k > 0 and s > 0,
            Family.LOGNORMAL: lambda s: s > 0,
            Family.BETA: lambda a, b: a > 0 and b > 0,
            Family.T: lambda k: k >= 1,
            Family.MIXTURE: lambda w, m1, m2: 0 < w < 1,
        }.get(family)
        if ok is not None and not ok(*params):
            raise InvalidSpec(f"parameters out of range for {family.value}: {params}")

    def __str__(self):
        return format_spec(self)


def _fmt(x: float) -> str:
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(x)


def format_spec(spec: AlternativeSpec) -> str:
    if not spec.params:
        return spec.family.value
    return f"{spec.family.value}({','.join(_fmt(p) for p in spec.params)})"


_SPEC_RE = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\(([^()]*)\))?\s*$")


def parse_spec(text: str) -> AlternativeSpec:
    """Parse ``name`` or ``name(p1,p2,...)``; the inverse of ``format_spec``."""
    m = _SPEC_RE.match(text.lower())
    if m is None:
        raise InvalidSpec(f"cannot parse distribution {text!r}")
    name, args = m.groups()
    family = _ALIASES.get(name)
    if family is None:
        try:
            family = Family(name)
        except ValueError:
            raise InvalidSpec(f"unknown distribution family {name!r}") from None
    params: tuple[float, ...] = ()
    if args is not None and args.strip():
        try:
            params = tuple(_parse_number(a) for a in args.split(","))
        except ValueError:
            raise InvalidSpec(f"bad parameter list in {text!r}") from None
    return AlternativeSpec(family, params)


def _parse_number(token: str) -> float:
    token = token.strip()
    if "/" in token:
        num, den = token.split("/")
        return float(num) / float(den)
    return float(token)


@dataclass(frozen=True)
class RngStream:
    """One independent random stream: replication ``stream_id`` under ``seed``."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        _check_seed(self.seed)
        _check_seed(self.stream_id)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


def _check_seed(value):
    # None would make SeedSequence draw fresh OS entropy and silently break reproducibility
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
        raise InvalidSeed(f"seeds and stream ids must be non-negative integers, got {value!r}")


def derive_seed(seed: int, *tokens: str | int) -> int:
    """A 64-bit child seed for a named sub-computation (e.g. one study cell)."""
    _check_seed(seed)
    key = tuple(zlib.crc32(str(t).encode()) for t in tokens)
    seq = np.random.SeedSequence(seed, spawn_key=key)
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _open_uniform(rng, n):
    # (0, 1): random() returns k / 2**53, shift by half a step
    return rng.random(n) + 2.0**-54


def _draw(spec: AlternativeSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    f, p = spec.family, spec.params
    if f is Family.NORMAL:
        return rng.standard_normal(n)
    if f is Family.CHISQ:
        return 2.0 * rng.standard_gamma(p[0] / 2.0, n)
    if f is Family.EXPONENTIAL:
        return -np.log(_open_uniform(rng, n))
    if f is Family.WEIBULL:
        shape, scale = p
        return scale * (-np.log(_open_uniform(rng, n))) ** (1.0 / shape)
    if f is Family.LOGNORMAL:
        return np.exp(p[0] * rng.standard_normal(n))
    if f is Family.BETA:
        ga = rng.standard_gamma(p[0], n)
        gb = rng.standard_gamma(p[1], n)
        return ga / (ga + gb)
    if f is Family.UNIFORM:
        return rng.random(n)
    if f is Family.T:
        z = rng.standard_normal(n)
        chi = 2.0 * rng.standard_gamma(p[0] / 2.0, n)
        return z / np.sqrt(chi / p[0])
    if f is Family.CAUCHY:
        return np.tan(np.pi * (_open_uniform(rng, n) - 0.5))
    if f is Family.LAPLACE:
        u = _open_uniform(rng, n) - 0.5
        return -np.sign(u) * np.log1p(-2.0 * np.abs(u))
    if f is Family.LOGISTIC:
        u = _open_uniform(rng, n)
        return np.log(u) - np.log1p(-u)
    if f is Family.MIXTURE:
        w, mu1, mu2 = p
        first = rng.random(n) < w
        return np.where(first, mu1, mu2) + rng.standard_normal(n)
    raise InvalidSpec(f"no sampler for {f}")  # pragma: no cover


def sample_from(spec: AlternativeSpec, n: int, rng: RngStream) -> Sample:
    """``n`` independent draws from ``spec``, fully determined by ``rng``."""
    if n < 1:
        raise InvalidN(f"n must be >= 1, got {n}")
    return Sample(_draw(spec, n, rng.generator()))


def sample_block(spec: AlternativeSpec, n: int, seed: int, stream_ids) -> np.ndarray:
    """Stack one sample per stream id into a ``(len(stream_ids), n)`` array.

    Row ``i`` equals ``sample_from(spec, n, RngStream(seed, stream_ids[i]))``.
    """
    ids = list(stream_ids)
    out = np.empty((len(ids), n))
    for i, sid in enumerate(ids):
        out[i] = _draw(spec, n, RngStream(seed, sid).generator())
    return out


# --- population cumulants -------------------------------------------------

_ORDERS = (0, 2, 3, 4, 6)


def _order_floor(k: float) -> float:
    """Largest tracked moment order <= k."""
    return max(o for o in _ORDERS if o <= k)


def _from_central(c2, c3, c4, c6, order=math.inf):
    gamma = c3 / c2**1.5
    kappa = c4 / c2**2 - 3.0
    lam = c6 / c2**3 - 15.0 * kappa - 10.0 * gamma**2 - 15.0
    return PopulationCumulants(gamma, kappa, lam, order)


def _central_from_raw(raw):
    """Central moments 0..6 from raw moments 0..6."""
    mean = raw[1]
    return [
        math.fsum(math.comb(r, j) * raw[j] * (-mean) ** (r - j) for j in range(r + 1))
        for r in range(7)
    ]


def _from_raw(raw, symmetric=False):
    c = _central_from_raw(raw)
    return _from_central(c[2], 0.0 if symmetric else c[3], c[4], c[6])


_NORMAL_RAW = (1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0)


def population_cumulants(spec: AlternativeSpec) -> PopulationCumulants:
    """Exact (gamma, kappa, lambda) and the highest finite moment order.

    Cumulants whose moments diverge are NaN.
    """
    f, p = spec.family, spec.params
    if f is Family.NORMAL:
        return PopulationCumulants(0.0, 0.0, 0.0)
    if f in (Family.CHISQ, Family.EXPONENTIAL):
        # gamma(shape a): standardized cumulants k_r / k_2**(r/2) = (r-1)! a**(1 - r/2)
        a = p[0] / 2.0 if f is Family.CHISQ else 1.0
        return PopulationCumulants(2.0 / math.sqrt(a), 6.0 / a, 120.0 / a**2)
    if f is Family.WEIBULL:
        k = p[0]
        return _from_raw([math.gamma(1.0 + r / k) for r in range(7)])
    if f is Family.LOGNORMAL:
        s2 = p[0] ** 2
        return _from_raw([math.exp(r * r * s2 / 2.0) for r in range(7)])
    if f in (Family.BETA, Family.UNIFORM):
        a, b = p if f is Family.BETA else (1.0, 1.0)
        raw = [1.0]
        for r in range(1, 7):
            raw.append(raw[-1] * (a + r - 1) / (a + b + r - 1))
        return _from_raw(raw, symmetric=a == b)
    if f is Family.LAPLACE:
        # unit scale: central moment r! for even r
        return _from_central(2.0, 0.0, 24.0, 720.0)
    if f is Family.LOGISTIC:
        pi2 = math.pi**2
        return _from_central(pi2 / 3.0, 0.0, 7.0 * pi2**2 / 15.0, 31.0 * pi2**3 / 21.0)
    if f is Family.MIXTURE:
        w, mu1, mu2 = p
        mean = w * mu1 + (1.0 - w) * mu2
        central = [0.0] * 7
        for weight, mu in ((w, mu1), (1.0 - w, mu2)):
            shift = mu - mean
            for r in range(7):
                central[r] += weight * math.fsum(
                    math.comb(r, j) * _NORMAL_RAW[j] * shift ** (r - j) for j in range(r + 1)
                )
        return _from_central(central[2], central[3], central[4], central[6])
    if f is Family.CAUCHY:
        return PopulationCumulants(math.nan, math.nan, math.nan, 0)
    if f is Family.T:
        df = p[0]
        # moments of order < df exist
        order = _order_floor(math.ceil(df) - 1)
        gamma = 0.0 if order >= 3 else math.nan
        kappa = 6.0 / (df - 4.0) if order >= 4 else math.nan
        lam = math.nan
        if order >= 6:
            std6 = 15.0 * (df - 2.0) ** 2 / ((df - 4.0) * (df - 6.0))
            lam = std6 - 15.0 * kappa - 15.0
        return PopulationCumulants(gamma, kappa, lam, order)
    raise InvalidSpec(f"no cumulants for {f}")  # pragma: no cover


NORMAL = AlternativeSpec(Family.NORMAL)

# The study's alternatives with their display labels, in table order.
STUDY_ALTERNATIVES: tuple[tuple[str, AlternativeSpec], ...] = (
    ("Normal", NORMAL),
    ("chi2(1)", AlternativeSpec(Family.CHISQ, (1,))),
    ("Exponential", AlternativeSpec(Family.EXPONENTIAL)),
    ("chi2(4)", AlternativeSpec(Family.CHISQ, (4,))),
    ("Weib(1/2,1)", AlternativeSpec(Family.WEIBULL, (0.5, 1))),
    ("Weib(2,1)", AlternativeSpec(Family.WEIBULL, (2, 1))),
    ("LN(sigma=1/4)", AlternativeSpec(Family.LOGNORMAL, (0.25,))),
    ("LN(sigma=1/2)", AlternativeSpec(Family.LOGNORMAL, (0.5,))),
    ("Beta(1/2,1/2)", AlternativeSpec(Family.BETA, (0.5, 0.5))),
    ("Uniform", AlternativeSpec(Family.UNIFORM)),
    ("Beta(2,2)", AlternativeSpec(Family.BETA, (2, 2))),
    ("Beta(3,3)", AlternativeSpec(Family.BETA, (3, 3))),
    ("Beta(1,2)", AlternativeSpec(Family.BETA, (1, 2))),
    ("Beta(2,3)", AlternativeSpec(Family.BETA, (2, 3))),
    ("Cauchy", AlternativeSpec(Family.CAUCHY)),
    ("t(2)", AlternativeSpec(Family.T, (2,))),
    ("t(3)", AlternativeSpec(Family.T, (3,))),
    ("t(4)", AlternativeSpec(Family.T, (4,))),
    ("t(5)", AlternativeSpec(Family.T, (5,))),
    ("t(6)", AlternativeSpec(Family.T, (6,))),
    ("Laplace", AlternativeSpec(Family.LAPLACE)),
    ("Logistic", AlternativeSpec(Family.LOGISTIC)),
    ("1/2N(0,1)+1/2N(1,1)", AlternativeSpec(Family.MIXTURE, (0.5, 0, 1))),
    ("1/2N(0,1)+1/2N(4,1)", AlternativeSpec(Family.MIXTURE, (0.5, 0, 4))),
    ("9/10N(0,1)+1/10N(4,1)", AlternativeSpec(Family.MIXTURE, (0.9, 0, 4))),
)
