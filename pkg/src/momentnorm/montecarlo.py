"""Monte Carlo calibration and power studies.

Null distributions are simulated from standard normal samples; critical
values are empirical order statistics of the simulated statistics. A power
study then counts how often each test rejects on samples from each
alternative.

Reproducibility contract: replication ``r`` of any simulated cell draws its
sample from ``RngStream(cell_seed, r)``, where the cell seed is derived from
the study seed and the cell's identity. Work is split into fixed-size
blocks of stream ids, so the result does not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .distributions import (
    NORMAL,
    AlternativeSpec,
    derive_seed,
    format_spec,
    parse_spec,
    population_cumulants,
    sample_block,
)
from .errors import DataError, InvalidAlpha, InvalidSpec, Underpowered, UsageError
from .statistics import Kind, Tail, TestStatistic, batch_statistics, directional_tail

__all__ = [
    "BLOCK_SIZE",
    "MIN_NULL_REPLICATIONS",
    "TestSpec",
    "CriticalValueTable",
    "PowerStudyConfig",
    "PowerCell",
    "PowerReport",
    "simulate_statistics",
    "null_statistics",
    "critical_value",
    "rejects",
    "calibrate",
    "p_value",
    "asymptotic_lm_threshold",
    "power_study",
    "TAIL_RULE",
]

BLOCK_SIZE = 2048
MIN_NULL_REPLICATIONS = 1000
MONTECARLO = "montecarlo"
ASYMPTOTIC = "asymptotic"

TAIL_RULE = (
    "auto tails: statistics driven by skewness (Z2', Z2, sqrt(b1)) or kurtosis "
    "(Z3', Z3, b2) reject in the tail pointing toward the sign of the "
    "alternative's population skewness or kurtosis; zero or undefined counts as "
    "positive; Z2 and Z3 are oriented opposite to Z2' and Z3'; LM is upper-tailed"
)


# --- simulation ---------------------------------------------------------------


def _simulate_block(spec, n, seed, start, stop, kinds):
    x = sample_block(spec, n, seed, range(start, stop))
    return batch_statistics(x, kinds)


def simulate_statistics(
    spec: AlternativeSpec,
    n: int,
    replications: int,
    seed: int,
    kinds: Iterable[Kind],
    workers: int = 1,
) -> dict[Kind, np.ndarray]:
    """Statistic values on ``replications`` samples, row ``r`` from stream ``r``.

    NaN marks a degenerate sample and +-inf a perfect jackknife correlation.
    """
    kinds = [Kind(k) for k in kinds]
    if workers < 1:
        raise UsageError(f"workers must be >= 1, got {workers}")
    bounds = [
        (start, min(start + BLOCK_SIZE, replications))
        for start in range(0, replications, BLOCK_SIZE)
    ]
    args = [(spec, n, seed, a, b, kinds) for a, b in bounds]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_simulate_block, *zip(*args)))
    else:
        blocks = [_simulate_block(*a) for a in args]
    if not blocks:
        return {k: np.empty(0) for k in kinds}
    return {k: np.concatenate([b[k] for b in blocks]) for k in kinds}


def null_seed(seed: int, n: int) -> int:
    return derive_seed(seed, "null", n)


def null_statistics(
    kinds: Iterable[Kind], n: int, null_replications: int, seed: int, workers: int = 1
) -> dict[Kind, np.ndarray]:
    """Statistics on standard normal samples; one shared sample set for all kinds."""
    return simulate_statistics(NORMAL, n, null_replications, null_seed(seed, n), kinds, workers)


# --- critical values ----------------------------------------------------------


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")


def _usable(values):
    values = np.asarray(values, dtype=np.float64)
    return values[~np.isnan(values)]


def critical_value(null_values: np.ndarray, alpha: float, tail: Tail) -> float:
    """Empirical null quantile used as a rejection threshold.

    With ``m`` usable null values sorted ascending, the upper threshold is
    order statistic ``ceil((1 - alpha) m)``, the lower one is order statistic
    ``floor(alpha m) + 1`` and the two-sided one is the upper threshold of
    ``|values|``. NaN entries (degenerate samples) are dropped; +-inf entries
    take part in the ordering.
    """
    _check_alpha(alpha)
    tail = Tail(tail)
    values = _usable(null_values)
    m = values.size
    if m * min(alpha, 1.0 - alpha) < 10:
        raise Underpowered(
            f"{m} null values cannot resolve alpha={alpha}; need m*min(alpha, 1-alpha) >= 10"
        )
    # round() guards against (1 - 0.05) * 10000 == 9500.000000000002
    upper_rank = math.ceil(round((1.0 - alpha) * m, 9))
    if tail is Tail.UPPER:
        return float(np.sort(values)[upper_rank - 1])
    if tail is Tail.LOWER:
        return float(np.sort(values)[math.floor(round(alpha * m, 9))])
    return float(np.sort(np.abs(values))[upper_rank - 1])


def rejects(values: np.ndarray, threshold: float, tail: Tail) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    tail = Tail(tail)
    if tail is Tail.UPPER:
        return values > threshold
    if tail is Tail.LOWER:
        return values < threshold
    return np.abs(values) > threshold


def asymptotic_lm_threshold(alpha: float) -> float:
    """Upper alpha point of chi-square(2): the large-sample LM critical value."""
    _check_alpha(alpha)
    return -2.0 * math.log(alpha)


@dataclass
class CriticalValueTable:
    """Thresholds keyed by ``(kind, n, alpha, tail)``.

    One-tailed entries are thresholds on the statistic itself; two-sided
    entries are thresholds on its absolute value.
    """

    entries: dict[tuple[Kind, int, float, Tail], float] = field(default_factory=dict)
    null_replications: int = 0
    seed: int = 0

    def threshold(self, kind: Kind, n: int, alpha: float, tail: Tail) -> float:
        try:
            return self.entries[(Kind(kind), int(n), float(alpha), Tail(tail))]
        except KeyError:
            raise KeyError(f"no critical value for {kind}, n={n}, alpha={alpha}, {tail}") from None

    def rejects(self, values, kind, n, alpha, tail):
        return rejects(values, self.threshold(kind, n, alpha, tail), tail)

    def merge(self, other: "CriticalValueTable") -> None:
        self.entries.update(other.entries)

    def rows(self) -> list[dict]:
        return [
            {
                "kind": kind.value,
                "statistic": kind.label,
                "n": n,
                "alpha": alpha,
                "tail": tail.value,
                "critical_value": value,
                "null_replications": self.null_replications,
                "seed": self.seed,
            }
            for (kind, n, alpha, tail), value in sorted(
                self.entries.items(), key=lambda kv: (kv[0][0].value, kv[0][1], kv[0][2], kv[0][3].value)
            )
        ]

    def to_json(self) -> str:
        meta = {"null_replications": self.null_replications, "seed": self.seed}
        return json.dumps({"meta": meta, "entries": self.rows()}, indent=2) + "\n"

    def to_csv(self) -> str:
        return _csv(self.rows())

    @classmethod
    def from_json(cls, text: str) -> "CriticalValueTable":
        data = json.loads(text)
        table = cls(
            null_replications=data["meta"]["null_replications"], seed=data["meta"]["seed"]
        )
        for row in data["entries"]:
            key = (Kind(row["kind"]), int(row["n"]), float(row["alpha"]), Tail(row["tail"]))
            table.entries[key] = float(row["critical_value"])
        return table


def calibrate(
    kind: Kind,
    n: int,
    alphas: Sequence[float],
    tails: Sequence[Tail],
    null_replications: int,
    seed: int,
    workers: int = 1,
) -> CriticalValueTable:
    """Critical values from ``null_replications`` simulated normal samples of size ``n``."""
    if null_replications < MIN_NULL_REPLICATIONS:
        raise Underpowered(
            f"need at least {MIN_NULL_REPLICATIONS} null replications, got {null_replications}"
        )
    for alpha in alphas:
        _check_alpha(alpha)
    kind = Kind(kind)
    values = null_statistics([kind], n, null_replications, seed, workers)[kind]
    table = CriticalValueTable(null_replications=null_replications, seed=seed)
    for alpha in alphas:
        for tail in tails:
            tail = Tail(tail)
            table.entries[(kind, int(n), float(alpha), tail)] = critical_value(values, alpha, tail)
    return table


def p_value(observed: TestStatistic | float, tail: Tail, null_stats: np.ndarray) -> float:
    """Monte Carlo p-value ``(1 + #{null at least as extreme}) / (m + 1)``.

    ``null_stats`` need not be sorted; NaN entries are ignored.
    """
    obs = observed.value if isinstance(observed, TestStatistic) else float(observed)
    tail = Tail(tail)
    null = _usable(null_stats)
    m = null.size
    if m == 0:
        raise ValueError("null sample is empty")
    if tail is Tail.UPPER:
        null = np.sort(null)
        count = m - np.searchsorted(null, obs, side="left")
    elif tail is Tail.LOWER:
        null = np.sort(null)
        count = np.searchsorted(null, obs, side="right")
    else:
        null = np.sort(np.abs(null))
        count = m - np.searchsorted(null, abs(obs), side="left")
    return float((1 + count) / (m + 1))


# --- power study --------------------------------------------------------------


@dataclass(frozen=True)
class TestSpec:
    """A statistic with its rejection region.

    ``tail=None`` picks the tail per alternative (see ``TAIL_RULE``).
    ``calibration="asymptotic"`` (LM only) uses the chi-square(2) critical
    value instead of a simulated one.
    """

    __test__ = False

    kind: Kind
    tail: Tail | None = None
    calibration: str = MONTECARLO

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.tail is not None:
            object.__setattr__(self, "tail", Tail(self.tail))
        if self.calibration not in (MONTECARLO, ASYMPTOTIC):
            raise UsageError(f"unknown calibration {self.calibration!r}")
        if self.calibration == ASYMPTOTIC and (
            self.kind is not Kind.LM or self.tail not in (None, Tail.UPPER)
        ):
            raise UsageError("asymptotic calibration is only available for upper-tailed LM")

    @property
    def label(self) -> str:
        base = self.kind.label
        if self.tail is Tail.TWO_SIDED:
            base = f"|{base}|"
        elif self.tail is not None and self.kind is not Kind.LM:
            base = f"{base}[{self.tail.value}]"
        if self.calibration == ASYMPTOTIC:
            base += "[asymptotic]"
        return base

    def text(self) -> str:
        parts = [self.kind.value, self.tail.value if self.tail else "auto"]
        if self.calibration != MONTECARLO:
            parts.append(self.calibration)
        return ":".join(parts)

    @classmethod
    def parse(cls, text: str) -> "TestSpec":
        """``kind[:tail][:calibration]`` with tail ``auto`` for the per-alternative rule."""
        parts = [p.strip() for p in text.split(":")]
        if not 1 <= len(parts) <= 3:
            raise UsageError(f"cannot parse test {text!r}")
        try:
            kind = Kind.parse(parts[0])
            tail = None
            if len(parts) > 1 and parts[1].lower() != "auto":
                tail = Tail.parse(parts[1])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        calibration = parts[2].lower() if len(parts) > 2 else MONTECARLO
        return cls(kind, tail, calibration)


@dataclass(frozen=True)
class PowerStudyConfig:
    alternatives: tuple[tuple[str, AlternativeSpec], ...]
    tests: tuple[TestSpec, ...]
    n_values: tuple[int, ...] = (20, 50)
    alpha: float = 0.05
    replications: int = 20_000
    seed: int = 0
    null_replications: int = 100_000

    def __post_init__(self):
        alts = tuple(
            (label, spec) if isinstance(spec, AlternativeSpec) else (label, parse_spec(spec))
            for label, spec in self.alternatives
        )
        object.__setattr__(self, "alternatives", alts)
        object.__setattr__(
            self, "tests", tuple(t if isinstance(t, TestSpec) else TestSpec.parse(t) for t in self.tests)
        )
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        _check_alpha(self.alpha)
        if self.replications < 1:
            raise UsageError(f"replications must be >= 1, got {self.replications}")
        if not self.alternatives or not self.tests or not self.n_values:
            raise UsageError("config needs at least one alternative, test and n")
        if self.null_replications < MIN_NULL_REPLICATIONS:
            raise Underpowered(
                f"need at least {MIN_NULL_REPLICATIONS} null replications, "
                f"got {self.null_replications}"
            )
        labels = [label for label, _ in self.alternatives]
        if len(set(labels)) != len(labels):
            raise UsageError("alternative labels must be unique")

    @classmethod
    def from_dict(cls, data: dict) -> "PowerStudyConfig":
        """Build from the JSON config layout (see README)."""
        known = {"alternatives", "tests", "n_values", "alpha", "replications", "seed", "null_replications"}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        alts = []
        for item in data.get("alternatives", []):
            if isinstance(item, str):
                alts.append((item, parse_spec(item)))
            elif isinstance(item, dict):
                spec = parse_spec(item["spec"])
                alts.append((item.get("label", format_spec(spec)), spec))
            else:
                raise InvalidSpec(f"bad alternative entry {item!r}")
        kwargs = {k: data[k] for k in ("n_values", "alpha", "replications", "seed", "null_replications") if k in data}
        return cls(
            alternatives=tuple(alts),
            tests=tuple(TestSpec.parse(t) for t in data.get("tests", [])),
            **kwargs,
        )

    @classmethod
    def load(cls, path: str | Path) -> "PowerStudyConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise DataError(f"{path}: cannot read config ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON config ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "alternatives": [
                {"label": label, "spec": format_spec(spec)} for label, spec in self.alternatives
            ],
            "tests": [t.text() for t in self.tests],
            "n_values": list(self.n_values),
            "alpha": self.alpha,
            "replications": self.replications,
            "seed": self.seed,
            "null_replications": self.null_replications,
        }


@dataclass(frozen=True)
class PowerCell:
    alternative: str
    spec: str
    test: str
    kind: str
    tail: str
    calibration: str
    n: int
    critical_value: float
    valid: int
    rejections: int
    rejection_rate: float
    mc_std_error: float
    degenerate_count: int


@dataclass
class PowerReport:
    cells: list[PowerCell]
    config: PowerStudyConfig

    def cell(self, alternative: str, test: str, n: int) -> PowerCell:
        for c in self.cells:
            if c.alternative == alternative and c.test == test and c.n == n:
                return c
        raise KeyError((alternative, test, n))

    @property
    def by_key(self) -> dict[tuple[str, str, int], PowerCell]:
        return {(c.alternative, c.test, c.n): c for c in self.cells}

    def rows(self) -> list[dict]:
        return [asdict(c) for c in self.cells]

    def to_csv(self) -> str:
        return _csv(self.rows())

    def to_json(self) -> str:
        meta = {"config": self.config.to_dict(), "tail_rule": TAIL_RULE, "block_size": BLOCK_SIZE}
        return json.dumps({"meta": meta, "cells": self.rows()}, indent=2) + "\n"


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def power_study(config: PowerStudyConfig, workers: int = 1, progress=None) -> PowerReport:
    """Rejection rates of every test against every alternative at every ``n``.

    For each ``n`` one null sample set of ``config.null_replications``
    normal samples calibrates all Monte Carlo tests. Each alternative cell
    then simulates ``config.replications`` samples. Degenerate samples
    (NaN) and perfect jackknife correlations (+-inf) are excluded from the
    denominator and reported in ``degenerate_count``.
    """
    kinds = list(dict.fromkeys(t.kind for t in config.tests))
    mc_kinds = list(dict.fromkeys(t.kind for t in config.tests if t.calibration == MONTECARLO))
    alpha = config.alpha
    cells = []
    for n in config.n_values:
        null = null_statistics(mc_kinds, n, config.null_replications, config.seed, workers)
        thresholds: dict[tuple[Kind, Tail, str], float] = {}
        for label, spec in config.alternatives:
            pop = population_cumulants(spec)
            cell_seed = derive_seed(config.seed, "alternative", format_spec(spec), n)
            stats = simulate_statistics(spec, n, config.replications, cell_seed, kinds, workers)
            for test in config.tests:
                tail = test.tail or directional_tail(test.kind, pop.gamma, pop.kappa)
                key = (test.kind, tail, test.calibration)
                if key not in thresholds:
                    if test.calibration == ASYMPTOTIC:
                        thresholds[key] = asymptotic_lm_threshold(alpha)
                    else:
                        thresholds[key] = critical_value(null[test.kind], alpha, tail)
                values = stats[test.kind]
                ok = np.isfinite(values)
                valid = int(ok.sum())
                hits = int(rejects(values[ok], thresholds[key], tail).sum())
                rate = hits / valid if valid else math.nan
                se = math.sqrt(rate * (1.0 - rate) / valid) if valid else math.nan
                cells.append(
                    PowerCell(
                        alternative=label,
                        spec=format_spec(spec),
                        test=test.label,
                        kind=test.kind.value,
                        tail=tail.value,
                        calibration=test.calibration,
                        n=n,
                        critical_value=thresholds[key],
                        valid=valid,
                        rejections=hits,
                        rejection_rate=rate,
                        mc_std_error=se,
                        degenerate_count=config.replications - valid,
                    )
                )
            if progress is not None:
                progress(label, n)
    return PowerReport(cells, config)
