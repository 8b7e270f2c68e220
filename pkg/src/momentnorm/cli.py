"""Command-line front end.

Subcommands: ``test``, ``moments``, ``calibrate``, ``power`` and ``table1``.
Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .distributions import STUDY_ALTERNATIVES, population_cumulants
from .errors import (
    DataError,
    DegenerateSample,
    MomentNormError,
    NonFiniteInput,
    ParseError,
    UsageError,
)
from .moments import Sample, central_moments, standardized_cumulants
from .montecarlo import (
    ASYMPTOTIC,
    MONTECARLO,
    PowerStudyConfig,
    asymptotic_lm_threshold,
    calibrate,
    critical_value,
    null_statistics,
    p_value,
    power_study,
    rejects,
)
from .statistics import Kind, Tail, comparison_stats, jackknife_value, z2_prime, z3_prime
from .theory import rho2_limit, rho3_limit

EXIT_OK = 0


def read_data(path: str | Path) -> Sample:
    """One number per line; ``#`` starts a comment; blank lines are skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            raise ParseError(f"{path}: cannot read {line!r} as a number", lineno) from None
        if not math.isfinite(value):
            raise NonFiniteInput(f"{path}: line {lineno}: value {line!r} is not finite")
        values.append(value)
    return Sample(values)


def _emit(args, rows: list[dict], title: str | None = None) -> None:
    fmt = args.format
    if fmt == "json":
        payload = rows[0] if len(rows) == 1 and not getattr(args, "_always_list", False) else rows
        text = json.dumps(payload, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
        text = buf.getvalue()
    else:
        text = _plain(rows, title)
    _write(args, text)


def _cell(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return repr(v)
    return v


def _plain(rows, title):
    lines = [title] if title else []
    if len(rows) == 1:
        width = max(len(k) for k in rows[0])
        lines += [f"{k:<{width}}  {_human(v)}" for k, v in rows[0].items()]
    elif rows:
        keys = list(rows[0])
        table = [keys] + [[_human(r[k]) for k in keys] for r in rows]
        widths = [max(len(row[i]) for row in table) for i in range(len(keys))]
        lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
    return "\n".join(lines) + "\n"


def _human(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _write(args, text):
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- subcommands ---------------------------------------------------------------


def cmd_test(args) -> int:
    sample = read_data(args.data)
    if sample.n < 4:
        raise DataError(f"{args.data}: need at least 4 observations, got {sample.n}")
    kind = Kind.parse(args.kind)
    tail = Tail.parse(args.tail)
    observed = _observed(sample, kind)
    row = {
        "statistic": kind.label,
        "kind": kind.value,
        "n": sample.n,
        "value": observed,
        "tail": tail.value,
        "alpha": args.alpha,
    }
    if args.calibration == ASYMPTOTIC:
        if kind is not Kind.LM or tail is not Tail.UPPER:
            raise UsageError("asymptotic calibration is only available for upper-tailed LM")
        threshold = asymptotic_lm_threshold(args.alpha)
        pval = math.exp(-observed / 2.0)
        row.update(calibration=ASYMPTOTIC, null_replications=None)
    else:
        null = null_statistics([kind], sample.n, args.null_replications, args.seed, args.workers)[kind]
        threshold = critical_value(null, args.alpha, tail)
        pval = p_value(observed, tail, null)
        row.update(calibration=MONTECARLO, null_replications=args.null_replications)
    row.update(
        critical_value=threshold,
        p_value=pval,
        decision="reject" if bool(rejects([observed], threshold, tail)[0]) else "retain",
        seed=args.seed,
    )
    _emit(args, [row], title="Moment test for normality")
    return EXIT_OK


def _observed(sample, kind):
    """Statistic value; a perfect jackknife correlation is reported as +-inf."""
    if kind in (Kind.Z2, Kind.Z3):
        value = jackknife_value(sample, kind)
        if math.isnan(value):
            raise DegenerateSample(f"{kind.label}: a variance in the jackknife correlation is zero")
        return value
    cum = standardized_cumulants(central_moments(sample))
    if kind is Kind.Z2P:
        return z2_prime(cum).value
    if kind is Kind.Z3P:
        return z3_prime(cum).value
    comp = comparison_stats(cum)
    return {Kind.SQRT_B1: comp.sqrt_b1, Kind.B2: comp.b2, Kind.LM: comp.lm}[kind]


def cmd_moments(args) -> int:
    sample = read_data(args.data)
    mom = central_moments(sample)
    cum = standardized_cumulants(mom)
    row = {
        "n": mom.n,
        "mean": mom.mean,
        "m2": mom.m2,
        "m3": mom.m3,
        "m4": mom.m4,
        "m6": mom.m6,
        "s2_unbiased": mom.s2_unbiased,
        "mu3_unbiased": mom.mu3_unbiased,
        "gamma_hat": cum.gamma_hat,
        "kappa_hat": cum.kappa_hat,
        "lambda_hat": cum.lambda_hat,
        "z2p": z2_prime(cum).value,
        "z3p": z3_prime(cum).value if cum.n >= 3 else None,
    }
    _emit(args, [row], title="Sample moments")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    kinds = [Kind.parse(k) for k in (args.kind or ["z2p"])]
    tails = [Tail.parse(t) for t in (args.tail or ["upper", "lower", "two-sided"])]
    alphas = args.alpha or [0.05]
    rows = []
    for n in args.n:
        for kind in kinds:
            table = calibrate(kind, n, alphas, tails, args.null_replications, args.seed, args.workers)
            rows.extend(table.rows())
    args._always_list = True
    _emit(args, rows, title="Critical values")
    return EXIT_OK


def cmd_power(args) -> int:
    config = PowerStudyConfig.load(args.config)
    overrides = {
        k: getattr(args, k)
        for k in ("replications", "null_replications", "seed")
        if getattr(args, k) is not None
    }
    if overrides:
        data = config.to_dict()
        data.update(overrides)
        config = PowerStudyConfig.from_dict(data)

    def progress(label, n):
        if args.verbose:
            print(f"done: {label} n={n}", file=sys.stderr)

    report = power_study(config, workers=args.workers, progress=progress)
    if args.format == "json":
        _write(args, report.to_json())
    elif args.format == "csv":
        _write(args, report.to_csv())
    else:
        rows = [
            {
                "alternative": c.alternative,
                "test": c.test,
                "tail": c.tail,
                "n": c.n,
                "power": c.rejection_rate,
                "se": c.mc_std_error,
                "degenerate": c.degenerate_count,
            }
            for c in report.cells
        ]
        _write(args, _plain(rows, "Empirical power"))
    return EXIT_OK


def _maybe(fn, pop):
    try:
        return fn(pop)
    except MomentNormError:
        return None


def table1_rows() -> list[dict]:
    """Skewness, kurtosis and limiting correlations for the study alternatives.

    Entries whose defining moments diverge are ``None`` (printed as ``-``).
    """
    rows = []
    for label, spec in STUDY_ALTERNATIVES:
        pop = population_cumulants(spec)
        order = pop.finite_moment_order
        rows.append(
            {
                "distribution": label,
                "spec": str(spec),
                "gamma": pop.gamma if order >= 3 else None,
                "kappa": pop.kappa if order >= 4 else None,
                "lim_rho2": _maybe(rho2_limit, pop),
                "lim_rho3": _maybe(rho3_limit, pop),
            }
        )
    return rows


def cmd_table1(args) -> int:
    rows = table1_rows()
    if args.format == "plain":
        rows = [
            {k: (f"{v:.2f}" if isinstance(v, float) else v) for k, v in row.items()}
            for row in rows
        ]
    args._always_list = True
    _emit(args, rows, title="Skewness, kurtosis and limiting correlations")
    return EXIT_OK


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentnorm", description="Moment-based tests for normality."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test a data file for normality")
    p.add_argument("data", help="file with one number per line")
    p.add_argument("--kind", default="z2p", help="z2p, z3p, z2, z3, sqrt_b1, b2 or lm")
    p.add_argument("--tail", default="two-sided", help="upper, lower or two-sided")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--null-replications", type=int, default=10_000)
    p.add_argument("--calibration", choices=[MONTECARLO, ASYMPTOTIC], default=MONTECARLO)
    _add_common(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("moments", help="sample moments and Z2', Z3'")
    p.add_argument("data")
    _add_common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("calibrate", help="simulate null critical values")
    p.add_argument("--kind", action="append", help="statistic (repeatable, default z2p)")
    p.add_argument("--n", type=int, action="append", required=True, help="sample size (repeatable)")
    p.add_argument("--alpha", type=_alpha, action="append", help="level (repeatable, default 0.05)")
    p.add_argument("--tail", action="append", help="tail (repeatable, default all three)")
    p.add_argument("--null-replications", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("power", help="run a power study from a JSON config")
    p.add_argument("config")
    p.add_argument("--replications", type=int)
    p.add_argument("--null-replications", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    _add_common(p, seed_default=None, seed_help="random seed (default: the config's seed)")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("table1", help="population cumulants of the study alternatives")
    _add_common(p)
    p.set_defaults(func=cmd_table1)
    return parser


def _add_common(p, seed_default=0, seed_help="random seed (default 0)"):
    # added per subcommand: argparse parents share action objects, so a
    # per-subcommand default would leak into the others
    p.add_argument("--format", choices=["plain", "csv", "json"], default="plain")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    p.add_argument("--seed", type=int, default=seed_default, help=seed_help)
    p.add_argument("--workers", type=int, default=1, help="worker processes")


def _alpha(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return value


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MomentNormError as exc:
        print(f"momentnorm: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        # Kind/Tail parsing and other bad flag values
        print(f"momentnorm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
