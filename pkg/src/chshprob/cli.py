"""Command line surface.

Data goes to stdout as text, CSV, or JSON; diagnostics and warnings go to
stderr.  Exit codes: 0 success, 1 usage or validation error, 2 enumeration
budget or step-limit error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .errors import CorruptRecordError, InvalidConfigError, LimitError
from .model import (
    CHANNEL_SIGNS,
    CHANNELS,
    CLASSICAL_BOUND,
    DEFAULT_ENUMERATION_BUDGET,
    MAXIMAL_VIOLATION_RECORDS,
    NON_STRICT,
    STRICT,
    TSIRELSON_BOUND,
    ExperimentConfig,
    ViolationProbability,
    analytic_violation_probability,
    chsh_correlation,
    exact_violation_probability,
    gaussian_tail_probability,
    is_violation,
    tally,
)
from .montecarlo import estimate_violation_probability

# Fixed default seed: runs are reproducible out of the box, never wall-clock.
DEFAULT_SEED = 42
DEFAULT_TRIALS = 1_000_000

# Channel weights per sweep variant; n_k = N * weight_k / sum(weights).
VARIANTS = {
    "equal": (1, 1, 1, 1),
    "ratio10": (1, 10, 10, 10),
    "ratio100": (1, 100, 100, 100),
}
SWEEP_MAX_TOTAL = 4096
INTERVAL_TOTALS = (4, 8, 12, 16, 20)

RESULT_FIELDS = ("method", "threshold", "N", "n1", "n2", "n3", "n4", "value", "value_decimal")
MC_FIELDS = RESULT_FIELDS + ("trials", "hits", "ci_low", "ci_high", "seed")
SWEEP_FIELDS = (
    "variant",
    "N",
    "n1",
    "n2",
    "n3",
    "n4",
    "p_analytic",
    "p_exact_strict",
    "p_exact_strict_decimal",
    "p_exact_nonstrict",
    "p_exact_nonstrict_decimal",
    "error",
)


@dataclass(frozen=True)
class SweepRequest:
    """One sweep: a variant, its totals, and output options."""

    variant: str
    n_values: tuple[int, ...]
    include_exact_intervals: bool = False
    continuous: bool = False
    output_format: str = "csv"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InvalidConfigError(f"unknown variant {self.variant!r}")
        if self.output_format not in ("csv", "json"):
            raise InvalidConfigError(f"unknown output format {self.output_format!r}")
        values = tuple(sorted(set(int(n) for n in self.n_values)))
        object.__setattr__(self, "n_values", values)
        if not values:
            raise InvalidConfigError("sweep needs at least one total round count")
        if values[0] < 1:
            raise InvalidConfigError(f"total round counts must be positive, got {values[0]}")


def default_totals(variant: str) -> tuple[int, ...]:
    """Per-variant default N grid: divisor * powers of 2 up to SWEEP_MAX_TOTAL."""
    divisor = sum(VARIANTS[variant])
    totals = []
    n = divisor
    while n <= SWEEP_MAX_TOTAL:
        totals.append(n)
        n *= 2
    return tuple(totals)


def split_rounds(variant: str, total: int) -> tuple[int, int, int, int] | None:
    """Integer per-channel counts for this variant, or None if N is indivisible."""
    weights = VARIANTS[variant]
    divisor = sum(weights)
    if total % divisor:
        return None
    unit = total // divisor
    return tuple(unit * w for w in weights)


def _fraction_str(value: Fraction) -> str:
    return str(value)


def _result_row(result: ViolationProbability) -> dict:
    rounds = result.config.rounds
    value = result.value
    return {
        "method": result.method,
        "threshold": result.threshold,
        "N": result.config.total,
        "n1": rounds[0],
        "n2": rounds[1],
        "n3": rounds[2],
        "n4": rounds[3],
        "value": _fraction_str(value) if isinstance(value, Fraction) else repr(float(value)),
        "value_decimal": float(value),
    }


def _write_rows(rows: list[dict], fieldnames: tuple[str, ...], fmt: str, out) -> None:
    if fmt == "csv":
        writer = csv.DictWriter(out, fieldnames=fieldnames, restval="", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    out.write("[\n")
    for index, row in enumerate(rows):
        tail = "," if index + 1 < len(rows) else ""
        out.write("  " + json.dumps(row) + tail + "\n")
    out.write("]\n")


def _parse_config(values: list[int]) -> ExperimentConfig:
    return ExperimentConfig(rounds=tuple(values))


def cmd_toy(args: argparse.Namespace) -> int:
    records = MAXIMAL_VIOLATION_RECORDS
    counts = tally(records)
    correlation = chsh_correlation(counts)
    config = ExperimentConfig(rounds=counts.n)
    strict_p = exact_violation_probability(config, STRICT).value
    nonstrict_p = exact_violation_probability(config, NON_STRICT).value
    contributions = [
        CHANNEL_SIGNS[CHANNELS.index(r.channel)] * r.c for r in records
    ]

    if args.json:
        payload = {
            "records": [
                {"time_index": r.time_index, "a": r.a, "b": r.b, "c": r.c, "i": r.i, "j": r.j}
                for r in records
            ],
            "contributions": contributions,
            "correlation": _fraction_str(correlation),
            "correlation_decimal": float(correlation),
            "classical_bound": CLASSICAL_BOUND,
            "violation_strict": is_violation(correlation, STRICT),
            "config": list(config.rounds),
            "probability": {
                "strict": _fraction_str(strict_p),
                "strict_decimal": float(strict_p),
                "non-strict": _fraction_str(nonstrict_p),
                "non-strict_decimal": float(nonstrict_p),
            },
        }
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0

    print("round   a   b  c=ab  i  j  contribution")
    for record, contribution in zip(records, contributions):
        print(
            f"{record.time_index:>5}  {record.a:+d}  {record.b:+d}    {record.c:+d}  "
            f"{record.i}  {record.j}  {contribution:+d}"
        )
    print(f"total CHSH correlation: C = {correlation}")
    print(
        f"classical bound |C| <= {CLASSICAL_BOUND} is exceeded "
        f"(quantum ceiling would be 2*sqrt(2) = {TSIRELSON_BOUND:.4f}); "
        "this is the maximal value finite data can reach."
    )
    print(
        f"probability of |C| > 2 from four fair single-round channels: "
        f"p = {strict_p} = {float(strict_p)}"
    )
    patterns = 2**config.total
    print(
        f"({strict_p.numerator * patterns // strict_p.denominator} of the {patterns} equally "
        f"likely outcome patterns violate strictly; with the boundary included, "
        f"p = {nonstrict_p} = {float(nonstrict_p)})"
    )
    return 0


def cmd_exact(args: argparse.Namespace) -> int:
    config = _parse_config(args.rounds)
    try:
        result = exact_violation_probability(config, args.threshold, budget=args.budget)
    except LimitError as exc:
        rounds = " ".join(str(n) for n in config.rounds)
        print(f"error: {exc}", file=sys.stderr)
        print(f"hint: chshprob approx {rounds}", file=sys.stderr)
        return 2
    _write_rows([_result_row(result)], RESULT_FIELDS, args.format, sys.stdout)
    return 0


def cmd_approx(args: argparse.Namespace) -> int:
    config = _parse_config(args.rounds)
    result = analytic_violation_probability(config)
    _write_rows([_result_row(result)], RESULT_FIELDS, args.format, sys.stdout)
    return 0


def cmd_mc(args: argparse.Namespace) -> int:
    config = _parse_config(args.rounds)
    expected_hits = gaussian_tail_probability(config.rounds) * args.trials
    if expected_hits < 10:
        print(
            f"warning: expected hit count ~{expected_hits:.3g} at {args.trials} trials; "
            "the estimate will be mostly zeros. Use 'exact' or 'approx' for this regime.",
            file=sys.stderr,
        )
    estimate = estimate_violation_probability(
        config, args.trials, args.seed, args.threshold, workers=args.workers
    )
    row = {
        "method": "monte-carlo",
        "threshold": estimate.threshold,
        "N": config.total,
        "n1": config.rounds[0],
        "n2": config.rounds[1],
        "n3": config.rounds[2],
        "n4": config.rounds[3],
        "value": repr(estimate.estimate),
        "value_decimal": estimate.estimate,
        "trials": estimate.trials,
        "hits": estimate.hits,
        "ci_low": estimate.ci_low,
        "ci_high": estimate.ci_high,
        "seed": estimate.seed,
    }
    _write_rows([row], MC_FIELDS, args.format, sys.stdout)
    return 0


def sweep_rows(request: SweepRequest) -> list[dict]:
    """Dataset rows for one sweep, sorted by N; indivisible totals become
    error rows instead of aborting the run."""
    weights = VARIANTS[request.variant]
    divisor = sum(weights)
    rows: dict[int, dict] = {}
    for total in request.n_values:
        row: dict = {"variant": request.variant, "N": total}
        if request.continuous:
            parts = tuple(total * w / divisor for w in weights)
            row.update(n1=parts[0], n2=parts[1], n3=parts[2], n4=parts[3])
            row["p_analytic"] = gaussian_tail_probability(parts)
        else:
            parts = split_rounds(request.variant, total)
            if parts is None:
                row["error"] = (
                    f"N={total} not divisible by {divisor}; "
                    f"use a multiple of {divisor} or --continuous"
                )
            else:
                row.update(n1=parts[0], n2=parts[1], n3=parts[2], n4=parts[3])
                row["p_analytic"] = float(
                    analytic_violation_probability(ExperimentConfig(rounds=parts)).value
                )
        rows[total] = row

    if request.include_exact_intervals and request.variant == "equal":
        for total in INTERVAL_TOTALS:
            parts = split_rounds("equal", total)
            row = rows.get(total)
            if row is None or "error" in row:
                row = {
                    "variant": request.variant,
                    "N": total,
                    "n1": parts[0],
                    "n2": parts[1],
                    "n3": parts[2],
                    "n4": parts[3],
                    "p_analytic": gaussian_tail_probability(parts),
                }
                rows[total] = row
            config = ExperimentConfig(rounds=parts)
            for threshold, key in ((STRICT, "p_exact_strict"), (NON_STRICT, "p_exact_nonstrict")):
                value = exact_violation_probability(config, threshold).value
                row[key] = _fraction_str(value)
                row[key + "_decimal"] = float(value)

    return [rows[total] for total in sorted(rows)]


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.intervals and args.variant != "equal":
        print(
            "note: exact intervals are defined for the equal variant only; ignoring --intervals",
            file=sys.stderr,
        )
    request = SweepRequest(
        variant=args.variant,
        n_values=tuple(args.n_values) if args.n_values else default_totals(args.variant),
        include_exact_intervals=args.intervals,
        continuous=args.continuous,
        output_format=args.format,
    )
    _write_rows(sweep_rows(request), SWEEP_FIELDS, request.output_format, sys.stdout)
    return 0


def _add_threshold_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--strict",
        dest="threshold",
        action="store_const",
        const=STRICT,
        default=STRICT,
        help="count violations as |C| > 2 (default)",
    )
    group.add_argument(
        "--nonstrict",
        dest="threshold",
        action="store_const",
        const=NON_STRICT,
        help="count violations as |C| >= 2",
    )


def _add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format (default csv)"
    )


def _add_rounds_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "rounds",
        metavar="N",
        type=int,
        nargs=4,
        help="rounds per channel: n1 n2 n3 n4 for channels (1,1) (1,2) (2,1) (2,2)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chshprob",
        description=(
            "Probability that a finite-round classical CHSH experiment shows a "
            "correlation past the |C| <= 2 bound, by exact enumeration, Gaussian "
            "tail formula, or Monte Carlo simulation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    toy = sub.add_parser(
        "toy", help="replay the built-in four-round dataset that reaches C = 4"
    )
    toy.add_argument("--json", action="store_true", help="machine-readable output")
    toy.set_defaults(func=cmd_toy)

    exact = sub.add_parser("exact", help="exact violation probability by enumeration")
    _add_rounds_argument(exact)
    _add_threshold_flags(exact)
    _add_format_flag(exact)
    exact.add_argument(
        "--budget",
        type=int,
        default=DEFAULT_ENUMERATION_BUDGET,
        help="max displacement tuples prod(n_k+1) to enumerate (default %(default)s)",
    )
    exact.set_defaults(func=cmd_exact)

    approx = sub.add_parser("approx", help="Gaussian tail formula erfc(d)")
    _add_rounds_argument(approx)
    _add_format_flag(approx)
    approx.set_defaults(func=cmd_approx)

    mc = sub.add_parser("mc", help="Monte Carlo estimate from simulated experiments")
    _add_rounds_argument(mc)
    _add_threshold_flags(mc)
    _add_format_flag(mc)
    mc.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="experiments to simulate")
    mc.add_argument("--seed", type=int, default=DEFAULT_SEED, help="stream seed (default %(default)s)")
    mc.add_argument("--workers", type=int, default=1, help="parallel batch workers")
    mc.set_defaults(func=cmd_mc)

    sweep = sub.add_parser("sweep", help="probability-vs-N dataset for plotting")
    sweep.add_argument(
        "--variant",
        choices=tuple(VARIANTS),
        default="equal",
        help="channel split: equal (n1=n2=n3=n4), ratio10 (10*n1=n2=n3=n4), "
        "ratio100 (100*n1=n2=n3=n4)",
    )
    sweep.add_argument(
        "--n-values",
        dest="n_values",
        metavar="N",
        type=int,
        nargs="+",
        help="total round counts (default: variant divisor times powers of 2 up to 4096)",
    )
    sweep.add_argument(
        "--intervals",
        action="store_true",
        help="add exact strict/non-strict bracket columns at N in "
        + ",".join(str(n) for n in INTERVAL_TOTALS)
        + " (equal variant)",
    )
    sweep.add_argument(
        "--continuous",
        action="store_true",
        help="evaluate the formula at real-valued splits so any N works",
    )
    _add_format_flag(sweep)
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage; fold its exit codes into the 0/1 contract
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        return args.func(args)
    except LimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidConfigError, CorruptRecordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
