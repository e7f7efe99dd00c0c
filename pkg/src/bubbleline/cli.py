"""Command-line front end.

    bubbleline analyze   <density-file> [--traces-out DIR]
    bubbleline classify  <density-file> --v1 A --v2 B
    bubbleline tie-curve <density-file> --v1-min A --v1-max B
                         [--samples N] [--out FILE] [--no-figure]
    bubbleline phase     <density-file> --v1-max A --v2-max B
                         [--grid N] [--out FILE] [--no-figure]
    bubbleline oracle    <density-file> --v1 A --v2 B [--max-intervals K]

Every subcommand accepts --config FILE (JSON object of tolerance
overrides); the BUBBLELINE_CONFIG environment variable supplies the same
file when the flag is absent.  JSON reports go to stdout; CSV goes to
--out when given, stdout otherwise.  When a sweep writes a CSV file, a
figure is rendered next to it unless --no-figure is passed.

Exit codes: 0 success, 1 generic failure, 2 density parse/validation
failure, 3 inconclusive asymptotics, 4 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

from . import limits as limits_mod
from . import plots, report
from .bubbles import (
    BlowupResult,
    Regime,
    blowup_time,
    classify,
    tie_curve,
)
from .config import Config, DEFAULT_CONFIG
from .density import DensityModel
from .errors import (
    BubblelineError,
    CoordinateError,
    DensityFileError,
    ExprError,
    InconclusiveLimitsError,
    ModelInvalidError,
    UsageError,
)
from .limits import AsymptoticProfile, asymptotic_profile
from .oracle import brute_force_minimize, reference_minimum

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_DENSITY = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 4


class _Parser(argparse.ArgumentParser):
    """argparse reports bad flags via error(); route that to exit code 4."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bubbleline",
        description="Double bubbles on the line with a log-convex density.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("density_file", help="density description file")
        p.add_argument(
            "--config",
            default=None,
            help="JSON file of tolerance overrides"
            " (default: $BUBBLELINE_CONFIG when set)",
        )

    p = sub.add_parser("analyze", help="validation, asymptotics and regime")
    common(p)
    p.add_argument(
        "--traces-out",
        default=None,
        metavar="DIR",
        help="also write the L and M estimation ladders as CSV files",
    )

    p = sub.add_parser("classify", help="double/triple verdict at one point")
    common(p)
    p.add_argument("--v1", type=float, required=True, help="smaller volume")
    p.add_argument("--v2", type=float, required=True, help="larger volume")

    p = sub.add_parser("tie-curve", help="sample the tie volume over a range")
    common(p)
    p.add_argument("--v1-min", type=float, required=True)
    p.add_argument("--v1-max", type=float, required=True)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--out", default=None, help="CSV destination (default stdout)")
    p.add_argument(
        "--no-figure",
        action="store_true",
        help="skip the figure rendered next to --out",
    )

    p = sub.add_parser("phase", help="verdict sweep over a volume grid")
    common(p)
    p.add_argument("--v1-max", type=float, required=True)
    p.add_argument("--v2-max", type=float, required=True)
    p.add_argument("--grid", type=int, default=16, help="cells per axis")
    p.add_argument("--out", default=None, help="CSV destination (default stdout)")
    p.add_argument(
        "--no-figure",
        action="store_true",
        help="skip the figure rendered next to --out",
    )

    p = sub.add_parser("oracle", help="brute-force minimizer cross-check")
    common(p)
    p.add_argument("--v1", type=float, required=True)
    p.add_argument("--v2", type=float, required=True)
    p.add_argument(
        "--max-intervals",
        type=int,
        default=3,
        help="interval pieces allowed per region (1-3)",
    )

    return parser


def _resolve_config(flag_value: Optional[str]) -> Config:
    path = flag_value or os.environ.get("BUBBLELINE_CONFIG")
    if path is None:
        return DEFAULT_CONFIG
    return Config.from_file(path)


def _load_model(path: str, config: Config) -> DensityModel:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise DensityFileError(f"cannot read density file {path!r}: {exc}")
    name = os.path.splitext(os.path.basename(path))[0]
    return DensityModel.from_text(text, config=config, name=name)


def _print_json(payload: report.Payload) -> None:
    sys.stdout.write(report.render_json(payload) + "\n")


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    model = _load_model(args.density_file, config)
    validation = model.validate()
    if not validation.passed:
        _print_json(report.analyze_payload(model, validation, None, None))
        return EXIT_INVALID_DENSITY

    profile = asymptotic_profile(model)
    if args.traces_out is not None:
        os.makedirs(args.traces_out, exist_ok=True)
        limits_mod.write_trace_csv(
            profile.L, os.path.join(args.traces_out, "L_trace.csv")
        )
        limits_mod.write_trace_csv(
            profile.M, os.path.join(args.traces_out, "M_trace.csv")
        )
    if not (profile.L.settled and profile.M.settled):
        _print_json(report.analyze_payload(model, validation, profile, None))
        stuck = "M" if profile.L.settled else "L"
        print(
            f"limit ladder for {stuck} did not settle; consider an analytic"
            " override in the density file",
            file=sys.stderr,
        )
        return EXIT_INCONCLUSIVE

    blowup = blowup_time(model, profile)
    _print_json(report.analyze_payload(model, validation, profile, blowup))
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    model = _load_model(args.density_file, config)
    analysis = classify(model, args.v1, args.v2)
    _print_json(report.classify_payload(model, analysis))
    return EXIT_OK


def _profile_and_blowup(
    model: DensityModel,
) -> tuple[AsymptoticProfile, BlowupResult]:
    profile = asymptotic_profile(model)
    return profile, blowup_time(model, profile)


def cmd_tie_curve(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    model = _load_model(args.density_file, config)
    profile, blowup = _profile_and_blowup(model)

    v1_hi = args.v1_max
    if blowup.regime is Regime.FINITE_BLOWUP:
        assert blowup.bracket is not None
        certified = blowup.bracket[0]
        if v1_hi >= certified:
            v1_hi = certified * (1.0 - 1e-9)
            print(
                f"warning: clamped --v1-max to {v1_hi:.17g},"
                f" just below the blowup volume {float(blowup.v0):.17g}",
                file=sys.stderr,
            )
    if not args.v1_min < v1_hi:
        raise UsageError(
            f"empty range: --v1-min {args.v1_min!r} is not below"
            f" the usable maximum {v1_hi!r}"
        )

    curve = tie_curve(model, profile, blowup, args.v1_min, v1_hi, args.samples)
    rows = report.tie_curve_rows(curve)
    header = ("v1", "lambda", "mu_at_tie")
    if args.out is None:
        report.write_csv(sys.stdout, header, rows)
    else:
        report.write_csv(args.out, header, rows)
        if not args.no_figure:
            figure = plots.figure_path_for(args.out)
            plots.save_tie_figure(figure, curve, title=model.name)
            print(f"figure written to {figure}", file=sys.stderr)
    return EXIT_OK


def cmd_phase(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    model = _load_model(args.density_file, config)
    if not (args.v1_max > 0 and args.v2_max > 0):
        raise UsageError("grid extents must be positive")
    if not (math.isfinite(args.v1_max) and math.isfinite(args.v2_max)):
        raise UsageError("grid extents must be finite")
    if args.grid < 2:
        raise UsageError(f"--grid must be at least 2, got {args.grid}")

    v1_values = [args.v1_max * (i + 1) / args.grid for i in range(args.grid)]
    v2_values = [args.v2_max * (j + 1) / args.grid for j in range(args.grid)]
    analyses = [
        classify(model, v1, v2)
        for v1 in v1_values
        for v2 in v2_values
        if v1 <= v2
    ]
    rows = report.phase_rows(analyses)
    header = ("v1", "v2", "mu", "p2", "p3", "verdict")
    if args.out is None:
        report.write_csv(sys.stdout, header, rows)
        return EXIT_OK

    report.write_csv(args.out, header, rows)
    if not args.no_figure:
        tie_rows = None
        v0 = None
        try:
            profile, blowup = _profile_and_blowup(model)
            v0 = blowup.v0
            lo = v1_values[0] / 2.0
            hi = args.v1_max
            if blowup.regime is Regime.FINITE_BLOWUP:
                assert blowup.bracket is not None
                hi = min(hi, blowup.bracket[0] * (1.0 - 1e-9))
            if blowup.regime is not Regime.ALWAYS_DOUBLE and lo < hi:
                curve = tie_curve(model, profile, blowup, lo, hi, 33)
                tie_rows = [
                    (s.v1, s.tie_v2, s.mu_at_tie)
                    for s in curve.samples
                    if s.tie_v2 <= args.v2_max * 1.05
                ]
        except BubblelineError:
            pass  # the sweep stands on its own; the overlay is best-effort
        figure = plots.figure_path_for(args.out)
        plots.save_phase_figure(figure, rows, tie_rows, v0, title=model.name)
        print(f"figure written to {figure}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    model = _load_model(args.density_file, config)
    result = brute_force_minimize(model, args.v1, args.v2, args.max_intervals)
    reference = reference_minimum(model, args.v1, args.v2)
    tol = config.oracle_agreement_rtol * (1.0 + abs(reference))
    _print_json(
        report.oracle_payload(
            model, args.v1, args.v2, args.max_intervals, result, reference, tol
        )
    )
    if result.stagnation:
        print("oracle descent stalled before converging", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


_COMMANDS = {
    "analyze": cmd_analyze,
    "classify": cmd_classify,
    "tie-curve": cmd_tie_curve,
    "phase": cmd_phase,
    "oracle": cmd_oracle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ExprError, DensityFileError, ModelInvalidError, CoordinateError) as exc:
        print(f"invalid density: {exc}", file=sys.stderr)
        return EXIT_INVALID_DENSITY
    except InconclusiveLimitsError as exc:
        print(f"inconclusive asymptotics: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except BubblelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
