"""
GMMS Purification Toolkit command line

Subcommands:
- state: build a GMMS candidate and report trace, entropy, purity, mean photon number
- purify: g-purify a candidate and verify that tracing out the ancilla recovers it
- husimi: sample the Husimi Q function on a square grid
- scan: entropy and Hilbert-Schmidt distance scans along one parameter
- acceptance: run the built-in acceptance checks

Command output goes to stdout (or --out); logs go to stderr.
Exit codes: 0 success, 2 input error, 3 numerical-integrity error.
"""
import argparse
import json
import logging
import sys
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from app.agents import create_runner
from app.config import get_settings
from app.models import (
    DimensionError,
    DomainError,
    NumericalIntegrityError,
    OutputFormat,
    PreconditionError,
    RunConfig,
    TruncationError,
)
from app.tools.phasespace import render_png
from app.tools.tables import rows_to_csv, rows_to_json, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

INPUT_ERRORS = (ValidationError, DomainError, DimensionError, PreconditionError, TruncationError)

REPORT_FIELDS = ("n_max", "trace", "entropy_nats", "entropy_bits", "purity", "mean_photon", "offdiag_hs_mass")


def _configure_logging() -> None:
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise DomainError(f"Expected a comma-separated list of numbers, got '{text}'")


def parse_grid(text: str) -> Tuple[Optional[str], List[float]]:
    """'0,1,2' -> (None, [0, 1, 2]); 'B=1,2,3' -> ('B', [1, 2, 3])"""
    placeholder = None
    if "=" in text:
        placeholder, text = (part.strip() for part in text.split("=", 1))
        if not placeholder:
            raise DomainError("Grid placeholder name is empty")
    values = _float_list(text)
    if not values:
        raise DomainError("Field 'grid' holds no values")
    return placeholder, values


def _dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _emit(text: str, config: RunConfig) -> None:
    if config.out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(config.out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    logger.info(f"Wrote {config.out}")


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        spec=getattr(args, "spec", None),
        cutoff_policy=args.cutoff,
        tol=args.tol,
        output_format=args.format,
        out=args.out,
    )


def cmd_state(args: argparse.Namespace) -> int:
    config = _run_config(args)
    runner = create_runner(tau_trace=config.tol)
    report = runner.state(config, include_weights=args.weights)
    if config.output_format == OutputFormat.JSON:
        payload = report.model_dump(exclude_none=True)
        payload["entropy_bits"] = report.entropy_bits
        _emit(_dump_json(payload), config)
    elif args.weights:
        _emit(write_table(("n", "weight"), [np.arange(len(report.weights)), report.weights]), config)
    else:
        _emit(write_table(REPORT_FIELDS, [[getattr(report, f)] for f in REPORT_FIELDS]), config)
    return EXIT_OK


def cmd_purify(args: argparse.Namespace) -> int:
    config = _run_config(args)
    runner = create_runner(tau_trace=config.tol)
    coefficients, report = runner.purify(config)
    coefficients = coefficients.real
    if config.output_format == OutputFormat.JSON:
        _emit(_dump_json({"coefficients": coefficients.tolist(), "report": report.model_dump()}), config)
    else:
        _emit(write_table(("n", "coefficient"), [np.arange(coefficients.size), coefficients]), config)
    logger.info(
        f"Purification check: max deviation {report.max_entry_deviation:.3e}, "
        f"off-diagonal mass removed {report.offdiag_mass_removed:.3e}, passed={report.passed}"
    )
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def cmd_husimi(args: argparse.Namespace) -> int:
    config = _run_config(args)
    runner = create_runner(tau_trace=config.tol)
    grid = runner.husimi(config, args.extent, args.res)
    if config.output_format == OutputFormat.JSON:
        payload = {
            "re_min": grid.re_min,
            "re_max": grid.re_max,
            "im_min": grid.im_min,
            "im_max": grid.im_max,
            "resolution": grid.resolution,
            "values": grid.values.tolist(),
        }
        _emit(_dump_json(payload), config)
    else:
        _emit(grid.to_csv(), config)
    if args.png:
        render_png(grid, args.png, title=str(config.gmms_spec()))
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    config = _run_config(args)
    runner = create_runner(tau_trace=config.tol)
    if args.kind == "entropy":
        if not args.spec:
            raise DomainError("Field 'spec' is required for an entropy scan")
        placeholder, grid = parse_grid(args.grid or "")
        rows = runner.scan_entropy(args.spec, grid, placeholder, config)
        fields = ("param", "entropy_nats", "trace", "mean_photon")
    elif args.kind == "distance":
        if not args.a or not args.b:
            raise DomainError("Fields 'a' and 'b' are required for a distance scan")
        placeholder, grid = parse_grid(args.grid or "")
        rows = runner.scan_distance(args.a, args.b, grid, placeholder, config)
        fields = ("param", "hs_distance")
    elif args.kind == "riemann":
        b = _float_list(args.b or "1")[0]
        rows = runner.scan_riemann(b, _float_list(args.deltas), config)
        fields = ("param", "hs_distance")
    else:
        b = _float_list(args.b or "1")[0]
        _, grid = parse_grid(args.grid or "0.2,0.1,0.05,0")
        rows = runner.scan_squeezing(b, grid, args.phi, config)
        fields = ("param", "hs_distance")
    if config.output_format == OutputFormat.JSON:
        _emit(rows_to_json(rows) + "\n", config)
    else:
        _emit(rows_to_csv(rows, fields), config)
    return EXIT_OK


def cmd_acceptance(args: argparse.Namespace) -> int:
    config = _run_config(args)
    runner = create_runner(tau_trace=config.tol)
    report = runner.run_acceptance(args.check or None)
    _emit(_dump_json(report.model_dump()), config)
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cutoff", default="auto", help="'auto' or 'fixed:N' (plain N accepted)")
    common.add_argument("--format", default="csv", choices=[f.value for f in OutputFormat])
    common.add_argument("--out", default=None, help="Write output to this file instead of stdout")
    common.add_argument("--tol", type=float, default=None, help="Truncation budget tau_trace for this run")

    parser = argparse.ArgumentParser(prog="gmms", description=settings.app_name)
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    state = sub.add_parser("state", parents=[common], help="Report diagnostics of a GMMS candidate")
    state.add_argument("--spec", required=True, help="e.g. thermal:nbar=1, cvmms:b=2, squeezed:b=2,s=0.3,phi=0")
    state.add_argument("--weights", action="store_true", help="Emit the diagonal Fock weights")
    state.set_defaults(handler=cmd_state)

    purify = sub.add_parser("purify", parents=[common], help="g-purify a candidate and verify the round trip")
    purify.add_argument("--spec", required=True)
    purify.set_defaults(handler=cmd_purify)

    husimi = sub.add_parser("husimi", parents=[common], help="Husimi Q function on a square grid")
    husimi.add_argument("--spec", required=True)
    husimi.add_argument("--extent", type=float, default=settings.husimi_extent)
    husimi.add_argument("--res", type=int, default=settings.husimi_resolution)
    husimi.add_argument("--png", default=None, help="Also render a grayscale image to this path")
    husimi.set_defaults(handler=cmd_husimi)

    scan = sub.add_parser("scan", parents=[common], help="One-parameter scans")
    scan.add_argument("kind", choices=["entropy", "distance", "riemann", "squeezing"])
    scan.add_argument("--spec", default=None, help="Template for entropy scans, e.g. thermal or cvmms:b=B")
    scan.add_argument("--grid", default=None, help="Values, optionally named: 0,1,2 or B=1,2,3")
    scan.add_argument("--a", default=None, help="First template of a distance scan")
    scan.add_argument("--b", default=None, help="Second template (distance) or boundary radius (riemann, squeezing)")
    scan.add_argument("--deltas", default="0.2,0.1,0.05", help="Grid spacings of a riemann scan")
    scan.add_argument("--phi", type=float, default=0.0, help="Squeezing argument of a squeezing scan")
    scan.set_defaults(handler=cmd_scan)

    acceptance = sub.add_parser("acceptance", parents=[common], help="Run the acceptance checks")
    acceptance.add_argument("--check", action="append", default=None, help="Run only this check (repeatable)")
    acceptance.set_defaults(handler=cmd_acceptance)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    logger.debug(f"{settings.app_name} v{settings.app_version}, command {args.command}")
    try:
        return args.handler(args)
    except INPUT_ERRORS as e:
        logger.error(f"Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalIntegrityError as e:
        logger.error(f"Numerical integrity failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
