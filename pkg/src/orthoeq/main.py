"""Main entry point for the oeq command line tool.

Exit codes: 0 pass, 1 residual or verification failure, 2 input error,
3 pipeline error.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from orthoeq.config import Settings, get_settings
from orthoeq.decomposition import (
    hilbert_decompose,
    run_extraction,
    synthesize,
    verify_decomposition,
)
from orthoeq.equation import residual
from orthoeq.exceptions import (
    ConfigurationError,
    EmptyInstanceError,
    ExtractionError,
    FileFormatError,
    OrthoEqError,
)
from orthoeq.generators import GenConfig, PairingMode, SectionMode, gen_case
from orthoeq.instance_files import dumps, instance_to_file, load_instance, save_decomposition

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT_ERROR = 2
EXIT_PIPELINE_ERROR = 3


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    """Build the argument parser.

    Args:
        settings: Environment settings supplying flag defaults.

    Returns:
        The parser with one subcommand per workflow.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print the report as JSON")
    common.add_argument("--verbose", action="store_true", help="Log pipeline stages")
    common.add_argument("--quiet", action="store_true", help="Log errors only")

    tolerance = argparse.ArgumentParser(add_help=False)
    tolerance.add_argument(
        "--tol",
        type=float,
        default=settings.tol,
        help=f"Residual tolerance (default: {settings.tol:g})",
    )

    generation = argparse.ArgumentParser(add_help=False)
    generation.add_argument("--seed", type=int, default=0, help="PCG64 seed (default: 0)")
    generation.add_argument(
        "--dims", type=int, nargs=2, metavar=("N", "M"), required=True, help="dim E and dim F"
    )
    generation.add_argument("--rank-l", type=int, help="rank of L (default: N + rank M)")
    generation.add_argument("--rank-m", type=int, default=0, help="rank of M (default: 0)")
    generation.add_argument(
        "--sections",
        choices=[mode.value for mode in SectionMode],
        default=SectionMode.POLYNOMIAL.value,
        help="Nonlinearity of the sections (default: polynomial)",
    )
    generation.add_argument(
        "--pairing",
        choices=[mode.value for mode in PairingMode],
        default=PairingMode.STANDARD.value,
        help="How Gram matrices are drawn (default: standard)",
    )
    generation.add_argument(
        "--grid-size",
        type=int,
        default=settings.grid_size,
        help=f"Samples per map (default: {settings.grid_size})",
    )

    parser = argparse.ArgumentParser(
        prog="oeq",
        description="Verify, synthesize and decompose solution pairs of <f(x), g(a)> = <x, a>",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Check the equation on a sampled instance
  oeq verify instance.json

  # Extract a certificate (L, M, A, phi, psi) and save it
  oeq extract instance.json -o decomposition.json

  # Generate, extract and re-synthesize a seeded case
  oeq roundtrip --seed 42 --dims 2 4 --rank-l 3 --rank-m 1 --sections polynomial

  # Write a generated instance file
  oeq gen --seed 7 --dims 1 2 --rank-l 2 --rank-m 1 -o instance.json
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser(
        "verify", parents=[common, tolerance], help="Evaluate the equation residual"
    )
    verify.add_argument("path", type=Path)

    extract = commands.add_parser(
        "extract", parents=[common, tolerance], help="Extract and verify a certificate"
    )
    extract.add_argument("path", type=Path)
    extract.add_argument("-o", "--output", type=Path, help="Write the decomposition file here")

    hilbert = commands.add_parser(
        "hilbert", parents=[common, tolerance], help="Split into B + mu and (B*)^-1 + nu"
    )
    hilbert.add_argument("path", type=Path)

    commands.add_parser(
        "roundtrip",
        parents=[common, tolerance, generation],
        help="Generate, synthesize, extract, verify and re-synthesize",
    )

    gen = commands.add_parser(
        "gen", parents=[common, generation], help="Write a generated instance"
    )
    gen.add_argument("-o", "--output", type=Path, help="Output file (default: stdout)")

    return parser


def configure_logging(args: argparse.Namespace, settings: Settings) -> None:
    if args.verbose:
        level: int | str = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    else:
        level = settings.log_level.upper()
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def format_report(title: str, report: dict[str, Any], as_json: bool) -> str:
    """Render a report dictionary.

    Args:
        title: Heading for the text form.
        report: Values to print.
        as_json: Emit a JSON document instead of text.

    Returns:
        The formatted report.
    """
    if as_json:
        return json.dumps(report, indent=2)

    lines = ["=" * 60, title, "=" * 60]
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"\n{key}:")
            lines.append("-" * 40)
            lines.extend(f"  {name}: {item}" for name, item in value.items())
        else:
            lines.append(f"{key}: {value}")
    lines.append("=" * 60)
    return "\n".join(lines)


def gen_config_from_args(args: argparse.Namespace) -> GenConfig:
    """Build a GenConfig from generation flags.

    Raises:
        ValidationError: If the flags violate the rank equation or bounds.
    """
    n, m = args.dims
    rank_l = args.rank_l if args.rank_l is not None else n + args.rank_m
    return GenConfig(
        n=n,
        m=m,
        rank_l=rank_l,
        rank_m=args.rank_m,
        pairing_mode=PairingMode(args.pairing),
        section_mode=SectionMode(args.sections),
        seed=args.seed,
        grid_size=args.grid_size,
    )


def cmd_verify(args: argparse.Namespace) -> int:
    """Print the residual report of an instance file."""
    inst = load_instance(args.path)
    try:
        report = residual(inst)
    except EmptyInstanceError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    document = report.model_dump()
    document["tolerance"] = args.tol
    document["passed"] = report.passes(args.tol)
    print(json.dumps(document, indent=2))
    return EXIT_PASS if report.passes(args.tol) else EXIT_FAIL


def cmd_extract(args: argparse.Namespace) -> int:
    """Extract a certificate, verify it and optionally save it."""
    inst = load_instance(args.path)
    result = run_extraction(inst, args.tol, get_settings().rank_tol)
    dec = result.decomposition
    report = verify_decomposition(dec, inst, args.tol)
    if args.output:
        save_decomposition(dec, args.output)
        logger.info("Decomposition written to %s", args.output)

    summary = {
        "rank_L": dec.L.rank,
        "rank_M": dec.M.rank,
        "A": dec.A.matrix.tolist(),
        "condition_A": result.condition_number,
        "identity_residual": result.identity_residual,
        "norm_bound_slack": result.norm_bound_slack,
        "checks": {check.name: check.value for check in report.checks},
        "passed": report.passed,
    }
    print(format_report("EXTRACTION", summary, args.json))
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_hilbert(args: argparse.Namespace) -> int:
    """Split an instance with inner-product pairings into B + mu and (B*)^-1 + nu."""
    inst = load_instance(args.path)
    hd = hilbert_decompose(inst, args.tol)
    report = hd.verify(inst)
    summary = {
        "rank_F1": hd.F1.rank,
        "rank_F2": hd.F2.rank,
        "rank_F3": hd.F3.rank,
        "B": hd.b_matrix.tolist(),
        "residuals": report.model_dump(),
        "passed": report.passes(args.tol),
    }
    print(format_report("HILBERT DECOMPOSITION", summary, args.json))
    return EXIT_PASS if report.passes(args.tol) else EXIT_FAIL


def roundtrip_report(cfg: GenConfig, tol: float, rank_tol: float) -> dict[str, Any]:
    """Run gen, synthesize, extract, verify and re-synthesize for one configuration.

    Args:
        cfg: Generation parameters.
        tol: Pass threshold for every stage residual.
        rank_tol: Rank threshold for extraction.

    Returns:
        Per-stage residuals and an overall pass flag.

    Raises:
        ExtractionError: If extraction fails.
    """
    case = gen_case(cfg)
    inst = case.instance()
    result = run_extraction(inst, tol, rank_tol)
    dec = result.decomposition
    verification = verify_decomposition(dec, inst, tol)
    again = synthesize(dec, inst.f.inputs, inst.g.inputs)

    stages = {
        "synthesis_residual": residual(inst).max_abs_residual,
        "identity_residual": result.identity_residual,
        "norm_bound_slack": result.norm_bound_slack,
        "resynthesis_f": float(np.max(np.abs(again.f.outputs - inst.f.outputs))),
        "resynthesis_g": float(np.max(np.abs(again.g.outputs - inst.g.outputs))),
    }
    passed = verification.passed and all(value <= tol for value in stages.values())
    report: dict[str, Any] = {
        "config": cfg.model_dump(mode="json"),
        "rank_L": dec.L.rank,
        "rank_M": dec.M.rank,
        "stages": stages,
        "verification": {check.name: check.value for check in verification.checks},
    }
    if inst.e_pairing.is_positive_definite() and inst.f_pairing.is_positive_definite():
        hilbert = hilbert_decompose(inst, tol).verify(inst)
        report["hilbert"] = hilbert.model_dump()
        passed = passed and hilbert.passes(tol)
    report["passed"] = passed
    return report


def cmd_roundtrip(args: argparse.Namespace) -> int:
    cfg = gen_config_from_args(args)
    report = roundtrip_report(cfg, args.tol, get_settings().rank_tol)
    print(format_report("ROUND TRIP", report, args.json))
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = gen_config_from_args(args)
    document = dumps(instance_to_file(gen_case(cfg).instance()))
    if args.output:
        args.output.write_text(document, encoding="utf-8")
        if not args.quiet:
            print(f"Instance written to {args.output}")
    else:
        print(document, end="")
    return EXIT_PASS


COMMANDS = {
    "verify": cmd_verify,
    "extract": cmd_extract,
    "hilbert": cmd_hilbert,
    "roundtrip": cmd_roundtrip,
    "gen": cmd_gen,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the CLI.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:]).

    Returns:
        Exit code.
    """
    try:
        settings = get_settings()
    except ConfigurationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        args = build_parser(settings).parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INPUT_ERROR
    configure_logging(args, settings)

    try:
        return COMMANDS[args.command](args)
    except FileFormatError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValidationError as e:
        print(f"Error: invalid arguments: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ExtractionError as e:
        print(f"Extraction failed at stage {e.stage}: {e}", file=sys.stderr)
        return EXIT_PIPELINE_ERROR
    except OrthoEqError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_PIPELINE_ERROR
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
