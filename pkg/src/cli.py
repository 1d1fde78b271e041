"""
Batch command line: membership checks, certification, decomposition, pencil
scans, region slices, instance generation and the pencil-converse explorer.

Exit codes: 0 pass, 2 mathematical failure, 3 numerical failure, 4 usage or
input error.
"""

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from rich.logging import RichHandler
from rich.progress import Progress

from src import export_utils
from src.config import check_config_with_friendly_error, console, get_settings
from src.decomposition import canonical_decompose, verify_decomposition
from src.errors import (
    GammaKitError,
    InputFormatError,
    InvalidArgumentError,
    NotAContractionError,
    NotAGammaContractionError,
    NumericalFailureError,
    TheoremViolationError,
    ConfigurationError,
)
from src.generators import MODELS, GeneratorSpec, explore_pencil_converse, generate
from src.operator_core import Verdict, certify_gamma_contraction, pencil_min_eig_scan
from src.scalar_geometry import (
    AlphaGrid,
    GammaPoint,
    costara_membership,
    membership,
    membership_report,
    scalar_pencil_scan,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MATH_FAILURE = 2
EXIT_NUMERICAL_FAILURE = 3
EXIT_USAGE = 4


class GammaKitArgumentParser(argparse.ArgumentParser):
    """Usage errors become InputFormatError so they share exit code 4."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputFormatError(message)


@dataclass
class CommandConfig:
    subcommand: str
    input: Optional[str]
    output: Optional[str]
    format: str
    tol: float
    seed: int
    grid: Dict[str, Any]
    threads: int
    options: Dict[str, Any] = field(default_factory=dict)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (TheoremViolationError, NotAContractionError, NotAGammaContractionError)):
        return EXIT_MATH_FAILURE
    if isinstance(error, NumericalFailureError):
        return EXIT_NUMERICAL_FAILURE
    if isinstance(error, (InputFormatError, InvalidArgumentError, ConfigurationError)):
        return EXIT_USAGE
    return EXIT_NUMERICAL_FAILURE


def parse_complex(text: str) -> complex:
    """Accept 'a+bj', 'a' or 're,im'."""
    try:
        if "," in text:
            re_part, im_part = text.split(",")
            return complex(float(re_part), float(im_part))
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = GammaKitArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="Output file; bare names go to GAMMAKIT_OUTPUT_DIR")
    common.add_argument("--tol", type=float, help="Membership / kernel tolerance (default GAMMAKIT_TOL)")
    common.add_argument("--seed", type=int, help="Random seed (default GAMMAKIT_SEED)")
    common.add_argument("--grid-radii", type=_positive_int, default=8, help="Number of alpha rings inside the disc")
    common.add_argument("--grid-angles", type=_positive_int, default=256, help="Angles per ring (the unit circle gets 4x)")

    parser = GammaKitArgumentParser(
        prog="gammakit",
        description="Numerical toolkit for the symmetrized polydisc and its operator tuples.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    sub = subparsers.add_parser("check-point", parents=[common], help="Membership of a point in the closed set, open set and distinguished boundary")
    sub.add_argument("--input", "-i", required=True)
    sub.add_argument("--format", choices=("json", "csv", "table"), default="table")

    sub = subparsers.add_parser("certify", parents=[common], help="Layered Gamma_n-contraction certificate of a matrix tuple")
    sub.add_argument("--input", "-i", required=True)
    sub.add_argument("--format", choices=("json", "table"), default="table")
    sub.add_argument("--vn-trials", type=int, default=8, help="Random polynomials for the von Neumann falsifier")

    sub = subparsers.add_parser("decompose", parents=[common], help="Canonical decomposition into unitary and cnu parts")
    sub.add_argument("--input", "-i", required=True)
    sub.add_argument("--format", choices=("json", "table"), default="table")
    sub.add_argument("--block-tol", type=float, default=1e-8, help="Relative bound on off-diagonal block residuals")
    sub.add_argument("--no-precheck", action="store_true", help="Skip the certificate before decomposing")
    sub.add_argument("--vn-trials", type=int, default=8)

    sub = subparsers.add_parser("pencil-scan", parents=[common], help="Pencil values or minimum eigenvalues over the alpha grid")
    sub.add_argument("--input", "-i", required=True, help="Point or tuple JSON")
    sub.add_argument("--format", choices=("json", "csv", "table"), default="csv")

    sub = subparsers.add_parser("region-slice", parents=[common], help="Plot-ready membership grid over the s1-plane")
    sub.add_argument("--n", type=int, default=2)
    sub.add_argument("--fixed-p", type=parse_complex, default=0j)
    sub.add_argument("--fixed-s2", type=parse_complex, default=None, help="Required for n = 3")
    sub.add_argument("--extent", type=float, default=None, help="Half-width of the s1 window (default n + 0.5)")
    sub.add_argument("--resolution", type=_positive_int, default=81, help="Grid points per axis")
    sub.add_argument("--format", choices=("json", "csv", "table"), default="csv")

    sub = subparsers.add_parser("generate", parents=[common], help="Seeded instance with a ground-truth sidecar")
    sub.add_argument("--model", choices=MODELS, required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--dim", type=int, required=True)
    sub.add_argument("--format", choices=("json",), default="json")

    sub = subparsers.add_parser("explore", parents=[common], help="Search points outside Gamma_n with non-negative scalar pencils")
    sub.add_argument("--n", type=int, default=4)
    sub.add_argument("--budget", type=int, default=1000)
    sub.add_argument("--format", choices=("json", "table"), default="table")

    return parser


def setup_logging(level: str):
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
        force=True,
    )


def build_command_config(args: argparse.Namespace) -> CommandConfig:
    settings = get_settings()
    grid = AlphaGrid.uniform(args.grid_radii, args.grid_angles)
    options = {
        key: (str(value) if isinstance(value, complex) else value)
        for key, value in vars(args).items()
        if key not in ("subcommand", "input", "output", "format", "tol", "seed", "grid_radii", "grid_angles")
    }
    return CommandConfig(
        subcommand=args.subcommand,
        input=getattr(args, "input", None),
        output=args.output,
        format=args.format,
        tol=args.tol if args.tol is not None else settings.tol,
        seed=args.seed if args.seed is not None else settings.seed,
        grid=grid.as_dict(),
        threads=settings.threads,
        options=options,
    )


def _grid(config: CommandConfig) -> AlphaGrid:
    return AlphaGrid(
        radii=tuple(config.grid["radii"]),
        angles_per_ring=config.grid["angles_per_ring"],
        boundary_angles=config.grid["boundary_angles"],
    )


def _output_path(config: CommandConfig) -> Optional[Path]:
    if not config.output:
        return None
    return export_utils.resolve_output_path(config.output, get_settings().output_dir)


def _emit_json(config: CommandConfig, document: Dict):
    path = _output_path(config)
    if path is None:
        print(export_utils.dumps_json(document))
        return
    export_utils.write_json_atomic(path, document)
    console.print(f"✅ Wrote {path}", style="bold green")


def _emit_csv(config: CommandConfig, kind: str, header, rows):
    path = _output_path(config)
    if path is None:
        writer = csv.writer(sys.stdout, delimiter=',', quoting=csv.QUOTE_MINIMAL)
        tag = export_utils.schema(kind)
        writer.writerow(["schema", *header])
        for row in rows:
            writer.writerow([tag, *("" if v is None else v for v in row)])
        return
    export_utils.write_csv_atomic(path, kind, header, rows)
    console.print(f"✅ Wrote {path}", style="bold green")


def _read_document(path: str):
    """A point or a tuple document, told apart by its fields."""
    data = export_utils.load_json(path)
    if isinstance(data, dict) and "p" in data and "S" not in data:
        return export_utils.point_from_dict(data)
    if isinstance(data, dict) and "P" in data:
        return export_utils.tuple_from_dict(data)
    raise InputFormatError(f"{path} is neither a point nor a tuple document")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_check_point(config: CommandConfig) -> int:
    point = export_utils.read_point(config.input)
    verdicts = membership_report(point, config.tol)
    costara = costara_membership(point, config.tol) if abs(point.p) < 1.0 else None
    if costara is not None and costara != verdicts["closed"].inside:
        logger.warning("Costara recursion disagrees with the root test (margin %.3e)", verdicts["closed"].margin)

    if config.format == "table":
        export_utils.render_membership_table(point, verdicts, costara)
    elif config.format == "csv":
        rows = [(r, v.inside, v.max_root_modulus, v.min_root_modulus, v.margin) for r, v in verdicts.items()]
        _emit_csv(config, "membership", ["region", "inside", "max_root_modulus", "min_root_modulus", "margin"], rows)
    else:
        _emit_json(config, export_utils.membership_to_dict(point, verdicts, costara))

    return EXIT_OK if verdicts["closed"].inside else EXIT_MATH_FAILURE


def cmd_certify(config: CommandConfig) -> int:
    # The certificate reports non-commuting input itself.
    tup = export_utils.read_tuple(config.input, commutativity_tol=np.inf)
    report = certify_gamma_contraction(
        tup, grid=_grid(config), vn_trials=config.options["vn_trials"], tol=config.tol, seed=config.seed
    )
    if config.format == "table":
        export_utils.render_certificate_table(report)
    if config.format == "json" or config.output:
        _emit_json(config, export_utils.certificate_to_dict(report))
    return EXIT_MATH_FAILURE if report.verdict is Verdict.FAILED else EXIT_OK


def cmd_decompose(config: CommandConfig) -> int:
    tup = export_utils.read_tuple(config.input)
    try:
        result = canonical_decompose(
            tup,
            tol=config.tol,
            block_tol=config.options["block_tol"],
            precheck=not config.options["no_precheck"],
            grid=_grid(config),
            vn_trials=config.options["vn_trials"],
            seed=config.seed,
        )
    except TheoremViolationError as e:
        if config.output:
            _emit_json(config, {"schema": export_utils.schema("diagnostics"), "error": str(e), **e.diagnostics})
        raise

    verification = verify_decomposition(tup, result, config.options["block_tol"])
    if config.format == "table":
        export_utils.render_decomposition_table(result, verification)
    if config.format == "json" or config.output:
        _emit_json(config, export_utils.decomposition_to_dict(result, verification))

    if not verification.passed:
        console.print(f"❌ Verification failed: {', '.join(verification.failed_checks())}", style="bold red")
        return EXIT_MATH_FAILURE
    return EXIT_OK


def cmd_pencil_scan(config: CommandConfig) -> int:
    subject = _read_document(config.input)
    grid = _grid(config)
    if isinstance(subject, GammaPoint):
        report = scalar_pencil_scan(subject, grid)
    else:
        report = pencil_min_eig_scan(subject, grid, threads=config.threads)

    if config.format == "table":
        export_utils.render_scan_summary(report)
    elif config.format == "json":
        _emit_json(config, {"schema": export_utils.schema("pencil_scan"), **report.as_dict()})
    else:
        _emit_csv(config, "pencil_scan", export_utils.SCAN_HEADER, export_utils.scan_rows(report))
    return EXIT_OK


def region_slice_rows(n, fixed_p, fixed_s2, extent, resolution, grid, tol, progress=None):
    """(re s1, im s1, member, min pencil value) over a square window of the s1-plane."""
    if n not in (2, 3):
        raise InvalidArgumentError(f"region slices support n = 2 or 3, got {n}")
    if n == 3 and fixed_s2 is None:
        raise InvalidArgumentError("n = 3 slices need --fixed-s2")
    axis = np.linspace(-extent, extent, resolution)
    rows = []
    for im in axis:
        for re in axis:
            s1 = complex(re, im)
            coords = [s1, fixed_p] if n == 2 else [s1, fixed_s2, fixed_p]
            point = GammaPoint.from_coordinates(coords)
            inside = membership(point, "closed", tol).inside
            rows.append((float(re), float(im), inside, scalar_pencil_scan(point, grid).minimum))
        if progress is not None:
            progress()
    return rows


def cmd_region_slice(config: CommandConfig) -> int:
    n = config.options["n"]
    extent = config.options["extent"] if config.options["extent"] is not None else n + 0.5
    resolution = config.options["resolution"]
    fixed_p = parse_complex(config.options["fixed_p"])
    fixed_s2 = parse_complex(config.options["fixed_s2"]) if config.options["fixed_s2"] is not None else None

    with Progress(console=console, transient=True) as progress:
        task = progress.add_task("Slicing", total=resolution)
        rows = region_slice_rows(
            n, fixed_p, fixed_s2, extent, resolution, _grid(config), config.tol,
            progress=lambda: progress.update(task, advance=1),
        )

    header = ["s1_re", "s1_im", "member", "min_pencil"]
    if config.format == "json":
        _emit_json(config, {
            "schema": export_utils.schema("region_slice"),
            "n": n,
            "fixed_p": export_utils.encode_complex(fixed_p),
            "fixed_s2": export_utils.encode_complex(fixed_s2) if fixed_s2 is not None else None,
            "rows": [dict(zip(header, row)) for row in rows],
        })
    elif config.format == "table":
        inside = sum(1 for row in rows if row[2])
        console.print(f"📊 {inside} of {len(rows)} grid points lie in Gamma_{n}", style="bold blue")
    else:
        _emit_csv(config, "region_slice", header, rows)
    return EXIT_OK


def cmd_generate(config: CommandConfig) -> int:
    opts = config.options
    spec = GeneratorSpec(seed=config.seed, n=opts["n"], dim=opts["dim"], model=opts["model"])
    instance = generate(spec)

    name = config.output or f"{spec.model}_n{spec.n}_d{spec.dim}_s{spec.seed}.json"
    path = export_utils.resolve_output_path(name, get_settings().output_dir)
    sidecar = path.with_name(f"{path.stem}.truth.json")
    export_utils.write_json_atomic(path, export_utils.tuple_to_dict(instance.tuple))
    export_utils.write_json_atomic(sidecar, export_utils.ground_truth_to_dict(instance))
    console.print(f"✅ Wrote {path} and {sidecar}", style="bold green")
    return EXIT_OK


def cmd_explore(config: CommandConfig) -> int:
    n, budget = config.options["n"], config.options["budget"]
    if budget < 1:
        raise InvalidArgumentError(f"budget must be at least 1, got {budget}")
    rng = np.random.default_rng(config.seed)

    with Progress(console=console, transient=True) as progress:
        task = progress.add_task("Exploring", total=budget)
        candidates = explore_pencil_converse(
            n, budget, rng, _grid(config), config.tol,
            on_sample=lambda: progress.update(task, advance=1),
        )

    if config.format == "table":
        export_utils.render_candidates_table(candidates)
    if config.format == "json" or config.output:
        _emit_json(config, export_utils.candidates_to_dict(candidates, n, budget, config.seed))
    return EXIT_OK


COMMANDS = {
    "check-point": cmd_check_point,
    "certify": cmd_certify,
    "decompose": cmd_decompose,
    "pencil-scan": cmd_pencil_scan,
    "region-slice": cmd_region_slice,
    "generate": cmd_generate,
    "explore": cmd_explore,
}


def main(argv=None) -> int:
    try:
        if not check_config_with_friendly_error():
            return EXIT_USAGE
        settings = get_settings()
        setup_logging(settings.log_level)

        args = build_parser().parse_args(argv)
        config = build_command_config(args)
        logger.info("effective configuration: %s", json.dumps(asdict(config), default=str))
        return COMMANDS[config.subcommand](config)

    except GammaKitError as e:
        code = exit_code_for(e)
        icon = "⚠️" if code == EXIT_USAGE else "❌"
        console.print(f"{icon} {type(e).__name__}: {e}", style="bold red")
        return code
