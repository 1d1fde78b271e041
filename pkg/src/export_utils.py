import os
import csv
import json
import tempfile
from pathlib import Path

import numpy as np
from rich.console import Console
from rich.table import Table

from src.errors import InputFormatError
from src.operator_core import COMMUTATIVITY_TOL, OperatorTuple
from src.scalar_geometry import GammaPoint

console = Console()

SCHEMA_PREFIX = "gammakit"
SCHEMA_VERSION = 1


def schema(kind):
    """Versioned schema tag written into every document, e.g. gammakit.point/1"""
    return f"{SCHEMA_PREFIX}.{kind}/{SCHEMA_VERSION}"


# ---------------------------------------------------------------------------
# Complex numbers and matrices
# ---------------------------------------------------------------------------

def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(value, where="value"):
    if isinstance(value, bool):
        raise InputFormatError(f"{where}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise InputFormatError(f"{where}: expected a number or [re, im], got {value!r}")


def encode_matrix(matrix):
    return [[encode_complex(z) for z in row] for row in np.asarray(matrix)]


def decode_matrix(data, where="matrix"):
    if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
        raise InputFormatError(f"{where}: expected a list of rows")
    widths = {len(row) for row in data}
    if len(widths) > 1:
        raise InputFormatError(f"{where}: rows have different lengths")
    return np.array(
        [[decode_complex(z, f"{where}[{r}][{c}]") for c, z in enumerate(row)] for r, row in enumerate(data)],
        dtype=complex,
    ).reshape(len(data), widths.pop() if widths else 0)


def _check_fields(data, kind, required, optional=()):
    """Reject documents with missing or unknown fields or a foreign schema tag."""
    if not isinstance(data, dict):
        raise InputFormatError(f"{kind} document must be a JSON object")
    if "schema" in data and data["schema"] != schema(kind):
        raise InputFormatError(f"expected schema {schema(kind)!r}, got {data['schema']!r}")
    allowed = set(required) | set(optional) | {"schema"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise InputFormatError(f"unknown field(s) in {kind} document: {', '.join(unknown)}")
    missing = sorted(set(required) - set(data))
    if missing:
        raise InputFormatError(f"missing field(s) in {kind} document: {', '.join(missing)}")


# ---------------------------------------------------------------------------
# Points and tuples
# ---------------------------------------------------------------------------

def point_to_dict(point):
    return {
        "schema": schema("point"),
        "n": point.n,
        "s": [encode_complex(c) for c in point.s],
        "p": encode_complex(point.p),
    }


def point_from_dict(data):
    _check_fields(data, "point", required=("n", "s", "p"))
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise InputFormatError(f"n must be an integer, got {n!r}")
    if not isinstance(data["s"], list):
        raise InputFormatError("s must be a list")
    s = [decode_complex(c, f"s[{i}]") for i, c in enumerate(data["s"])]
    if len(s) != n - 1:
        raise InputFormatError(f"n = {n} needs {n - 1} s-coordinates, got {len(s)}")
    return GammaPoint(n=n, s=s, p=decode_complex(data["p"], "p"))


def tuple_to_dict(tup):
    return {
        "schema": schema("tuple"),
        "n": tup.n,
        "dim": tup.dim,
        "S": [encode_matrix(m) for m in tup.S],
        "P": encode_matrix(tup.P),
    }


def tuple_from_dict(data, commutativity_tol=COMMUTATIVITY_TOL):
    _check_fields(data, "tuple", required=("S", "P"), optional=("n", "dim"))
    if not isinstance(data["S"], list):
        raise InputFormatError("S must be a list of matrices")
    S = [decode_matrix(m, f"S[{i}]") for i, m in enumerate(data["S"])]
    P = decode_matrix(data["P"], "P")
    if "n" in data and data["n"] != len(S) + 1:
        raise InputFormatError(f"n = {data['n']} does not match {len(S) + 1} matrices")
    if "dim" in data and data["dim"] != P.shape[0]:
        raise InputFormatError(f"dim = {data['dim']} does not match P of size {P.shape[0]}")
    return OperatorTuple(n=len(S) + 1, S=S, P=P, commutativity_tol=commutativity_tol)


def load_json(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputFormatError(f"input file not found: {path}")
    except json.JSONDecodeError as e:
        raise InputFormatError(f"malformed JSON in {path}: {e}")


def read_point(path):
    return point_from_dict(load_json(path))


def read_tuple(path, commutativity_tol=COMMUTATIVITY_TOL):
    return tuple_from_dict(load_json(path), commutativity_tol)


# ---------------------------------------------------------------------------
# Result documents
# ---------------------------------------------------------------------------

def membership_to_dict(point, verdicts, costara=None):
    return {
        "schema": schema("membership"),
        "point": point_to_dict(point),
        "regions": {region: v.as_dict() for region, v in verdicts.items()},
        "costara_inside": costara,
    }


def certificate_to_dict(report):
    return {"schema": schema("certificate"), **report.as_dict()}


def decomposition_to_dict(result, verification=None):
    return {
        "schema": schema("decomposition"),
        "n": result.n,
        "dim": result.dim,
        "k": result.k,
        "tol": result.tol,
        "block_tol": result.block_tol,
        "basis_H1": encode_matrix(result.basis_H1),
        "basis_H2": encode_matrix(result.basis_H2),
        "unitary_part": tuple_to_dict(result.unitary_part),
        "cnu_part": tuple_to_dict(result.cnu_part),
        "residuals": result.residuals,
        "certificate_verdict": result.certificate.verdict.value if result.certificate else None,
        "verification": verification.as_dict() if verification is not None else None,
    }


def ground_truth_to_dict(instance):
    return {"schema": schema("ground_truth"), "spec": instance.spec.as_dict(), **instance.ground_truth}


def candidates_to_dict(candidates, n, budget, seed):
    return {
        "schema": schema("explore"),
        "n": n,
        "budget": budget,
        "seed": seed,
        "candidates": [c.as_dict() for c in candidates],
    }


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return encode_complex(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _atomic_write(path, write):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', newline='', encoding='utf-8') as f:
            write(f)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def dumps_json(document):
    return json.dumps(document, indent=2, ensure_ascii=False, default=_json_default)


def write_json_atomic(path, document):
    """Write a JSON document through a temp file in the target directory, then rename."""
    return _atomic_write(path, lambda f: f.write(dumps_json(document) + "\n"))


def write_csv_atomic(path, kind, header, rows):
    """CSV with a leading schema column; minimal quoting."""
    tag = schema(kind)

    def write(f):
        writer = csv.writer(f, delimiter=',', quoting=csv.QUOTE_MINIMAL, quotechar='"', doublequote=True)
        writer.writerow(["schema", *header])
        for row in rows:
            writer.writerow([tag, *("" if v is None else v for v in row)])

    return _atomic_write(path, write)


def resolve_output_path(path, output_dir):
    """Bare file names go to the output directory; anything with a directory part is kept."""
    path = Path(path)
    if path.parent == Path('.') and not path.is_absolute():
        return Path(output_dir) / path
    return path


SCAN_HEADER = ["i", "re_alpha", "im_alpha", "phi_value", "modulus_lhs", "modulus_rhs"]


def scan_rows(report):
    return list(report.rows())


# ---------------------------------------------------------------------------
# Rich tables
# ---------------------------------------------------------------------------

def _status(ok):
    return "✅" if ok else "❌"


def render_membership_table(point, verdicts, costara=None):
    table = Table(title=f"📍 Membership of {point!r}", expand=True, show_lines=True)
    for column in ("Region", "Inside", "Max |root|", "Min |root|", "Margin"):
        table.add_column(column, overflow="fold")
    for region, v in verdicts.items():
        table.add_row(region, _status(v.inside), f"{v.max_root_modulus:.12g}", f"{v.min_root_modulus:.12g}", f"{v.margin:.3e}")
    console.print(table)
    if costara is not None:
        console.print(f"{_status(costara)} Costara recursion agrees: inside = {costara}", style="bold blue")


def render_certificate_table(report):
    table = Table(title=f"🔎 Certificate: {report.verdict.value}", expand=True, show_lines=True)
    table.add_column("Check", overflow="fold")
    table.add_column("Status", overflow="fold")
    for check in ("commutativity", "norm_bounds", "joint_spectrum", "pencil_positivity", "von_neumann"):
        if check in report.passed_checks:
            status = "✅ passed"
        elif check == report.failed_check:
            status = "❌ failed"
        else:
            status = "⏭️ not run"
        table.add_row(check, status)
    console.print(table)


def render_decomposition_table(result, verification=None):
    table = Table(
        title=f"🧩 Decomposition: dim H1 = {result.k}, dim H2 = {result.dim - result.k}",
        expand=True,
        show_lines=True,
    )
    for column in ("Matrix", "||Q1* M Q2||", "||Q2* M Q1||", "1 + ||M||"):
        table.add_column(column, overflow="fold")
    for name, r in result.residuals.items():
        table.add_row(name, f"{r['upper']:.3e}", f"{r['lower']:.3e}", f"{r['scale']:.6g}")
    console.print(table)

    if verification is not None:
        checks = Table(title="Verification", expand=True, show_lines=True)
        for column in ("Check", "Passed", "Value", "Margin"):
            checks.add_column(column, overflow="fold")
        for name, c in verification.checks.items():
            checks.add_row(name, _status(c.passed), f"{c.value:.3e}", f"{c.margin:.3e}")
        console.print(checks)


def render_scan_summary(report):
    table = Table(title=f"📈 {report.kind.capitalize()} pencil scan ({report.alphas.shape[0]} samples)", expand=True, show_lines=True)
    for column in ("i", "Minimum", "Certified"):
        table.add_column(column, overflow="fold")
    certified = set(report.certified_indices)
    for i, value in report.index_minima().items():
        table.add_row(str(i), f"{value:.6e}", "yes" if i in certified else "no")
    console.print(table)


def render_candidates_table(candidates):
    if not candidates:
        console.print("✅ No candidates: pencil positivity and membership agreed on every sample.", style="bold green")
        return
    table = Table(title=f"⚠️ {len(candidates)} candidate(s)", expand=True, show_lines=True)
    for column in ("Point", "Max |root|", "Pencil min", "Dense pencil min"):
        table.add_column(column, overflow="fold")
    for c in candidates:
        table.add_row(repr(c.point), f"{c.membership.max_root_modulus:.9g}", f"{c.pencil_minimum:.3e}", f"{c.dense_pencil_minimum:.3e}")
    console.print(table)
