"""Reading and writing systems, reports and contour grids.

A system on disk is a directory holding Matrix Market files and a manifest
``system.txt`` of ``key = value`` lines::

    # comments start with '#'
    name = cd_player
    A = A.mtx
    B = B.mtx
    epsilon = 0.01
    mode = abscissa

Paths are relative to the manifest.  Missing ``B``, ``C`` and ``E`` default to
the identity and a missing ``D`` to zero.
"""
from __future__ import annotations

import json
import math
import platform
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy

from .errors import DimensionMismatch, ParseError
from .solvers import SolveReport
from .system import MODES, StateSpaceSystem

MANIFEST = "system.txt"
MATRIX_KEYS = ("A", "B", "C", "D", "E")
REPORT_FORMAT = "specvalset-report"
REPORT_VERSION = 1

_FORMATS = ("coordinate", "array")
_FIELDS = ("real", "complex", "integer", "pattern")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


class LoadedSystem(NamedTuple):
    system: StateSpaceSystem
    epsilon: float | None
    mode: str | None


def _tokens(line):
    """Split a line into ``(column, token)`` pairs with 1-based columns."""
    out = []
    col = 0
    for part in line.split():
        col = line.index(part, col)
        out.append((col + 1, part))
        col += len(part)
    return out


def _number(tok, kind, path, lineno, col):
    try:
        return int(tok) if kind == "int" else float(tok)
    except ValueError:
        raise ParseError(f"expected {'an integer' if kind == 'int' else 'a number'}, "
                         f"got {tok!r}", path, lineno, col) from None


def read_matrix_market(path) -> np.ndarray:
    """Read a dense or coordinate Matrix Market file into a 2-D array.

    Integer and real fields give float arrays, complex fields complex ones.
    Symmetric, skew-symmetric and Hermitian storage is expanded.
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read matrix file: {exc.strerror}", path) from exc
    if not lines:
        raise ParseError("empty file", path, 1, 1)
    head = _tokens(lines[0])
    if len(head) != 5 or head[0][1].lower() != "%%matrixmarket" or head[1][1].lower() != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
                         path, 1, 1)
    fmt, fld, sym = (t.lower() for _, t in head[2:])
    for (col, _), value, allowed in zip(head[2:], (fmt, fld, sym),
                                        (_FORMATS, _FIELDS, _SYMMETRIES)):
        if value not in allowed:
            raise ParseError(f"unsupported qualifier {value!r}", path, 1, col)
    if fmt == "array" and fld == "pattern":
        raise ParseError("pattern field needs coordinate format", path, 1, head[3][0])

    body = [(k + 1, _tokens(line)) for k, line in enumerate(lines[1:], start=1)
            if line.strip() and not line.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", path, len(lines), 1)
    lineno, size = body[0]
    want = 3 if fmt == "coordinate" else 2
    if len(size) != want:
        raise ParseError(f"size line needs {want} integers", path, lineno,
                         size[min(len(size), want) - 1][0] if size else 1)
    dims = [_number(t, "int", path, lineno, c) for c, t in size]
    rows, cols = dims[0], dims[1]
    if rows < 0 or cols < 0:
        raise ParseError("negative dimension", path, lineno, size[0][0])

    is_complex = fld == "complex"
    per_value = 2 if is_complex else (0 if fld == "pattern" else 1)
    M = np.zeros((rows, cols), dtype=complex if is_complex else float)
    entries = body[1:]

    def value(toks, lineno, offset):
        if fld == "pattern":
            return 1.0
        if len(toks) != offset + per_value:
            col = toks[-1][0] if toks else 1
            raise ParseError(f"expected {offset + per_value} fields, got {len(toks)}",
                             path, lineno, col)
        vals = [_number(t, "float", path, lineno, c) for c, t in toks[offset:]]
        return complex(vals[0], vals[1]) if is_complex else vals[0]

    def put(i, j, v):
        M[i, j] = v
        if i != j:
            if sym == "symmetric":
                M[j, i] = v
            elif sym == "skew-symmetric":
                M[j, i] = -v
            elif sym == "hermitian":
                M[j, i] = np.conj(v)

    if fmt == "coordinate":
        nnz = dims[2]
        if len(entries) != nnz:
            where = entries[-1][0] if entries else lineno
            raise ParseError(f"expected {nnz} entries, found {len(entries)}", path, where, 1)
        for lineno, toks in entries:
            if len(toks) < 2:
                raise ParseError("entry needs a row and a column index", path, lineno,
                                 toks[0][0] if toks else 1)
            i = _number(toks[0][1], "int", path, lineno, toks[0][0])
            j = _number(toks[1][1], "int", path, lineno, toks[1][0])
            if not (1 <= i <= rows):
                raise ParseError(f"row index {i} out of range", path, lineno, toks[0][0])
            if not (1 <= j <= cols):
                raise ParseError(f"column index {j} out of range", path, lineno, toks[1][0])
            put(i - 1, j - 1, value(toks, lineno, 2))
    else:
        if sym == "general":
            slots = [(i, j) for j in range(cols) for i in range(rows)]
        else:
            if rows != cols:
                raise ParseError("symmetric storage needs a square matrix", path, lineno, 1)
            first = 0 if sym != "skew-symmetric" else 1
            slots = [(i, j) for j in range(cols) for i in range(j + first, rows)]
        if len(entries) != len(slots):
            where = entries[-1][0] if entries else lineno
            raise ParseError(f"expected {len(slots)} values, found {len(entries)}",
                             path, where, 1)
        for (i, j), (lineno, toks) in zip(slots, entries):
            put(i, j, value(toks, lineno, 0))
    return M


def write_matrix_market(path, M) -> None:
    """Write ``M`` in dense array format; values round-trip exactly."""
    M = np.atleast_2d(np.asarray(M))
    is_complex = np.iscomplexobj(M) and np.any(M.imag)
    field = "complex" if is_complex else "real"
    out = [f"%%MatrixMarket matrix array {field} general", f"{M.shape[0]} {M.shape[1]}"]
    for j in range(M.shape[1]):
        for i in range(M.shape[0]):
            v = complex(M[i, j])
            out.append(f"{v.real!r} {v.imag!r}" if is_complex else repr(v.real))
    Path(path).write_text("\n".join(out) + "\n")


def _read_manifest(path):
    entries = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", path, lineno,
                             len(raw) - len(raw.lstrip()) + 1)
        key, value = line.split("=", 1)
        key_col = len(key) - len(key.lstrip()) + 1
        key = key.strip()
        value_col = len(line) - len(value.lstrip()) + 1
        value = value.strip()
        if key not in MATRIX_KEYS + ("epsilon", "mode", "name"):
            raise ParseError(f"unknown key {key!r}", path, lineno, key_col)
        if key in entries:
            raise ParseError(f"duplicate key {key!r}", path, lineno, key_col)
        if not value:
            raise ParseError(f"missing value for {key!r}", path, lineno, value_col)
        entries[key] = (value, lineno, value_col)
    return entries


def load_system(path) -> LoadedSystem:
    """Load a system from a directory (or its manifest file)."""
    path = Path(path)
    if path.is_dir():
        manifest = path / MANIFEST
        if manifest.exists():
            entries = _read_manifest(manifest)
        else:
            entries = {k: (f"{k}.mtx", None, None) for k in MATRIX_KEYS
                       if (path / f"{k}.mtx").exists()}
            manifest = path / MANIFEST
    elif path.exists():
        manifest = path
        entries = _read_manifest(manifest)
    else:
        raise ParseError("no such file or directory", path)
    if "A" not in entries:
        raise ParseError("the manifest does not name a matrix A", manifest)
    base = manifest.parent
    mats = {k: read_matrix_market(base / entries[k][0]) for k in MATRIX_KEYS if k in entries}
    epsilon = mode = None
    if "epsilon" in entries:
        value, lineno, col = entries["epsilon"]
        epsilon = _number(value, "float", manifest, lineno, col)
    if "mode" in entries:
        mode, lineno, col = entries["mode"]
        if mode not in MODES:
            raise ParseError(f"mode must be one of {MODES}", manifest, lineno, col)
    name = entries["name"][0] if "name" in entries else base.name
    try:
        system = StateSpaceSystem.from_matrices(mats["A"], mats.get("B"), mats.get("C"),
                                                mats.get("D"), mats.get("E"), name=name)
    except DimensionMismatch as exc:
        raise DimensionMismatch(f"{manifest}: {exc}") from None
    return LoadedSystem(system, epsilon, mode)


def save_system(path, system: StateSpaceSystem, epsilon: float | None = None,
                mode: str | None = None) -> Path:
    """Write ``system`` as a directory of Matrix Market files plus a manifest."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    lines = []
    if system.name:
        lines.append(f"name = {system.name}")
    for key in MATRIX_KEYS:
        write_matrix_market(path / f"{key}.mtx", getattr(system, key))
        lines.append(f"{key} = {key}.mtx")
    if epsilon is not None:
        lines.append(f"epsilon = {float(epsilon)!r}")
    if mode is not None:
        lines.append(f"mode = {mode}")
    (path / MANIFEST).write_text("\n".join(lines) + "\n")
    return path


def report_document(report: SolveReport, wall_time: float | None = None) -> dict:
    """JSON-ready document holding a report plus environment details."""
    return {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "report": report.to_dict(),
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "wall_time": wall_time,
        },
    }


def dumps_report(report: SolveReport, wall_time: float | None = None) -> str:
    return json.dumps(report_document(report, wall_time), indent=2, sort_keys=True) + "\n"


def write_report(path, report: SolveReport, wall_time: float | None = None) -> None:
    Path(path).write_text(dumps_report(report, wall_time))


def read_report(path) -> SolveReport:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != REPORT_FORMAT:
        raise ParseError("not a report document", path)
    return SolveReport.from_dict(doc["report"])


def _fmt(v):
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def emit_contour(ev, grid, window, epsilon: float, out) -> int:
    """Write ``x,y,norm`` rows of ``||G||`` on a grid as CSV.

    ``grid`` is ``(nx, ny)`` and ``window`` is ``(x0, x1, y0, y1)``.  The first
    line records the level ``1/epsilon``.  Poles are written as ``inf`` and
    failed evaluations as ``nan``; the number of failures is returned.
    """
    nx, ny = grid
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    failures = 0
    out.write(f"# level={_fmt(1.0 / epsilon)}\n")
    out.write("x,y,norm\n")
    for y in ys:
        for x in xs:
            try:
                value = ev.norm(complex(x, y))
            except (ArithmeticError, ValueError):
                value = math.nan
            if math.isnan(value):
                failures += 1
            out.write(f"{_fmt(x)},{_fmt(y)},{_fmt(value)}\n")
    return failures
