"""Text formats for grid functions, point sets, support tables and run configs.

Grid function file::

    {"box": {"lo": [0.0], "hi": [1.0]}, "shape": [5], "s": 1.0}
    0.0
    0.5
    ...

The first line is a JSON header; node values follow one per line in
row-major order.  Blank lines and lines starting with ``#`` are ignored
everywhere.  Point sets are CSV (one point per row) or JSON
``{"dim": n, "points": [[...], ...]}``.  Parse errors name the file and
line.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .functions import GridFunction
from .numerics import Box, Grid
from .sets import DiscreteSet, SupportTable


def _content_lines(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read ({exc.strerror})") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _float(path, lineno, token) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigurationError(f"{path}:{lineno}: expected a number, got {token!r}") from None


def read_grid_function(path) -> GridFunction:
    lines = list(_content_lines(path))
    if not lines:
        raise ConfigurationError(f"{path}:1: empty grid function file")
    lineno, header_line = lines[0]
    try:
        header = json.loads(header_line)
        box = Box(header["box"]["lo"], header["box"]["hi"])
        grid = Grid(box, tuple(header["shape"]))
        s = header.get("s")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path}:{lineno}: bad header ({exc})") from None
    values = [_float(path, n, line) for n, line in lines[1:]]
    if len(values) != grid.size:
        where = lines[-1][0] if len(lines) > 1 else lineno
        raise ConfigurationError(f"{path}:{where}: expected {grid.size} values for shape {grid.shape}, got {len(values)}")
    for (n, _), v in zip(lines[1:], values):
        if not np.isfinite(v) or v < 0:
            raise ConfigurationError(f"{path}:{n}: values must be finite and nonnegative, got {v}")
    return GridFunction(grid, np.array(values), None if s is None else float(s))


def write_grid_function(path, f: GridFunction):
    header = {"box": {"lo": list(f.box.lo), "hi": list(f.box.hi)}, "shape": list(f.grid.shape)}
    if f.s is not None:
        header["s"] = f.s
    body = "\n".join(repr(float(v)) for v in f.values.ravel())
    Path(path).write_text(json.dumps(header) + "\n" + body + "\n")


def read_point_set(path) -> DiscreteSet:
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(path.read_text())
            pts = np.asarray(data["points"], dtype=float)
            dim = int(data.get("dim", pts.shape[-1]))
        except OSError as exc:
            raise ConfigurationError(f"{path}: cannot read ({exc.strerror})") from exc
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"{path}:1: bad point-set JSON ({exc})") from None
        if pts.ndim != 2 or pts.shape[1] != dim or len(pts) == 0:
            raise ConfigurationError(f"{path}:1: points must be a nonempty list of {dim}-vectors")
        return DiscreteSet(pts)
    rows, dim = [], None
    for lineno, line in _content_lines(path):
        row = [_float(path, lineno, tok.strip()) for tok in next(csv.reader([line]))]
        if dim is None:
            dim = len(row)
        elif len(row) != dim:
            raise ConfigurationError(f"{path}:{lineno}: expected {dim} coordinates, got {len(row)}")
        rows.append(row)
    if not rows:
        raise ConfigurationError(f"{path}:1: no points")
    return DiscreteSet(np.array(rows))


def write_point_set(path, A: DiscreteSet):
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps({"dim": A.dim, "points": A.points.tolist()}) + "\n")
    else:
        path.write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in A.points))


def read_support_table(path) -> SupportTable:
    """CSV rows ``u_1, ..., u_n, h(u)``."""
    rows = []
    for lineno, line in _content_lines(path):
        row = [_float(path, lineno, tok.strip()) for tok in next(csv.reader([line]))]
        if len(row) < 2 or (rows and len(row) != len(rows[0])):
            raise ConfigurationError(f"{path}:{lineno}: malformed support-table row")
        rows.append(row)
    if not rows:
        raise ConfigurationError(f"{path}:1: empty support table")
    arr = np.array(rows)
    return SupportTable(arr[:, :-1], arr[:, -1])


def write_support_table(path, table: SupportTable):
    Path(path).write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in table.as_rows()))


def profile_csv(f: GridFunction) -> str:
    """Per-node CSV (``x0, ..., value``) for plotting."""
    header = ",".join([f"x{i}" for i in range(f.dim)] + ["value"])
    rows = np.column_stack([f.grid.nodes(), f.values.ravel()])
    return header + "\n" + "".join(",".join(repr(float(v)) for v in row) + "\n" for row in rows)


def read_config(path) -> dict:
    """Flat ``key = value`` file; keys are normalised to snake_case."""
    out = {}
    for lineno, line in _content_lines(path):
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{path}:{lineno}: empty key")
        out[key.replace("-", "_")] = (value, lineno)
    return out
