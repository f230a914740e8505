"""Verification reports and reproducible input digests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

HOLDS = "holds"
HOLDS_WITH_TOLERANCE = "holds_with_tolerance"
VIOLATED = "violated"
HYPOTHESIS_FAILED = "hypothesis_failed"
PRECONDITION_FAILED = "precondition_failed"
NO_LIMIT = "no_limit"

PASSING = frozenset({HOLDS, HOLDS_WITH_TOLERANCE})

CSV_FIELDS = ("name", "lhs", "rhs", "margin", "tolerance", "verdict", "inputs_digest")


def verdict_for(margin: float, tolerance: float, two_sided: bool = False) -> str:
    """Verdict for ``lhs >= rhs`` (or ``lhs == rhs`` when ``two_sided``)."""
    if math.isnan(margin):
        return VIOLATED
    if two_sided:
        if abs(margin) <= tolerance:
            return HOLDS if margin == 0 else HOLDS_WITH_TOLERANCE
        return VIOLATED
    if margin >= 0:
        return HOLDS
    return HOLDS_WITH_TOLERANCE if margin >= -tolerance else VIOLATED


def jsonable(value):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if value is None or isinstance(value, str):
        return value
    return str(value)


def digest_inputs(*objects, **params) -> str:
    """SHA-256 over a canonical encoding of grid functions, sets and parameters."""
    h = hashlib.sha256()
    for obj in objects:
        _feed(h, obj)
    h.update(json.dumps(jsonable(params), sort_keys=True).encode())
    return h.hexdigest()


def _feed(h, obj):
    if obj is None:
        h.update(b"none")
    elif hasattr(obj, "grid") and hasattr(obj, "values"):
        h.update(b"gridfn")
        h.update(json.dumps([obj.grid.box.lo, obj.grid.box.hi, obj.grid.shape]).encode())
        h.update(np.ascontiguousarray(obj.values, dtype="<f8").tobytes())
    elif hasattr(obj, "pairs"):
        h.update(b"coef")
        h.update(np.ascontiguousarray(obj.pairs, dtype="<f8").tobytes())
    elif hasattr(obj, "points"):
        h.update(b"set")
        h.update(np.ascontiguousarray(obj.points, dtype="<f8").tobytes())
    elif hasattr(obj, "vertices"):
        h.update(b"poly")
        h.update(np.ascontiguousarray(obj.vertices, dtype="<f8").tobytes())
    else:
        h.update(json.dumps(jsonable(obj), sort_keys=True).encode())


@dataclass
class VerificationReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    verdict: str
    inputs_digest: str
    metadata: dict = field(default_factory=dict)
    # constructed objects (e.g. the sup-convolution h); never serialised
    artifacts: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return self.verdict in PASSING

    def to_dict(self) -> dict:
        return jsonable(
            {
                "name": self.name,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "margin": self.margin,
                "tolerance": self.tolerance,
                "verdict": self.verdict,
                "inputs_digest": self.inputs_digest,
                "metadata": self.metadata,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def csv_row(self) -> dict:
        d = self.to_dict()
        return {k: d[k] for k in CSV_FIELDS}


def reports_to_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fields})
    return buf.getvalue()
