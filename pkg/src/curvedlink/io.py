"""Curve files, object references and reports.

Curve files are JSON documents::

    {"space": "s3", "name": "trefoil", "points": [[...], ...],
     "velocity": [[...], ...], "framing": [[...], ...]}

``velocity`` and ``framing`` are optional; without ``velocity`` the curve is
differentiated spectrally.  Points must lie on the manifold within
``LOAD_TOL`` and are then reprojected.

References name objects without files: ``canonical:clifford_torus_knot?p=2&q=3``
for curves and ``registry:left_invariant?a=1`` for fields.  A bare path is read
as a curve file.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from urllib.parse import parse_qsl, urlsplit

import jsonschema
import numpy as np

from .curves import ClosedCurve, Framing, canonical_curve, curve_from_points, make_framing
from .errors import NotOnManifold, SchemaError
from .fields import field_from_name, scalar_from_name
from .space import SpaceTag, geometry

LOAD_TOL = 1e-8

CURVE_SCHEMA = {
    "type": "object",
    "required": ["space", "points"],
    "additionalProperties": False,
    "properties": {
        "space": {"enum": ["r3", "s3", "h3"]},
        "name": {"type": "string"},
        "points": {"type": "array", "minItems": 4, "items": {"type": "array", "items": {"type": "number"}}},
        "velocity": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "framing": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
}


def parse_ref(ref: str, default_scheme: str | None = None) -> tuple[str, str, dict]:
    """Split ``scheme:NAME?k=v&...`` into ``(scheme, name, params)``."""
    if ":" not in ref:
        if default_scheme is None:
            raise SchemaError(f"reference {ref!r} has no scheme")
        ref = f"{default_scheme}:{ref}"
    parts = urlsplit(ref)
    if not parts.scheme or not parts.path:
        raise SchemaError(f"malformed reference {ref!r}")
    params = dict(parse_qsl(parts.query, keep_blank_values=False, strict_parsing=bool(parts.query)))
    return parts.scheme, parts.path, params


def _matrix(doc, key, n, dim):
    arr = np.asarray(doc[key], dtype=float)
    if arr.ndim != 2 or arr.shape != (n, dim):
        raise SchemaError(f"{key!r} must hold {n} arrays of {dim} coordinates")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{key!r} has non-finite entries")
    return arr


def curve_from_document(doc) -> tuple[ClosedCurve, Framing | None]:
    try:
        jsonschema.validate(doc, CURVE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"curve file: {exc.message}") from None
    tag = SpaceTag(doc["space"])
    g = geometry(tag)
    n = len(doc["points"])
    pts = _matrix(doc, "points", n, tag.ambient_dim)
    off = float(np.abs(g.membership(pts)).max())
    if off > LOAD_TOL:
        raise NotOnManifold(f"curve point off the manifold by {off:.2e} (tolerance {LOAD_TOL})")
    name = doc.get("name", "curve")
    if "velocity" in doc:
        pts = g.reproject(pts)
        curve = ClosedCurve(tag, pts, g.project(pts, _matrix(doc, "velocity", n, tag.ambient_dim)), name)
    else:
        curve = curve_from_points(tag, pts, name)
    framing = None
    if "framing" in doc:
        framing = make_framing(curve, "explicit", normals=_matrix(doc, "framing", n, tag.ambient_dim))
    return curve, framing


def curve_to_document(curve: ClosedCurve, framing: Framing | None = None) -> dict:
    doc = {"space": curve.tag.value, "name": curve.name, "points": curve.points.tolist(),
           "velocity": curve.velocity.tolist()}
    if framing is not None:
        doc["framing"] = np.asarray(framing.normals).tolist()
    return doc


def read_curve_file(path) -> tuple[ClosedCurve, Framing | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"no such curve file: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"curve file {path} is not JSON: {exc}") from None
    return curve_from_document(doc)


def write_curve_file(curve: ClosedCurve, path, framing: Framing | None = None) -> None:
    Path(path).write_text(json.dumps(curve_to_document(curve, framing)))


def load_curve(ref, pick: int | None = None) -> tuple[ClosedCurve, Framing | None]:
    """Curve from a ``canonical:`` reference or a curve file path.

    Canonical factories that return a pair need ``pick`` (0 or 1).
    """
    ref = str(ref)
    if not ref.startswith("canonical:"):
        return read_curve_file(ref)
    _, name, params = parse_ref(ref)
    out = canonical_curve(name, **params)
    if isinstance(out, tuple):
        if pick is None:
            raise SchemaError(f"canonical:{name} is a pair; use its single-curve names")
        out = out[pick]
    return out, None


def load_field(ref: str, tag=None):
    scheme, name, params = parse_ref(ref, "registry")
    if scheme != "registry":
        raise SchemaError(f"fields are referenced as registry:NAME, got {ref!r}")
    return field_from_name(name, tag, **params)


def load_scalar(ref: str, tag=None):
    scheme, name, params = parse_ref(ref, "registry")
    if scheme != "registry":
        raise SchemaError(f"densities are referenced as registry:NAME, got {ref!r}")
    return scalar_from_name(name, tag, **params)


# ---------------------------------------------------------------------------
# reports


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


@dataclass
class Report:
    """Result record of one CLI command; field names are stable."""

    command: str
    inputs: dict
    resolution: dict
    values: dict
    integer_gap: float | None = None
    error_estimate: float | None = None
    runtime: float = 0.0
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def report_json(report: Report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2)


def report_csv(report: Report) -> str:
    """Sweep rows as CSV; other reports as ``key,value`` lines."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.rows:
        keys = list(report.rows[0].keys())
        w.writerow(keys)
        for r in report.rows:
            w.writerow([_plain(r[k]) for k in keys])
    else:
        w.writerow(["key", "value"])
        for k, v in sorted(report.values.items()):
            w.writerow([k, json.dumps(_plain(v))])
    return buf.getvalue()


def write_report(report: Report, path=None, fmt: str = "json") -> str:
    text = report_json(report) if fmt == "json" else report_csv(report)
    if path is not None:
        Path(path).write_text(text + ("" if text.endswith("\n") else "\n"))
    return text
