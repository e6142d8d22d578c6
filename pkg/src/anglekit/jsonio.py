"""JSON codecs for the wire formats.

Schemas are strict: unknown fields are rejected, field names are exact.
Floats rely on Python's shortest round-trip repr, so parse(serialize(x))
reproduces x bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import UsageError
from .geom import (
    AngleInstance,
    AngleMultiset,
    Certificate,
    CertificateAssignment,
    PointConfig,
)

SCHEMA_VERSION = 1


def _require_keys(obj, keys, what):
    if not isinstance(obj, dict):
        raise UsageError(f"{what}: expected a JSON object")
    extra = set(obj) - set(keys)
    if extra:
        raise UsageError(f"{what}: unknown field(s) {sorted(extra)}")
    missing = set(keys) - set(obj)
    if missing:
        raise UsageError(f"{what}: missing field(s) {sorted(missing)}")


def config_to_json(config):
    return {"dim": config.dim, "points": [[float(v) for v in row] for row in config.points]}


def config_from_json(obj):
    _require_keys(obj, ("dim", "points"), "PointConfig")
    dim = obj["dim"]
    points = obj["points"]
    if not isinstance(dim, int):
        raise UsageError("PointConfig: dim must be an integer")
    if not isinstance(points, list) or not all(isinstance(r, list) for r in points):
        raise UsageError("PointConfig: points must be a list of coordinate lists")
    try:
        return PointConfig(dim, np.array(points, dtype=float))
    except ValueError as exc:
        raise UsageError(f"PointConfig: {exc}") from exc


def multiset_to_json(targets):
    return {"angles": [{"radians": float(v), "mult": int(mult)} for v, mult in targets.entries]}


def multiset_from_json(obj):
    _require_keys(obj, ("angles",), "AngleMultiset")
    entries = obj["angles"]
    if not isinstance(entries, list):
        raise UsageError("AngleMultiset: angles must be a list")
    pairs = []
    for e in entries:
        _require_keys(e, ("radians", "mult"), "AngleMultiset entry")
        if not isinstance(e["mult"], int):
            raise UsageError("AngleMultiset: mult must be an integer")
        pairs.append((float(e["radians"]), e["mult"]))
    try:
        return AngleMultiset.from_pairs(pairs)
    except ValueError as exc:
        raise UsageError(f"AngleMultiset: {exc}") from exc


def certificate_to_json(cert):
    return {
        "tolerance": float(cert.tolerance),
        "warnings": list(cert.warnings),
        "assignments": [
            {
                "occurrence": a.occurrence,
                "target": float(a.target),
                "apex": a.instance.apex,
                "ray_a": [float(v) for v in a.instance.ray_a],
                "ray_b": [float(v) for v in a.instance.ray_b],
                "measured": float(a.instance.measured),
            }
            for a in cert.assignments
        ],
    }


def certificate_from_json(obj):
    _require_keys(obj, ("tolerance", "warnings", "assignments"), "Certificate")
    assignments = []
    for a in obj["assignments"]:
        _require_keys(
            a, ("occurrence", "target", "apex", "ray_a", "ray_b", "measured"), "assignment"
        )
        inst = AngleInstance(
            apex=int(a["apex"]),
            ray_a=tuple(float(v) for v in a["ray_a"]),
            ray_b=tuple(float(v) for v in a["ray_b"]),
            measured=float(a["measured"]),
        )
        assignments.append(
            CertificateAssignment(
                occurrence=int(a["occurrence"]), target=float(a["target"]), instance=inst
            )
        )
    return Certificate(tuple(assignments), float(obj["tolerance"]), tuple(obj["warnings"]))


def dumps(obj):
    """Deterministic JSON text: fixed separators, no key reordering, newline end."""
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def document(**payload):
    """Wrap a payload as a versioned output document."""
    doc = {"version": SCHEMA_VERSION}
    doc.update(payload)
    return doc


def load_document(text, what="document"):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: invalid JSON ({exc})") from exc
    return obj


