"""Deterministic JSON documents for curves, reports and audit results.

Floats are written with 17 significant digits so every value round-trips
bit-for-bit; field order is fixed by the ``*_FIELDS`` tuples below.  Non-finite
array entries (e.g. the unused ``beta[0]``) are written as ``null``.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Iterator

import numpy as np

from .model import ConditionReport, HugoniotCurve, HugoniotPoint

SCHEMA_VERSION = 1

POINT_FIELDS = ("s", "state", "speed", "state_tangent", "speed_tangent")
CURVE_FIELDS = ("kind", "schema", "left_state", "family", "orientation", "genuinely_nonlinear", "stop_reason", "points")
REPORT_FIELDS = (
    "kind", "schema", "left_state", "point", "lax_margins", "lopatinski_det", "rel_entropy",
    "rel_entropy_deriv", "speed_deriv", "dissipation", "alpha", "beta", "quadratic_form",
    "identity_gap", "identity_scale", "flags",
)
# Columns of the line-delimited / delimited trace output.
TRACE_COLUMNS = ("s", "state", "speed", "state_tangent", "speed_tangent", "rh_residual")


def _float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def encode(obj: Any) -> str:
    """Compact deterministic JSON text for plain data (dicts keep their order)."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def decode(text: str) -> Any:
    return json.loads(text)


def _vec(values) -> np.ndarray:
    return np.array([math.nan if v is None else v for v in values], dtype=float)


def point_to_doc(p: HugoniotPoint) -> dict:
    return {
        "s": float(p.s),
        "state": np.asarray(p.state, dtype=float),
        "speed": float(p.speed),
        "state_tangent": np.asarray(p.state_tangent, dtype=float),
        "speed_tangent": float(p.speed_tangent),
    }


def point_from_doc(doc: dict) -> HugoniotPoint:
    return HugoniotPoint(
        s=float(doc["s"]),
        state=_vec(doc["state"]),
        speed=float(doc["speed"]),
        state_tangent=_vec(doc["state_tangent"]),
        speed_tangent=float(doc["speed_tangent"]),
    )


def curve_to_doc(c: HugoniotCurve) -> dict:
    return {
        "kind": "hugoniot_curve",
        "schema": SCHEMA_VERSION,
        "left_state": np.asarray(c.left_state, dtype=float),
        "family": int(c.family),
        "orientation": int(c.orientation),
        "genuinely_nonlinear": bool(c.genuinely_nonlinear),
        "stop_reason": c.stop_reason,
        "points": [point_to_doc(p) for p in sorted(c.points, key=lambda p: p.s)],
    }


def curve_from_doc(doc: dict) -> HugoniotCurve:
    return HugoniotCurve(
        left_state=_vec(doc["left_state"]),
        points=tuple(point_from_doc(p) for p in doc["points"]),
        family=int(doc.get("family", 1)),
        stop_reason=doc.get("stop_reason", ""),
        genuinely_nonlinear=bool(doc.get("genuinely_nonlinear", True)),
        orientation=int(doc.get("orientation", 1)),
    )


def _opt_vec(v):
    return None if v is None else np.asarray(v, dtype=float)


def report_to_doc(r: ConditionReport) -> dict:
    return {
        "kind": "condition_report",
        "schema": SCHEMA_VERSION,
        "left_state": np.asarray(r.left_state, dtype=float),
        "point": point_to_doc(r.point),
        "lax_margins": np.asarray(r.lax_margins, dtype=float),
        "lopatinski_det": r.lopatinski_det,
        "rel_entropy": r.rel_entropy,
        "rel_entropy_deriv": r.rel_entropy_deriv,
        "speed_deriv": r.speed_deriv,
        "dissipation": r.dissipation,
        "alpha": _opt_vec(r.alpha),
        "beta": _opt_vec(r.beta),
        "quadratic_form": r.quadratic_form,
        "identity_gap": r.identity_gap,
        "identity_scale": r.identity_scale,
        "flags": {k: r.flags[k] for k in sorted(r.flags)},
    }


def _opt_float(v):
    return None if v is None else float(v)


def report_from_doc(doc: dict) -> ConditionReport:
    return ConditionReport(
        left_state=_vec(doc["left_state"]),
        point=point_from_doc(doc["point"]),
        lax_margins=_vec(doc["lax_margins"]),
        lopatinski_det=_opt_float(doc["lopatinski_det"]),
        rel_entropy=float(doc["rel_entropy"]),
        rel_entropy_deriv=float(doc["rel_entropy_deriv"]),
        speed_deriv=float(doc["speed_deriv"]),
        dissipation=_opt_float(doc["dissipation"]),
        alpha=None if doc["alpha"] is None else _vec(doc["alpha"]),
        beta=None if doc["beta"] is None else _vec(doc["beta"]),
        quadratic_form=_opt_float(doc.get("quadratic_form")),
        identity_gap=_opt_float(doc.get("identity_gap")),
        identity_scale=_opt_float(doc.get("identity_scale")),
        flags=dict(doc.get("flags", {})),
    )


def serialize_report(obj) -> str:
    """Single-document text for a ConditionReport or HugoniotCurve."""
    if isinstance(obj, HugoniotCurve):
        return encode(curve_to_doc(obj)) + "\n"
    if isinstance(obj, ConditionReport):
        return encode(report_to_doc(obj)) + "\n"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def deserialize(text: str):
    doc = decode(text)
    kind = doc.get("kind")
    if kind == "hugoniot_curve":
        return curve_from_doc(doc)
    if kind == "condition_report":
        return report_from_doc(doc)
    raise ValueError(f"unknown document kind {kind!r}")


def trace_records(curve: HugoniotCurve, rh_residuals: Iterable[float]) -> Iterator[dict]:
    for p, rh in zip(curve.points, rh_residuals):
        rec = point_to_doc(p)
        rec["rh_residual"] = float(rh)
        yield rec


def curve_to_lines(curve: HugoniotCurve, rh_residuals: Iterable[float]) -> str:
    """Line-delimited form: a header record, then one record per point in s order."""
    header = curve_to_doc(curve)
    header.pop("points")
    header["kind"] = "hugoniot_curve_header"
    lines = [encode(header)]
    lines.extend(encode(rec) for rec in trace_records(curve, rh_residuals))
    return "\n".join(lines) + "\n"


def curve_from_lines(text: str) -> HugoniotCurve:
    rows = [decode(line) for line in text.splitlines() if line.strip()]
    header, records = rows[0], rows[1:]
    header = dict(header, kind="hugoniot_curve", points=[{k: r[k] for k in POINT_FIELDS} for r in records])
    return curve_from_doc(header)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _float(v) if math.isfinite(v) else "nan"
    return str(v)


def delimited_table(columns: list, rows: Iterable[list], sep: str = ",") -> str:
    out = [sep.join(columns)]
    for row in rows:
        out.append(sep.join(_cell(v) for v in row))
    return "\n".join(out) + "\n"
