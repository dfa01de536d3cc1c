"""JSON report format and SVG pole-zero plots.

Report layout (all numbers written with 17 significant digits)::

    {
      "path": "ModelExp",
      "tf": {"num": [...], "den": [...]},          # ascending powers of s
      "poles": [{"re": ..., "im": ...}, ...],
      "zeros": [{"re": ..., "im": ...}, ...],
      "gain": ...,
      "fit": {"model": ..., "params": [...], "rmse": ..., "r_squared": ...,
              "iterations": ..., "converged": ...} | null,
      "linearization_span": ... | null,
      "warnings": [...],
      "comparison": {...}                          # optional
    }

Truth files written by ``pzx generate`` use the ``poles``/``zeros``/``gain``
subset, so either document can serve as a comparison reference.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

from .extract import ComparisonReport, ExtractionReport
from .fitting import FitResult
from .tfcore import PoleZeroSet, RationalTF


class ReportError(ValueError):
    pass


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return dumps(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cplx(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _read_cplx(v) -> complex:
    if isinstance(v, Mapping):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(float(v))
    raise ReportError(f"cannot read complex number from {v!r}")


def pz_to_json(pz: PoleZeroSet) -> dict:
    return {
        "poles": [_cplx(p) for p in pz.poles],
        "zeros": [_cplx(z) for z in pz.zeros],
        "gain": pz.gain,
    }


def pz_from_json(doc: Mapping) -> PoleZeroSet:
    try:
        poles = [_read_cplx(v) for v in doc.get("poles", [])]
        zeros = [_read_cplx(v) for v in doc.get("zeros", [])]
        gain = float(doc.get("gain", 1.0))
    except (TypeError, ValueError, AttributeError) as exc:
        raise ReportError(f"malformed pole-zero document: {exc}") from exc
    return PoleZeroSet(poles, zeros, gain)


def tf_to_json(tf: RationalTF) -> dict:
    return {"num": [float(c) for c in tf.num.coeffs], "den": [float(c) for c in tf.den.coeffs]}


def tf_from_json(doc: Mapping) -> RationalTF:
    try:
        return RationalTF.from_coeffs(doc["num"], doc["den"])
    except (KeyError, TypeError) as exc:
        raise ReportError(f"malformed transfer function: {exc}") from exc


def fit_to_json(fit: FitResult | None) -> dict | None:
    if fit is None:
        return None
    return {
        "model": fit.model.kind.value,
        "params": list(fit.model.params),
        "rmse": fit.rmse,
        "r_squared": fit.r_squared,
        "iterations": fit.iterations,
        "converged": fit.converged,
    }


def comparison_to_json(cmp: ComparisonReport, tolerance: float | None = None) -> dict:
    out = {
        "pole_errors": list(cmp.pole_errors),
        "zero_errors": list(cmp.zero_errors),
        "max_rel_error": cmp.max_rel_error,
        "unmatched_truth": cmp.unmatched_truth,
        "unmatched_extracted": cmp.unmatched_extracted,
    }
    if tolerance is not None:
        out["tolerance"] = float(tolerance)
        out["passed"] = bool(cmp.max_rel_error <= tolerance)
    return out


def extraction_to_json(rep: ExtractionReport) -> dict:
    doc = {"path": rep.path.value, "tf": tf_to_json(rep.tf)}
    doc.update(pz_to_json(rep.pz))
    doc["fit"] = fit_to_json(rep.fit)
    doc["linearization_span"] = rep.linearization_span
    doc["warnings"] = list(rep.warnings)
    return doc


def load_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ReportError("top-level JSON value must be an object")
    return doc


# --- SVG ---------------------------------------------------------------------

SVG_SIZE = 480
SVG_MARGIN = 56


def _f(x: float) -> str:
    return f"{x:.3f}"


def render_pz_svg(pz: PoleZeroSet, title: str = "Pole-Zero Plot", omega_floor: float = 1.0) -> str:
    """Pole-zero scatter: poles as crosses, zeros as circles, square symmetric axes."""
    pts = [abs(complex(v)) for v in (*pz.poles, *pz.zeros)]
    limit = 1.2 * max(pts + [omega_floor])
    plot = SVG_SIZE - 2 * SVG_MARGIN
    scale = plot / (2 * limit)
    cx = cy = SVG_SIZE / 2

    def xy(z: complex) -> tuple[float, float]:
        return cx + z.real * scale, cy - z.imag * scale

    r = 6.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
        f'<text x="{_f(cx)}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">'
        f"{title}</text>",
        f'<rect x="{SVG_MARGIN}" y="{SVG_MARGIN}" width="{plot}" height="{plot}" '
        'fill="none" stroke="#999" stroke-width="1"/>',
        f'<line class="axis" x1="{SVG_MARGIN}" y1="{_f(cy)}" x2="{SVG_SIZE - SVG_MARGIN}" y2="{_f(cy)}" '
        'stroke="black" stroke-width="1"/>',
        f'<line class="axis" x1="{_f(cx)}" y1="{SVG_MARGIN}" x2="{_f(cx)}" y2="{SVG_SIZE - SVG_MARGIN}" '
        'stroke="black" stroke-width="1"/>',
        f'<text x="{_f(cx)}" y="{SVG_SIZE - 16}" text-anchor="middle" font-family="sans-serif" '
        'font-size="12">Real axis (rad/s)</text>',
        f'<text x="16" y="{_f(cy)}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {_f(cy)})">Imaginary axis (rad/s)</text>',
    ]
    for val, anchor, x, y in (
        (-limit, "start", SVG_MARGIN, cy + 14),
        (limit, "end", SVG_SIZE - SVG_MARGIN, cy + 14),
    ):
        out.append(
            f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" font-family="sans-serif" '
            f'font-size="10">{val:.4g}</text>'
        )
    out.append(
        f'<text x="{_f(cx + 4)}" y="{SVG_MARGIN + 10}" font-family="sans-serif" font-size="10">{limit:.4g}</text>'
    )
    for p in pz.poles:
        x, y = xy(complex(p))
        out.append(
            f'<path class="pole" d="M{_f(x - r)},{_f(y - r)} L{_f(x + r)},{_f(y + r)} '
            f'M{_f(x - r)},{_f(y + r)} L{_f(x + r)},{_f(y - r)}" stroke="#c00" stroke-width="2"/>'
        )
    for z in pz.zeros:
        x, y = xy(complex(z))
        out.append(
            f'<circle class="zero" cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="none" '
            'stroke="#00c" stroke-width="2"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
