"""Loaders for the coefficient sets and anchor table shipped with the package.

The bundled JSON files hold the reference degree-24 global fits and the
degree-5 piecewise fits (voltage and current versus time) for the averaged
fungal-electrode sweep the toolkit was built around, plus the default
mem-element anchor coordinates.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .polyfit import PiecewisePolynomial, Polynomial

__all__ = [
    "load_coeff_json",
    "dump_coeff_json",
    "bundled_global_fits",
    "bundled_piecewise_fits",
    "default_anchors",
]

GLOBAL_VOLTAGE = "global_voltage_fit_deg24.json"
GLOBAL_CURRENT = "global_current_fit_deg24.json"
PIECEWISE_VOLTAGE = "piecewise_voltage_fit_deg5.json"
PIECEWISE_CURRENT = "piecewise_current_fit_deg5.json"
ANCHORS = "anchors_default.json"


def _data_text(name: str) -> str:
    return resources.files("memfract").joinpath("data").joinpath(name).read_text("utf-8")


def _coeff_from_dict(doc: dict):
    if not isinstance(doc, dict):
        raise ValidationError("coefficient document must be a JSON object")
    if doc.get("basis", "monomial") != "monomial":
        raise ValidationError(f"unsupported basis {doc.get('basis')!r}")
    try:
        if "left_coeffs" in doc or "breakpoint" in doc:
            domain = doc.get("domain", (0.0, 0.0))
            return PiecewisePolynomial(
                left=Polynomial(tuple(doc["left_coeffs"])),
                right=Polynomial(tuple(doc["right_coeffs"])),
                breakpoint=float(doc["breakpoint"]),
                t_end=float(domain[1]),
            )
        return Polynomial(tuple(doc["coeffs"]))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed coefficient document: {exc}") from exc


def load_coeff_json(source):
    """Build a Polynomial or PiecewisePolynomial from a dict, a JSON string,
    or a path to a JSON file (piecewise when breakpoint/left_coeffs present)."""
    if isinstance(source, dict):
        return _coeff_from_dict(source)
    if isinstance(source, (str, Path)):
        p = Path(source)
        if p.suffix == ".json" and p.exists():
            return _coeff_from_dict(json.loads(p.read_text("utf-8")))
        if isinstance(source, str):
            try:
                return _coeff_from_dict(json.loads(source))
            except json.JSONDecodeError:
                pass
        raise ValidationError(f"no such coefficient file: {source}")
    raise ValidationError(f"cannot load coefficients from {type(source).__name__}")


def dump_coeff_json(poly, quantity: str, domain: tuple[float, float]) -> dict:
    """Inverse of load_coeff_json: the JSON document for a fitted polynomial."""
    doc = {
        "basis": "monomial",
        "domain": [float(domain[0]), float(domain[1])],
        "quantity": quantity,
    }
    if isinstance(poly, PiecewisePolynomial):
        doc["breakpoint"] = poly.breakpoint
        doc["left_coeffs"] = list(poly.left.coeffs)
        doc["right_coeffs"] = list(poly.right.coeffs)
    else:
        doc["coeffs"] = list(poly.coeffs)
    return doc


def bundled_global_fits() -> tuple[Polynomial, Polynomial]:
    """(voltage, current) degree-24 reference fits over t in (0, 171] s."""
    v = _coeff_from_dict(json.loads(_data_text(GLOBAL_VOLTAGE)))
    i = _coeff_from_dict(json.loads(_data_text(GLOBAL_CURRENT)))
    return v, i


def bundled_piecewise_fits() -> tuple[PiecewisePolynomial, PiecewisePolynomial]:
    """(voltage, current) degree-5 two-piece reference fits, common vertex."""
    v = _coeff_from_dict(json.loads(_data_text(PIECEWISE_VOLTAGE)))
    i = _coeff_from_dict(json.loads(_data_text(PIECEWISE_CURRENT)))
    return v, i


def default_anchors() -> dict[str, tuple[float, float]]:
    """Named (alpha1, alpha2) anchor points of the known mem-elements."""
    doc = json.loads(_data_text(ANCHORS))
    return {str(k): (float(v[0]), float(v[1])) for k, v in doc.items()}
