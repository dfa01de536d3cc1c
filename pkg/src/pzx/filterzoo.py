"""Analytic reference filters used as ground truth.

Every non-custom family is a unity-gain first- or second-order template
parameterized by its corner frequency ``w0`` (rad/s) and, for biquads, the
quality factor ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from .errors import InvalidComponentValue, MissingParameter
from .tfcore import PoleZeroSet, RationalTF, from_pole_zero

DEFAULT_Q = 1.0 / math.sqrt(2.0)


class Family(str, Enum):
    FirstOrderHP = "FirstOrderHP"
    FirstOrderLP = "FirstOrderLP"
    SecondOrderHP = "SecondOrderHP"
    SecondOrderLP = "SecondOrderLP"
    BandPass = "BandPass"
    Notch = "Notch"
    FirstOrderAllPass = "FirstOrderAllPass"
    SecondOrderAllPass = "SecondOrderAllPass"
    Custom = "Custom"

    @property
    def order(self) -> int | None:
        if self is Family.Custom:
            return None
        return 1 if self.name.startswith("FirstOrder") else 2


# CLI short names
ALIASES = {
    "hp1": Family.FirstOrderHP,
    "lp1": Family.FirstOrderLP,
    "hp2": Family.SecondOrderHP,
    "lp2": Family.SecondOrderLP,
    "bp": Family.BandPass,
    "notch": Family.Notch,
    "ap1": Family.FirstOrderAllPass,
    "ap2": Family.SecondOrderAllPass,
    "custom": Family.Custom,
}


def parse_family(name: str | Family) -> Family:
    if isinstance(name, Family):
        return name
    key = name.strip()
    if key.lower() in ALIASES:
        return ALIASES[key.lower()]
    for fam in Family:
        if fam.value.lower() == key.lower():
            return fam
    raise ValueError(f"unknown filter family {name!r}")


@dataclass(frozen=True)
class FilterSpec:
    family: Family
    R: float | None = None
    C: float | None = None
    w0: float | None = None
    q: float | None = None
    custom_pz: PoleZeroSet | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", parse_family(self.family))
        for name in ("R", "C", "w0", "q"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise InvalidComponentValue(f"{name} must be a positive finite number, got {v!r}")

    @property
    def corner(self) -> float:
        """Corner frequency in rad/s, from ``w0`` or ``1/(R*C)``."""
        if self.w0 is not None:
            return float(self.w0)
        if self.R is not None and self.C is not None:
            return 1.0 / (self.R * self.C)
        raise MissingParameter(f"{self.family.value} needs w0 or both R and C")

    @property
    def quality(self) -> float:
        return DEFAULT_Q if self.q is None else float(self.q)


def spec_from_dict(doc: Mapping[str, Any]) -> FilterSpec:
    """Build a FilterSpec from a JSON-style mapping keyed by field names."""
    known = {"family", "R", "C", "w0", "q", "custom_pz"}
    extra = set(doc) - known
    if extra:
        raise ValueError(f"unknown FilterSpec fields: {sorted(extra)}")
    if "family" not in doc:
        raise MissingParameter("FilterSpec document lacks 'family'")
    pz = doc.get("custom_pz")
    if pz is not None and not isinstance(pz, PoleZeroSet):
        from .report import pz_from_json

        pz = pz_from_json(pz)
    return FilterSpec(
        family=doc["family"],
        R=doc.get("R"),
        C=doc.get("C"),
        w0=doc.get("w0"),
        q=doc.get("q"),
        custom_pz=pz,
    )


def make_filter(spec: FilterSpec) -> RationalTF:
    """Canonical transfer function for ``spec``."""
    fam = spec.family
    if fam is Family.Custom:
        if spec.custom_pz is None:
            raise MissingParameter("Custom family requires custom_pz")
        return from_pole_zero(spec.custom_pz)

    w0 = spec.corner
    if fam is Family.FirstOrderHP:
        return RationalTF.from_coeffs([0.0, 1.0], [w0, 1.0])
    if fam is Family.FirstOrderLP:
        return RationalTF.from_coeffs([w0], [w0, 1.0])
    if fam is Family.FirstOrderAllPass:
        return RationalTF.from_coeffs([w0, -1.0], [w0, 1.0])

    bw = w0 / spec.quality
    den = [w0 * w0, bw, 1.0]
    if fam is Family.SecondOrderLP:
        num = [w0 * w0]
    elif fam is Family.SecondOrderHP:
        num = [0.0, 0.0, 1.0]
    elif fam is Family.BandPass:
        num = [0.0, bw]
    elif fam is Family.Notch:
        num = [w0 * w0, 0.0, 1.0]
    elif fam is Family.SecondOrderAllPass:
        num = [w0 * w0, -bw, 1.0]
    else:  # pragma: no cover
        raise ValueError(fam)
    return RationalTF.from_coeffs(num, den)


def truth_pz(spec: FilterSpec) -> PoleZeroSet:
    """Closed-form pole-zero set of ``spec`` (no root finding)."""
    fam = spec.family
    if fam is Family.Custom:
        if spec.custom_pz is None:
            raise MissingParameter("Custom family requires custom_pz")
        return spec.custom_pz
    w0 = spec.corner
    if fam is Family.FirstOrderHP:
        return PoleZeroSet([-w0], [0.0], 1.0)
    if fam is Family.FirstOrderLP:
        return PoleZeroSet([-w0], [], w0)
    if fam is Family.FirstOrderAllPass:
        return PoleZeroSet([-w0], [w0], -1.0)
    q = spec.quality
    poles = _biquad_roots(w0, q)
    if fam is Family.SecondOrderLP:
        return PoleZeroSet(poles, [], w0 * w0)
    if fam is Family.SecondOrderHP:
        return PoleZeroSet(poles, [0.0, 0.0], 1.0)
    if fam is Family.BandPass:
        return PoleZeroSet(poles, [0.0], w0 / q)
    if fam is Family.Notch:
        return PoleZeroSet(poles, [1j * w0, -1j * w0], 1.0)
    if fam is Family.SecondOrderAllPass:
        return PoleZeroSet(poles, [-p.conjugate() for p in poles], 1.0)
    raise ValueError(fam)  # pragma: no cover


def _biquad_roots(w0: float, q: float) -> list[complex]:
    # roots of s^2 + (w0/q) s + w0^2
    sigma = -w0 / (2.0 * q)
    disc = 1.0 - 1.0 / (4.0 * q * q)
    if disc >= 0:
        wd = w0 * math.sqrt(disc)
        return [complex(sigma, wd), complex(sigma, -wd)]
    r = w0 * math.sqrt(-disc)
    return [complex(sigma + r), complex(sigma - r)]


@dataclass(frozen=True)
class FamilyInfo:
    family: Family
    alias: str
    requires: tuple[str, ...]
    alternative: tuple[str, ...]
    order: int | None


def list_families() -> list[FamilyInfo]:
    """One descriptor per family, in a stable order."""
    alias_of = {fam: a for a, fam in ALIASES.items()}
    out = []
    for fam in Family:
        if fam is Family.Custom:
            req: tuple[str, ...] = ("custom_pz",)
            alt: tuple[str, ...] = ()
        elif fam.order == 1:
            req, alt = ("R", "C"), ("w0",)
        else:
            # q falls back to DEFAULT_Q
            req, alt = ("w0", "q"), ("R", "C", "q")
        out.append(FamilyInfo(fam, alias_of[fam], req, alt, fam.order))
    return out
