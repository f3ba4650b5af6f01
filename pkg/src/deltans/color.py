"""CIELAB coordinates, XYZ conversion and Euclidean pair differences."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Exact rational constants of the CIE lightness function; the common
# decimals (0.008856, 903.3) introduce a kink at the segment junction.
_EPSILON = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


@dataclass(frozen=True)
class XyzColor:
    """Tristimulus values on the 0..100 scale."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise DomainError(f"tristimulus {name} must be finite and non-negative, got {value!r}")


@dataclass(frozen=True)
class WhitePoint:
    """Reference white tristimulus values; all strictly positive."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"white point {name} must be finite and positive, got {value!r}")


# White of the print substrate used throughout the bundled examples
# (D65, 10 degree observer).
DEFAULT_WHITE = WhitePoint(95.78, 100.00, 104.61)


@dataclass(frozen=True)
class LabColor:
    """A point in CIELAB space."""

    l: float
    a: float
    b: float

    def __post_init__(self) -> None:
        for name in ("l", "a", "b"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"Lab coordinate {name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ColorPair:
    """A reference/sample pair with its Euclidean difference terms.

    ``dh`` carries the sign of the hue rotation from reference to sample
    (positive counter-clockwise in the a*b* plane).
    """

    reference: LabColor
    sample: LabColor
    dl: float
    da: float
    db: float
    dc: float
    dh: float
    de: float


def _f(t: float) -> float:
    if t > _EPSILON:
        return t ** (1.0 / 3.0)
    return (_KAPPA * t + 16.0) / 116.0


def xyz_to_lab(color: XyzColor, white: WhitePoint = DEFAULT_WHITE) -> LabColor:
    """Convert tristimulus values to CIELAB under the given white."""
    fx = _f(color.x / white.x)
    fy = _f(color.y / white.y)
    fz = _f(color.z / white.z)
    return LabColor(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))


def chroma_hue(color: LabColor) -> tuple[float, float]:
    """Return (C*, h) with the hue angle in degrees in [0, 360).

    The hue of a neutral color (a* = b* = 0) is reported as 0.
    """
    chroma = math.hypot(color.a, color.b)
    if chroma == 0.0:
        return 0.0, 0.0
    hue = math.degrees(math.atan2(color.b, color.a)) % 360.0
    return chroma, hue


def pair_differences(reference: LabColor, sample: LabColor) -> ColorPair:
    """Compute the CIELAB difference terms of a pair.

    ΔH* is derived from ΔE*, ΔL* and ΔC* so that
    ΔE*^2 = ΔL*^2 + ΔC*^2 + ΔH*^2 holds exactly; its sign follows the
    direction of the hue rotation.
    """
    dl = sample.l - reference.l
    da = sample.a - reference.a
    db = sample.b - reference.b
    c_ref = math.hypot(reference.a, reference.b)
    c_smp = math.hypot(sample.a, sample.b)
    dc = c_smp - c_ref
    dh_sq = da * da + db * db - dc * dc
    cross = reference.a * sample.b - sample.a * reference.b
    dh = math.copysign(math.sqrt(max(0.0, dh_sq)), cross) if cross != 0.0 else math.sqrt(max(0.0, dh_sq))
    de = math.sqrt(dl * dl + da * da + db * db)
    return ColorPair(reference, sample, dl, da, db, dc, dh, de)
