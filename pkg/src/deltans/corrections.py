"""Correction family over a base color-difference formula.

Three corrections are supported, all driven by a per-formula
coefficient row (a, b, c, d):

- magnitude: divide the lightness term by D_L = a·ΔE + b, where ΔE is
  the base formula's own uncorrected value;
- power: raise the base value to the exponent c;
- magnitude_power: raise the magnitude-corrected value to the exponent d.

The coefficient registry holds the published rows for five formulas;
the two CAM-UCS rows are data-only because those distance formulas are
not implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .color import LabColor
from .errors import DomainError, UnknownFormulaError, UnsupportedFormulaError
from .formulas import FormulaComponents, base_components, delta_e_ns, normalize_formula

CORRECTION_KINDS = ("magnitude", "power", "magnitude_power")

# Base formulas whose coefficient rows are registered but whose distance
# computation is out of scope (color-appearance model dependencies).
DATA_ONLY_FORMULAS = ("CAM02-UCS", "CAM16-UCS")


@dataclass(frozen=True)
class FormulaCoefficients:
    """Correction coefficients of one formula: D_L line (a, b) and powers (c, d)."""

    formula_id: str
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise DomainError(f"coefficient a must be positive, got {self.a!r}")
        if not 0.0 < self.b < 1.0:
            raise DomainError(f"coefficient b must lie in (0, 1), got {self.b!r}")
        for name in ("c", "d"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise DomainError(f"coefficient {name} must lie in (0, 1], got {value!r}")


@dataclass(frozen=True)
class ParametricFactors:
    """Lightness/chroma/hue parametric factors, all positive."""

    kl: float = 1.0
    kc: float = 1.0
    kh: float = 1.0

    def __post_init__(self) -> None:
        for name in ("kl", "kc", "kh"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"factor {name} must be a positive real, got {value!r}")


COEFFICIENT_TABLE = (
    FormulaCoefficients("CIELAB", 0.05, 0.22, 0.72, 0.95),
    FormulaCoefficients("CIEDE2000", 0.08, 0.27, 0.70, 0.91),
    FormulaCoefficients("CIE94", 0.08, 0.34, 0.73, 0.94),
    FormulaCoefficients("CAM02-UCS", 0.07, 0.28, 0.72, 0.93),
    FormulaCoefficients("CAM16-UCS", 0.07, 0.27, 0.73, 0.93),
)

_REGISTRY = {row.formula_id: row for row in COEFFICIENT_TABLE}


def registry(formula_id: str) -> FormulaCoefficients:
    """Look up the coefficient row of a formula."""
    canonical = normalize_formula(formula_id)
    row = _REGISTRY.get(canonical)
    if row is None:
        raise UnknownFormulaError(f"no coefficient row for formula: {formula_id!r}")
    return row


def registry_rows() -> tuple[FormulaCoefficients, ...]:
    """All coefficient rows in table order."""
    return COEFFICIENT_TABLE


def lightness_factor(de: float, a: float, b: float) -> float:
    """Lightness divisor D_L = a·ΔE + b; must come out positive."""
    d_l = a * de + b
    if not d_l > 0.0:
        raise DomainError(f"lightness factor a*de + b = {d_l!r} is not positive")
    return d_l


def crossover(a: float, b: float) -> float:
    """The ΔE at which the lightness divisor a·ΔE + b reaches 1."""
    if not a > 0.0:
        raise DomainError(f"crossover requires a > 0, got {a!r}")
    return (1.0 - b) / a


def _check_base(base: str) -> str:
    canonical = normalize_formula(base)
    if canonical in DATA_ONLY_FORMULAS or canonical == "NS":
        raise UnsupportedFormulaError(f"formula not implemented: {canonical}")
    return canonical


def corrected_delta_e(
    kind: str,
    base: str,
    components: FormulaComponents,
    coeffs: FormulaCoefficients,
) -> float:
    """Apply one correction to a base formula evaluation.

    ``components`` must hold the unfactored terms of ``base`` for the
    pair in question (the rotation term is nonzero only for CIEDE2000).
    """
    _check_base(base)
    if kind not in CORRECTION_KINDS:
        raise DomainError(f"unknown correction kind: {kind!r}")
    base_de = components.delta_e()
    if kind == "power":
        return base_de ** coeffs.c
    d_l = lightness_factor(base_de, coeffs.a, coeffs.b)
    radicand = (
        (components.dl / d_l) ** 2
        + components.dc ** 2
        + components.dh ** 2
        + components.rt
    )
    magnitude = math.sqrt(max(0.0, radicand))
    if kind == "magnitude":
        return magnitude
    return magnitude ** coeffs.d


def parametric_delta_e(
    base: str,
    reference: LabColor,
    sample: LabColor,
    factors: ParametricFactors,
) -> float:
    """Base formula with its terms divided by the parametric factors.

    For CIEDE2000 and CIE94 this fills their native k-factor slots; for
    CMC the kl/kc factors take the place of the l and c weights.
    """
    _check_base(base)
    comps = base_components(base, reference, sample)
    radicand = (
        (comps.dl / factors.kl) ** 2
        + (comps.dc / factors.kc) ** 2
        + (comps.dh / factors.kh) ** 2
        + comps.rt / (factors.kc * factors.kh)
    )
    return math.sqrt(max(0.0, radicand))


def formula_function(
    formula: str,
    factors: ParametricFactors | None = None,
) -> Callable[[LabColor, LabColor], float]:
    """A (reference, sample) -> ΔE callable for any implemented formula."""
    canonical = normalize_formula(formula)
    if canonical in DATA_ONLY_FORMULAS:
        raise UnsupportedFormulaError(f"formula not implemented: {canonical}")
    if canonical == "NS":
        if factors is not None and (factors.kl, factors.kc, factors.kh) != (1.0, 1.0, 1.0):
            raise DomainError("the no-separation formula has no parametric factor slots")
        return lambda reference, sample: delta_e_ns(reference, sample).de_ns
    resolved = factors if factors is not None else ParametricFactors()
    return lambda reference, sample: parametric_delta_e(canonical, reference, sample, resolved)
