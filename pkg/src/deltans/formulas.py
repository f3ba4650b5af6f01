"""Color-difference formulas: CIELAB, CIE94, CMC(l:c), CIEDE2000 and ΔE_NS.

Every formula exposes its weighted component terms (lightness, chroma,
hue, rotation cross-term) so that correction and fitting code can
rescale individual terms without re-deriving formula internals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .color import ColorPair, LabColor, chroma_hue, pair_differences
from .errors import DomainError, UnknownFormulaError, UnsupportedFormulaError

CANONICAL_FORMULAS = ("CIELAB", "CIE94", "CMC", "CIEDE2000", "NS", "CAM02-UCS", "CAM16-UCS")

_ALIASES = {formula.replace("-", ""): formula for formula in CANONICAL_FORMULAS}

# Coefficients of the lightness divisor line D_L used by the
# no-separation formula.
NS_LIGHTNESS_SLOPE = 0.08
NS_LIGHTNESS_OFFSET = 0.27

_TAU = 2.0 * math.pi
_POW7_25 = 25.0 ** 7


def normalize_formula(name: str) -> str:
    """Map a formula name to its canonical identifier, case-insensitively."""
    key = name.strip().upper().replace("_", "-").replace(" ", "")
    canonical = _ALIASES.get(key.replace("-", ""))
    if canonical is None:
        raise UnknownFormulaError(f"unknown formula: {name!r}")
    return canonical


def _require_positive(**factors: float) -> None:
    for name, value in factors.items():
        if not (math.isfinite(value) and value > 0.0):
            raise DomainError(f"factor {name} must be a positive real, got {value!r}")


@dataclass(frozen=True)
class FormulaComponents:
    """Weighted difference terms of one formula evaluation.

    ``dl``, ``dc``, ``dh`` are the lightness/chroma/hue terms after
    division by their weighting functions (and any parametric factor);
    ``rt`` is the rotation cross-term, zero for every formula except
    CIEDE2000.
    """

    dl: float
    dc: float
    dh: float
    rt: float = 0.0

    def delta_e(self) -> float:
        radicand = self.dl * self.dl + self.dc * self.dc + self.dh * self.dh + self.rt
        return math.sqrt(max(0.0, radicand))


@dataclass(frozen=True)
class De2000Breakdown:
    """CIEDE2000 result with its weighted component terms.

    ``de00**2 = dl_prime**2 + dc_prime**2 + dh_prime**2 + rt_term``.
    """

    dl_prime: float
    dc_prime: float
    dh_prime: float
    rt_term: float
    de00: float

    def components(self) -> FormulaComponents:
        return FormulaComponents(self.dl_prime, self.dc_prime, self.dh_prime, self.rt_term)


@dataclass(frozen=True)
class NsResult:
    """No-separation color difference with its lightness divisor."""

    d_l: float
    de_ns: float
    de00: float
    breakdown: De2000Breakdown


def delta_e_cielab(pair: ColorPair) -> float:
    """Euclidean CIELAB difference ΔE*_ab."""
    return pair.de


def cie94_components(pair: ColorPair, kl: float = 1.0, kc: float = 1.0, kh: float = 1.0) -> FormulaComponents:
    """CIE94 weighted terms, reference-color chroma convention."""
    _require_positive(kl=kl, kc=kc, kh=kh)
    c_ref, _ = chroma_hue(pair.reference)
    sc = 1.0 + 0.045 * c_ref
    sh = 1.0 + 0.015 * c_ref
    return FormulaComponents(pair.dl / kl, pair.dc / (kc * sc), pair.dh / (kh * sh))


def delta_e_cie94(pair: ColorPair, kl: float = 1.0, kc: float = 1.0, kh: float = 1.0) -> float:
    return cie94_components(pair, kl, kc, kh).delta_e()


def cmc_components(pair: ColorPair, l: float = 1.0, c: float = 1.0) -> FormulaComponents:
    """CMC(l:c) weighted terms; the reference color acts as the standard."""
    _require_positive(l=l, c=c)
    l_ref = pair.reference.l
    c_ref, h_ref = chroma_hue(pair.reference)
    if l_ref < 16.0:
        sl = 0.511
    else:
        sl = 0.040975 * l_ref / (1.0 + 0.01765 * l_ref)
    sc = 0.0638 * c_ref / (1.0 + 0.0131 * c_ref) + 0.638
    c4 = c_ref ** 4
    f = math.sqrt(c4 / (c4 + 1900.0))
    if 164.0 <= h_ref <= 345.0:
        t = 0.56 + abs(0.2 * math.cos(math.radians(h_ref + 168.0)))
    else:
        t = 0.36 + abs(0.4 * math.cos(math.radians(h_ref + 35.0)))
    sh = sc * (f * t + 1.0 - f)
    return FormulaComponents(pair.dl / (l * sl), pair.dc / (c * sc), pair.dh / sh)


def delta_e_cmc(pair: ColorPair, l: float = 1.0, c: float = 1.0) -> float:
    return cmc_components(pair, l, c).delta_e()


def delta_e_ciede2000(
    reference: LabColor,
    sample: LabColor,
    kl: float = 1.0,
    kc: float = 1.0,
    kh: float = 1.0,
) -> De2000Breakdown:
    """CIEDE2000 difference with component breakdown.

    Hue arithmetic is done in radians on [0, 2π); branch handling of the
    hue difference and hue mean follows the published procedure.
    """
    _require_positive(kl=kl, kc=kc, kh=kh)
    l1, a1, b1 = reference.l, reference.a, reference.b
    l2, a2, b2 = sample.l, sample.a, sample.b

    c_mean = 0.5 * (math.hypot(a1, b1) + math.hypot(a2, b2))
    c_mean7 = c_mean ** 7
    g = 0.5 * (1.0 - math.sqrt(c_mean7 / (c_mean7 + _POW7_25)))
    ap1 = (1.0 + g) * a1
    ap2 = (1.0 + g) * a2
    cp1 = math.hypot(ap1, b1)
    cp2 = math.hypot(ap2, b2)
    hp1 = math.atan2(b1, ap1) % _TAU if cp1 != 0.0 else 0.0
    hp2 = math.atan2(b2, ap2) % _TAU if cp2 != 0.0 else 0.0

    dlp = l2 - l1
    dcp = cp2 - cp1
    if cp1 == 0.0 or cp2 == 0.0:
        dhp = 0.0
    else:
        dhp = hp2 - hp1
        if dhp > math.pi:
            dhp -= _TAU
        elif dhp < -math.pi:
            dhp += _TAU
    dhp_term = 2.0 * math.sqrt(cp1 * cp2) * math.sin(0.5 * dhp)

    lp_mean = 0.5 * (l1 + l2)
    cp_mean = 0.5 * (cp1 + cp2)
    if cp1 == 0.0 or cp2 == 0.0:
        hp_mean = hp1 + hp2
    else:
        hp_mean = 0.5 * (hp1 + hp2)
        if abs(hp1 - hp2) > math.pi:
            # The two hues straddle the 0/2π cut; fold the mean back to
            # the short arc between them.
            hp_mean += math.pi if hp_mean < math.pi else -math.pi

    t = (
        1.0
        - 0.17 * math.cos(hp_mean - math.pi / 6.0)
        + 0.24 * math.cos(2.0 * hp_mean)
        + 0.32 * math.cos(3.0 * hp_mean + math.pi / 30.0)
        - 0.20 * math.cos(4.0 * hp_mean - math.radians(63.0))
    )
    lm50sq = (lp_mean - 50.0) ** 2
    s_l = 1.0 + 0.015 * lm50sq / math.sqrt(20.0 + lm50sq)
    s_c = 1.0 + 0.045 * cp_mean
    s_h = 1.0 + 0.015 * cp_mean * t

    cp_mean7 = cp_mean ** 7
    r_c = 2.0 * math.sqrt(cp_mean7 / (cp_mean7 + _POW7_25))
    dtheta = math.radians(30.0) * math.exp(-(((math.degrees(hp_mean) - 275.0) / 25.0) ** 2))
    r_t = -math.sin(2.0 * dtheta) * r_c

    dl_prime = dlp / (kl * s_l)
    dc_prime = dcp / (kc * s_c)
    dh_prime = dhp_term / (kh * s_h)
    rt_term = r_t * dc_prime * dh_prime
    radicand = dl_prime * dl_prime + dc_prime * dc_prime + dh_prime * dh_prime + rt_term
    de00 = math.sqrt(max(0.0, radicand))
    return De2000Breakdown(dl_prime, dc_prime, dh_prime, rt_term, de00)


def delta_e_ns(reference: LabColor, sample: LabColor) -> NsResult:
    """No-separation color difference.

    The CIEDE2000 lightness term is divided by D_L = 0.08·ΔE00 + 0.27,
    which grows with the size of the difference; the chroma, hue and
    rotation terms are kept unchanged.
    """
    breakdown = delta_e_ciede2000(reference, sample)
    d_l = NS_LIGHTNESS_SLOPE * breakdown.de00 + NS_LIGHTNESS_OFFSET
    radicand = (
        (breakdown.dl_prime / d_l) ** 2
        + breakdown.dc_prime ** 2
        + breakdown.dh_prime ** 2
        + breakdown.rt_term
    )
    return NsResult(d_l, math.sqrt(max(0.0, radicand)), breakdown.de00, breakdown)


def base_components(formula: str, reference: LabColor, sample: LabColor) -> FormulaComponents:
    """Unfactored (all parametric factors 1) component terms of a formula."""
    canonical = normalize_formula(formula)
    if canonical == "CIEDE2000":
        return delta_e_ciede2000(reference, sample).components()
    pair = pair_differences(reference, sample)
    if canonical == "CIELAB":
        return FormulaComponents(pair.dl, pair.dc, pair.dh)
    if canonical == "CIE94":
        return cie94_components(pair)
    if canonical == "CMC":
        return cmc_components(pair)
    raise UnsupportedFormulaError(f"formula not implemented: {canonical}")
