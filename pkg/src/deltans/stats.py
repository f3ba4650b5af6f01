"""Agreement statistics (STRESS, F-test, MCDM), gray-scale conversion
and observer-variability tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .color import LabColor
from .errors import DomainError

# Gray-scale to visual-difference law ΔV = scale·exp(rate·GS).
GS_SCALE = 0.0534
GS_RATE = 0.701
GS_MIN = 1.0
GS_MAX = 8.0


@dataclass(frozen=True)
class StressReport:
    """STRESS between two data sets and the scale F that aligns them."""

    stress: float
    f_scale: float
    n: int


def stress(a: Sequence[float], b: Sequence[float]) -> StressReport:
    """Standardized residual sum of squares between A and B, in [0, 100].

    A is the observed data (visual differences), B the predictions;
    F = ΣA²/ΣAB rescales B onto A, and STRESS measures the remaining
    disagreement: 100·sqrt(Σ(A−FB)²/ΣF²B²). Zero means exact
    proportionality; the value never exceeds 100.
    """
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.ndim != 1 or bv.ndim != 1:
        raise DomainError("stress inputs must be one-dimensional sequences")
    if av.size != bv.size:
        raise DomainError(f"stress inputs differ in length: {av.size} vs {bv.size}")
    if av.size == 0:
        raise DomainError("stress inputs must be non-empty")
    if not (np.isfinite(av).all() and np.isfinite(bv).all()):
        raise DomainError("stress inputs must be finite")
    if (av < 0.0).any() or (bv < 0.0).any():
        raise DomainError("stress inputs must be non-negative")
    s_ab = float(av @ bv)
    if s_ab == 0.0:
        raise DomainError("stress undefined: sum of A·B is zero")
    f = float(av @ av) / s_ab
    scaled = f * bv
    resid = av - scaled
    value = 100.0 * math.sqrt(float(resid @ resid) / float(scaled @ scaled))
    return StressReport(min(100.0, value), f, int(av.size))


@dataclass(frozen=True)
class FTestResult:
    """Two-tailed F-test on the ratio of squared STRESS values."""

    f_value: float
    lower_crit: float
    upper_crit: float
    verdict: str
    confidence: float
    df1: int | None
    df2: int | None


def f_test(
    stress1: float,
    stress2: float,
    confidence: float = 0.95,
    n1: int | None = None,
    n2: int | None = None,
) -> FTestResult:
    """Compare two STRESS values via F = STRESS₁²/STRESS₂².

    With sample sizes given, critical values come from the F
    distribution at (n1−1, n2−1) degrees of freedom; without them the
    infinite-degrees limit applies, where both critical values collapse
    to 1 and any ratio other than 1 is nominally significant.
    """
    for name, value in (("stress1", stress1), ("stress2", stress2)):
        if not 0.0 < value <= 100.0:
            raise DomainError(f"{name} must lie in (0, 100], got {value!r}")
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence!r}")
    f_value = (stress1 * stress1) / (stress2 * stress2)
    if n1 is None or n2 is None:
        lower = upper = 1.0
        df1 = df2 = None
    else:
        df1, df2 = n1 - 1, n2 - 1
        if df1 < 1 or df2 < 1:
            raise DomainError("f_test needs at least 2 samples per data set")
        from scipy.stats import f as f_distribution

        alpha = 1.0 - confidence
        lower = float(f_distribution.ppf(alpha / 2.0, df1, df2))
        upper = float(f_distribution.ppf(1.0 - alpha / 2.0, df1, df2))
    verdict = "significant" if (f_value < lower or f_value > upper) else "not significant"
    return FTestResult(f_value, lower, upper, verdict, confidence, df1, df2)


def mcdm(colors: Sequence[LabColor]) -> float:
    """Mean color difference from the mean: average ΔE*_ab to the centroid."""
    if len(colors) < 2:
        raise DomainError("mcdm needs at least 2 colors")
    n = float(len(colors))
    mean_l = sum(c.l for c in colors) / n
    mean_a = sum(c.a for c in colors) / n
    mean_b = sum(c.b for c in colors) / n
    total = sum(
        math.sqrt((c.l - mean_l) ** 2 + (c.a - mean_a) ** 2 + (c.b - mean_b) ** 2)
        for c in colors
    )
    return total / n


def gs_to_dv(gs: float, clamp: bool = False) -> float:
    """Visual difference for a gray-scale grade; grades lie in [1, 8].

    With clamp=True an out-of-range grade is pulled to the nearest
    bound instead of raising, for ingesting noisy data.
    """
    if not math.isfinite(gs):
        raise DomainError(f"gray-scale grade must be finite, got {gs!r}")
    if clamp:
        gs = min(GS_MAX, max(GS_MIN, gs))
    elif not GS_MIN <= gs <= GS_MAX:
        raise DomainError(f"gray-scale grade must lie in [1, 8], got {gs!r}")
    return GS_SCALE * math.exp(GS_RATE * gs)


def dv_to_gs(dv: float) -> float:
    """Exact logarithmic inverse of gs_to_dv; result may fall outside [1, 8]."""
    if not (math.isfinite(dv) and dv > 0.0):
        raise DomainError(f"visual difference must be positive, got {dv!r}")
    return math.log(dv / GS_SCALE) / GS_RATE


@dataclass(frozen=True)
class AssessmentRecord:
    """One observer's gray-scale assessment of one pair in one session."""

    pair_id: str
    observer_id: str
    session: int
    gs: float
    dv: float

    def __post_init__(self) -> None:
        if self.session < 1:
            raise DomainError(f"session index must be >= 1, got {self.session!r}")
        if not GS_MIN <= self.gs <= GS_MAX:
            raise DomainError(f"gray-scale grade must lie in [1, 8], got {self.gs!r}")
        # Loose consistency bound: gs and dv survive 6-decimal
        # serialization, so exact equality cannot be required here.
        expected = gs_to_dv(self.gs)
        if abs(self.dv - expected) > 1e-4 * max(1.0, expected):
            raise DomainError(
                f"dv {self.dv!r} inconsistent with gs {self.gs!r} (expected {expected!r})"
            )

    @classmethod
    def from_gs(cls, pair_id: str, observer_id: str, session: int, gs: float) -> "AssessmentRecord":
        return cls(pair_id, observer_id, session, gs, gs_to_dv(gs))


@dataclass(frozen=True)
class VariabilityReport:
    """Observer agreement tables.

    ``inter`` holds each observer's STRESS against the panel-mean ΔV;
    ``intra`` each observer's mean STRESS between repeated sessions
    (observers without repeats are absent). Group tables average the
    per-observer inter STRESS over subsets of pairs.
    """

    inter: dict[str, float]
    intra: dict[str, float]
    inter_mean: float
    intra_mean: float | None
    by_center: dict[str, float]
    by_plane: dict[str, float]
    by_magnitude: dict[float, float]

    def to_dict(self) -> dict:
        return {
            "inter": dict(self.inter),
            "intra": dict(self.intra),
            "inter_mean": self.inter_mean,
            "intra_mean": self.intra_mean,
            "by_center": dict(self.by_center),
            "by_plane": dict(self.by_plane),
            "by_magnitude": dict(self.by_magnitude),
        }


def panel_mean_dv(records: Iterable[AssessmentRecord]) -> dict[str, float]:
    """Arithmetic-mean ΔV per pair, averaging observers' session means."""
    per_observer: dict[str, dict[str, list[float]]] = {}
    for record in records:
        per_observer.setdefault(record.pair_id, {}).setdefault(record.observer_id, []).append(record.dv)
    means: dict[str, float] = {}
    for pair_id, observers in per_observer.items():
        observer_means = [sum(vals) / len(vals) for vals in observers.values()]
        means[pair_id] = sum(observer_means) / len(observer_means)
    return means


def _grouped_mean(
    observer_pairs: dict[str, dict[str, float]],
    panel: Mapping[str, float],
    group_of: Mapping[str, object],
) -> dict:
    """Mean-over-observers STRESS restricted to each pair group."""
    groups: dict = {}
    keys = sorted({group_of[pid] for pid in panel if pid in group_of}, key=str)
    for key in keys:
        values = []
        for observer in sorted(observer_pairs):
            subset = [
                pid for pid in observer_pairs[observer]
                if pid in group_of and group_of[pid] == key
            ]
            if not subset:
                continue
            a = [observer_pairs[observer][pid] for pid in subset]
            b = [panel[pid] for pid in subset]
            values.append(stress(a, b).stress)
        if values:
            groups[key] = sum(values) / len(values)
    return groups


def observer_variability(
    records: Sequence[AssessmentRecord],
    pairs: Iterable | None = None,
) -> VariabilityReport:
    """Intra- and inter-observer STRESS tables.

    ``pairs`` may supply pair metadata (objects with pair_id, center_id,
    plane and magnitude_label) to enable the per-center/plane/magnitude
    groupings; without it those tables are empty.
    """
    if not records:
        raise DomainError("observer_variability needs at least one record")

    # observer -> pair -> session -> dv
    table: dict[str, dict[str, dict[int, float]]] = {}
    for record in records:
        table.setdefault(record.observer_id, {}).setdefault(record.pair_id, {})[record.session] = record.dv

    observer_pairs = {
        observer: {pid: sum(sessions.values()) / len(sessions) for pid, sessions in by_pair.items()}
        for observer, by_pair in table.items()
    }
    panel = panel_mean_dv(records)

    inter: dict[str, float] = {}
    for observer in sorted(observer_pairs):
        pair_ids = sorted(observer_pairs[observer])
        a = [observer_pairs[observer][pid] for pid in pair_ids]
        b = [panel[pid] for pid in pair_ids]
        inter[observer] = stress(a, b).stress

    intra: dict[str, float] = {}
    for observer in sorted(table):
        by_pair = table[observer]
        sessions = sorted({s for sessions in by_pair.values() for s in sessions})
        values = []
        for i, s1 in enumerate(sessions):
            for s2 in sessions[i + 1:]:
                common = sorted(pid for pid, by_session in by_pair.items() if s1 in by_session and s2 in by_session)
                if not common:
                    continue
                a = [by_pair[pid][s1] for pid in common]
                b = [by_pair[pid][s2] for pid in common]
                values.append(stress(a, b).stress)
        if values:
            intra[observer] = sum(values) / len(values)

    inter_mean = sum(inter.values()) / len(inter)
    intra_mean = sum(intra.values()) / len(intra) if intra else None

    by_center: dict[str, float] = {}
    by_plane: dict[str, float] = {}
    by_magnitude: dict[float, float] = {}
    if pairs is not None:
        pair_list = list(pairs)
        center_of = {p.pair_id: p.center_id for p in pair_list}
        plane_of = {p.pair_id: p.plane for p in pair_list}
        magnitude_of = {p.pair_id: p.magnitude_label for p in pair_list}
        by_center = _grouped_mean(observer_pairs, panel, center_of)
        by_plane = _grouped_mean(observer_pairs, panel, plane_of)
        by_magnitude = _grouped_mean(observer_pairs, panel, magnitude_of)

    return VariabilityReport(inter, intra, inter_mean, intra_mean, by_center, by_plane, by_magnitude)
