"""Recover parametric factors, lightness-line coefficients and power
exponents by STRESS minimization against visual data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .color import LabColor
from .errors import DomainError, FitError
from .formulas import base_components, normalize_formula
from .simplex import nelder_mead
from .stats import stress

FIT_TARGETS = ("kl_only", "kl_kc", "dl_line", "power_c", "magnitude_power_d")

_PENALTY = 1.0e6
# Upper bound for fitted power exponents.
_MAX_EXPONENT = 2.0


@dataclass(frozen=True)
class FitSpec:
    """What to fit and how: named initial point, positivity set, bounds,
    and the simplex configuration. Fully determines the search."""

    target: str
    base: str = "CIEDE2000"
    initial: tuple[tuple[str, float], ...] = ()
    positive: tuple[str, ...] = ()
    bounds: tuple[tuple[str, float, float], ...] = ()
    tolerance: float = 1e-8
    max_evaluations: int | None = None
    restarts: int = 2
    seed: int = 0


@dataclass(frozen=True)
class FitResult:
    parameters: dict[str, float]
    stress_before: float
    stress_after: float
    n_evaluations: int
    target: str
    base: str

    def __post_init__(self) -> None:
        if self.stress_after > self.stress_before + 1e-9:
            raise FitError("fit worsened the objective; optimizer contract violated")

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "base": self.base,
            "parameters": dict(self.parameters),
            "stress_before": self.stress_before,
            "stress_after": self.stress_after,
            "n_evaluations": self.n_evaluations,
        }


class ComponentArrays(NamedTuple):
    """Vectorized unfactored formula terms for a list of pairs."""

    dl: np.ndarray
    dc: np.ndarray
    dh: np.ndarray
    rt: np.ndarray

    def delta_e(self) -> np.ndarray:
        radicand = self.dl**2 + self.dc**2 + self.dh**2 + self.rt
        return np.sqrt(np.maximum(radicand, 0.0))


def _pair_colors(pair) -> tuple[LabColor, LabColor]:
    if hasattr(pair, "reference") and hasattr(pair, "sample"):
        return pair.reference, pair.sample
    reference, sample = pair
    return reference, sample


def components_arrays(pairs: Sequence, base: str = "CIEDE2000") -> ComponentArrays:
    """Evaluate base_components over pairs (tuples or record objects)."""
    canonical = normalize_formula(base)
    rows = [base_components(canonical, *_pair_colors(p)) for p in pairs]
    return ComponentArrays(
        np.array([c.dl for c in rows]),
        np.array([c.dc for c in rows]),
        np.array([c.dh for c in rows]),
        np.array([c.rt for c in rows]),
    )


def _spec_names_and_start(spec: FitSpec) -> tuple[list[str], np.ndarray]:
    if not spec.initial:
        raise FitError("fit spec has no initial point")
    names = [name for name, _ in spec.initial]
    values = np.array([value for _, value in spec.initial], dtype=float)
    return names, values


def minimize_stress(objective: Callable[[np.ndarray], float], spec: FitSpec) -> FitResult:
    """Minimize a STRESS objective over the parameter vector of ``spec``.

    Parameters listed in ``spec.positive`` are searched in log space;
    ``spec.bounds`` act as steep penalties. Deterministic: repeated runs
    return identical results. After the first simplex run the search is
    restarted from the best point with shrunken steps until no further
    improvement (at most ``spec.restarts`` times).
    """
    names, start = _spec_names_and_start(spec)
    log_mask = np.array([name in spec.positive for name in names])
    if (start[log_mask] <= 0.0).any():
        raise FitError("positivity-constrained parameters need positive initial values")
    bounds = {name: (lo, hi) for name, lo, hi in spec.bounds}

    def decode(x: np.ndarray) -> np.ndarray:
        raw = x.copy()
        raw[log_mask] = np.exp(raw[log_mask])
        return raw

    def penalized(x: np.ndarray) -> float:
        raw = decode(x)
        excess = 0.0
        for i, name in enumerate(names):
            if name in bounds:
                lo, hi = bounds[name]
                if raw[i] < lo:
                    excess += lo - raw[i]
                elif raw[i] > hi:
                    excess += raw[i] - hi
        if excess > 0.0:
            return _PENALTY * (1.0 + excess)
        return float(objective(raw))

    x0 = start.copy()
    x0[log_mask] = np.log(x0[log_mask])
    stress_before = penalized(x0)
    if not math.isfinite(stress_before) or stress_before >= _PENALTY:
        raise FitError("objective is not finite and feasible at the initial point")

    steps = np.where(log_mask, 0.25, np.maximum(0.05, 0.25 * np.abs(x0)))
    best = nelder_mead(penalized, x0, steps=steps, diameter_tol=spec.tolerance, max_evaluations=spec.max_evaluations)
    total = best.n_evaluations
    for _ in range(spec.restarts):
        again = nelder_mead(
            penalized,
            np.asarray(best.x),
            steps=steps * 0.1,
            diameter_tol=spec.tolerance,
            max_evaluations=spec.max_evaluations,
        )
        total += again.n_evaluations
        improved = again.fun < best.fun - 1e-12
        if again.fun < best.fun:
            best = again
        if not improved:
            break

    solution = decode(np.asarray(best.x))
    parameters = {name: float(value) for name, value in zip(names, solution)}
    return FitResult(
        parameters=parameters,
        stress_before=float(stress_before),
        stress_after=float(min(best.fun, stress_before)),
        n_evaluations=total,
        target=spec.target,
        base=normalize_formula(spec.base),
    )


def _validated_dv(pairs: Sequence, dv: Sequence[float], minimum: int) -> np.ndarray:
    v = np.asarray(dv, dtype=float)
    if v.ndim != 1 or v.size != len(pairs):
        raise DomainError("dv must hold one value per pair")
    if len(pairs) < minimum:
        raise FitError(f"fit needs at least {minimum} pairs, got {len(pairs)}")
    if not np.isfinite(v).all():
        raise DomainError("dv values must be finite")
    if not (v > 0.0).any():
        raise FitError("degenerate data: all visual differences are zero")
    if (v <= 0.0).any():
        raise FitError("fit requires strictly positive visual differences")
    return v


def fit_parametric_factors(
    pairs: Sequence,
    dv: Sequence[float],
    base: str = "CIEDE2000",
    target: str = "kl_only",
    spec: FitSpec | None = None,
) -> FitResult:
    """Fit kL (and optionally kC) of the base formula, kH fixed at 1."""
    if target not in ("kl_only", "kl_kc"):
        raise FitError(f"unknown parametric-factor target: {target!r}")
    v = _validated_dv(pairs, dv, minimum=10)
    comps = components_arrays(pairs, base)

    if target == "kl_only":
        initial = (("kl", 1.0),)

        def objective(params: np.ndarray) -> float:
            (kl,) = params
            radicand = (comps.dl / kl) ** 2 + comps.dc**2 + comps.dh**2 + comps.rt
            return stress(v, np.sqrt(np.maximum(radicand, 0.0))).stress

    else:
        initial = (("kl", 1.0), ("kc", 1.0))

        def objective(params: np.ndarray) -> float:
            kl, kc = params
            radicand = (comps.dl / kl) ** 2 + (comps.dc / kc) ** 2 + comps.dh**2 + comps.rt / kc
            return stress(v, np.sqrt(np.maximum(radicand, 0.0))).stress

    resolved = replace(
        spec or FitSpec(target=target, base=base),
        target=target,
        base=base,
        initial=initial,
        positive=tuple(name for name, _ in initial),
        bounds=(),
    )
    return minimize_stress(objective, resolved)


def fit_dl_line(
    pairs: Sequence,
    dv: Sequence[float],
    magnitudes: Sequence[float],
    base: str = "CIEDE2000",
    spec: FitSpec | None = None,
) -> FitResult:
    """Fit the lightness-divisor line D_L = a·ΔE + b of the magnitude
    correction. Needs at least two distinct magnitude levels."""
    v = _validated_dv(pairs, dv, minimum=10)
    if len(magnitudes) != len(pairs):
        raise DomainError("magnitudes must hold one label per pair")
    if len(set(magnitudes)) < 2:
        raise FitError("lightness line is unidentifiable from a single magnitude level")
    comps = components_arrays(pairs, base)
    base_de = comps.delta_e()

    def objective(params: np.ndarray) -> float:
        a, b = params
        d_l = a * base_de + b
        lowest = float(d_l.min())
        if lowest <= 1e-9:
            return _PENALTY * (1.0 + (1e-9 - lowest))
        radicand = (comps.dl / d_l) ** 2 + comps.dc**2 + comps.dh**2 + comps.rt
        return stress(v, np.sqrt(np.maximum(radicand, 0.0))).stress

    resolved = replace(
        spec or FitSpec(target="dl_line", base=base),
        target="dl_line",
        base=base,
        initial=(("a", 0.05), ("b", 0.5)),
        positive=(),
        bounds=(),
    )
    return minimize_stress(objective, resolved)


def fit_power(
    pairs: Sequence,
    dv: Sequence[float],
    base: str = "CIEDE2000",
    kind: str = "power_c",
    dl_coefficients: tuple[float, float] | None = None,
    magnitudes: Sequence[float] | None = None,
    mode: str = "sequential",
    spec: FitSpec | None = None,
) -> FitResult:
    """Fit the power exponent c (over the base ΔE) or d (over the
    magnitude-corrected ΔE).

    For kind="magnitude_power_d" the line coefficients (a, b) are taken
    from ``dl_coefficients`` when given; otherwise mode="sequential"
    first fits them with fit_dl_line (requiring ``magnitudes``), while
    mode="joint" searches (a, b, d) simultaneously.
    """
    if kind not in ("power_c", "magnitude_power_d"):
        raise FitError(f"unknown power-fit kind: {kind!r}")
    if mode not in ("sequential", "joint"):
        raise FitError(f"unknown power-fit mode: {mode!r}")
    v = _validated_dv(pairs, dv, minimum=10)
    comps = components_arrays(pairs, base)
    base_de = comps.delta_e()

    if kind == "power_c":

        def objective(params: np.ndarray) -> float:
            (c,) = params
            return stress(v, base_de**c).stress

        resolved = replace(
            spec or FitSpec(target=kind, base=base),
            target=kind,
            base=base,
            initial=(("c", 1.0),),
            positive=("c",),
            bounds=(("c", 0.0, _MAX_EXPONENT),),
        )
        return minimize_stress(objective, resolved)

    def magnitude_prediction(a: float, b: float) -> np.ndarray | None:
        d_l = a * base_de + b
        if float(d_l.min()) <= 1e-9:
            return None
        radicand = (comps.dl / d_l) ** 2 + comps.dc**2 + comps.dh**2 + comps.rt
        return np.sqrt(np.maximum(radicand, 0.0))

    if mode == "joint" and dl_coefficients is None:

        def objective(params: np.ndarray) -> float:
            a, b, d = params
            pred = magnitude_prediction(a, b)
            if pred is None:
                return _PENALTY
            return stress(v, pred**d).stress

        resolved = replace(
            spec or FitSpec(target=kind, base=base),
            target=kind,
            base=base,
            initial=(("a", 0.05), ("b", 0.5), ("d", 1.0)),
            positive=("d",),
            bounds=(("d", 0.0, _MAX_EXPONENT),),
        )
        return minimize_stress(objective, resolved)

    if dl_coefficients is not None:
        a, b = dl_coefficients
    else:
        if magnitudes is None:
            raise FitError("sequential magnitude-power fit needs magnitudes or dl_coefficients")
        line = fit_dl_line(pairs, dv, magnitudes, base=base, spec=spec)
        a, b = line.parameters["a"], line.parameters["b"]
    fixed = magnitude_prediction(a, b)
    if fixed is None:
        raise FitError("lightness divisor is non-positive over the data")

    def objective(params: np.ndarray) -> float:
        (d,) = params
        return stress(v, fixed**d).stress

    resolved = replace(
        spec or FitSpec(target=kind, base=base),
        target=kind,
        base=base,
        initial=(("d", 1.0),),
        positive=("d",),
        bounds=(("d", 0.0, _MAX_EXPONENT),),
    )
    result = minimize_stress(objective, resolved)
    parameters = {"a": float(a), "b": float(b), **result.parameters}
    return replace(result, parameters=parameters)
