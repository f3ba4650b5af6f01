"""Discrimination-ellipsoid fitting and a*b*-plane ellipse geometry.

The ellipsoid model predicts a color difference from CIELAB component
differences (ordering Δa*, Δb*, ΔL*):

    ΔE² = k₁Δa*² + k₂Δa*Δb* + k₃Δb*² + k₄Δa*ΔL* + k₅Δb*ΔL* + k₆ΔL*²

which is the quadratic form of the symmetric matrix
M = [[k₁, k₂/2, k₄/2], [k₂/2, k₃, k₅/2], [k₄/2, k₅/2, k₆]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .color import LabColor
from .errors import DomainError, FitError, GeometryError
from .simplex import nelder_mead
from .stats import stress


@dataclass(frozen=True)
class EllipsoidFit:
    """Fitted ellipsoid coefficients for one color center."""

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    fit_stress: float
    center: LabColor
    n_pairs: int
    stress_before: float = 0.0
    n_evaluations: int = 0

    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        return (self.k1, self.k2, self.k3, self.k4, self.k5, self.k6)

    def matrix(self) -> np.ndarray:
        k1, k2, k3, k4, k5, k6 = self.coefficients()
        return np.array(
            [
                [k1, k2 / 2.0, k4 / 2.0],
                [k2 / 2.0, k3, k5 / 2.0],
                [k4 / 2.0, k5 / 2.0, k6],
            ]
        )


@dataclass(frozen=True)
class PlaneEllipse:
    """Unit-ΔE contour of the ellipsoid in the ΔL* = 0 plane."""

    semi_major: float
    semi_minor: float
    theta_degrees: float


def predicted_delta_e(fit: EllipsoidFit, diffs: Sequence[Sequence[float]]) -> np.ndarray:
    """Model ΔE for rows of (Δa*, Δb*, ΔL*)."""
    d = np.asarray(diffs, dtype=float)
    quad = np.einsum("ij,jk,ik->i", d, fit.matrix(), d)
    return np.sqrt(np.maximum(quad, 0.0))


def _as_diff_matrix(diffs: Sequence[Sequence[float]]) -> np.ndarray:
    d = np.asarray(diffs, dtype=float)
    if d.ndim != 2 or d.shape[1] != 3:
        raise DomainError("diffs must be rows of (Δa*, Δb*, ΔL*)")
    if not np.isfinite(d).all():
        raise DomainError("diffs must be finite")
    return d


def _lower_triangular(params: np.ndarray) -> np.ndarray:
    # Log-diagonal Cholesky factor: positive definiteness by construction.
    out = np.zeros((3, 3))
    out[0, 0] = math.exp(params[0])
    out[1, 1] = math.exp(params[1])
    out[2, 2] = math.exp(params[2])
    out[1, 0] = params[3]
    out[2, 0] = params[4]
    out[2, 1] = params[5]
    return out


def fit_ellipsoid(
    diffs: Sequence[Sequence[float]],
    dv: Sequence[float],
    center: LabColor,
    diameter_tol: float = 1e-8,
    max_evaluations: int | None = None,
    restarts: int = 2,
) -> EllipsoidFit:
    """Fit the six coefficients by minimizing STRESS against ΔV.

    The search runs over a lower-triangular square root of M, so every
    candidate is positive definite. After convergence the coefficients
    are rescaled so the STRESS scaling factor F equals 1, pinning the
    otherwise scale-free solution to the ΔV units.
    """
    d = _as_diff_matrix(diffs)
    v = np.asarray(dv, dtype=float)
    if v.ndim != 1 or v.size != d.shape[0]:
        raise DomainError("dv must be one value per diff row")
    if d.shape[0] < 6:
        raise FitError(f"ellipsoid fit needs at least 6 pairs, got {d.shape[0]}")
    if not (np.isfinite(v).all() and (v > 0.0).all()):
        raise DomainError("dv values must be finite and positive")
    if np.linalg.matrix_rank(d) < 3:
        raise FitError("degenerate geometry: diffs span fewer than 3 dimensions")

    norms = np.linalg.norm(d, axis=1)
    # Isotropic least-squares radius: dv ≈ r·|d|.
    r = float((v @ norms) / (norms @ norms))

    def objective(params: np.ndarray) -> float:
        lower = _lower_triangular(params)
        pred = np.linalg.norm(d @ lower, axis=1)
        return stress(v, pred).stress

    x0 = np.array([math.log(r), math.log(r), math.log(r), 0.0, 0.0, 0.0])
    steps = np.array([0.4, 0.4, 0.4, 0.6 * r, 0.6 * r, 0.6 * r])
    stress_before = objective(x0)

    best = nelder_mead(objective, x0, steps=steps, diameter_tol=diameter_tol, max_evaluations=max_evaluations)
    total_evaluations = best.n_evaluations
    for _ in range(restarts):
        restarted = nelder_mead(
            objective,
            np.asarray(best.x),
            steps=steps * 0.1,
            diameter_tol=diameter_tol,
            max_evaluations=max_evaluations,
        )
        total_evaluations += restarted.n_evaluations
        if restarted.fun >= best.fun - 1e-12:
            best = restarted if restarted.fun < best.fun else best
            break
        best = restarted

    lower = _lower_triangular(np.asarray(best.x))
    matrix = lower @ lower.T
    pred = np.linalg.norm(d @ lower, axis=1)
    report = stress(v, pred)
    # F rescales predictions onto ΔV; absorbing it into the
    # coefficients makes predictions unit-consistent with ΔV (F = 1).
    matrix = matrix * (report.f_scale ** 2)
    fit = EllipsoidFit(
        k1=float(matrix[0, 0]),
        k2=float(2.0 * matrix[0, 1]),
        k3=float(matrix[1, 1]),
        k4=float(2.0 * matrix[0, 2]),
        k5=float(2.0 * matrix[1, 2]),
        k6=float(matrix[2, 2]),
        fit_stress=report.stress,
        center=center,
        n_pairs=int(d.shape[0]),
        stress_before=stress_before,
        n_evaluations=total_evaluations,
    )
    return fit


def scale_fit(fit: EllipsoidFit, f: float) -> EllipsoidFit:
    """Rescale so predicted ΔE values multiply by 1/f (semi-axes by f)."""
    if not (math.isfinite(f) and f > 0.0):
        raise DomainError(f"scale factor must be positive, got {f!r}")
    inv_sq = 1.0 / (f * f)
    return replace(
        fit,
        k1=fit.k1 * inv_sq,
        k2=fit.k2 * inv_sq,
        k3=fit.k3 * inv_sq,
        k4=fit.k4 * inv_sq,
        k5=fit.k5 * inv_sq,
        k6=fit.k6 * inv_sq,
    )


def plane_ellipse(fit: EllipsoidFit) -> PlaneEllipse:
    """ΔL* = 0 section: semi-axes 1/sqrt(eigenvalue), major-axis angle
    from +a* in [0°, 180°); a circle reports 0°."""
    k1, k2, k3 = fit.k1, fit.k2, fit.k3
    half_trace = 0.5 * (k1 + k3)
    radius = math.hypot(0.5 * (k1 - k3), 0.5 * k2)
    lam_small = half_trace - radius
    lam_large = half_trace + radius
    if not lam_small > 0.0:
        raise GeometryError("plane section is not positive definite")
    semi_major = 1.0 / math.sqrt(lam_small)
    semi_minor = 1.0 / math.sqrt(lam_large)
    if radius <= 1e-12 * max(1.0, abs(lam_large)):
        theta = 0.0
    elif k2 == 0.0:
        theta = 0.0 if k1 <= k3 else 90.0
    else:
        # Eigenvector of the smaller eigenvalue: (k2/2, λ - k1).
        theta = math.degrees(math.atan2(lam_small - k1, 0.5 * k2)) % 180.0
    return PlaneEllipse(semi_major, semi_minor, theta)
