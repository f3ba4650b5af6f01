"""Deterministic derivative-free simplex minimizer (Nelder-Mead).

No randomness anywhere: fixed initial simplex, stable ordering of
vertices on ties, fixed reflection/expansion/contraction/shrink
coefficients. Identical inputs always produce identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import FitError

_REFLECT = 1.0
_EXPAND = 2.0
_CONTRACT = 0.5
_SHRINK = 0.5


@dataclass(frozen=True)
class SimplexResult:
    x: tuple[float, ...]
    fun: float
    n_evaluations: int
    converged: bool


def _diameter(vertices: np.ndarray) -> float:
    best = vertices[0]
    return float(max(np.max(np.abs(v - best)) for v in vertices[1:]))


def nelder_mead(
    fun: Callable[[np.ndarray], float],
    x0: Sequence[float],
    steps: Sequence[float] | None = None,
    diameter_tol: float = 1e-8,
    max_evaluations: int | None = None,
) -> SimplexResult:
    """Minimize ``fun`` starting from ``x0``.

    The initial simplex is x0 plus one vertex per coordinate offset by
    ``steps``. Terminates when the simplex diameter (max infinity-norm
    distance to the best vertex) drops below ``diameter_tol`` or the
    evaluation budget (default 2000 per dimension) is exhausted.
    Non-finite objective values during the search are treated as +inf.
    """
    start = np.asarray(x0, dtype=float)
    if start.ndim != 1 or start.size == 0 or not np.isfinite(start).all():
        raise FitError(f"invalid start point for simplex search: {x0!r}")
    dim = start.size
    if steps is None:
        step_vec = np.full(dim, 0.25)
    else:
        step_vec = np.asarray(steps, dtype=float)
        if step_vec.shape != (dim,) or not np.isfinite(step_vec).all() or (step_vec == 0.0).any():
            raise FitError(f"invalid step sizes for simplex search: {steps!r}")
    budget = max_evaluations if max_evaluations is not None else 2000 * dim

    evaluations = 0

    def evaluate(x: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        value = float(fun(x))
        return value if math.isfinite(value) else math.inf

    vertices = np.empty((dim + 1, dim))
    vertices[0] = start
    for i in range(dim):
        vertices[i + 1] = start
        vertices[i + 1, i] += step_vec[i]
    values = np.array([evaluate(v) for v in vertices])
    if not math.isfinite(values[0]):
        raise FitError("objective is non-finite at the start point")

    def order() -> None:
        nonlocal vertices, values
        idx = np.argsort(values, kind="stable")
        vertices = vertices[idx]
        values = values[idx]

    order()
    converged = False
    while evaluations < budget:
        if _diameter(vertices) < diameter_tol:
            converged = True
            break
        centroid = vertices[:-1].mean(axis=0)
        worst = vertices[-1]
        reflected = centroid + _REFLECT * (centroid - worst)
        f_reflected = evaluate(reflected)
        if f_reflected < values[0]:
            expanded = centroid + _EXPAND * (centroid - worst)
            f_expanded = evaluate(expanded)
            if f_expanded < f_reflected:
                vertices[-1], values[-1] = expanded, f_expanded
            else:
                vertices[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            vertices[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + _CONTRACT * (centroid - worst)
            else:
                contracted = centroid - _CONTRACT * (centroid - worst)
            f_contracted = evaluate(contracted)
            if f_contracted < min(f_reflected, values[-1]):
                vertices[-1], values[-1] = contracted, f_contracted
            else:
                for i in range(1, dim + 1):
                    vertices[i] = vertices[0] + _SHRINK * (vertices[i] - vertices[0])
                    values[i] = evaluate(vertices[i])
        order()

    if not math.isfinite(values[0]):
        raise FitError("objective was non-finite at every sampled point")
    return SimplexResult(tuple(float(v) for v in vertices[0]), float(values[0]), evaluations, converged)
