"""Discrete optimal transport solvers.

``exact_ot`` solves the transportation LP exactly at desk scale (n*m <= 64)
and serves as the oracle for ``sinkhorn_ot``, the entropic-regularized solver
used when instances grow. The Sinkhorn iteration runs in the log domain with
epsilon scaling (warm starts from larger regularization), so very small
epsilon values stay numerically stable; the returned cost is evaluated on the
plan rounded onto the transport polytope, which keeps it feasible even when
the iteration stops early.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from ..errors import SizeLimitError

EXACT_SIZE_LIMIT = 64

_MARGINAL_SUM_TOL = 1e-9


def _validate_instance(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cost = np.asarray(cost, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if cost.ndim != 2:
        raise ValueError(f"cost must be a 2-D matrix, got shape {cost.shape}")
    n, m = cost.shape
    if a.shape != (n,) or b.shape != (m,):
        raise ValueError(f"weight shapes {a.shape}, {b.shape} do not match cost shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix contains non-finite entries")
    if np.any(cost < 0):
        raise ValueError("cost matrix must be nonnegative")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("weight vectors must be nonnegative")
    if abs(a.sum() - 1.0) > _MARGINAL_SUM_TOL or abs(b.sum() - 1.0) > _MARGINAL_SUM_TOL:
        raise ValueError("weight vectors must each sum to 1 within 1e-9")
    return cost, a, b


def exact_ot(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Minimal transport cost of the transportation LP, solved exactly.

    Restricted to n*m <= EXACT_SIZE_LIMIT; larger instances belong to
    ``sinkhorn_ot``.
    """
    cost, a, b = _validate_instance(cost, a, b)
    n, m = cost.shape
    if n * m > EXACT_SIZE_LIMIT:
        raise SizeLimitError(f"exact solver limited to n*m <= {EXACT_SIZE_LIMIT}, got {n}x{m}")
    a_eq = np.zeros((n + m, n * m))
    b_eq = np.concatenate([a, b])
    for i in range(n):
        a_eq[i, i * m : (i + 1) * m] = 1.0
    for j in range(m):
        a_eq[n + j, j::m] = 1.0
    result = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if result.status != 0:
        raise RuntimeError(f"transportation LP failed: {result.message}")
    return max(0.0, float(result.fun))


@dataclass(frozen=True)
class SinkhornResult:
    value: float
    converged: bool
    iterations: int


def _round_to_polytope(plan: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project an almost-feasible plan onto the transport polytope
    (scale rows, scale columns, then spread the residual mass)."""
    plan = plan.copy()
    rows = plan.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        row_scale = np.where(rows > 0, np.minimum(1.0, a / np.where(rows > 0, rows, 1.0)), 0.0)
    plan *= row_scale[:, None]
    cols = plan.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        col_scale = np.where(cols > 0, np.minimum(1.0, b / np.where(cols > 0, cols, 1.0)), 0.0)
    plan *= col_scale[None, :]
    residual_a = a - plan.sum(axis=1)
    residual_b = b - plan.sum(axis=0)
    total = residual_a.sum()
    if total > 0:
        plan += np.outer(residual_a, residual_b) / total
    return plan


def sinkhorn_ot(
    cost: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    eps: float,
    max_iters: int = 5000,
    tol: float = 1e-9,
    anneal: bool = True,
) -> SinkhornResult:
    """Entropic-regularized transport cost via log-domain alternating scaling.

    Stops when the L1 marginal violation of the implied plan drops below
    ``tol`` or after ``max_iters`` total iterations; ``converged`` reports
    which. With ``anneal`` the potentials are warm-started by halving the
    regularization from max(cost) down to ``eps``.
    """
    cost, a, b = _validate_instance(cost, a, b)
    if eps <= 0:
        raise ValueError("eps must be positive")
    with np.errstate(divide="ignore"):
        log_a = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)
        log_b = np.where(b > 0, np.log(np.where(b > 0, b, 1.0)), -np.inf)
    f = np.zeros(len(a))
    g = np.zeros(len(b))

    def plan_at(e: float) -> np.ndarray:
        log_plan = (f[:, None] + g[None, :] - cost) / e
        return np.exp(np.where(np.isfinite(log_plan), log_plan, -np.inf))

    schedule = []
    if anneal:
        e = float(cost.max())
        while e > eps:
            schedule.append(e)
            e /= 2.0
    schedule.append(eps)

    iterations = 0
    converged = False
    for level, e in enumerate(schedule):
        final = level == len(schedule) - 1
        budget = (max_iters - iterations) if final else min(20, max_iters - iterations)
        for _ in range(budget):
            iterations += 1
            f = e * (log_a - logsumexp((g[None, :] - cost) / e, axis=1))
            g = e * (log_b - logsumexp((f[:, None] - cost) / e, axis=0))
            if final and iterations % 10 == 0:
                plan = plan_at(e)
                violation = np.abs(plan.sum(axis=1) - a).sum() + np.abs(plan.sum(axis=0) - b).sum()
                if violation < tol:
                    converged = True
                    break
        if final:
            break

    if not converged:
        plan = plan_at(eps)
        violation = np.abs(plan.sum(axis=1) - a).sum() + np.abs(plan.sum(axis=0) - b).sum()
        converged = bool(violation < tol)
    plan = _round_to_polytope(plan_at(eps), a, b)
    return SinkhornResult(value=float((plan * cost).sum()), converged=converged, iterations=iterations)
