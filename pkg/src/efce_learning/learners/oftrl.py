"""Optimistic FTRL with a logarithmic regularizer on lifted polytopes.

The learner lives on {(lam, y) : 0 <= lam <= 1, y in lam * D} for a simplex
or treeplex D and returns the point X = y / lam. Each step maximizes

    eta * <S, (lam, y)> + log(lam) + sum(log(y))

where S is the cumulative lifted utility plus the last one (one-step
recency prediction). The objective is strictly concave, so the maximizer is
unique and strictly interior in y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import RegretMinimizer
from ..efg.sequence_form import Treeplex

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 100


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class LiftedPoint:
    lam: float
    y: np.ndarray

    @property
    def point(self) -> np.ndarray:
        return self.y / self.lam

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.lam], self.y))


def lift_utility(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(-<x, u>, u): zero on every lifted point (lam, lam * x)."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if u.shape != x.shape:
        raise ValueError(f"utility shape {u.shape} does not match point shape {x.shape}")
    return np.concatenate(([-float(np.dot(x, u))], u))


@dataclass
class OftrlState:
    """Everything a step depends on.

    ``warm_start`` only seeds the solver; the result agrees with a cold solve
    to within the solver tolerance.
    """

    domain: Treeplex
    eta: float
    cumulative: np.ndarray
    last: np.ndarray
    warm_start: LiftedPoint | None = None

    @classmethod
    def initial(cls, domain: Treeplex, eta: float) -> "OftrlState":
        if not eta > 0:
            raise ValueError(f"learning rate must be positive, got {eta}")
        z = np.zeros(domain.size + 1)
        return cls(domain, float(eta), z, z.copy())

    @property
    def prediction_sum(self) -> np.ndarray:
        return self.cumulative + self.last


def _newton(A: np.ndarray, rhs: np.ndarray, c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Minimize -<c, z> - sum(log z) subject to A z = rhs from an interior z.

    Newton steps on the equality-constrained problem with a fraction-to-
    boundary rule and Armijo backtracking. Stops when the Newton step is
    below NEWTON_TOL in the local infinity norm (|dz / z|).
    """
    z = z.copy()

    def f(v):
        return -float(np.dot(c, v)) - float(np.sum(np.log(v)))

    fz = f(z)
    for _ in range(NEWTON_MAX_ITER):
        z2 = z * z
        K = (A * z2) @ A.T
        rp = rhs - A @ z
        base = z2 * c + z
        try:
            w = np.linalg.solve(K, A @ base - rp)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular Newton system: {exc}") from None
        dz = base - z2 * (A.T @ w)
        r = dz / z
        res = float(np.max(np.abs(r)))
        if not np.isfinite(res):
            raise SolverError("Newton step is not finite")
        if res <= NEWTON_TOL:
            return z + dz
        delta2 = float(np.dot(r, r))
        if delta2 < 0.0625:
            # Inside the quadratic-convergence region: full step, no search.
            z = z + dz
            fz = f(z)
            continue
        step = 1.0
        neg = r.min()
        if neg < -0.99:
            step = 0.99 / -neg
        while True:
            cand = z + step * dz
            fc = f(cand)
            if fc <= fz - 1e-4 * step * delta2 or step < 1e-12:
                break
            step *= 0.5
        if step < 1e-12:
            raise SolverError("line search failed")
        z, fz = cand, fc
    raise SolverError(f"Newton did not converge in {NEWTON_MAX_ITER} iterations (last step {res:.3g})")


def lrl_oftrl_step(state: OftrlState) -> LiftedPoint:
    """Maximize eta * <S, (lam, y)> + log barrier over the lifted domain.

    First solve with lam pinned at 1. The value as a function of lam is
    concave with slope eta * (S_0 + <S_y, y1>) + n + 1 at lam = 1; when that
    is nonnegative lam = 1 is optimal, otherwise the optimum is strictly
    inside and is found on the cone {y in lam * D} without the upper bound.
    """
    D = state.domain
    n = D.size
    S = state.prediction_sum
    eta = state.eta
    A, b = D.constraints
    warm = state.warm_start
    y0 = warm.point if warm is not None else D.uniform()

    y1 = _newton(A, b, eta * S[1:], y0)
    slope = eta * (S[0] + float(np.dot(S[1:], y1))) + n + 1
    if slope >= 0:
        return LiftedPoint(1.0, y1)

    cone = np.hstack((-b[:, None], A))
    if warm is not None and warm.lam < 1.0:
        z0 = warm.as_vector()
    else:
        z0 = np.concatenate(([1.0], y1))
    z = _newton(cone, np.zeros(len(b)), eta * S, z0)
    if z[0] > 1.0:
        # Concavity rules this out; it can only come from a sloppy solve.
        raise SolverError(f"lifted solve left the feasible range (lam = {z[0]})")
    return LiftedPoint(float(z[0]), z[1:])


def kkt_residual(domain: Treeplex, S: np.ndarray, eta: float, point: LiftedPoint) -> float:
    """First-order optimality gap of ``point`` for the lifted barrier problem.

    Solves for the best equality multipliers (plus a nonnegative multiplier
    on lam <= 1 when it is active) and returns the remaining gradient in the
    local norm, i.e. max |z * (grad - A^T w - mu e_0)|. Infinite when the
    point is not strictly interior or violates the constraints.
    """
    z = point.as_vector()
    if not np.all(z > 0) or z[0] > 1.0:
        return np.inf
    A, b = domain.constraints
    cone = np.hstack((-b[:, None], A))
    feas = float(np.max(np.abs(cone @ z), initial=0.0))
    grad = eta * np.asarray(S, dtype=float) + 1.0 / z
    cols = cone.T
    if z[0] == 1.0:
        e0 = np.zeros((len(z), 1))
        e0[0, 0] = 1.0
        cols = np.hstack((cols, e0))
    coef, *_ = np.linalg.lstsq(z[:, None] * cols, z * grad, rcond=None)
    r = z * (grad - cols @ coef)
    gap = float(np.max(np.abs(r)))
    if z[0] == 1.0:
        gap = max(gap, -float(coef[-1]))
    return max(gap, feas / max(1.0, z.max()))


class LogBarrierOFTRL(RegretMinimizer):
    """LRL-OFTRL over a simplex or treeplex; strategies are in ``domain`` coordinates."""

    def __init__(self, domain: Treeplex, eta: float):
        self.domain = domain
        self.state = OftrlState.initial(domain, eta)
        self.lifted: LiftedPoint | None = None
        self._x: np.ndarray | None = None

    @property
    def eta(self) -> float:
        return self.state.eta

    def _next(self) -> np.ndarray:
        self.lifted = lrl_oftrl_step(self.state)
        self.state.warm_start = self.lifted
        self._x = self.lifted.point
        return self._x

    def _observe(self, u) -> None:
        lifted_u = lift_utility(u, self._x)
        self.state.cumulative = self.state.cumulative + lifted_u
        self.state.last = lifted_u
