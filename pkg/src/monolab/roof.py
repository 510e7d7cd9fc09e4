"""Convex-roof optimization over ensemble decompositions.

Every ensemble of m pure states realizing rho is obtained from the
eigendecomposition (lambda_i, v_i) by a left-unitary m x r mixing matrix W:

    |psi~_j> = sum_i W[j, i] sqrt(lambda_i) |v_i>,   p_j = <psi~_j|psi~_j>.

The isometry is parametrized by orthonormalizing A = I_{m x r} + Z (Z complex)
through a Cholesky factor of A^dag A, so Z = 0 is the eigen-ensemble. The
search is L-BFGS on finite-difference gradients with seeded random restarts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from .errors import CapabilityError, ConsistencyError, DomainError
from .states import EIG_CLAMP, QuantumState, rng_for

ISOMETRY_TOL = 1e-10
RECON_TOL = 1e-8
ZERO_WEIGHT = 1e-14


@dataclass(frozen=True)
class RoofBudget:
    """Optimizer effort for one roof evaluation.

    ``max_iter`` caps optimizer iterations per restart; ``cardinality``
    overrides the default ensemble size rank**2 (``"rank"`` uses rank).
    Restart 0 starts at the eigen-ensemble, later ones at seeded random
    charts of scale ``start_scale``.
    """

    restarts: int = 3
    max_iter: int = 500
    cardinality: int | str | None = None
    seed: int = 0
    start_scale: float = 0.6

    def to_dict(self):
        return {"restarts": self.restarts, "max_iter": self.max_iter,
                "cardinality": self.cardinality, "seed": self.seed}


DEFAULT_BUDGET = RoofBudget()


@dataclass(frozen=True)
class RoofProblem:
    mode: str  # "infimum" | "supremum"
    objective: Callable[[np.ndarray], np.ndarray]
    budget: RoofBudget = DEFAULT_BUDGET

    def __post_init__(self):
        if self.mode not in ("infimum", "supremum"):
            raise DomainError(f"roof mode must be infimum or supremum, got {self.mode!r}")


@dataclass
class Ensemble:
    weights: np.ndarray
    states: np.ndarray  # (m, D) normalized rows
    dims: tuple

    def density(self) -> np.ndarray:
        return (self.states.T * self.weights) @ self.states.conj()

    def members(self):
        return [(float(p), QuantumState._trusted(s, self.dims, True)) for p, s in zip(self.weights, self.states)]

    def __len__(self):
        return len(self.weights)


@dataclass
class RoofResult:
    value: float
    ensemble: Ensemble
    restarts_converged: int
    spread: float
    mode: str
    restart_values: list = field(default_factory=list)
    eigen_value: float = float("nan")

    def summary(self):
        return {
            "mode": self.mode,
            "value": self.value,
            "eigen_ensemble_value": self.eigen_value,
            "restarts": len(self.restart_values),
            "restarts_converged": self.restarts_converged,
            "spread": self.spread,
            "cardinality": len(self.ensemble),
        }


def _eigen(rho: np.ndarray):
    w, v = np.linalg.eigh(rho)
    keep = w > EIG_CLAMP
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    return w, v


def _members(w, v, mixing):
    """Unnormalized member rows W @ diag(sqrt(w)) @ V^T."""
    return mixing @ (np.sqrt(w)[:, None] * v.T)


def ensemble_from_mixing(state: QuantumState, mixing: np.ndarray) -> Ensemble:
    """Ensemble of ``state`` generated by the isometry ``mixing`` (m x rank)."""
    w, v = _eigen(state.density())
    mixing = np.asarray(mixing, dtype=complex)
    if mixing.ndim != 2 or mixing.shape[1] != w.size:
        raise DomainError(f"mixing must have {w.size} columns (rank of rho), got shape {mixing.shape}")
    if np.max(np.abs(mixing.conj().T @ mixing - np.eye(w.size))) > ISOMETRY_TOL:
        raise DomainError("mixing matrix columns are not orthonormal")
    return _ensemble(w, v, mixing, state.dims)


def _ensemble(w, v, mixing, dims) -> Ensemble:
    tilde = _members(w, v, mixing)
    p = np.sum(np.abs(tilde) ** 2, axis=1)
    keep = p >= ZERO_WEIGHT
    p, tilde = p[keep], tilde[keep]
    return Ensemble(p, tilde / np.sqrt(p)[:, None], tuple(dims))


def _chart(x: np.ndarray, m: int, r: int) -> np.ndarray:
    half = m * r
    a = (x[:half] + 1j * x[half:]).reshape(m, r)
    a[:r] += np.eye(r)
    # Gram-Schmidt via Cholesky: W = A R^{-1} with A^dag A = R^dag R
    try:
        lo = np.linalg.cholesky(a.conj().T @ a)
    except np.linalg.LinAlgError:
        return np.eye(m, r, dtype=complex)
    return solve_triangular(lo.conj(), a.T, lower=True).T


def _average(objective, w, v, mixing) -> float:
    tilde = _members(w, v, mixing)
    p = np.sum(np.abs(tilde) ** 2, axis=1)
    keep = p >= ZERO_WEIGHT
    vals = objective(tilde[keep] / np.sqrt(p[keep])[:, None])
    return float(np.dot(p[keep], vals))


def _descend(fun, x0, budget: RoofBudget):
    res = minimize(fun, x0, method="L-BFGS-B",
                   options={"maxiter": budget.max_iter, "maxfun": 10**7, "ftol": 1e-15, "gtol": 1e-10})
    if res.fun <= fun(x0):
        return res.x, res.fun, bool(res.success)
    return x0, fun(x0), False


def roof_optimize(state: QuantumState, problem: RoofProblem) -> RoofResult:
    """Optimize sum_j p_j objective(psi_j) over ensembles of ``state``.

    Returns the best restart (ties to the lowest restart index).  The first
    restart starts from the eigen-ensemble, so the result never does worse
    than it.
    """
    budget = problem.budget
    sign = 1.0 if problem.mode == "infimum" else -1.0
    rho = state.density()
    w, v = _eigen(rho)
    r = w.size
    if state.is_pure or r == 1:
        ens = _ensemble(w, v, np.eye(r, dtype=complex), state.dims)
        val = float(problem.objective(ens.states)[0])
        return RoofResult(val, ens, 1, 0.0, problem.mode, [val], val)
    if budget.restarts <= 0 or budget.max_iter <= 0:
        raise CapabilityError("convex-roof optimization needs a positive restart and iteration budget")
    if budget.cardinality is None:
        m = r * r
    elif budget.cardinality == "rank":
        m = r
    else:
        m = int(budget.cardinality)
    if m < r:
        raise DomainError(f"ensemble cardinality {m} is below rank {r}")

    eigen_value = _average(problem.objective, w, v, np.eye(m, r, dtype=complex))

    def fun(x):
        return sign * _average(problem.objective, w, v, _chart(x, m, r))

    values, points, n_conv = [], [], 0
    for k in range(budget.restarts):
        if k == 0:
            x0 = np.zeros(2 * m * r)
        else:
            x0 = budget.start_scale * rng_for(budget.seed, k).standard_normal(2 * m * r)
        x, fx, conv = _descend(fun, x0, budget)
        n_conv += conv
        values.append(sign * fx)
        points.append(x)

    best = int(np.argmin([sign * val for val in values]))
    value = values[best]
    mixing = _chart(points[best], m, r)
    ens = _ensemble(w, v, mixing, state.dims)
    err = np.max(np.abs(ens.density() - rho))
    if err > RECON_TOL:
        raise ConsistencyError(f"roof ensemble reconstructs rho only to {err:.2e}")
    if sign * (value - eigen_value) > 1e-9:
        raise ConsistencyError("roof optimum is worse than the eigen-ensemble start")
    return RoofResult(float(value), ens, n_conv, float(max(values) - min(values)),
                      problem.mode, [float(x) for x in values], float(eigen_value))


def assisted_evaluate(measure, state: QuantumState, cut=None, roof: RoofBudget | None = None):
    """Assisted (supremum) version of ``measure`` on a bipartite state.

    Concurrence on two qubits uses the closed form sum of Wootters lambdas.
    """
    from dataclasses import replace

    from .measures import evaluate

    return evaluate(replace(measure, assisted=True, tilde=False), state, cut, roof)
