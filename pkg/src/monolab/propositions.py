"""Sampling drivers for the power-transfer and roof-dominance properties.

Each driver draws seeded states, checks one property state by state and
returns a :class:`PropositionReport` with pass counts and the worst margin
(negative margins are violations, compared against ``tol``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .measures import MeasureSpec, evaluate, parse_measure
from .monogamy import ROOF_TOL, SamplePool, SamplingConfig, residual
from .roof import RoofBudget
from .states import RandomSpec, random_state

STATEMENTS = {
    "P1": "residual >= 0 at a power implies residual >= 0 at every larger power",
    "P3": "tilde measure monogamous on pure states stays monogamous on mixed states",
    "P4": "E^2 <= roof of E^2 on mixed states",
    "P5": "assisted residual <= 0 at a power implies <= 0 at every smaller power",
    "P7": "tilde assisted measure polygamous on pure states stays polygamous on mixed states",
    "P8": "E_a^2 <= sup-roof of E^2 on mixed states",
}

_DEFAULTS = {
    "P1": dict(measure="C", grid=(1.0, 2.0, 3.0), n_samples=200, tol=1e-12),
    "P5": dict(measure="a:C", grid=(1.0, 1.5, 2.0), n_samples=200, tol=1e-12),
    "P4": dict(measure="C", grid=(2.0,), n_samples=100, tol=ROOF_TOL),
    "P8": dict(measure="C", grid=(2.0,), n_samples=100, tol=ROOF_TOL),
    "P3": dict(measure="C", grid=(2.0,), n_samples=20, tol=ROOF_TOL),
    "P7": dict(measure="C", grid=(2.0,), n_samples=20, tol=ROOF_TOL),
}


@dataclass(frozen=True)
class PropositionConfig:
    n_samples: int | None = None
    seed: int = 0
    grid: tuple | None = None
    measure: str | None = None
    mixed_rank: int = 2
    tol: float | None = None
    roof: RoofBudget | None = None


@dataclass
class PropositionReport:
    prop_id: str
    statement: str
    measure: str
    grid: list
    n_checked: int
    n_passed: int
    n_skipped: int
    worst_margin: float
    tol: float
    seed: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.n_passed == self.n_checked)

    def to_dict(self):
        return {"prop_id": self.prop_id, "statement": self.statement, "measure": self.measure,
                "grid": list(self.grid), "n_checked": self.n_checked, "n_passed": self.n_passed,
                "n_skipped": self.n_skipped, "worst_margin": self.worst_margin, "tol": self.tol,
                "seed": self.seed, "passed": self.passed, "details": self.details}


def proposition_driver(prop_id: str, config: PropositionConfig = PropositionConfig()) -> PropositionReport:
    if prop_id not in STATEMENTS:
        raise DomainError(f"unknown proposition {prop_id!r}; choose from {sorted(STATEMENTS)}")
    d = _DEFAULTS[prop_id]
    n = config.n_samples if config.n_samples is not None else d["n_samples"]
    grid = tuple(config.grid) if config.grid is not None else d["grid"]
    tol = config.tol if config.tol is not None else d["tol"]
    name = config.measure or d["measure"]
    base = parse_measure(name)
    args = (prop_id, base, n, grid, tol, config)
    if prop_id in ("P1", "P5"):
        return _sign_transfer(*args)
    if prop_id in ("P4", "P8"):
        return _roof_dominance(*args)
    return _mixed_tilde(*args)


def _sign_transfer(prop_id, measure, n, grid, tol, config):
    grid = sorted(grid)
    if prop_id == "P5" and not measure.assisted:
        measure = MeasureSpec(measure.kind, measure.param, measure.exponent, assisted=True)
    pool = SamplePool(measure, SamplingConfig(dims=(2, 2, 2), n_samples=n, seed=config.seed,
                                              adversarial_budget=0, roof=config.roof))
    res = np.array([pool.residuals(a) for a in grid])  # (len(grid), n)
    guarded = pool.lhs + 1e-12 >= pool.rhs.max(axis=1)
    checked = passed = 0
    worst = np.inf
    for s in range(n):
        if not guarded[s]:
            continue
        ok = True
        for i in range(len(grid)):
            for j in range(len(grid)):
                if prop_id == "P1" and j > i and res[i, s] >= 0:
                    margin = res[j, s]
                elif prop_id == "P5" and j < i and res[i, s] <= 0:
                    margin = -res[j, s]
                else:
                    continue
                worst = min(worst, margin)
                ok &= margin >= -tol
        checked += 1
        passed += ok
    return PropositionReport(prop_id, STATEMENTS[prop_id], measure.text, list(grid), checked, int(passed),
                             int(n - checked), float(worst if np.isfinite(worst) else 0.0), tol,
                             config.seed)


def _mixed_2q(config, i):
    return random_state((2, 2), RandomSpec(config.seed, i, "induced_mixed", config.mixed_rank))


def _roof_dominance(prop_id, measure, n, grid, tol, config):
    p = grid[0]
    plain = MeasureSpec(measure.kind, measure.param, p, assisted=prop_id == "P8")
    tilde = MeasureSpec(measure.kind, measure.param, p, assisted=prop_id == "P8", tilde=True)
    worst, passed = np.inf, 0
    for i in range(n):
        rho = _mixed_2q(config, i)
        margin = evaluate(tilde, rho, roof=config.roof).value - evaluate(plain, rho, roof=config.roof).value
        worst = min(worst, margin)
        passed += margin >= -tol
    return PropositionReport(prop_id, STATEMENTS[prop_id], tilde.text, [p], n, int(passed), 0,
                             float(worst), tol, config.seed, {"mixed_rank": config.mixed_rank})


def _mixed_tilde(prop_id, measure, n, grid, tol, config):
    """Tilde residuals on mixed three-qubit states, against the pure-state verdict."""
    p = grid[0]
    assisted = prop_id == "P7"
    tilde = MeasureSpec(measure.kind, measure.param, 1.0, assisted=assisted, tilde=True)
    sign = 1.0 if prop_id == "P3" else -1.0
    roof = config.roof or RoofBudget(cardinality="rank")

    pure_pool = SamplePool(MeasureSpec(measure.kind, measure.param, 1.0, assisted=assisted),
                           SamplingConfig(dims=(2, 2, 2), n_samples=max(n, 200), seed=config.seed,
                                          adversarial_budget=0))
    pure_worst = float(np.min(sign * pure_pool.residuals(p)))
    pure_holds = pure_worst >= -1e-9

    worst, passed = np.inf, 0
    for i in range(n):
        rho = random_state((2, 2, 2), RandomSpec(config.seed, i, "induced_mixed", config.mixed_rank))
        rep = residual(tilde, p, rho, roof=roof)
        margin = sign * rep.residual
        worst = min(worst, margin)
        passed += (margin >= -tol) == pure_holds
    return PropositionReport(prop_id, STATEMENTS[prop_id], tilde.text, [p], n, int(passed), 0,
                             float(worst), tol, config.seed,
                             {"mixed_rank": config.mixed_rank, "pure_suite_holds": pure_holds,
                              "pure_suite_worst_margin": pure_worst})
