"""Monogamy and polygamy residuals and the power estimators.

A residual is ``E^a(rho_{f|B}) - sum_i E^a(rho_{f|B_i})`` for a focus
subsystem f and disjoint partner groups B_i.  Monogamy at power a holds on
a state iff its residual is >= 0; polygamy of an assisted measure holds iff
it is <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import BracketError, CapabilityError, DomainError
from .measures import Cut, MeasureSpec, bipartite, evaluate
from .roof import RoofBudget
from .states import (
    QuantumState,
    RandomSpec,
    as_dims,
    ghz_class_state,
    haar_vector,
    is_ppt_separable,
    purification_to_state,
    random_state,
    reduced_state,
    rng_for,
    state_to_purification,
)

CLOSED_TOL = 1e-6
ROOF_TOL = 5e-3


@dataclass(frozen=True)
class SplitSpec:
    """Focus subsystem and the partner groups it is compared against."""

    focus: int
    partners: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "partners", tuple(tuple(int(k) for k in g) for g in self.partners))
        if not self.partners or any(not g for g in self.partners):
            raise DomainError("a split needs at least one non-empty partner group")
        flat = [k for g in self.partners for k in g]
        if len(set(flat)) != len(flat):
            raise DomainError("partner groups must be pairwise disjoint")
        if self.focus in flat:
            raise DomainError("focus subsystem cannot be a partner")

    def check(self, n: int) -> "SplitSpec":
        if not 0 <= self.focus < n or any(not 0 <= k < n for g in self.partners for k in g):
            raise DomainError(f"split {self.text()} invalid for {n} parties")
        return self

    @property
    def whole(self) -> Cut:
        return Cut((self.focus,), tuple(k for g in self.partners for k in g))

    def term_cuts(self) -> list[Cut]:
        return [Cut((self.focus,), g) for g in self.partners]

    def text(self) -> str:
        return "|".join([str(self.focus)] + [",".join(map(str, g)) for g in self.partners])


def parse_split(text: str) -> SplitSpec:
    parts = text.split("|")
    try:
        focus = int(parts[0])
        return SplitSpec(focus, tuple(tuple(int(t) for t in p.split(",")) for p in parts[1:]))
    except ValueError as exc:
        raise DomainError(f"cannot parse split {text!r}: expected e.g. 0|1|2") from exc


def default_split(n: int) -> SplitSpec:
    return SplitSpec(0, tuple((k,) for k in range(1, n)))


@dataclass
class ResidualReport:
    measure: str
    exponent: float
    split: str
    lhs: float
    rhs_terms: list
    residual: float
    state_ref: dict
    roof_backed: bool = False
    state: QuantumState | None = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return {
            "measure": self.measure,
            "exponent": self.exponent,
            "split": self.split,
            "lhs": self.lhs,
            "rhs_terms": list(self.rhs_terms),
            "residual": self.residual,
            "roof_backed": self.roof_backed,
            "state_ref": dict(self.state_ref),
        }


def _state_ref(state: QuantumState, spec: RandomSpec | None = None, **extra) -> dict:
    ref = {"fingerprint": state.fingerprint()}
    if spec is not None:
        ref["random_spec"] = spec.to_dict()
    ref.update(extra)
    return ref


def base_terms(measure: MeasureSpec, state: QuantumState, split: SplitSpec, roof: RoofBudget | None = None):
    """Evaluate the measure across the whole split and on every partner term.

    Returns ``(lhs, rhs_list, roof_backed)`` before any residual power.
    """
    split.check(state.n_parties)
    roof_backed = False
    values = []
    for name, cut in [("lhs", split.whole)] + [(f"rhs[{i}]", c) for i, c in enumerate(split.term_cuts())]:
        try:
            mv = evaluate(measure, state, cut, roof)
        except CapabilityError as exc:
            raise CapabilityError(f"{name} term {cut.text()}: {exc}") from exc
        roof_backed |= mv.method == "convex_roof_numeric"
        values.append(mv.value)
    return values[0], values[1:], roof_backed


def _assemble(measure, exponent, split, lhs_b, rhs_b, roof_backed, state, ref):
    lhs = float(lhs_b) ** exponent
    rhs = [float(y) ** exponent for y in rhs_b]
    return ResidualReport(measure.text, float(exponent), split.text(), lhs, rhs,
                          lhs - float(sum(rhs)), ref, roof_backed, state)


def residual(measure: MeasureSpec, exponent: float, state: QuantumState, split: SplitSpec | None = None,
             roof: RoofBudget | None = None, ref: dict | None = None) -> ResidualReport:
    """Monogamy residual of ``measure`` raised to ``exponent``.

    For tilde measures the exponent goes inside the roof (the roof of the
    powered pure-state values), so the terms are reported unpowered.
    """
    if not exponent > 0:
        raise DomainError(f"exponent must be positive, got {exponent}")
    split = split or default_split(state.n_parties)
    ref = ref or _state_ref(state)
    if measure.tilde:
        inner = measure.with_exponent(measure.exponent * exponent)
        lhs_b, rhs_b, rb = base_terms(inner, state, split, roof)
        rep = _assemble(inner, 1.0, split, lhs_b, rhs_b, rb, state, ref)
        rep.measure, rep.exponent = measure.text, float(exponent)
        return rep
    lhs_b, rhs_b, rb = base_terms(measure, state, split, roof)
    return _assemble(measure, exponent, split, lhs_b, rhs_b, rb, state, ref)


def polygamy_residual(measure: MeasureSpec, exponent: float, state: QuantumState,
                      split: SplitSpec | None = None, roof: RoofBudget | None = None,
                      ref: dict | None = None) -> ResidualReport:
    """Residual of an assisted measure; polygamy holds iff it is <= 0."""
    if not measure.assisted:
        raise DomainError("polygamy residuals need an assisted measure (prefix a:)")
    return residual(measure, exponent, state, split, roof, ref)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplingConfig:
    """Where and how hard to look for violating states.

    ``family`` is ``"haar"`` (pure, or induced mixed when ``mixed_rank`` is
    set) or ``"product"``.  ``adversarial_budget`` is the number of objective
    evaluations per refinement start; ``adversarial_starts`` worst samples are
    refined.
    """

    dims: tuple = (2, 2, 2)
    n_samples: int = 5000
    seed: int = 0
    adversarial_budget: int = 1500
    adversarial_starts: int = 3
    mixed_rank: int | None = None
    family: str = "haar"
    split: SplitSpec | None = None
    roof: RoofBudget | None = None

    def validated(self) -> "SamplingConfig":
        dims = as_dims(self.dims)
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        if self.adversarial_budget < 0 or self.adversarial_starts < 0:
            raise DomainError("adversarial budget and starts must be non-negative")
        if self.family not in ("haar", "product"):
            raise DomainError(f"unknown sampling family {self.family!r}")
        if self.mixed_rank is not None and (self.mixed_rank < 1 or self.family != "haar"):
            raise DomainError("mixed_rank needs family 'haar' and rank >= 1")
        split = (self.split or default_split(len(dims))).check(len(dims))
        return replace(self, dims=dims, split=split)

    def to_dict(self):
        return {"dims": list(self.dims), "n_samples": self.n_samples, "seed": self.seed,
                "adversarial_budget": self.adversarial_budget,
                "adversarial_starts": self.adversarial_starts, "mixed_rank": self.mixed_rank,
                "family": self.family, "split": self.split.text() if self.split else None}


def _sample(cfg: SamplingConfig, index: int):
    if cfg.family == "product":
        rng = rng_for(cfg.seed, index, 3, *cfg.dims)
        v = np.ones(1, dtype=complex)
        for d in cfg.dims:
            v = np.kron(v, haar_vector(d, rng))
        return QuantumState._trusted(v, cfg.dims, True), None
    if cfg.mixed_rank is None:
        spec = RandomSpec(cfg.seed, index, "haar_pure")
    else:
        spec = RandomSpec(cfg.seed, index, "induced_mixed", cfg.mixed_rank)
    return random_state(cfg.dims, spec), spec


def _chart_state(x: np.ndarray, cfg: SamplingConfig) -> QuantumState:
    if cfg.family == "product":
        v = np.ones(1, dtype=complex)
        pos = 0
        for d in cfg.dims:
            u = x[pos:pos + d] + 1j * x[pos + d:pos + 2 * d]
            pos += 2 * d
            n = np.linalg.norm(u)
            v = np.kron(v, u / n if n > 0 else np.eye(d)[0])
        return QuantumState._trusted(v, cfg.dims, True)
    return purification_to_state(x, cfg.dims, cfg.mixed_rank)


def _state_chart(state: QuantumState, cfg: SamplingConfig) -> np.ndarray:
    if cfg.family == "product":
        parts = []
        for k in range(len(cfg.dims)):
            w, v = np.linalg.eigh(reduced_state(state, [k]).density())
            u = v[:, -1]
            parts.append(np.concatenate([u.real, u.imag]))
        return np.concatenate(parts)
    return state_to_purification(state, cfg.mixed_rank)


class SamplePool:
    """Unpowered residual terms of a fixed sample set, reusable across exponents."""

    def __init__(self, measure: MeasureSpec, cfg: SamplingConfig):
        cfg = cfg.validated()
        if measure.tilde and cfg.mixed_rank is not None:
            raise CapabilityError("tilde residuals on mixed samples are exponent-dependent; "
                                  "use proposition_driver P3/P7")
        if measure.tilde:
            # on pure states the roof is trivial: tilde E^a equals (E)^a
            measure = replace(measure, tilde=False)
        self.measure = measure
        self.cfg = cfg
        self.states, self.specs = [], []
        lhs, rhs = [], []
        self.roof_backed = False
        for i in range(cfg.n_samples):
            st, spec = _sample(cfg, i)
            l, r, rb = base_terms(measure, st, cfg.split, cfg.roof)
            self.states.append(st)
            self.specs.append(spec)
            lhs.append(l)
            rhs.append(r)
            self.roof_backed |= rb
        self.lhs = np.array(lhs)
        self.rhs = np.array(rhs)
        self.guard_violations = int(np.sum(self.lhs + 1e-12 < self.rhs.max(axis=1)))

    @property
    def tol(self) -> float:
        return ROOF_TOL if self.roof_backed else CLOSED_TOL

    def residuals(self, exponent: float) -> np.ndarray:
        return self.lhs ** exponent - np.sum(self.rhs ** exponent, axis=1)

    def report(self, i: int, exponent: float) -> ResidualReport:
        ref = _state_ref(self.states[i], self.specs[i], sample_index=i)
        return _assemble(self.measure, exponent, self.cfg.split, self.lhs[i], self.rhs[i],
                         self.roof_backed, self.states[i], ref)


def _refine(pool: SamplePool, exponent: float, direction: str):
    """Local search from the worst samples; returns (best report, evaluations)."""
    cfg = pool.cfg
    sign = 1.0 if direction == "monogamy" else -1.0
    res = sign * pool.residuals(exponent)
    order = np.argsort(res, kind="stable")
    best_i = int(order[0])
    best = pool.report(best_i, exponent)
    evals = 0
    if cfg.adversarial_budget == 0 or cfg.adversarial_starts == 0:
        return best, evals
    measure = pool.measure

    def objective(x):
        st = _chart_state(x, cfg)
        l, r, _ = base_terms(measure, st, cfg.split, cfg.roof)
        return sign * (l ** exponent - sum(y ** exponent for y in r))

    for i in order[: cfg.adversarial_starts]:
        i = int(i)
        x0 = _state_chart(pool.states[i], cfg)
        simplex = np.vstack([x0, x0 + 0.25 * np.eye(x0.size) * np.where(np.arange(x0.size) % 2, -1, 1)])
        out = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxfev": cfg.adversarial_budget, "xatol": 1e-10, "fatol": 1e-14,
                                "adaptive": True, "initial_simplex": simplex})
        evals += out.nfev
        if out.fun < sign * best.residual:
            st = _chart_state(out.x, cfg)
            cand = residual(measure, exponent, st, cfg.split, cfg.roof,
                            _state_ref(st, refined_from=pool.specs[i].to_dict() if pool.specs[i] else i))
            if sign * cand.residual < sign * best.residual:
                best = cand
    return best, evals


def check_inequality(measure: MeasureSpec, exponent: float, sampling: SamplingConfig,
                     direction: str = "monogamy", pool: SamplePool | None = None) -> ResidualReport:
    """Most violating residual found over Haar samples plus local refinement.

    ``direction="monogamy"`` minimizes the residual; ``"polygamy"`` maximizes it.
    """
    if direction not in ("monogamy", "polygamy"):
        raise DomainError(f"direction must be monogamy or polygamy, got {direction!r}")
    if direction == "polygamy" and not measure.assisted:
        raise DomainError("polygamy checks need an assisted measure")
    if not exponent > 0:
        raise DomainError("exponent must be positive")
    pool = pool or SamplePool(measure, sampling)
    return _refine(pool, exponent, direction)[0]


# ---------------------------------------------------------------------------
# power estimation


@dataclass(frozen=True)
class PowerConfig:
    bracket: tuple = (0.25, 8.0)
    tolerance: float = 0.02
    sampling: SamplingConfig = SamplingConfig()
    residual_tol: float | None = None

    def to_dict(self):
        return {"bracket": list(self.bracket), "tolerance": self.tolerance,
                "sampling": self.sampling.to_dict(), "residual_tol": self.residual_tol}


@dataclass
class PowerEstimate:
    kind: str
    measure: str
    dims: tuple
    estimate: float
    bracket: tuple
    worst_witness: ResidualReport
    samples_used: int
    adversarial_iterations: int
    seed: int
    tol: float
    guard_violations: int = 0
    search_space: str = "pure"
    history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "kind": self.kind,
            "measure": self.measure,
            "dims": list(self.dims),
            "estimate": self.estimate,
            "bracket": list(self.bracket),
            "label": "upper-bound-biased" if self.kind == "monogamy" else "lower-bound-biased",
            "search_space": self.search_space,
            "residual_tol": self.tol,
            "samples_used": self.samples_used,
            "adversarial_iterations": self.adversarial_iterations,
            "seed": self.seed,
            "guard_violations": self.guard_violations,
            "history": [list(h) for h in self.history],
            "worst_witness": self.worst_witness.to_dict(),
        }


def _estimate(kind: str, measure: MeasureSpec, dims, config: PowerConfig) -> PowerEstimate:
    sampling = replace(config.sampling, dims=as_dims(dims))
    pool = SamplePool(measure, sampling)
    tol = config.residual_tol if config.residual_tol is not None else pool.tol
    direction = kind
    evals_total = 0
    history = []

    def verdict(a):
        nonlocal evals_total
        sign = 1.0 if kind == "monogamy" else -1.0
        res = sign * pool.residuals(a)
        i = int(np.argmin(res))
        if res[i] < -tol:
            rep, n = pool.report(i, a), 0
        else:
            rep, n = _refine(pool, a, direction)
        evals_total += n
        fails = sign * rep.residual < -tol
        history.append((a, "fail" if fails else "pass", rep.residual))
        return fails, rep

    lo, hi = (float(x) for x in config.bracket)
    if not 0 < lo < hi:
        raise DomainError(f"bracket must satisfy 0 < low < high, got {config.bracket}")
    # monogamy passes at large powers, polygamy at small ones
    pass_end, fail_end = (hi, lo) if kind == "monogamy" else (lo, hi)
    pass_fails, _ = verdict(pass_end)
    if pass_fails:
        end = "high" if kind == "monogamy" else "low"
        raise BracketError(f"{kind} fails at {pass_end}: extend {end} end of the bracket", end)
    fail_fails, witness = verdict(fail_end)
    if not fail_fails:
        end = "low" if kind == "monogamy" else "high"
        raise BracketError(f"{kind} holds at {fail_end}: extend {end} end of the bracket", end)
    while hi - lo > config.tolerance:
        mid = 0.5 * (lo + hi)
        fails, rep = verdict(mid)
        if fails:
            witness = rep
            lo, hi = (mid, hi) if kind == "monogamy" else (lo, mid)
        else:
            lo, hi = (lo, mid) if kind == "monogamy" else (mid, hi)
    space = "product" if sampling.family == "product" else (
        "pure" if sampling.mixed_rank is None else f"mixed_rank={sampling.mixed_rank}")
    return PowerEstimate(kind, measure.text, tuple(sampling.dims), 0.5 * (lo + hi), (lo, hi), witness,
                         sampling.n_samples, evals_total, sampling.seed, tol,
                         pool.guard_violations, space, history)


def estimate_monogamy_power(measure: MeasureSpec, dims, config: PowerConfig = PowerConfig()) -> PowerEstimate:
    """Bisect for the smallest power at which no violating state is found.

    Sampling cannot certify an infimum over all states, so the estimate is
    biased upward; the bracket and witness come with it.
    """
    if measure.assisted:
        raise DomainError("monogamy power is defined for plain measures; use estimate_polygamy_power")
    return _estimate("monogamy", measure, dims, config)


def estimate_polygamy_power(measure: MeasureSpec, dims, config: PowerConfig = PowerConfig()) -> PowerEstimate:
    """Bisect for the largest power at which every assisted residual is <= tol."""
    if not measure.assisted:
        raise DomainError("polygamy power needs an assisted measure (prefix a:)")
    return _estimate("polygamy", measure, dims, config)


# ---------------------------------------------------------------------------
# conjecture scanner


@dataclass(frozen=True)
class ScanBudget:
    restarts: int = 6
    evals_per_round: int = 1500
    weights: tuple = (1e2, 1e4, 1e6)
    seed: int = 0

    def to_dict(self):
        return {"restarts": self.restarts, "evals_per_round": self.evals_per_round,
                "weights": list(self.weights), "seed": self.seed}


@dataclass
class ConjectureScanResult:
    measure: str
    epsilon: float
    best_violation: float
    witness: QuantumState | None
    witness_gap: float
    budget: ScanBudget
    evaluations: int

    def to_dict(self):
        return {
            "measure": self.measure,
            "epsilon": self.epsilon,
            "best_violation": self.best_violation,
            "witness": None if self.witness is None else self.witness.fingerprint(),
            "witness_gap": self.witness_gap,
            "budget": self.budget.to_dict(),
            "evaluations": self.evaluations,
        }


def conjecture_terms(measure: MeasureSpec, state: QuantumState, split: SplitSpec | None = None,
                     roof: RoofBudget | None = None):
    """Return (|E(f|B) - E(f|B_1)|, E(f|B_2)) for a tripartite split."""
    split = split or default_split(state.n_parties)
    if len(split.partners) != 2:
        raise DomainError("the conjecture scan needs a tripartite split f|B1|B2")
    lhs, (e1, e2), _ = base_terms(measure, state, split, roof)
    return abs(lhs - e1), e2


def conjecture_scan(measure: MeasureSpec, dims=(2, 2, 2), epsilon: float = 1e-3,
                    budget: ScanBudget = ScanBudget(), split: SplitSpec | None = None) -> ConjectureScanResult:
    """Largest E(f|B_2) found on pure states with E(f|B) = E(f|B_1) within epsilon.

    The equality is imposed by a quadratic penalty whose weight escalates
    over rounds; only points that meet the constraint are recorded.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    dims = as_dims(dims)
    split = (split or default_split(len(dims))).check(len(dims))
    if len(split.partners) != 2:
        raise DomainError("the conjecture scan needs a tripartite split f|B1|B2")
    best = {"v": -1.0, "x": None, "gap": float("nan")}
    count = [0]

    def terms(x):
        st = purification_to_state(x, dims, None)
        return conjecture_terms(measure, st, split)

    def objective(x, w):
        gap, e2 = terms(x)
        count[0] += 1
        if gap <= epsilon and e2 > best["v"]:
            best.update(v=e2, x=x.copy(), gap=gap)
        return -e2 + w * max(0.0, gap - epsilon) ** 2

    d = int(np.prod(dims))
    for k in range(budget.restarts):
        rng = rng_for(budget.seed, k, 4)
        v0 = haar_vector(d, rng)
        x = np.concatenate([v0.real, v0.imag])
        for w in budget.weights:
            out = minimize(objective, x, args=(w,), method="Nelder-Mead",
                           options={"maxfev": budget.evals_per_round, "xatol": 1e-10,
                                    "fatol": 1e-14, "adaptive": True})
            x = out.x
    witness = None if best["x"] is None else purification_to_state(best["x"], dims, None)
    value = max(best["v"], 0.0) if witness is not None else 0.0
    return ConjectureScanResult(measure.text, float(epsilon), float(value), witness,
                                float(best["gap"]), budget, count[0])


# ---------------------------------------------------------------------------
# polygamy counterexample on GHZ-class states


DEFAULT_GRID = (0.5, 1.0, 2.0, 4.0)


@dataclass
class GhzWitnessTable:
    measure: str
    rows: list
    marginal_ppt: dict
    violated_everywhere: bool
    zero_power_rows: list = field(default_factory=list)

    def to_dict(self):
        return {"measure": self.measure, "rows": [r.to_dict() for r in self.rows],
                "marginal_ppt": self.marginal_ppt, "violated_everywhere": self.violated_everywhere,
                "zero_power_rows": self.zero_power_rows}


def theorem2_demo(measure: MeasureSpec, exponent_grid: Sequence[float] = DEFAULT_GRID,
                  n_parties: int = 4) -> GhzWitnessTable:
    """Evaluate the reversed (polygamy-direction) inequality on a flat GHZ state.

    Every one-vs-rest value is positive while every two-party marginal is
    separable, so ``lhs <= sum(rhs)`` fails at every power.  The extra
    ``zero_power_rows`` treat E^0 as the indicator of E > 0, the reading
    under which a non-positive power was claimed to restore the inequality.
    """
    if measure.assisted:
        raise DomainError("theorem2_demo takes a plain measure")
    state = ghz_class_state((2,) * n_parties, [1 / np.sqrt(2)] * 2)
    split = default_split(n_parties)
    ref = _state_ref(state, label=f"GHZ{n_parties}")
    lhs_b, rhs_b, _ = base_terms(measure, state, split)
    rows = [_assemble(measure, a, split, lhs_b, rhs_b, False, state, ref) for a in exponent_grid]
    ppt = {f"0,{k}": is_ppt_separable(bipartite(state, Cut((0,), (k,)))) for k in range(1, n_parties)}
    ok = all(r.lhs > 0 and all(t == 0 for t in r.rhs_terms) for r in rows) and all(ppt.values())
    ind = lambda v: 1.0 if v > 1e-12 else 0.0
    zero_rows = [{"exponent": 0.0, "lhs": ind(lhs_b), "rhs_terms": [ind(y) for y in rhs_b],
                  "reversed_inequality_holds": ind(lhs_b) <= sum(ind(y) for y in rhs_b)}]
    return GhzWitnessTable(measure.text, rows, ppt, ok, zero_rows)
