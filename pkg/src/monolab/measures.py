"""Bipartite entanglement measures and the evaluation dispatcher.

Every pure-state measure is a function of the Schmidt probabilities of the
cut, so the pure path is a single (batched) SVD.  Mixed states use a closed
form when one exists on 2x2 and otherwise fall back to the convex-roof
engine in :mod:`monolab.roof`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace, field
from typing import Callable, Sequence

import numpy as np

from .errors import CapabilityError, DomainError
from .states import (
    EIG_CLAMP,
    QuantumState,
    _partial_transpose_matrix,
    reduced_state,
)

KINDS = ("concurrence", "tangle", "negativity", "convex_roof_negativity", "eof", "renyi", "tsallis")

_SHORT = {
    "concurrence": "C",
    "tangle": "tangle",
    "negativity": "N",
    "convex_roof_negativity": "Ncr",
    "eof": "Ef",
    "renyi": "renyi",
    "tsallis": "tsallis",
}
_ALIASES = {
    "c": "concurrence", "concurrence": "concurrence",
    "tangle": "tangle", "tau": "tangle",
    "n": "negativity", "negativity": "negativity",
    "ncr": "convex_roof_negativity",
    "ef": "eof", "eof": "eof",
    "renyi": "renyi", "tsallis": "tsallis",
}


@dataclass(frozen=True)
class MeasureSpec:
    """A measure choice with its power and assisted/tilde modifiers.

    ``tilde`` means the roof is taken of the powered pure-state value;
    otherwise the exponent is applied after evaluation.  ``assisted`` swaps
    the infimum over ensembles for a supremum.
    """

    kind: str
    param: float | None = None
    exponent: float = 1.0
    assisted: bool = False
    tilde: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown measure kind {self.kind!r}")
        if self.kind in ("renyi", "tsallis"):
            if self.param is None or not self.param > 0:
                raise DomainError(f"{self.kind} needs a positive parameter")
        elif self.param is not None:
            raise DomainError(f"{self.kind} takes no parameter")
        if not (self.exponent > 0 and math.isfinite(self.exponent)):
            raise DomainError(
                f"exponent must be a positive finite real, got {self.exponent}; "
                "non-positive powers are not measure semantics"
            )

    @property
    def text(self) -> str:
        s = _SHORT[self.kind]
        if self.param is not None:
            s += f":{_fmt(self.param)}"
        if self.exponent != 1.0:
            s += f"^{_fmt(self.exponent)}"
        if self.tilde:
            s = "~" + s
        if self.assisted:
            s = "a:" + s
        return s

    def base(self) -> "MeasureSpec":
        return MeasureSpec(self.kind, self.param)

    def with_exponent(self, exponent: float) -> "MeasureSpec":
        return replace(self, exponent=float(exponent))

    def __str__(self):
        return self.text


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


_NUM = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_TOKEN = re.compile(rf"^(?P<name>[A-Za-z]+)(?::(?P<param>{_NUM}))?(?:\^(?P<exp>{_NUM}|sqrt2))?$")


def parse_measure(text: str) -> MeasureSpec:
    """Parse the CLI text form (``C^2``, ``a:C``, ``~C^2``, ``renyi:2`` ...)."""
    s = text.strip()
    assisted = tilde = False
    while True:
        if s.startswith("a:"):
            assisted, s = True, s[2:]
        elif s.startswith("~"):
            tilde, s = True, s[1:]
        else:
            break
    m = _TOKEN.match(s)
    if m is None:
        raise DomainError(f"cannot parse measure {text!r} (bad token {s!r})")
    name = m.group("name").lower()
    if name not in _ALIASES:
        raise DomainError(f"unknown measure name {m.group('name')!r} in {text!r}")
    exp = m.group("exp")
    exponent = math.sqrt(2) if exp == "sqrt2" else float(exp) if exp else 1.0
    param = float(m.group("param")) if m.group("param") else None
    return MeasureSpec(_ALIASES[name], param, exponent, assisted, tilde)


@dataclass(frozen=True)
class MeasureValue:
    value: float
    method: str  # closed_form | pure_state_formula | convex_roof_numeric
    optimizer_report: object = field(default=None, compare=False)

    def to_dict(self):
        d = {"value": self.value, "method": self.method}
        if self.optimizer_report is not None:
            d["roof"] = self.optimizer_report.summary()
        return d


# ---------------------------------------------------------------------------
# cuts


@dataclass(frozen=True)
class Cut:
    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self):
        if not self.left or not self.right:
            raise DomainError("both sides of a cut must be non-empty")
        if set(self.left) & set(self.right):
            raise DomainError(f"cut sides overlap: {self.left} | {self.right}")

    def text(self) -> str:
        return ",".join(map(str, self.left)) + "|" + ",".join(map(str, self.right))


def parse_cut(text: str) -> Cut:
    try:
        left, right = text.split("|")
        return Cut(tuple(int(t) for t in left.split(",")), tuple(int(t) for t in right.split(",")))
    except ValueError as exc:
        raise DomainError(f"cannot parse cut {text!r}: expected e.g. 0|1,2") from exc


def default_cut(state: QuantumState) -> Cut:
    return Cut((0,), tuple(range(1, state.n_parties)))


def _permute_density(rho, dims, order):
    n = len(dims)
    t = rho.reshape(tuple(dims) * 2)
    t = t.transpose(list(order) + [n + k for k in order])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def bipartite(state: QuantumState, cut: Cut | None = None) -> QuantumState:
    """Regroup ``state`` into a two-party state (left, right) for ``cut``.

    Pure states stay pure when the cut covers every subsystem.
    """
    cut = cut or default_cut(state)
    n = state.n_parties
    if max(cut.left + cut.right) >= n or min(cut.left + cut.right) < 0:
        raise DomainError(f"cut {cut.text()} invalid for {n} parties")
    dl = int(np.prod([state.dims[k] for k in cut.left]))
    dr = int(np.prod([state.dims[k] for k in cut.right]))
    order = list(cut.left) + list(cut.right)
    if state.is_pure and len(order) == n:
        psi = state.data.reshape(state.dims).transpose(order).reshape(-1)
        return QuantumState._trusted(psi, (dl, dr), True)
    if len(order) == n:
        red, kept = state, list(range(n))
    else:
        red, kept = reduced_state(state, order), sorted(order)
    local = [kept.index(k) for k in order]
    rho = _permute_density(red.density(), red.dims, local)
    return QuantumState._trusted(rho, (dl, dr), False)


def _require_bipartite(state: QuantumState, cut):
    if cut is None and state.n_parties != 2:
        raise DomainError("state has more than two parties; a cut is required")
    return bipartite(state, cut)


# ---------------------------------------------------------------------------
# pure-state functionals of Schmidt probabilities


def schmidt_probs(vectors: np.ndarray, dl: int, dr: int) -> np.ndarray:
    """Squared Schmidt coefficients for a stack of (m, dl*dr) vectors."""
    mats = vectors.reshape(-1, dl, dr)
    if dl == 2 or dr == 2:
        if dr == 2:
            mats = np.swapaxes(mats, 1, 2)
        # closed-form spectrum of the 2x2 reduced state
        a = np.sum(np.abs(mats[:, 0]) ** 2, axis=1)
        d = np.sum(np.abs(mats[:, 1]) ** 2, axis=1)
        b = np.sum(mats[:, 0] * mats[:, 1].conj(), axis=1)
        disc = np.sqrt((a - d) ** 2 + 4.0 * np.abs(b) ** 2)
        p = np.stack([0.5 * (a + d + disc), 0.5 * (a + d - disc)], axis=1)
    else:
        s = np.linalg.svd(mats, compute_uv=False)
        p = s * s
    p[p < EIG_CLAMP] = 0.0
    return p / np.sum(p, axis=-1, keepdims=True)


def _linear_entropy(p):
    """1 - sum p^2 as a sum of pairwise products, exact for product states."""
    p = -np.sort(-p, axis=-1)
    rest = p[..., 1:]
    r = np.sum(rest, axis=-1)
    return 2.0 * p[..., 0] * r + r * r - np.sum(rest * rest, axis=-1)


def _vn(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return t.sum(axis=-1)


def spectrum_functional(kind: str, param: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Map Schmidt probabilities (..., k) to the pure-state value of ``kind``."""
    if kind == "concurrence":
        return lambda p: np.sqrt(np.clip(2.0 * _linear_entropy(p), 0.0, None))
    if kind == "tangle":
        return lambda p: np.clip(2.0 * _linear_entropy(p), 0.0, None)
    if kind in ("negativity", "convex_roof_negativity"):
        return lambda p: np.clip(np.sum(np.sqrt(p), axis=-1) ** 2 - 1.0, 0.0, None)
    if kind == "eof" or (kind in ("renyi", "tsallis") and param == 1.0):
        return lambda p: np.clip(_vn(p), 0.0, None)
    if kind == "renyi":
        a = float(param)

        def renyi(p):
            with np.errstate(divide="ignore"):
                s = np.sum(np.where(p > 0, p, 0.0) ** a, axis=-1)
            return np.clip(np.log2(s) / (1.0 - a), 0.0, None)

        return renyi
    if kind == "tsallis":
        q = float(param)
        return lambda p: np.clip((1.0 - np.sum(np.where(p > 0, p, 0.0) ** q, axis=-1)) / (q - 1.0), 0.0, None)
    raise DomainError(f"unknown measure kind {kind!r}")


def pure_objective(spec: MeasureSpec, dl: int, dr: int, power: float = 1.0):
    """Per-member objective for the roof engine: E(psi_j)**power for (m, D) rows."""
    f = spectrum_functional(spec.kind, spec.param)
    if power == 1.0:
        return lambda vecs: f(schmidt_probs(vecs, dl, dr))
    return lambda vecs: f(schmidt_probs(vecs, dl, dr)) ** power


def _pure_value(kind, param, state: QuantumState) -> float:
    dl, dr = state.dims
    return float(spectrum_functional(kind, param)(schmidt_probs(state.data[None, :], dl, dr))[0])


def _require_pure(state, name):
    if not state.is_pure:
        raise DomainError(f"{name} needs a pure state; use evaluate() for mixed states")


def concurrence_pure(state: QuantumState, cut: Cut | None = None) -> float:
    """sqrt(2 (1 - tr rho_A^2)) across ``cut`` of a pure state."""
    _require_pure(state, "concurrence_pure")
    return _pure_value("concurrence", None, _require_bipartite(state, cut))


def entropy_pure(state: QuantumState, cut: Cut | None = None, family: str = "von_neumann",
                 param: float | None = None) -> float:
    """Entanglement entropy of a pure state, base 2.

    ``family`` is ``"von_neumann"``, ``"renyi"`` or ``"tsallis"``; a
    parameter of 1 gives von Neumann for the latter two.
    """
    _require_pure(state, "entropy_pure")
    bip = _require_bipartite(state, cut)
    if family == "von_neumann":
        return _pure_value("eof", None, bip)
    if family not in ("renyi", "tsallis"):
        raise DomainError(f"unknown entropy family {family!r}")
    if param is None or not param > 0:
        raise DomainError(f"{family} needs a positive parameter")
    return _pure_value(family, float(param), bip)


# ---------------------------------------------------------------------------
# closed forms


_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def wootters_lambdas(rho: np.ndarray) -> np.ndarray:
    """Decreasing square roots of the eigenvalues of rho (Y x Y) rho* (Y x Y).

    Computed as singular values of sqrt(rho) (Y x Y) sqrt(rho)*, which is
    Hermitian-stable.  Accepts a single 4x4 matrix or a stack.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh(rho)
    w = np.where(w < EIG_CLAMP, 0.0, w)
    sq = (v * np.sqrt(w)[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)
    m = sq @ _YY @ sq.conj()
    lam = np.linalg.svd(m, compute_uv=False)
    lam[lam < EIG_CLAMP] = 0.0
    return lam


def _two_qubit(state: QuantumState, name: str) -> np.ndarray:
    if state.dims != (2, 2):
        raise DomainError(f"{name} needs a 2x2 state, got dims {state.dims}")
    return state.density()


def concurrence_2q(state: QuantumState) -> float:
    lam = wootters_lambdas(_two_qubit(state, "concurrence_2q"))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_assistance_2q(state: QuantumState) -> float:
    return float(np.sum(wootters_lambdas(_two_qubit(state, "concurrence_assistance_2q"))))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def eof_from_concurrence(c: float) -> float:
    return binary_entropy(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c))))


def eof_2q(state: QuantumState) -> float:
    return eof_from_concurrence(concurrence_2q(state))


def negativity(state: QuantumState, cut: Cut | None = None) -> float:
    """||rho^{T_A}||_1 - 1, so that N equals C on two-qubit pure states."""
    bip = _require_bipartite(state, cut)
    if bip.is_pure:
        return _pure_value("negativity", None, bip)
    pt = _partial_transpose_matrix(bip.density(), bip.dims, 0)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    neg = -np.sum(ev[ev < -EIG_CLAMP])  # ||X||_1 - tr X, clamped like spectra elsewhere
    return float(max(0.0, 2.0 * neg / np.sum(ev)))


# ---------------------------------------------------------------------------
# dispatcher


def evaluate(measure: MeasureSpec, state: QuantumState, cut: Cut | None = None, roof=None) -> MeasureValue:
    """Evaluate ``measure`` on ``state`` across ``cut``.

    ``roof`` is a :class:`monolab.roof.RoofBudget` used when no closed form
    applies; ``None`` means the default budget.
    """
    from . import roof as roofmod

    bip = _require_bipartite(state, cut)
    budget = roofmod.DEFAULT_BUDGET if roof is None else roof
    kind, param = measure.kind, measure.param

    if measure.tilde:
        if bip.is_pure:
            return MeasureValue(_pure_value(kind, param, bip) ** measure.exponent, "pure_state_formula")
        return _roof_value(measure, bip, budget, measure.exponent)

    if bip.is_pure:
        return MeasureValue(_pure_value(kind, param, bip) ** measure.exponent, "pure_state_formula")

    two_qubit = bip.dims == (2, 2)
    if measure.assisted:
        if kind == "concurrence" and two_qubit:
            base = concurrence_assistance_2q(bip)
        else:
            return _roof_value(measure, bip, budget, 1.0)
    elif kind == "negativity":
        base = negativity(bip)
    elif kind == "concurrence" and two_qubit:
        base = concurrence_2q(bip)
    elif kind == "tangle" and two_qubit:
        base = concurrence_2q(bip) ** 2
    elif kind == "eof" and two_qubit:
        base = eof_2q(bip)
    else:
        return _roof_value(measure, bip, budget, 1.0)
    return MeasureValue(base ** measure.exponent, "closed_form")


def _roof_value(measure: MeasureSpec, bip: QuantumState, budget, inner_power: float) -> MeasureValue:
    from . import roof as roofmod

    if budget.restarts <= 0 or budget.max_iter <= 0:
        mode = "supremum" if measure.assisted else "infimum"
        raise CapabilityError(
            f"{measure.text} on dims {bip.dims} has no closed form and needs the "
            f"{mode} convex-roof path, but the roof budget is zero"
        )
    dl, dr = bip.dims
    problem = roofmod.RoofProblem(
        mode="supremum" if measure.assisted else "infimum",
        objective=pure_objective(measure.base(), dl, dr, inner_power),
        budget=budget,
    )
    res = roofmod.roof_optimize(bip, problem)
    value = res.value if inner_power != 1.0 else res.value ** measure.exponent
    return MeasureValue(float(max(value, 0.0)), "convex_roof_numeric", res)


def is_closed_form(measure: MeasureSpec, bip_dims: Sequence[int], pure: bool) -> bool:
    """True when :func:`evaluate` needs no roof optimization."""
    if pure:
        return True
    if measure.tilde:
        return False
    two_qubit = tuple(bip_dims) == (2, 2)
    if measure.assisted:
        return measure.kind == "concurrence" and two_qubit
    if measure.kind == "negativity":
        return True
    return two_qubit and measure.kind in ("concurrence", "tangle", "eof")
