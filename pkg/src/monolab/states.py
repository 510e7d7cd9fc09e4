"""Finite-dimensional state plumbing.

States are stored in the computational basis with the first subsystem
most significant: index = sum_k i_k * prod_{l>k} d_l.  Every function here
is pure; arrays held by a :class:`QuantumState` are made read-only.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, UnsupportedDimsError

DIM_CAP = 256
EIG_CLAMP = 1e-10
NORM_TOL = 1e-12
HERM_TOL = 1e-12
PSD_TOL = 1e-10
PPT_TOL = 1e-9

PPT_DIMS = {(2, 2), (2, 3), (3, 2)}


def as_dims(dims: Iterable[int], cap: int = DIM_CAP) -> tuple[int, ...]:
    """Validate a list of subsystem dimensions and return it as a tuple."""
    out = tuple(int(d) for d in dims)
    if not out:
        raise DomainError("dims must contain at least one subsystem")
    if any(d < 2 for d in out):
        raise DomainError(f"every subsystem dimension must be >= 2, got {out}")
    if int(np.prod(out)) > cap:
        raise DomainError(f"total dimension {int(np.prod(out))} exceeds cap {cap}")
    return out


class QuantumState:
    """A pure state vector or a density matrix over a tensor factorization.

    Construct with :meth:`pure` or :meth:`mixed`; both validate the physical
    invariants. ``data`` is a read-only complex array.
    """

    __slots__ = ("dims", "data", "is_pure")

    def __init__(self, data: np.ndarray, dims: Sequence[int], is_pure: bool, *, check: bool = True):
        dims = as_dims(dims)
        data = np.array(data, dtype=complex)
        total = int(np.prod(dims))
        if is_pure:
            data = data.reshape(-1)
            if data.size != total:
                raise DomainError(f"pure state needs {total} amplitudes, got {data.size}")
            if check and abs(np.linalg.norm(data) - 1.0) > NORM_TOL:
                raise DomainError(f"state vector norm {np.linalg.norm(data)!r} is not 1")
        else:
            if data.shape != (total, total):
                raise DomainError(f"density matrix must be {total}x{total}, got {data.shape}")
            if check:
                if np.max(np.abs(data - data.conj().T)) > HERM_TOL:
                    raise DomainError("density matrix is not Hermitian")
                if abs(np.trace(data).real - 1.0) > NORM_TOL:
                    raise DomainError(f"density matrix trace {np.trace(data).real!r} is not 1")
                if np.linalg.eigvalsh(data)[0] < -PSD_TOL:
                    raise DomainError("density matrix has a negative eigenvalue")
        data.setflags(write=False)
        self.dims = dims
        self.data = data
        self.is_pure = bool(is_pure)

    @classmethod
    def pure(cls, vector, dims) -> "QuantumState":
        return cls(vector, dims, True)

    @classmethod
    def mixed(cls, rho, dims) -> "QuantumState":
        return cls(rho, dims, False)

    @classmethod
    def _trusted(cls, data, dims, is_pure) -> "QuantumState":
        return cls(data, dims, is_pure, check=False)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def fingerprint(self) -> str:
        """Short content hash used to reference a state in reports."""
        h = hashlib.sha256()
        h.update(repr((self.dims, self.is_pure)).encode())
        h.update(np.ascontiguousarray(self.data).tobytes())
        return h.hexdigest()[:16]

    def __repr__(self):
        kind = "pure" if self.is_pure else "mixed"
        return f"QuantumState({kind}, dims={self.dims})"


def _check_indices(idx: Iterable[int], n: int) -> tuple[int, ...]:
    out = tuple(sorted(set(int(i) for i in idx)))
    if not out:
        raise DomainError("subsystem set must be non-empty")
    if out[0] < 0 or out[-1] >= n:
        raise DomainError(f"subsystem indices {out} out of range for {n} parties")
    return out


def reduced_state(state: QuantumState, keep: Iterable[int]) -> QuantumState:
    """Partial trace onto the subsystems in ``keep`` (kept in ascending order)."""
    keep = _check_indices(keep, state.n_parties)
    dims = state.dims
    n = len(dims)
    drop = [k for k in range(n) if k not in keep]
    kdims = tuple(dims[k] for k in keep)
    dk = int(np.prod(kdims))
    if state.is_pure:
        psi = state.data.reshape(dims).transpose(list(keep) + drop).reshape(dk, -1)
        rho = psi @ psi.conj().T
    else:
        t = state.data.reshape(dims + dims)
        letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
        row = [letters[k] for k in range(n)]
        col = [letters[n + k] if k in keep else letters[k] for k in range(n)]
        out = [letters[k] for k in keep] + [letters[n + k] for k in keep]
        rho = np.einsum(f"{''.join(row)}{''.join(col)}->{''.join(out)}", t).reshape(dk, dk)
    rho = 0.5 * (rho + rho.conj().T)
    return QuantumState._trusted(rho, kdims, False)


def _partial_transpose_matrix(rho: np.ndarray, dims: Sequence[int], k: int) -> np.ndarray:
    n = len(dims)
    t = rho.reshape(tuple(dims) + tuple(dims))
    axes = list(range(2 * n))
    axes[k], axes[n + k] = axes[n + k], axes[k]
    d = int(np.prod(dims))
    return t.transpose(axes).reshape(d, d)


def partial_transpose(state: QuantumState, subsystem: int) -> np.ndarray:
    """Transpose the density matrix on one tensor factor."""
    if not 0 <= int(subsystem) < state.n_parties:
        raise DomainError(f"subsystem {subsystem} out of range for {state.n_parties} parties")
    return _partial_transpose_matrix(state.density(), state.dims, int(subsystem))


def trace_norm(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("trace_norm needs a square matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise DomainError("trace_norm input is not Hermitian")
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def is_ppt_separable(state: QuantumState) -> bool:
    """Exact separability test via PPT, valid only for 2x2 and 2x3 systems."""
    if state.dims not in PPT_DIMS:
        raise UnsupportedDimsError(
            f"PPT does not certify separability for dims {state.dims}; only 2x2 and 2x3"
        )
    return bool(np.linalg.eigvalsh(partial_transpose(state, 0))[0] >= -PPT_TOL)


def clamped_eigvalsh(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues with entries within EIG_CLAMP of zero set to zero."""
    w = np.linalg.eigvalsh(rho)
    w[np.abs(w) < EIG_CLAMP] = 0.0
    return w


# ---------------------------------------------------------------------------
# random states


@dataclass(frozen=True)
class RandomSpec:
    """Seed coordinates of one random state.

    ``kind`` is ``"haar_pure"`` or ``"induced_mixed"``; ``rank`` is the
    ancilla dimension for the induced measure.
    """

    master_seed: int
    sample_index: int = 0
    kind: str = "haar_pure"
    rank: int | None = None

    def to_dict(self):
        return {"master_seed": self.master_seed, "sample_index": self.sample_index,
                "kind": self.kind, "rank": self.rank}


_KIND_CODES = {"haar_pure": 1, "induced_mixed": 2}


def rng_for(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-style generator derived from a master seed and an integer key."""
    ss = np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1),
                                spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def haar_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_state(dims: Sequence[int], spec: RandomSpec) -> QuantumState:
    dims = as_dims(dims)
    if spec.kind not in _KIND_CODES:
        raise DomainError(f"unknown random kind {spec.kind!r}")
    d = int(np.prod(dims))
    if spec.kind == "haar_pure":
        rng = rng_for(spec.master_seed, spec.sample_index, 1, *dims)
        return QuantumState._trusted(haar_vector(d, rng), dims, True)
    rank = spec.rank
    if rank is None or int(rank) < 1:
        raise DomainError(f"induced_mixed needs rank >= 1, got {rank}")
    rank = int(rank)
    rng = rng_for(spec.master_seed, spec.sample_index, 2, rank, *dims)
    g = haar_vector(d * rank, rng).reshape(d, rank)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return QuantumState._trusted(rho, dims, False)


def purification_to_state(x: np.ndarray, dims: Sequence[int], rank: int | None) -> QuantumState:
    """Map a real parameter vector to a normalized state (unit-vector chart).

    With ``rank`` None the vector holds re/im parts of a pure state; otherwise
    of a purification on dims x rank, traced over the ancilla.
    """
    dims = tuple(dims)
    d = int(np.prod(dims))
    half = x.size // 2
    v = x[:half] + 1j * x[half:]
    nrm = np.linalg.norm(v)
    if nrm == 0:
        v = np.zeros_like(v)
        v[0] = 1.0
    else:
        v = v / nrm
    if rank is None:
        return QuantumState._trusted(v, dims, True)
    g = v.reshape(d, rank)
    rho = g @ g.conj().T
    return QuantumState._trusted(0.5 * (rho + rho.conj().T), dims, False)


def state_to_purification(state: QuantumState, rank: int | None) -> np.ndarray:
    """Inverse chart of :func:`purification_to_state` (up to gauge)."""
    if rank is None:
        if not state.is_pure:
            raise DomainError("pure chart needs a pure state")
        v = state.data
    else:
        w, vecs = np.linalg.eigh(state.density())
        w = np.clip(w, 0, None)[::-1][:rank]
        vecs = vecs[:, ::-1][:, :rank]
        g = np.zeros((state.dim, rank), dtype=complex)
        g[:, : w.size] = vecs * np.sqrt(w)
        v = g.reshape(-1)
    return np.concatenate([v.real, v.imag])


# ---------------------------------------------------------------------------
# named states


def basis_state(dims: Sequence[int], digits: Sequence[int]) -> QuantumState:
    dims = as_dims(dims)
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[np.ravel_multi_index(tuple(digits), dims)] = 1.0
    return QuantumState._trusted(v, dims, True)


def ghz_class_state(dims: Sequence[int], schmidt: Sequence[float]) -> QuantumState:
    """sum_j lambda_j |j>|j>...|j> with a shared computational Schmidt basis.

    Three or more factors are accepted; the polygamy counterexample needs at
    least four.
    """
    dims = as_dims(dims)
    lam = np.asarray(schmidt, dtype=float)
    if len(dims) < 3:
        raise DomainError("GHZ-class states need at least 3 subsystems")
    if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0):
        raise DomainError("Schmidt coefficients must be a non-empty list of positive reals")
    if lam.size > min(dims):
        raise DomainError(f"{lam.size} Schmidt terms exceed the smallest dimension {min(dims)}")
    if abs(np.sum(lam**2) - 1.0) > NORM_TOL:
        raise DomainError("Schmidt coefficients must satisfy sum lambda_j^2 = 1")
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    for j, l in enumerate(lam):
        v[np.ravel_multi_index((j,) * len(dims), dims)] = l
    return QuantumState._trusted(v, dims, True)


def ghz_state(n: int) -> QuantumState:
    return ghz_class_state((2,) * n, [1 / np.sqrt(2)] * 2)


def w_state(n: int) -> QuantumState:
    dims = as_dims((2,) * n)
    v = np.zeros(2**n, dtype=complex)
    for k in range(n):
        v[1 << (n - 1 - k)] = 1.0
    return QuantumState._trusted(v / np.sqrt(n), dims, True)


def bell_state() -> QuantumState:
    return QuantumState._trusted(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2), True)


def werner_state(p: float) -> QuantumState:
    """p |psi-><psi-| + (1-p) I/4 on two qubits."""
    s = np.array([0, 1, -1, 0]) / np.sqrt(2)
    rho = p * np.outer(s, s) + (1 - p) * np.eye(4) / 4
    return QuantumState.mixed(rho.astype(complex), (2, 2))


def local_unitary(state: QuantumState, unitaries: Sequence[np.ndarray]) -> QuantumState:
    u = unitaries[0]
    for v in unitaries[1:]:
        u = np.kron(u, v)
    if state.is_pure:
        return QuantumState._trusted(u @ state.data, state.dims, True)
    rho = u @ state.data @ u.conj().T
    return QuantumState._trusted(0.5 * (rho + rho.conj().T), state.dims, False)
