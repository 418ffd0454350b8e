"""State types, dense linear algebra and state-vector gate application.

Qubit ordering is little-endian throughout: basis index ``j`` carries qubit 0
in its least-significant bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# structural invariants
ATOL = 1e-10
# reconstruction / unitarity
RECON_ATOL = 1e-9
PSD_SLACK = 1e-9


class QuantumError(ValueError):
    """Base class for invalid quantum objects or incompatible operands."""


class DimensionError(QuantumError):
    pass


class ValidationError(QuantumError):
    pass


def _as_complex(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def _num_qubits_for(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over ``num_qubits`` qubits."""

    amplitudes: np.ndarray
    num_qubits: int = field(default=-1)

    def __post_init__(self):
        amps = _as_complex(self.amplitudes)
        if amps.ndim != 1:
            raise DimensionError("amplitudes must be a vector")
        n = _num_qubits_for(amps.size)
        if self.num_qubits not in (-1, n):
            raise DimensionError(
                f"{amps.size} amplitudes do not describe {self.num_qubits} qubits")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise ValidationError(f"state norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", n)

    @classmethod
    def from_vector(cls, vec, normalize: bool = True) -> "PureState":
        v = np.asarray(vec, dtype=np.complex128)
        if normalize:
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ValidationError("cannot normalize the zero vector")
            v = v / norm
        return cls(v)

    @classmethod
    def basis(cls, index: int, num_qubits: int) -> "PureState":
        dim = 1 << num_qubits
        if not 0 <= index < dim:
            raise DimensionError(f"basis index {index} out of range for {num_qubits} qubits")
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        if other.dim != self.dim:
            raise DimensionError("states live in different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator."""

    entries: np.ndarray
    num_qubits: int = field(default=-1)

    def __post_init__(self):
        m = _as_complex(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("density matrix must be square")
        n = _num_qubits_for(m.shape[0])
        if self.num_qubits not in (-1, n):
            raise DimensionError(f"{m.shape} matrix does not act on {self.num_qubits} qubits")
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > ATOL:
            raise ValidationError(f"matrix is not Hermitian (deviation {herm_err:.3g})")
        tr = np.trace(m)
        if abs(tr - 1.0) > ATOL:
            raise ValidationError(f"trace is {tr.real:.12g}, expected 1")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -PSD_SLACK:
            raise ValidationError(f"matrix is not positive semidefinite (eigenvalue {lo:.3g})")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "num_qubits", n)

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 1 << num_qubits
        return cls(np.eye(d) / d)

    @classmethod
    def mixture(cls, states: Sequence[PureState], weights: Sequence[float]) -> "DensityMatrix":
        if len(states) == 0:
            raise ValidationError("empty mixture")
        vecs = np.stack([s.amplitudes for s in states])
        w = np.asarray(weights, dtype=float)
        return cls((vecs.T * w) @ vecs.conj())

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: tuple[PureState, ...]

    @property
    def matrix(self) -> np.ndarray:
        """Eigenvectors as columns."""
        return np.column_stack([v.amplitudes for v in self.eigenvectors])

    def reconstruct(self) -> np.ndarray:
        V = self.matrix
        return (V * self.eigenvalues) @ V.conj().T


@dataclass(frozen=True)
class UnitaryMatrix:
    entries: np.ndarray

    def __post_init__(self):
        u = _as_complex(self.entries)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionError("unitary must be square")
        err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        if err > RECON_ATOL:
            raise ValidationError(f"matrix is not unitary (deviation {err:.3g})")
        object.__setattr__(self, "entries", u)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.dimension)

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        return UnitaryMatrix(self.entries @ other.entries)


def fidelity_exact(rho: DensityMatrix, sigma: PureState) -> float:
    """<sigma|rho|sigma>, clamped to [0, 1]."""
    if rho.dim != sigma.dim:
        raise DimensionError(f"rho has dimension {rho.dim}, sigma {sigma.dim}")
    s = sigma.amplitudes
    f = np.real(np.vdot(s, rho.entries @ s))
    return float(min(1.0, max(0.0, f)))


def spectral_decompose(rho: DensityMatrix) -> SpectralDecomposition:
    """Eigen-decomposition with eigenvalues sorted descending.

    Eigenvalues inside the PSD slack are clipped to zero. Ties keep the
    order in which the solver returned them.
    """
    m = np.asarray(rho.entries) if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if np.max(np.abs(m - m.conj().T)) > ATOL:
        raise ValidationError("spectral_decompose requires a Hermitian matrix")
    w, V = np.linalg.eigh(m)
    order = np.argsort(-w, kind="stable")
    w = np.clip(w[order], 0.0, None)
    V = V[:, order]
    vecs = tuple(PureState(V[:, j] / np.linalg.norm(V[:, j])) for j in range(V.shape[1]))
    w.setflags(write=False)
    return SpectralDecomposition(w, vecs)


def _check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(q) for q in targets)
    if len(set(targets)) != len(targets):
        raise DimensionError(f"duplicate target qubits {targets}")
    for q in targets:
        if not 0 <= q < n:
            raise DimensionError(f"qubit {q} out of range for {n} qubits")
    return targets


def apply_matrix(amplitudes: np.ndarray, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to ``targets`` of a raw amplitude vector.

    Bit ``i`` of the matrix index addresses ``targets[i]``. No validation;
    returns a new array.
    """
    n = amplitudes.size.bit_length() - 1
    k = len(targets)
    # C-order reshape puts qubit q on axis n-1-q; matrix MSB is targets[-1]
    axes = [n - 1 - q for q in reversed(targets)]
    psi = np.moveaxis(amplitudes.reshape((2,) * n), axes, range(k))
    shape = psi.shape
    out = (matrix @ psi.reshape(1 << k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), axes).reshape(-1)


def apply_gate(state: PureState, gate, targets: Sequence[int]) -> PureState:
    """Apply ``gate`` to the listed qubits, identity elsewhere."""
    if not isinstance(gate, UnitaryMatrix):
        gate = UnitaryMatrix(gate)
    targets = _check_targets(targets, state.num_qubits)
    if gate.dimension != 1 << len(targets):
        raise DimensionError(
            f"gate of dimension {gate.dimension} cannot act on {len(targets)} qubits")
    out = apply_matrix(state.amplitudes, gate.entries, targets)
    return PureState(out)


def random_pure_state(n: int, seed=None) -> PureState:
    """Haar-random state from a normalized complex Gaussian vector."""
    rng = np.random.default_rng(seed)
    d = 1 << n
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(v / np.linalg.norm(v))


def random_density(n: int, rank: int, seed=None) -> DensityMatrix:
    """Mixture of ``rank`` Haar-random pure states with flat-simplex weights."""
    d = 1 << n
    if not 1 <= rank <= d:
        raise ValidationError(f"rank must lie in [1, {d}], got {rank}")
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(rank)) if rank > 1 else np.ones(1)
    vecs = rng.standard_normal((rank, d)) + 1j * rng.standard_normal((rank, d))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    m = (vecs.T * w) @ vecs.conj()
    m = (m + m.conj().T) / 2
    return DensityMatrix(m / np.trace(m).real)


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(a), compute_uv=False)))


# common gates
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
