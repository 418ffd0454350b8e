"""Density-matrix exponentiation: exact unitaries and the partial-swap protocol."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .qcore import (
    DensityMatrix,
    DimensionError,
    PureState,
    SpectralDecomposition,
    UnitaryMatrix,
    ValidationError,
    apply_matrix,
    spectral_decompose,
)

DEFAULT_TAU = 0.9
MAX_PARTIAL_SWAP_DT = 0.1


def check_tau(tau: float, allow_any_tau: bool = False) -> float:
    tau = float(tau)
    if not allow_any_tau and not 0.0 < tau < 1.0:
        raise ValidationError(f"tau must lie in (0,1), got {tau!r}")
    return tau


@dataclass(frozen=True)
class ExponentiationPlan:
    tau: float = DEFAULT_TAU
    steps: int = 1
    method: Literal["exact", "partial-swap"] = "exact"

    def __post_init__(self):
        check_tau(self.tau)
        if int(self.steps) < 1:
            raise ValidationError("steps must be >= 1")
        if self.method not in ("exact", "partial-swap"):
            raise ValidationError(f"unknown exponentiation method {self.method!r}")

    def evolve(self, rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
        """sigma -> U sigma U^dagger with U = exp(i tau rho), by the chosen method."""
        if self.method == "partial-swap":
            return exponentiate_partial_swap(rho, sigma, self.tau, self.steps)
        u = exponentiate_exact(rho, self.tau).entries
        return DensityMatrix(u @ sigma.entries @ u.conj().T)


def _phase_unitary(decomp: SpectralDecomposition, angle: float) -> np.ndarray:
    V = decomp.matrix
    return (V * np.exp(1j * angle * decomp.eigenvalues)) @ V.conj().T


def exponentiate_exact(rho: DensityMatrix | SpectralDecomposition, tau: float,
                       allow_any_tau: bool = False) -> UnitaryMatrix:
    """exp(i tau rho) assembled from the spectral decomposition of rho."""
    tau = check_tau(tau, allow_any_tau)
    decomp = rho if isinstance(rho, SpectralDecomposition) else spectral_decompose(rho)
    return UnitaryMatrix(_phase_unitary(decomp, tau))


def controlled_power_apply(joint: PureState, rho: DensityMatrix | SpectralDecomposition,
                           tau: float, power_exponent: int, control_qubit: int,
                           system_qubits: Sequence[int] | None = None) -> PureState:
    """Apply exp(i tau 2^j rho) to the system register when ``control_qubit`` is 1.

    The system register defaults to qubits ``0..n-1``, with n read off rho.
    """
    tau = check_tau(tau)
    decomp = rho if isinstance(rho, SpectralDecomposition) else spectral_decompose(rho)
    n_sys = decomp.eigenvectors[0].num_qubits
    if system_qubits is None:
        system_qubits = range(n_sys)
    system_qubits = tuple(int(q) for q in system_qubits)
    total = joint.num_qubits
    if len(system_qubits) != n_sys:
        raise DimensionError(f"rho acts on {n_sys} qubits, {len(system_qubits)} given")
    if len(set(system_qubits)) != n_sys:
        raise DimensionError("duplicate system qubits")
    for q in (*system_qubits, control_qubit):
        if not 0 <= q < total:
            raise DimensionError(f"qubit {q} out of range for {total} qubits")
    if control_qubit in system_qubits:
        raise DimensionError("control qubit overlaps the system register")
    if power_exponent < 0:
        raise ValidationError("power exponent must be non-negative")

    u = _phase_unitary(decomp, tau * float(2 ** power_exponent))
    d = u.shape[0]
    cu = np.eye(2 * d, dtype=np.complex128)
    cu[d:, d:] = u
    out = apply_matrix(joint.amplitudes, cu, (*system_qubits, control_qubit))
    return PureState(out)


def swap_operator(d: int) -> np.ndarray:
    """S |a>|b> = |b>|a> on C^d (x) C^d, first factor as the row-major outer index."""
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1.0
    return s


def partial_trace_first(m: np.ndarray, d: int) -> np.ndarray:
    return np.einsum("abad->bd", m.reshape(d, d, d, d))


def partial_swap_step(rho: DensityMatrix, sigma: DensityMatrix, dt: float) -> DensityMatrix:
    """Tr_1[exp(-i S dt) (rho (x) sigma) exp(i S dt)] for the swap operator S."""
    if rho.dim != sigma.dim:
        raise DimensionError(f"rho has dimension {rho.dim}, sigma {sigma.dim}")
    if abs(dt) > MAX_PARTIAL_SWAP_DT:
        raise ValidationError(f"|dt| must be <= {MAX_PARTIAL_SWAP_DT}, got {dt!r}")
    d = rho.dim
    s = swap_operator(d)
    # S^2 = I, so exp(-i S dt) = cos(dt) I - i sin(dt) S
    u = np.cos(dt) * np.eye(d * d) - 1j * np.sin(dt) * s
    joint = u @ np.kron(rho.entries, sigma.entries) @ u.conj().T
    out = partial_trace_first(joint, d)
    out = (out + out.conj().T) / 2
    return DensityMatrix(out / np.trace(out).real)


def exponentiate_partial_swap(rho: DensityMatrix, sigma: DensityMatrix, tau: float,
                              steps: int) -> DensityMatrix:
    """Approximate exp(i tau rho) sigma exp(-i tau rho) with ``steps`` partial swaps.

    Each step consumes one fresh copy of rho. Error is O(tau^2 / steps).
    """
    steps = int(steps)
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    dt = -float(tau) / steps
    out = sigma
    for _ in range(steps):
        out = partial_swap_step(rho, out, dt)
    return out


def conjugate_exact(rho: DensityMatrix, sigma: DensityMatrix, tau: float,
                    allow_any_tau: bool = False) -> np.ndarray:
    u = exponentiate_exact(rho, tau, allow_any_tau).entries
    return u @ sigma.entries @ u.conj().T
