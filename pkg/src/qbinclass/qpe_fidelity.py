"""Fidelity estimation by phase estimation on exp(i tau rho).

The joint register places the system on qubits ``0..n-1`` and the t-qubit
estimator on qubits ``n..n+t-1``, so a joint basis index is
``system_index + 2**n * k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .expsim import DEFAULT_TAU, check_tau, controlled_power_apply
from .qcore import (
    DensityMatrix,
    DimensionError,
    H,
    PureState,
    SpectralDecomposition,
    ValidationError,
    apply_matrix,
    spectral_decompose,
)

MAX_CIRCUIT_QUBITS = 14


class Mode(str, Enum):
    ANALYTIC = "analytic-kernel"
    CIRCUIT = "full-circuit"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class QpeConfig:
    n: int
    t: int
    tau: float = DEFAULT_TAU
    mode: Mode = Mode.ANALYTIC
    shots: int | None = None
    seed: int | None = None
    # map k/2^t in (1/2, 1) to negative phases, clamped at 0
    wrapped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.n < 1 or self.t < 1:
            raise ValidationError("n and t must be >= 1")
        check_tau(self.tau)
        if self.mode is Mode.CIRCUIT and self.n + self.t > MAX_CIRCUIT_QUBITS:
            raise ValidationError(
                f"full-circuit mode needs n+t <= {MAX_CIRCUIT_QUBITS}, got {self.n + self.t}")
        if self.mode is Mode.SAMPLED and (self.shots is None or self.shots < 1):
            raise ValidationError("sampled mode requires shots >= 1")

    def replace(self, **changes) -> "QpeConfig":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class QpeObservable:
    """Outcome values of the register measurement, one per basis state |k>."""

    t: int
    tau: float
    lambda_grid: np.ndarray = field(init=False)

    def __post_init__(self):
        grid = (2 * np.pi / self.tau) * np.arange(1 << self.t) / float(1 << self.t)
        grid.setflags(write=False)
        object.__setattr__(self, "lambda_grid", grid)

    @classmethod
    def for_config(cls, config: QpeConfig) -> "QpeObservable":
        return cls(config.t, config.tau)

    def values(self, wrapped: bool = False) -> np.ndarray:
        if not wrapped:
            return self.lambda_grid
        frac = np.arange(1 << self.t) / float(1 << self.t)
        frac = np.where(frac > 0.5, frac - 1.0, frac)
        return (2 * np.pi / self.tau) * np.clip(frac, 0.0, None)


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    error_bound: float
    per_eigenvalue_error: np.ndarray
    mode: Mode
    shots_used: int = 0
    standard_error: float = 0.0

    @property
    def clamped(self) -> float:
        """Value restricted to [0, 1] for classifier consumption."""
        return min(1.0, max(0.0, self.value))


def qpe_kernel(theta: float, t: int, k) -> np.ndarray | float:
    """Probability of register outcome k when estimating phase theta with t qubits."""
    if t < 1:
        raise ValidationError("t must be >= 1")
    size = 1 << t
    k_arr = np.asarray(k)
    if np.any((k_arr < 0) | (k_arr >= size)):
        raise ValidationError(f"k must lie in [0, {size})")
    # reduce both sine arguments mod 1 so dyadic phases give exact zeros
    scaled = size * theta - k_arr
    delta = theta - k_arr / size
    num = np.sin(np.pi * (scaled - np.round(scaled))) ** 2
    s = np.sin(np.pi * (delta - np.round(delta)))
    near = np.abs(s) < 1e-12
    safe = np.where(near, 1.0, s)
    p = np.where(near, 1.0, num / (size * size * safe ** 2))
    return float(p) if np.ndim(p) == 0 else p


def kernel_distribution(theta: float, t: int) -> np.ndarray:
    return qpe_kernel(theta, t, np.arange(1 << t))


def eigenphase(lambda_j: float, tau: float) -> float:
    theta = lambda_j * tau / (2 * np.pi)
    # lambda <= 1 and tau < 1 keep theta below 1/(2 pi)
    if not 0.0 <= theta < 1.0:
        raise ValidationError(f"eigenphase {theta!r} outside [0,1)")
    return theta


def estimate_eigenvalue(lambda_j: float, config: QpeConfig) -> float:
    """Mean register reading for eigenvalue ``lambda_j``."""
    lam = float(lambda_j)
    if not -1e-9 <= lam <= 1 + 1e-9:
        raise ValidationError(f"eigenvalue {lam!r} outside [0,1]")
    theta = eigenphase(min(max(lam, 0.0), 1.0), config.tau)
    values = QpeObservable.for_config(config).values(config.wrapped)
    return float(values @ kernel_distribution(theta, config.t))


def estimated_spectrum(eigenvalues, config: QpeConfig) -> np.ndarray:
    return np.array([estimate_eigenvalue(lam, config) for lam in eigenvalues])


def error_bound(spectrum, config: QpeConfig) -> float:
    """max_j |lambda_j - estimated lambda_j| over the spectrum."""
    lams = np.asarray(spectrum.eigenvalues if isinstance(spectrum, SpectralDecomposition)
                      else spectrum, dtype=float)
    return float(np.max(np.abs(lams - estimated_spectrum(lams, config))))


def register_size(m: int, epsilon: float, tau: float | None = None,
                  corrected: bool = False) -> int:
    """Estimator register size for m-bit accuracy at success probability 1 - epsilon.

    The corrected size adds enough bits to absorb the 2 pi / tau rescaling
    from phase to eigenvalue units.
    """
    if m < 1:
        raise ValidationError("m must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise ValidationError("epsilon must lie in (0,1)")
    t = m + math.ceil(math.log2(2 + 1 / (2 * epsilon)))
    if corrected:
        if tau is None:
            raise ValidationError("the corrected register size needs tau")
        t += math.ceil(math.log2(2 * math.pi / check_tau(tau)))
    return t


def inverse_qft_apply(amplitudes: np.ndarray, qubits) -> np.ndarray:
    """Inverse QFT on ``qubits`` (qubits[0] least significant) via H, controlled phases, swaps."""
    qubits = list(qubits)
    t = len(qubits)
    out = amplitudes
    for i in range(t // 2):
        out = apply_matrix(out, _SWAP, (qubits[i], qubits[t - 1 - i]))
    # after the reversal qubits[0] holds the most significant output bit's partner
    for j in range(t):
        for m in range(j):
            angle = -np.pi / float(1 << (j - m))
            out = apply_matrix(out, np.diag([1, 1, 1, np.exp(1j * angle)]),
                               (qubits[m], qubits[j]))
        out = apply_matrix(out, H, (qubits[j],))
    return out


_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)


def build_qpe_state(rho: DensityMatrix | SpectralDecomposition, psi: PureState,
                    config: QpeConfig) -> PureState:
    """Run the phase-estimation circuit on |psi>|0...0>."""
    n, t = config.n, config.t
    if n + t > MAX_CIRCUIT_QUBITS:
        raise ValidationError(f"register budget exceeded: n+t={n + t} > {MAX_CIRCUIT_QUBITS}")
    decomp = rho if isinstance(rho, SpectralDecomposition) else spectral_decompose(rho)
    if psi.num_qubits != n or decomp.eigenvectors[0].num_qubits != n:
        raise DimensionError(f"config expects {n} system qubits")
    amps = np.zeros(1 << (n + t), dtype=np.complex128)
    amps[: 1 << n] = psi.amplitudes
    register = list(range(n, n + t))
    for q in register:
        amps = apply_matrix(amps, H, (q,))
    joint = PureState(amps)
    for j, q in enumerate(register):
        joint = controlled_power_apply(joint, decomp, config.tau, j, q)
    return PureState(inverse_qft_apply(joint.amplitudes, register))


def register_marginal(joint: PureState, config: QpeConfig) -> np.ndarray:
    """p(k) over the estimator register."""
    n, t = config.n, config.t
    if joint.num_qubits != n + t:
        raise DimensionError(f"joint state has {joint.num_qubits} qubits, expected {n + t}")
    return joint.probabilities().reshape(1 << t, 1 << n).sum(axis=1)


def analytic_distribution(weights, eigenvalues, config: QpeConfig) -> np.ndarray:
    """p(k) = sum_j |Psi_j|^2 K(theta_j, t, k)."""
    p = np.zeros(1 << config.t)
    for w, lam in zip(weights, eigenvalues):
        if w > 0:
            p += w * kernel_distribution(eigenphase(min(max(lam, 0.0), 1.0), config.tau), config.t)
    return p


def spectral_weights(decomp: SpectralDecomposition, psi: PureState) -> np.ndarray:
    return np.abs(decomp.matrix.conj().T @ psi.amplitudes) ** 2


def expectation_F(source, config: QpeConfig, eigenvalues=None) -> float:
    """Expected register reading.

    ``source`` is either the joint output state of :func:`build_qpe_state`
    (full-circuit) or the spectral weights |Psi_j|^2 paired with
    ``eigenvalues`` (analytic-kernel).
    """
    values = QpeObservable.for_config(config).values(config.wrapped)
    if isinstance(source, PureState):
        if config.mode is not Mode.CIRCUIT:
            raise ValidationError(f"a joint state needs full-circuit mode, not {config.mode.value}")
        return float(values @ register_marginal(source, config))
    if config.mode is Mode.CIRCUIT:
        raise ValidationError("full-circuit mode needs a joint state")
    if eigenvalues is None:
        raise ValidationError("analytic weights need matching eigenvalues")
    weights = np.asarray(source, dtype=float)
    lams = np.asarray(eigenvalues, dtype=float)
    return float(weights @ estimated_spectrum(lams, config))


def sample_F(distribution, config: QpeConfig, rng=None) -> tuple[float, float]:
    """Draw ``config.shots`` register outcomes; return (mean, standard error)."""
    if config.shots is None or config.shots < 1:
        raise ValidationError("sampling requires shots >= 1")
    p = np.clip(np.asarray(distribution, dtype=float), 0.0, None)
    p = p / p.sum()
    rng = np.random.default_rng(config.seed) if rng is None else rng
    values = QpeObservable.for_config(config).values(config.wrapped)
    ks = rng.choice(p.size, size=config.shots, p=p)
    draws = values[ks]
    mean = float(draws.mean())
    se = float(draws.std(ddof=1) / math.sqrt(config.shots)) if config.shots > 1 else 0.0
    return mean, se


def sample_outcomes(distribution, shots: int, seed=None) -> np.ndarray:
    p = np.clip(np.asarray(distribution, dtype=float), 0.0, None)
    return np.random.default_rng(seed).choice(p.size, size=shots, p=p / p.sum())


def estimate_fidelity(rho: DensityMatrix | SpectralDecomposition, sigma: PureState,
                      config: QpeConfig) -> FidelityEstimate:
    decomp = rho if isinstance(rho, SpectralDecomposition) else spectral_decompose(rho)
    if decomp.eigenvectors[0].dim != sigma.dim or sigma.num_qubits != config.n:
        raise DimensionError(f"config expects {config.n} system qubits")
    lams = decomp.eigenvalues
    errors = np.abs(lams - estimated_spectrum(lams, config))
    bound = float(errors.max())
    weights = spectral_weights(decomp, sigma)
    shots, se = 0, 0.0
    if config.mode is Mode.CIRCUIT:
        value = expectation_F(build_qpe_state(decomp, sigma, config), config)
    elif config.mode is Mode.ANALYTIC:
        value = expectation_F(weights, config, lams)
    else:
        value, se = sample_F(analytic_distribution(weights, lams, config), config)
        shots = config.shots
    return FidelityEstimate(value, bound, errors, config.mode, shots, se)
