"""Unsupervised binary classifier built on Grover amplitude amplification.

A label oracle phase-flips the basis states of class 1. Grover iterates turn
the uniform superposition into an approximation of |m> (uniform over class 1),
and the complement oracle does the same for |m_perp>. Basis vectors are then
classified from measurement probabilities on the amplified state, and
general states by comparing fidelities with the two references.

Note on the pi phase shifter: U_pi multiplies every amplitude by -1, a
global phase, so placing it in front of the Grover circuit changes no
measurement outcome. |m_perp~> is instead prepared with the complement
oracle; :func:`u_pi` is kept and its inertness is tested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .qcore import (
    DimensionError,
    H,
    PureState,
    ValidationError,
    apply_matrix,
    fidelity_exact,
)
from .qpe_fidelity import QpeConfig, estimate_fidelity, sample_outcomes
from .supervised import TIE_TOL


class DegenerateOracleError(ValidationError):
    """Oracle marks no basis state or every basis state; Grover has no rotation."""


@dataclass(frozen=True)
class LabelOracle:
    labels: np.ndarray
    n: int = -1
    # overrides the swept M when set
    m_override: int | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DimensionError("labels must be a vector over basis indices")
        n = labels.size.bit_length() - 1
        if labels.size < 2 or (1 << n) != labels.size:
            raise DimensionError(f"{labels.size} labels do not cover 2^n basis states")
        if self.n not in (-1, n):
            raise DimensionError(f"{labels.size} labels do not cover {self.n} qubits")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValidationError("labels must be 0 or 1")
        labels = labels.astype(np.uint8)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_indices(cls, indices, n: int) -> "LabelOracle":
        labels = np.zeros(1 << n, dtype=np.uint8)
        for j in indices:
            if not 0 <= int(j) < (1 << n):
                raise DimensionError(f"index {j} out of range for n={n}")
            labels[int(j)] = 1
        return cls(labels, n)

    @classmethod
    def from_predicate(cls, predicate, n: int) -> "LabelOracle":
        return cls(np.array([1 if predicate(j) else 0 for j in range(1 << n)]), n)

    @property
    def N(self) -> int:
        return self.labels.size

    @property
    def M(self) -> int:
        if self.m_override is not None:
            return int(self.m_override)
        return int(self.labels.sum())

    @property
    def marked(self) -> np.ndarray:
        return np.flatnonzero(self.labels)

    def complement(self) -> "LabelOracle":
        return LabelOracle(1 - self.labels, self.n)

    def require_nondegenerate(self) -> None:
        if self.M in (0, self.N):
            raise DegenerateOracleError(
                f"oracle marks {self.M} of {self.N} basis states; need 1 <= M <= N-1")

    def ideal_states(self) -> tuple[PureState, PureState]:
        """(|m>, |m_perp>): uniform superpositions over label 1 and label 0."""
        self.require_nondegenerate()
        m = self.labels.astype(float)
        return PureState.from_vector(m), PureState.from_vector(1.0 - m)


def oracle_apply(oracle: LabelOracle, state: PureState) -> PureState:
    if state.dim != oracle.N:
        raise DimensionError(f"oracle acts on dimension {oracle.N}, state has {state.dim}")
    return PureState(state.amplitudes * (1 - 2 * oracle.labels.astype(float)))


def diffusion(state: PureState) -> PureState:
    """Reflection 2|s><s| - I about the uniform superposition."""
    a = state.amplitudes
    return PureState(2 * a.mean() - a)


def u_pi(state: PureState) -> PureState:
    """The pi phase shifter: |sigma> -> -|sigma>."""
    return PureState(-state.amplitudes)


def uniform_superposition(n: int) -> PureState:
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    for q in range(n):
        amps = apply_matrix(amps, H, (q,))
    return PureState(amps)


def _round_half_up(x: float) -> int:
    # asin rounding can leave exact halves one ulp short
    return math.floor(x + 0.5 + 1e-9)


def grover_iterations(N: int, M: int) -> int:
    """Optimal iteration count, rounded half up."""
    if not 1 <= M <= N - 1:
        raise DegenerateOracleError(f"need 1 <= M <= N-1, got M={M}, N={N}")
    theta = math.asin(math.sqrt(M / N))
    return max(0, _round_half_up(math.pi / (4 * theta) - 0.5))


def grover_run(oracle: LabelOracle, k: int, initial: PureState | None = None) -> PureState:
    state = uniform_superposition(oracle.n) if initial is None else initial
    for _ in range(k):
        state = diffusion(oracle_apply(oracle, state))
    return state


def prepare_m_tilde(oracle: LabelOracle, k: int | None = None) -> PureState:
    oracle.require_nondegenerate()
    if k is None:
        k = grover_iterations(oracle.N, oracle.M)
    return grover_run(oracle, k)


def prepare_m_perp_tilde(oracle: LabelOracle, k: int | None = None) -> PureState:
    """Grover with the complement oracle, sized for N - M marked states."""
    oracle.require_nondegenerate()
    comp = oracle.complement()
    if k is None:
        k = grover_iterations(oracle.N, oracle.N - oracle.M)
    return grover_run(comp, k)


def grover_overlap(N: int, M: int, k: int) -> float:
    """Closed-form squared overlap of the k-step Grover state with |m>."""
    theta = math.asin(math.sqrt(M / N))
    return math.sin((2 * k + 1) * theta) ** 2


@dataclass(frozen=True)
class ReferenceStates:
    m_tilde: PureState
    m_perp_tilde: PureState
    m: PureState
    m_perp: PureState
    k: int
    k_perp: int
    overlap: float = field(init=False)
    overlap_perp: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "overlap", abs(self.m.overlap(self.m_tilde)) ** 2)
        object.__setattr__(self, "overlap_perp", abs(self.m_perp.overlap(self.m_perp_tilde)) ** 2)

    @classmethod
    def prepare(cls, oracle: LabelOracle, k: int | None = None,
                k_perp: int | None = None) -> "ReferenceStates":
        oracle.require_nondegenerate()
        if k is None:
            k = grover_iterations(oracle.N, oracle.M)
        if k_perp is None:
            k_perp = grover_iterations(oracle.N, oracle.N - oracle.M)
        m, m_perp = oracle.ideal_states()
        return cls(prepare_m_tilde(oracle, k), prepare_m_perp_tilde(oracle, k_perp),
                   m, m_perp, k, k_perp)

    @classmethod
    def perfect(cls, oracle: LabelOracle) -> "ReferenceStates":
        m, m_perp = oracle.ideal_states()
        return cls(m, m_perp, m, m_perp, -1, -1)


def basis_probabilities(m_tilde: PureState, shots: int | None = None, seed=None) -> np.ndarray:
    """q_j: exact probabilities, or empirical frequencies when ``shots`` is set."""
    p = m_tilde.probabilities()
    if shots is None:
        return p
    counts = np.bincount(sample_outcomes(p, shots, seed), minlength=p.size)
    return counts / shots


def classify_basis_vector(j: int, m_tilde: PureState, threshold: float | None = None,
                          q: np.ndarray | None = None) -> int:
    """1 if q_j exceeds ``threshold`` (default 1/N), else 0."""
    N = m_tilde.dim
    if not 0 <= j < N:
        raise DimensionError(f"basis index {j} out of range for N={N}")
    if threshold is None:
        threshold = 1.0 / N
    q = m_tilde.probabilities() if q is None else q
    return int(q[j] > threshold)


@dataclass(frozen=True)
class BasisClassification:
    q: np.ndarray
    labels: np.ndarray
    threshold: float
    # indices whose q_j sits within 1e-12 of the threshold
    low_confidence: np.ndarray


def classify_basis_vectors(m_tilde: PureState, threshold: float | None = None,
                           shots: int | None = None, seed=None) -> BasisClassification:
    N = m_tilde.dim
    if threshold is None:
        threshold = 1.0 / N
    q = basis_probabilities(m_tilde, shots, seed)
    labels = np.array([classify_basis_vector(j, m_tilde, threshold, q) for j in range(N)])
    low = np.flatnonzero(np.abs(q - threshold) <= 1e-12)
    return BasisClassification(q, labels, threshold, low)


def classify_state(sigma: PureState, refs: ReferenceStates, config: QpeConfig | None = None,
                   mode: Literal["exact", "estimated"] = "exact") -> int:
    """0 when F(sigma, m~) <= F(sigma, m_perp~), else 1."""
    if sigma.dim != refs.m_tilde.dim:
        raise DimensionError("state and references have different dimensions")
    if mode == "exact":
        f1 = fidelity_exact(refs.m_tilde.projector(), sigma)
        f0 = fidelity_exact(refs.m_perp_tilde.projector(), sigma)
        return 0 if f1 <= f0 + TIE_TOL else 1
    if mode != "estimated":
        raise ValidationError(f"unknown mode {mode!r}")
    if config is None:
        raise ValidationError("estimated mode needs a QpeConfig")
    cfg1, cfg0 = config, config
    if config.seed is not None:
        s1, s0 = np.random.SeedSequence(config.seed).spawn(2)
        cfg1 = config.replace(seed=int(s1.generate_state(1)[0]))
        cfg0 = config.replace(seed=int(s0.generate_state(1)[0]))
    f1 = estimate_fidelity(refs.m_tilde.projector(), sigma, cfg1).value
    f0 = estimate_fidelity(refs.m_perp_tilde.projector(), sigma, cfg0).value
    return 0 if f1 <= f0 else 1
