"""Supervised binary classifier: class densities from training ensembles,
decisions by comparing fidelity estimates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import (
    DensityMatrix,
    DimensionError,
    PureState,
    ValidationError,
    fidelity_exact,
    random_pure_state,
)
from .qpe_fidelity import FidelityEstimate, QpeConfig, estimate_fidelity

WEIGHT_TOL = 1e-8
# exact fidelities closer than this are treated as a tie
TIE_TOL = 1e-12


@dataclass(frozen=True)
class LabeledEnsemble:
    states: tuple[PureState, ...]
    weights: np.ndarray
    label: int

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValidationError("ensemble is empty")
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label!r}")
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise DimensionError("ensemble members have different dimensions")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(states),):
            raise ValidationError("one weight per member is required")
        if np.any(w < 0):
            raise ValidationError("weights must be non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, states: Sequence[PureState], label: int) -> "LabeledEnsemble":
        return cls(tuple(states), np.full(len(states), 1.0 / max(len(states), 1)), label)

    @property
    def num_qubits(self) -> int:
        return self.states[0].num_qubits


def build_class_density(ensemble: LabeledEnsemble) -> DensityMatrix:
    """Weighted mixture sum_s p(s) |sigma_s><sigma_s|."""
    return DensityMatrix.mixture(ensemble.states, ensemble.weights)


@dataclass(frozen=True)
class TrainingModel:
    rho0: DensityMatrix
    rho1: DensityMatrix
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rho0.dim != self.rho1.dim:
            raise DimensionError("class densities have different dimensions")

    @classmethod
    def from_ensembles(cls, ens0: LabeledEnsemble, ens1: LabeledEnsemble,
                       **provenance) -> "TrainingModel":
        if (ens0.label, ens1.label) != (0, 1):
            raise ValidationError("expected ensembles labelled 0 and 1")
        meta = {"size0": len(ens0.states), "size1": len(ens1.states), **provenance}
        return cls(build_class_density(ens0), build_class_density(ens1), meta)

    @property
    def num_qubits(self) -> int:
        return self.rho0.num_qubits


def classify_exact_rule(rho0: DensityMatrix, rho1: DensityMatrix, sigma: PureState) -> int:
    f0, f1 = fidelity_exact(rho0, sigma), fidelity_exact(rho1, sigma)
    return 0 if f0 >= f1 - TIE_TOL else 1


@dataclass(frozen=True)
class SupervisedDecision:
    label: int
    estimate0: FidelityEstimate
    estimate1: FidelityEstimate
    copies_consumed: int = 2

    @property
    def margin(self) -> float:
        return self.estimate0.value - self.estimate1.value

    def __iter__(self):
        return iter((self.label, self.estimate0, self.estimate1))


def classify_supervised(model: TrainingModel, sigma: PureState,
                        config: QpeConfig) -> SupervisedDecision:
    """Label 0 iff the class-0 estimate is >= the class-1 estimate.

    In sampled mode the two runs use independent streams derived from
    ``config.seed``.
    """
    if sigma.dim != model.rho0.dim:
        raise DimensionError("test state does not match the model dimension")
    cfg0, cfg1 = config, config
    if config.seed is not None:
        s0, s1 = np.random.SeedSequence(config.seed).spawn(2)
        cfg0 = config.replace(seed=int(s0.generate_state(1)[0]))
        cfg1 = config.replace(seed=int(s1.generate_state(1)[0]))
    e0 = estimate_fidelity(model.rho0, sigma, cfg0)
    e1 = estimate_fidelity(model.rho1, sigma, cfg1)
    return SupervisedDecision(0 if e0.value >= e1.value else 1, e0, e1)


@dataclass(frozen=True)
class SampleRecord:
    estimate0: float
    estimate1: float
    error_bound0: float
    error_bound1: float
    predicted: int
    truth: int | None = None


@dataclass
class ClassificationReport:
    records: list[SampleRecord]

    @property
    def labelled(self) -> list[SampleRecord]:
        return [r for r in self.records if r.truth is not None]

    @property
    def accuracy(self) -> float | None:
        recs = self.labelled
        if not recs:
            return None
        return sum(r.predicted == r.truth for r in recs) / len(recs)

    @property
    def confusion(self) -> np.ndarray:
        """counts[truth, predicted]"""
        c = np.zeros((2, 2), dtype=int)
        for r in self.labelled:
            c[r.truth, r.predicted] += 1
        return c


def classify_many(model: TrainingModel, states: Sequence[PureState], config: QpeConfig,
                  truths: Sequence[int] | None = None) -> ClassificationReport:
    records = []
    base = np.random.SeedSequence(config.seed) if config.seed is not None else None
    children = base.spawn(len(states)) if base is not None else [None] * len(states)
    for i, sigma in enumerate(states):
        cfg = config
        if children[i] is not None:
            cfg = config.replace(seed=int(children[i].generate_state(1)[0]))
        dec = classify_supervised(model, sigma, cfg)
        records.append(SampleRecord(dec.estimate0.value, dec.estimate1.value,
                                    dec.estimate0.error_bound, dec.estimate1.error_bound,
                                    dec.label, None if truths is None else int(truths[i])))
    return ClassificationReport(records)


# -- synthetic data -----------------------------------------------------------

def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    """GUE sample scaled to unit operator norm."""
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (a + a.conj().T) / 2
    return h / np.max(np.abs(np.linalg.eigvalsh(h)))


def perturb(state: PureState, spread: float, rng: np.random.Generator) -> PureState:
    """exp(-i spread H) |state> for a random Hermitian H."""
    if spread == 0:
        return state
    w, V = np.linalg.eigh(random_hermitian(state.dim, rng))
    return PureState.from_vector(V @ (np.exp(-1j * spread * w) * (V.conj().T @ state.amplitudes)))


@dataclass(frozen=True)
class TwoClassDataset:
    fiducial0: PureState
    fiducial1: PureState
    train0: LabeledEnsemble
    train1: LabeledEnsemble
    test_states: tuple[PureState, ...]
    test_truths: tuple[int, ...]

    @property
    def model(self) -> TrainingModel:
        return TrainingModel.from_ensembles(self.train0, self.train1)


MAX_FIDUCIAL_DRAWS = 1000


def _fiducials(n: int, separation: float, rng: np.random.Generator):
    f0 = random_pure_state(n, rng)
    if separation <= 0:
        # Gram-Schmidt the second draw against the first
        v = random_pure_state(n, rng).amplitudes
        v = v - np.vdot(f0.amplitudes, v) * f0.amplitudes
        return f0, PureState.from_vector(v)
    for _ in range(MAX_FIDUCIAL_DRAWS):
        f1 = random_pure_state(n, rng)
        if abs(f0.overlap(f1)) ** 2 <= separation:
            return f0, f1
    raise ValidationError(f"no fiducial pair with overlap <= {separation} found")


def generate_two_class_dataset(n: int, per_class: int, spread: float, separation: float,
                               seed=None) -> TwoClassDataset:
    """Two clusters of perturbed copies of random fiducial states.

    Each class gets ``per_class`` training members and ``per_class`` held-out
    test members. ``separation`` bounds the squared overlap of the fiducials;
    0 forces them orthogonal.
    """
    if per_class < 1:
        raise ValidationError("per_class must be >= 1")
    if spread < 0:
        raise ValidationError("spread must be >= 0")
    rng = np.random.default_rng(seed)
    f0, f1 = _fiducials(n, separation, rng)
    train, tests, truths = [], [], []
    for label, fid in ((0, f0), (1, f1)):
        members = [perturb(fid, spread, rng) for _ in range(per_class)]
        train.append(LabeledEnsemble.uniform(members, label))
        tests.extend(perturb(fid, spread, rng) for _ in range(per_class))
        truths.extend([label] * per_class)
    return TwoClassDataset(f0, f1, train[0], train[1], tuple(tests), tuple(truths))
