"""Binary classification of unknown quantum states by simulated phase
estimation (supervised) and Grover amplification (unsupervised)."""

__version__ = "0.1.0"

from .qcore import (  # noqa: E402
    DensityMatrix,
    DimensionError,
    PureState,
    QuantumError,
    SpectralDecomposition,
    UnitaryMatrix,
    ValidationError,
    apply_gate,
    fidelity_exact,
    random_density,
    random_pure_state,
    spectral_decompose,
)
from .qpe_fidelity import FidelityEstimate, Mode, QpeConfig, estimate_fidelity  # noqa: E402
