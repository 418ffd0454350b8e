"""Estimating F(rho, sigma) = <sigma|rho|sigma> by phase estimation.

Run: python demos/01_fidelity_estimation.py
"""
import math

import numpy as np

from qbinclass import DensityMatrix, PureState, fidelity_exact, random_density, random_pure_state
from qbinclass.qpe_fidelity import (
    Mode,
    QpeConfig,
    error_bound,
    estimate_fidelity,
    kernel_distribution,
    register_size,
)

# A spectrum whose phases lambda*tau/(2 pi) land on the 5-bit grid is read out exactly.
rho = DensityMatrix(np.diag([0.75, 0.25]))
plus = PureState.from_vector([1, 1])
cfg = QpeConfig(n=1, t=5, tau=math.pi / 4)
print("representable phases")
for mode in Mode:
    c = cfg.replace(mode=mode, shots=20_000 if mode is Mode.SAMPLED else None, seed=1)
    est = estimate_fidelity(rho, plus, c)
    print(f"  {mode.value:>15}: {est.value:.12f}  (exact {fidelity_exact(rho, plus)})")

# For a generic density matrix the register distribution smears over neighbouring
# outcomes, and the estimate carries a bound max_j |lambda_j - lambda~_j|.
rho = random_density(2, 3, seed=7)
sigma = random_pure_state(2, seed=8)
exact = fidelity_exact(rho, sigma)
print("\nrandom rank-3 state, tau = 0.9")
print("   t   estimate       |error|        bound")
for t in range(3, 11):
    est = estimate_fidelity(rho, sigma, QpeConfig(2, t, 0.9))
    print(f"  {t:2d}   {est.value:.8f}   {abs(est.value - exact):.2e}   {est.error_bound:.2e}")

# The verbatim outcome grid maps the kernel's tail near k = 2^t - 1 to large values;
# the wrapped estimator folds those outcomes back to small phases.
theta = 0.01 * 0.9 / (2 * math.pi)
p = kernel_distribution(theta, 6)
print(f"\nkernel mass in the top quarter of outcomes for lambda = 0.01, t = 6: {p[48:].sum():.3f}")
for wrapped in (False, True):
    print(f"  wrapped={wrapped}: bound {error_bound([0.01], QpeConfig(1, 6, 0.9, wrapped=wrapped)):.4f}")

print("\nregister sizes for m = 4 bits at epsilon = 0.1:",
      register_size(4, 0.1), "(phase units),",
      register_size(4, 0.1, 0.9, corrected=True), "(eigenvalue units, tau = 0.9)")
