"""Realizing exp(i tau rho) from copies of rho with partial swaps.

Run: python demos/02_density_exponentiation.py
"""
from qbinclass.qcore import random_density, trace_norm
from qbinclass.expsim import conjugate_exact, exponentiate_partial_swap

rho = random_density(1, 2, seed=3)
sigma = random_density(1, 2, seed=4)
tau = 0.5
target = conjugate_exact(rho, sigma, tau)

# Each step swaps a fresh copy of rho with sigma for time dt = tau/steps and
# discards it. The second-order residue of every step accumulates, so the
# error falls like 1/steps: doubling the copy count roughly halves it.
print("steps   trace-norm error   ratio")
prev = None
for steps in (8, 16, 32, 64, 128, 256):
    err = trace_norm(exponentiate_partial_swap(rho, sigma, tau, steps).entries - target)
    ratio = "" if prev is None else f"{prev / err:.3f}"
    print(f"{steps:5d}   {err:.3e}          {ratio}")
    prev = err
