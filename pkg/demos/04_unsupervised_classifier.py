"""Unsupervised labelling with Grover amplification.

Run: python demos/04_unsupervised_classifier.py
"""
import numpy as np

from qbinclass import random_pure_state
from qbinclass.unsupervised import (
    LabelOracle,
    ReferenceStates,
    classify_basis_vectors,
    classify_state,
    grover_run,
    u_pi,
    uniform_superposition,
)

oracle = LabelOracle.from_predicate(lambda j: bin(j).count("1") == 1, n=4)
refs = ReferenceStates.prepare(oracle)
print(f"N={oracle.N} M={oracle.M} k={refs.k} k_perp={refs.k_perp}")
print(f"|<m|m~>|^2 = {refs.overlap:.4f}, |<m_perp|m_perp~>|^2 = {refs.overlap_perp:.4f}")

basis = classify_basis_vectors(refs.m_tilde)
print("q_j:", np.round(basis.q, 3))
print("labels:", basis.labels, "errors:", int(np.sum(basis.labels != oracle.labels)))

# Arbitrary states are labelled by whichever reference they overlap more.
perfect = ReferenceStates.perfect(oracle)
states = [random_pure_state(4, seed) for seed in range(200)]
agree = sum(classify_state(s, refs) == classify_state(s, perfect) for s in states)
print(f"prepared vs ideal references agree on {agree}/200 random states")

# Negating every amplitude is a global phase: the Grover output is unchanged.
a = grover_run(oracle, refs.k).probabilities()
b = grover_run(oracle, refs.k, initial=u_pi(uniform_superposition(4))).probabilities()
print("max probability change from the pi phase shifter:", np.max(np.abs(a - b)))

# With a majority marked set the optimal count is zero and q_j is flat, so the
# basis rule has nothing to threshold.
majority = LabelOracle.from_indices(range(10), 4)
flat = classify_basis_vectors(ReferenceStates.prepare(majority).m_tilde)
print("majority oracle: low-confidence indices", flat.low_confidence.tolist())
