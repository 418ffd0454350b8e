"""Two-class supervised classification by comparing estimated fidelities.

Run: python demos/03_supervised_classifier.py
"""
import math

from qbinclass import fidelity_exact
from qbinclass.qpe_fidelity import Mode, QpeConfig
from qbinclass.supervised import classify_exact_rule, classify_many, generate_two_class_dataset

# Two clusters around orthogonal fiducial states, each member perturbed by a
# random Hamiltonian. Training members are mixed into one density per class.
data = generate_two_class_dataset(n=2, per_class=20, spread=0.4, separation=0.0, seed=11)
model = data.model
exact = [classify_exact_rule(model.rho0, model.rho1, s) for s in data.test_states]
print(f"exact rule accuracy on {len(exact)} held-out states:",
      sum(e == y for e, y in zip(exact, data.test_truths)) / len(exact))

for cfg in (QpeConfig(2, 5, math.pi / 4),
            QpeConfig(2, 4, 0.9),
            QpeConfig(2, 8, 0.9),
            QpeConfig(2, 8, 0.9, mode=Mode.SAMPLED, shots=4000, seed=5)):
    rep = classify_many(model, data.test_states, cfg, data.test_truths)
    agree = sum(r.predicted == e for r, e in zip(rep.records, exact))
    print(f"t={cfg.t} tau={cfg.tau:.3f} {cfg.mode.value:>15}: accuracy {rep.accuracy:.3f}, "
          f"agrees with exact rule on {agree}/{len(exact)}")

# Where the fidelity gap exceeds the two error bounds, the estimated decision is
# guaranteed to match the exact one.
rep = classify_many(model, data.test_states, QpeConfig(2, 6, 0.9), data.test_truths)
sound = [(r, s) for r, s in zip(rep.records, data.test_states)
         if abs(fidelity_exact(model.rho0, s) - fidelity_exact(model.rho1, s))
         > r.error_bound0 + r.error_bound1]
print(f"t=6: {len(sound)} states have a certified margin; confusion matrix\n{rep.confusion}")
