import math

import numpy as np
import pytest

from qbinclass.qcore import (
    DensityMatrix,
    DimensionError,
    PureState,
    ValidationError,
    fidelity_exact,
    random_pure_state,
    spectral_decompose,
)
from qbinclass.qpe_fidelity import Mode, QpeConfig
from qbinclass.supervised import (
    LabeledEnsemble,
    TrainingModel,
    build_class_density,
    classify_exact_rule,
    classify_many,
    classify_supervised,
    generate_two_class_dataset,
)

ZERO, ONE = PureState.basis(0, 1), PureState.basis(1, 1)
PLUS = PureState.from_vector([1, 1])


class TestEnsemble:
    def test_validation(self):
        with pytest.raises(ValidationError):
            LabeledEnsemble((), np.array([]), 0)
        with pytest.raises(ValidationError):
            LabeledEnsemble((ZERO, ONE), np.array([0.5, 0.6]), 0)
        with pytest.raises(ValidationError):
            LabeledEnsemble((ZERO, ONE), np.array([1.5, -0.5]), 0)
        with pytest.raises(DimensionError):
            LabeledEnsemble((ZERO, PureState.basis(0, 2)), np.array([0.5, 0.5]), 0)

    def test_uniform_mixture(self):
        rho = build_class_density(LabeledEnsemble((ZERO, ONE), np.array([0.5, 0.5]), 0))
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-15)

    def test_single_member(self):
        s = random_pure_state(2, 3)
        rho = build_class_density(LabeledEnsemble.uniform([s], 1))
        np.testing.assert_allclose(rho.entries, np.outer(s.amplitudes, s.amplitudes.conj()),
                                   atol=1e-15)

    def test_rank_bound(self):
        rng = np.random.default_rng(1)
        states = [random_pure_state(1, rng) for _ in range(5)]
        rho = build_class_density(LabeledEnsemble(tuple(states), rng.dirichlet(np.ones(5)), 0))
        assert np.trace(rho.entries).real == pytest.approx(1, abs=1e-12)
        assert np.sum(spectral_decompose(rho).eigenvalues > 1e-12) <= 2


class TestExactRule:
    def test_basis(self):
        assert classify_exact_rule(ZERO.projector(), ONE.projector(), ONE) == 1
        assert classify_exact_rule(ZERO.projector(), ONE.projector(), ZERO) == 0

    def test_tie_goes_to_zero(self):
        assert classify_exact_rule(ZERO.projector(), ONE.projector(), PLUS) == 0

    def test_matches_brute_force(self):
        data = generate_two_class_dataset(2, 15, 0.3, 0.3, seed=4)
        m = data.model
        for s in data.test_states:
            s_ = s.amplitudes
            f0 = np.real(s_.conj() @ m.rho0.entries @ s_)
            f1 = np.real(s_.conj() @ m.rho1.entries @ s_)
            assert classify_exact_rule(m.rho0, m.rho1, s) == (0 if f0 >= f1 else 1)

    def test_invariant_under_member_relabelling(self):
        data = generate_two_class_dataset(2, 6, 0.4, 0.5, seed=9)
        perm = np.random.default_rng(0).permutation(6)
        shuffled = LabeledEnsemble(tuple(data.train0.states[i] for i in perm),
                                   data.train0.weights[perm], 0)
        m1 = data.model
        m2 = TrainingModel.from_ensembles(shuffled, data.train1)
        for s in data.test_states:
            assert (classify_exact_rule(m1.rho0, m1.rho1, s)
                    == classify_exact_rule(m2.rho0, m2.rho1, s))

    def test_invariant_under_weight_merge(self):
        # duplicating a member and splitting its weight leaves rho unchanged
        a, b = random_pure_state(1, 1), random_pure_state(1, 2)
        e1 = LabeledEnsemble((a, b), np.array([0.6, 0.4]), 0)
        e2 = LabeledEnsemble((a, a, b), np.array([0.3, 0.3, 0.4]), 0)
        rho1 = build_class_density(LabeledEnsemble.uniform([random_pure_state(1, 3)], 1))
        for seed in range(20):
            s = random_pure_state(1, 100 + seed)
            assert (classify_exact_rule(build_class_density(e1), rho1, s)
                    == classify_exact_rule(build_class_density(e2), rho1, s))


class TestSupervised:
    def test_ideal_config_matches_exact_rule(self):
        # diagonal models with eigenvalues on the 1/32-grid of tau = pi/4, t = 5
        rng = np.random.default_rng(7)
        cfg = QpeConfig(1, 5, math.pi / 4)
        for _ in range(30):
            a, b = rng.integers(0, 5, size=2) / 4
            rho0, rho1 = DensityMatrix(np.diag([a, 1 - a])), DensityMatrix(np.diag([1 - b, b]))
            model = TrainingModel(rho0, rho1)
            s = random_pure_state(1, rng)
            dec = classify_supervised(model, s, cfg)
            assert dec.label == classify_exact_rule(rho0, rho1, s)
            assert dec.estimate0.error_bound < 1e-12

    def test_equal_estimates_pick_zero(self):
        rho = DensityMatrix(np.diag([0.7, 0.3]))
        model = TrainingModel(rho, rho)
        label, e0, e1 = classify_supervised(model, random_pure_state(1, 0), QpeConfig(1, 6))
        assert e0.value == e1.value
        assert label == 0

    def test_copies_bookkeeping(self):
        model = TrainingModel(ZERO.projector(), ONE.projector())
        assert classify_supervised(model, PLUS, QpeConfig(1, 4)).copies_consumed == 2

    def test_margin_soundness(self):
        data = generate_two_class_dataset(2, 25, 0.6, 0.6, seed=12)
        model = data.model
        for t in (3, 5, 7):
            cfg = QpeConfig(2, t, 0.9)
            for s in data.test_states:
                dec = classify_supervised(model, s, cfg)
                f0, f1 = fidelity_exact(model.rho0, s), fidelity_exact(model.rho1, s)
                if abs(f0 - f1) > dec.estimate0.error_bound + dec.estimate1.error_bound:
                    assert dec.label == classify_exact_rule(model.rho0, model.rho1, s)

    def test_disagreement_shrinks_with_t(self):
        data = generate_two_class_dataset(2, 30, 0.5, 0.6, seed=21)
        model = data.model
        exact = [classify_exact_rule(model.rho0, model.rho1, s) for s in data.test_states]
        fractions = []
        for t in range(4, 10):
            rep = classify_many(model, data.test_states, QpeConfig(2, t, 0.9))
            fractions.append(np.mean([r.predicted != e for r, e in zip(rep.records, exact)]))
        assert fractions[-1] <= fractions[0]
        margins = [abs(fidelity_exact(model.rho0, s) - fidelity_exact(model.rho1, s))
                   for s in data.test_states]
        # once both bounds fall under the smallest margin, no disagreement is possible
        rep = classify_many(model, data.test_states, QpeConfig(2, 14, 0.9, wrapped=True))
        bounds = max(r.error_bound0 + r.error_bound1 for r in rep.records)
        if bounds < min(margins):
            assert all(r.predicted == e for r, e in zip(rep.records, exact))

    def test_sampled_audit(self):
        data = generate_two_class_dataset(1, 400, 0.3, 0.2, seed=33)
        model = data.model
        wide = [s for s in data.test_states
                if abs(fidelity_exact(model.rho0, s) - fidelity_exact(model.rho1, s)) > 0.2]
        assert len(wide) >= 100
        agree = total = 0
        for i in range(1000):
            s = wide[i % len(wide)]
            cfg = QpeConfig(1, 8, 0.9, mode=Mode.SAMPLED, shots=10_000, seed=i)
            agree += (classify_supervised(model, s, cfg).label
                      == classify_exact_rule(model.rho0, model.rho1, s))
            total += 1
        assert agree / total >= 0.99

    def test_report(self):
        data = generate_two_class_dataset(1, 5, 0.0, 0.0, seed=1)
        rep = classify_many(data.model, data.test_states, QpeConfig(1, 6, 0.9),
                            data.test_truths)
        assert rep.confusion.sum() == 10
        assert rep.accuracy == np.trace(rep.confusion) / 10
        assert all(r.predicted in (0, 1) for r in rep.records)


class TestDataset:
    def test_zero_spread(self):
        data = generate_two_class_dataset(2, 4, 0.0, 0.5, seed=0)
        for s in data.train0.states + data.test_states[:4]:
            np.testing.assert_array_equal(s.amplitudes, data.fiducial0.amplitudes)
        for s in data.train1.states:
            np.testing.assert_array_equal(s.amplitudes, data.fiducial1.amplitudes)

    def test_determinism(self):
        a = generate_two_class_dataset(2, 3, 0.2, 0.5, seed=5)
        b = generate_two_class_dataset(2, 3, 0.2, 0.5, seed=5)
        for s, t in zip(a.test_states, b.test_states):
            assert s.amplitudes.tobytes() == t.amplitudes.tobytes()

    def test_separation(self):
        d = generate_two_class_dataset(2, 1, 0.0, 0.1, seed=2)
        assert abs(d.fiducial0.overlap(d.fiducial1)) ** 2 <= 0.1
        d = generate_two_class_dataset(2, 1, 0.0, 0.0, seed=2)
        assert abs(d.fiducial0.overlap(d.fiducial1)) < 1e-12

    def test_exact_rule_perfect_on_orthogonal_clusters(self):
        data = generate_two_class_dataset(2, 10, 0.1, 0.0, seed=8)
        m = data.model
        preds = [classify_exact_rule(m.rho0, m.rho1, s) for s in data.test_states]
        assert preds == list(data.test_truths)
