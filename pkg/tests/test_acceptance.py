"""Acceptance gate: one marked group of tests per criterion.

The terminal summary prints a PASS/FAIL line per criterion (see conftest).
"""
import itertools
import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from qbinclass.expsim import conjugate_exact, exponentiate_partial_swap, partial_swap_step
from qbinclass.harness.config import EXPERIMENTS, parse_config
from qbinclass.harness.experiments import run_experiment
from qbinclass.qcore import (
    DensityMatrix,
    PureState,
    fidelity_exact,
    random_density,
    random_pure_state,
    spectral_decompose,
    trace_norm,
)
from qbinclass.qpe_fidelity import (
    Mode,
    QpeConfig,
    analytic_distribution,
    eigenphase,
    estimate_fidelity,
    kernel_distribution,
    register_size,
    sample_F,
    sample_outcomes,
    spectral_weights,
)
from qbinclass.supervised import (
    classify_exact_rule,
    classify_supervised,
    generate_two_class_dataset,
)
from qbinclass.unsupervised import (
    LabelOracle,
    ReferenceStates,
    classify_basis_vector,
    classify_state,
    diffusion,
    grover_iterations,
    grover_overlap,
    grover_run,
    oracle_apply,
    prepare_m_tilde,
    u_pi,
    uniform_superposition,
)

criterion = pytest.mark.criterion
EXACT_MODES = (Mode.ANALYTIC, Mode.CIRCUIT)


def audit_instances(count=240, seed=2024):
    """Seeded random (rho, sigma, n, t) with n in 1..3, rank 1..4, t in 4..8."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 4))
        rank = int(rng.integers(1, min(4, 2 ** n) + 1))
        t = int(rng.integers(4, 9))
        out.append((random_density(n, rank, rng), random_pure_state(n, rng), n, t))
    return out


# 1 ---------------------------------------------------------------------------

@criterion(1, "ideal-case exactness of representable eigenphases")
@pytest.mark.parametrize("mode", EXACT_MODES, ids=lambda m: m.value)
def test_c1_diag_three_quarters(mode):
    rho = DensityMatrix(np.diag([0.75, 0.25]))
    sigma = PureState.from_vector([1, 1])
    est = estimate_fidelity(rho, sigma, QpeConfig(1, 5, math.pi / 4, mode=mode))
    assert abs(est.value - fidelity_exact(rho, sigma)) < 1e-12
    assert abs(est.value - 0.5) < 1e-12


@criterion(1, "ideal-case exactness of representable eigenphases")
@pytest.mark.parametrize("mode", EXACT_MODES, ids=lambda m: m.value)
def test_c1_rotated_quarter_spectra(mode):
    rng = np.random.default_rng(1)
    for spectrum in ([0.5, 0.25, 0.25, 0.0], [1.0, 0, 0, 0], [0.25] * 4, [0.75, 0.25, 0, 0]):
        for _ in range(5):
            U = unitary_group.rvs(4, random_state=rng)
            m = (U * np.array(spectrum)) @ U.conj().T
            rho = DensityMatrix((m + m.conj().T) / 2)
            sigma = random_pure_state(2, rng)
            est = estimate_fidelity(rho, sigma, QpeConfig(2, 5, math.pi / 4, mode=mode))
            assert abs(est.value - fidelity_exact(rho, sigma)) < 1e-12


# 2 ---------------------------------------------------------------------------

@criterion(2, "estimate within error bound on 240 random instances")
@pytest.mark.parametrize("mode", EXACT_MODES, ids=lambda m: m.value)
def test_c2_error_bound_audit(mode):
    violations = []
    for i, (rho, sigma, n, t) in enumerate(audit_instances()):
        est = estimate_fidelity(rho, sigma, QpeConfig(n, t, 0.9, mode=mode))
        if abs(est.value - fidelity_exact(rho, sigma)) > est.error_bound + 1e-12:
            violations.append(i)
    assert violations == []


# 3 ---------------------------------------------------------------------------

@criterion(3, "analytic, circuit and sampled modes agree")
def test_c3_analytic_matches_circuit():
    checked = 0
    for rho, sigma, n, t in audit_instances():
        if n + t > 12:
            continue
        decomp = spectral_decompose(rho)
        a = estimate_fidelity(decomp, sigma, QpeConfig(n, t, 0.9, mode=Mode.ANALYTIC)).value
        c = estimate_fidelity(decomp, sigma, QpeConfig(n, t, 0.9, mode=Mode.CIRCUIT)).value
        assert abs(a - c) <= 1e-10
        checked += 1
    assert checked >= 200


@criterion(3, "analytic, circuit and sampled modes agree")
def test_c3_sampled_within_five_standard_errors():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        rho, sigma = random_density(2, 2, rng), random_pure_state(2, rng)
        cfg = QpeConfig(2, 6, 0.9, mode=Mode.SAMPLED, shots=100_000, seed=seed)
        decomp = spectral_decompose(rho)
        exact = estimate_fidelity(decomp, sigma, cfg.replace(mode=Mode.ANALYTIC)).value
        dist = analytic_distribution(spectral_weights(decomp, sigma), decomp.eigenvalues, cfg)
        mean, se = sample_F(dist, cfg)
        hits += abs(mean - exact) <= 5 * se
    assert hits >= 99


# 4 ---------------------------------------------------------------------------

@criterion(4, "corrected register size meets 1 - epsilon single-shot accuracy")
def test_c4_register_sizing():
    m, eps, tau = 4, 0.1, 0.9
    t = register_size(m, eps, tau, corrected=True)
    tolerance = 2.0 ** -m * (2 * math.pi / tau)
    rng = np.random.default_rng(4)
    freqs = []
    for lam in rng.uniform(0, 1, 20):
        ks = sample_outcomes(kernel_distribution(eigenphase(lam, tau), t), 10_000, rng)
        readings = (2 * math.pi / tau) * ks / 2.0 ** t
        freqs.append(np.mean(np.abs(readings - lam) <= tolerance))
    assert min(freqs) >= 1 - eps


# 5 ---------------------------------------------------------------------------

@criterion(5, "Grover exact case and closed-form overlaps")
def test_c5_exact_case():
    state = grover_run(LabelOracle.from_indices([2], 2), 1)
    assert abs(abs(state.amplitudes[2]) ** 2 - 1) <= 1e-12


@criterion(5, "Grover exact case and closed-form overlaps")
def test_c5_closed_form_all_small_oracles():
    worst = 0.0
    for n in range(1, 7):
        N = 1 << n
        for M in range(1, N):
            o = LabelOracle(np.r_[np.ones(M), np.zeros(N - M)])
            m, _ = o.ideal_states()
            state = uniform_superposition(n)
            for k in range(grover_iterations(N, M) + 3):
                if k:
                    state = diffusion(oracle_apply(o, state))
                worst = max(worst, abs(abs(m.overlap(state)) ** 2 - grover_overlap(N, M, k)))
    assert worst <= 1e-12


# 6 ---------------------------------------------------------------------------

@criterion(6, "pi phase shifter leaves Grover statistics unchanged")
def test_c6_u_pi_inert():
    rng = np.random.default_rng(6)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        labels = rng.integers(0, 2, 1 << n)
        # force one marked index and clear its bit-0 neighbour so M is in [1, N-1]
        j = int(rng.integers(0, 1 << n))
        labels[j], labels[j ^ 1] = 1, 0
        o = LabelOracle(labels)
        k = grover_iterations(o.N, o.M)
        plain = grover_run(o, k).probabilities()
        shifted = grover_run(o, k, initial=u_pi(uniform_superposition(n))).probabilities()
        assert np.max(np.abs(plain - shifted)) <= 1e-12


# 7 ---------------------------------------------------------------------------

@criterion(7, "supervised classifier end to end")
@pytest.mark.parametrize("mode", EXACT_MODES, ids=lambda m: m.value)
def test_c7_orthogonal_fiducials_perfect(mode):
    for n, seed in itertools.product((1, 2, 3), range(3)):
        data = generate_two_class_dataset(n, 8, 0.0, 0.0, seed=seed)
        cfg = QpeConfig(n, 5, math.pi / 4, mode=mode)
        preds = [classify_supervised(data.model, s, cfg).label for s in data.test_states]
        assert preds == list(data.test_truths)


@criterion(7, "supervised classifier end to end")
def test_c7_margin_soundness():
    samples = exceptions = 0
    for seed in range(12):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        data = generate_two_class_dataset(n, 25, float(rng.uniform(0.1, 1.0)),
                                          float(rng.uniform(0.0, 0.8)), seed=seed)
        model = data.model
        cfg = QpeConfig(n, int(rng.integers(4, 9)), 0.9)
        for s in data.test_states:
            dec = classify_supervised(model, s, cfg)
            f0, f1 = fidelity_exact(model.rho0, s), fidelity_exact(model.rho1, s)
            samples += 1
            if abs(f0 - f1) > dec.estimate0.error_bound + dec.estimate1.error_bound:
                exceptions += dec.label != classify_exact_rule(model.rho0, model.rho1, s)
    assert samples >= 500
    assert exceptions == 0


# 8 ---------------------------------------------------------------------------

def _eligible_oracles():
    """All oracles with N <= 16, plus 20 random placements per M at N = 32,
    restricted to both Grover success probabilities exceeding 1/2."""
    rng = np.random.default_rng(8)
    for n in range(1, 6):
        N = 1 << n
        if n <= 4:
            candidates = (np.array([(mask >> j) & 1 for j in range(N)])
                          for mask in range(1, (1 << N) - 1))
        else:
            candidates = (rng.permutation(np.r_[np.ones(M), np.zeros(N - M)])
                          for M in range(1, N) for _ in range(20))
        for labels in candidates:
            M = int(labels.sum())
            k, kp = grover_iterations(N, M), grover_iterations(N, N - M)
            if grover_overlap(N, M, k) > 0.5 and grover_overlap(N, N - M, kp) > 0.5:
                yield LabelOracle(labels)


@criterion(8, "unsupervised classifier end to end")
def test_c8_basis_vectors_reproduce_labels():
    failures, total = [], 0
    for o in _eligible_oracles():
        m_tilde = prepare_m_tilde(o)
        total += 1
        if any(classify_basis_vector(j, m_tilde) != o.labels[j] for j in range(o.N)):
            failures.append((o.N, o.M))
    assert not failures, (f"{len(failures)} of {total} oracles misclassified; "
                          f"(N, M) classes: {sorted(set(failures))}")


@criterion(8, "unsupervised classifier end to end")
def test_c8_class_states():
    for o in _eligible_oracles():
        refs = ReferenceStates.prepare(o)
        assert classify_state(refs.m, refs) == 1
        assert classify_state(refs.m_perp, refs) == 0


# 9 ---------------------------------------------------------------------------

@criterion(9, "partial-swap convergence rate and small-step derivative")
def test_c9_doubling_ratio():
    ss = np.random.SeedSequence(9).spawn(40)
    ratios = []
    for i in range(20):
        rho, sigma = random_density(1, 2, ss[2 * i]), random_density(1, 2, ss[2 * i + 1])
        target = conjugate_exact(rho, sigma, 0.5)
        errs = [trace_norm(exponentiate_partial_swap(rho, sigma, 0.5, s).entries - target)
                for s in (8, 16, 32, 64)]
        ratios += [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.0 <= r <= 5.0 for r in ratios), f"ratios span {min(ratios):.4f}..{max(ratios):.4f}"


@criterion(9, "partial-swap convergence rate and small-step derivative")
def test_c9_commutator_derivative():
    rng = np.random.default_rng(99)
    dt = 1e-4
    for _ in range(20):
        rho, sigma = random_density(1, 2, rng), random_density(1, 2, rng)
        fd = (partial_swap_step(rho, sigma, dt).entries - sigma.entries) / dt
        comm = rho.entries @ sigma.entries - sigma.entries @ rho.entries
        assert np.max(np.abs(fd + 1j * comm)) <= 1e-3


# 10 --------------------------------------------------------------------------

SMALL = {
    "fidelity-sweep": "trials: 5\nmode: sampled\nshots: 2000",
    "error-bound-audit": "trials: 10",
    "register-sizing-audit": "trials: 4\nshots: 1000",
    "lloyd-convergence": "trials: 3\nparams: {steps: [10, 20, 40]}",
    "supervised-demo": "dataset: {per_class: 4}\nmode: sampled\nshots: 1000",
    "unsupervised-demo": "n: 3\ntrials: 5\noracle: 'pattern: parity'\nmode: sampled\nshots: 500",
    "grover-sweep": "params: {n_max: 4}",
    "runtime-scaling": "params: {ranks: [1, 2, 4], repeats: 2}",
}


@criterion(10, "re-runs reproduce byte-identical CSV apart from timings")
@pytest.mark.parametrize("name", EXPERIMENTS)
def test_c10_determinism(name, tmp_path):
    texts = []
    for run in ("a", "b"):
        out = tmp_path / run
        cfg = parse_config(f"experiment: {name}\nseed: 31\noutput: {out}\n{SMALL[name]}\n")
        run_experiment(cfg)
        lines = (out / "records.csv").read_text().splitlines()
        header = lines[0].split(",")
        keep = [i for i, c in enumerate(header) if not c.endswith("_seconds")]
        texts.append("\n".join(",".join(row[i] for i in keep)
                               for row in (line.split(",") for line in lines)))
    assert texts[0] == texts[1]
