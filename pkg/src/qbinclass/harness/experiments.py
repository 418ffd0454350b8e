"""Runnable experiments and report emission.

Each experiment produces flat per-trial records with a fixed column list.
Trial ``i`` draws its randomness from a seed derived from ``(root seed, i)``,
so serial and threaded runs give identical reports. Columns whose names end
in ``_seconds`` hold wall-clock timings and are the only fields allowed to
differ between reruns.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .. import __version__
from ..expsim import conjugate_exact, exponentiate_partial_swap
from ..qcore import (
    DensityMatrix,
    fidelity_exact,
    random_density,
    random_pure_state,
    spectral_decompose,
    trace_norm,
)
from ..qpe_fidelity import (
    Mode,
    QpeConfig,
    build_qpe_state,
    eigenphase,
    estimate_fidelity,
    expectation_F,
    kernel_distribution,
    register_size,
    sample_outcomes,
    spectral_weights,
)
from ..supervised import (
    classify_exact_rule,
    classify_supervised,
    generate_two_class_dataset,
)
from ..unsupervised import (
    ReferenceStates,
    classify_basis_vectors,
    classify_state,
    grover_iterations,
    grover_overlap,
    grover_run,
    LabelOracle,
)
from .config import ExperimentConfig
from .oracle_spec import parse_oracle_spec

TIMING_SUFFIX = "_seconds"
# trial-index stream reserved for dataset generation
DATASET_STREAM = 2**31 - 1


def trial_seed(root: int, index: int) -> int:
    return int(np.random.SeedSequence([root, index]).generate_state(1)[0])


def is_timing_column(name: str) -> bool:
    return name.endswith(TIMING_SUFFIX)


@dataclass
class RunReport:
    experiment: str
    config: dict
    columns: list[str]
    records: list[dict]
    summary: dict
    timings: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def seed(self) -> int:
        return self.config["seed"]

    def to_json(self) -> str:
        doc = {
            "artifact": "qbinclass",
            "version": self.version,
            "experiment": self.experiment,
            "seed": self.seed,
            "config": self.config,
            "summary": self.summary,
            "columns": self.columns,
            "records": self.records,
            "timings": self.timings,
        }
        return json.dumps(_jsonable(doc), indent=2, allow_nan=True) + "\n"

    def to_csv(self, include_timing: bool = True) -> str:
        cols = [c for c in self.columns if include_timing or not is_timing_column(c)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for rec in self.records:
            w.writerow([_cell(rec.get(c)) for c in cols])
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jp, cp = out / "report.json", out / "records.csv"
        jp.write_text(self.to_json())
        cp.write_text(self.to_csv())
        return jp, cp


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _map_trials(fn: Callable[[int], list[dict]], count: int, workers: int) -> list[dict]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(fn, range(count)))
    else:
        chunks = [fn(i) for i in range(count)]
    return [rec for chunk in chunks for rec in chunk]


def _qpe(cfg: ExperimentConfig, n=None, t=None, seed=None, mode=None) -> QpeConfig:
    mode = Mode(mode or cfg.mode)
    return QpeConfig(n=n or cfg.n, t=t or cfg.t, tau=cfg.tau, mode=mode,
                     shots=cfg.shots if mode is Mode.SAMPLED else None, seed=seed)


# -- experiments ---------------------------------------------------------------

def _fidelity_sweep(cfg: ExperimentConfig):
    p = cfg.params
    t_values = p["t_values"] or [cfg.t]
    cols = ["trial", "seed", "n", "t", "tau", "rank", "mode", "exact", "estimate",
            "error_bound", "abs_error", "within_bound", "standard_error", "shots"]

    def trial(i):
        seed = trial_seed(cfg.seed, i)
        ss = np.random.SeedSequence(seed).spawn(3)
        rho = random_density(cfg.n, p["rank"], ss[0])
        sigma = random_pure_state(cfg.n, ss[1])
        exact = fidelity_exact(rho, sigma)
        rows = []
        for t in t_values:
            qc = _qpe(cfg, t=t, seed=int(ss[2].generate_state(1)[0]))
            est = estimate_fidelity(rho, sigma, qc)
            err = abs(est.value - exact)
            slack = 5 * est.standard_error if qc.mode is Mode.SAMPLED else 0.0
            rows.append(dict(trial=i, seed=seed, n=cfg.n, t=t, tau=cfg.tau, rank=p["rank"],
                             mode=qc.mode.value, exact=exact, estimate=est.value,
                             error_bound=est.error_bound, abs_error=err,
                             within_bound=bool(err <= est.error_bound + 1e-12 + slack),
                             standard_error=est.standard_error, shots=est.shots_used))
        return rows

    recs = _map_trials(trial, cfg.trials, cfg.workers)
    summary = {"records": len(recs),
               "bound_violations": sum(not r["within_bound"] for r in recs),
               "mean_abs_error": float(np.mean([r["abs_error"] for r in recs]))}
    return cols, recs, summary


def _error_bound_audit(cfg: ExperimentConfig):
    p = cfg.params
    cols = ["trial", "seed", "n", "rank", "t", "tau", "exact", "analytic", "circuit",
            "mode_gap", "error_bound", "abs_error", "violation"]

    def trial(i):
        seed = trial_seed(cfg.seed, i)
        rng = np.random.default_rng(seed)
        n = int(rng.choice(p["n_values"]))
        rank = int(rng.integers(1, min(p["max_rank"], 2 ** n) + 1))
        t = int(rng.choice(p["t_values"]))
        rho = random_density(n, rank, rng)
        sigma = random_pure_state(n, rng)
        exact = fidelity_exact(rho, sigma)
        decomp = spectral_decompose(rho)
        est = estimate_fidelity(decomp, sigma, _qpe(cfg, n=n, t=t, mode=Mode.ANALYTIC))
        circuit, gap = None, None
        if n + t <= p["cross_check_max_qubits"]:
            circuit = estimate_fidelity(decomp, sigma, _qpe(cfg, n=n, t=t, mode=Mode.CIRCUIT)).value
            gap = abs(circuit - est.value)
        err = abs(est.value - exact)
        return [dict(trial=i, seed=seed, n=n, rank=rank, t=t, tau=cfg.tau, exact=exact,
                     analytic=est.value, circuit=circuit, mode_gap=gap,
                     error_bound=est.error_bound, abs_error=err,
                     violation=bool(err > est.error_bound + 1e-12))]

    recs = _map_trials(trial, cfg.trials, cfg.workers)
    gaps = [r["mode_gap"] for r in recs if r["mode_gap"] is not None]
    summary = {"trials": len(recs),
               "violations": sum(r["violation"] for r in recs),
               "cross_checked": len(gaps),
               "max_mode_gap": max(gaps) if gaps else None}
    return cols, recs, summary


def _register_sizing_audit(cfg: ExperimentConfig):
    p = cfg.params
    t = register_size(p["m"], p["epsilon"], cfg.tau, p["corrected"])
    tolerance = 2.0 ** -p["m"] * (2 * math.pi / cfg.tau)
    cols = ["trial", "seed", "m", "epsilon", "corrected", "t", "tau", "eigenvalue",
            "shots", "hits", "frequency", "meets_target"]

    def trial(i):
        seed = trial_seed(cfg.seed, i)
        rng = np.random.default_rng(seed)
        lam = float(rng.uniform(0.0, 1.0))
        dist = kernel_distribution(eigenphase(lam, cfg.tau), t)
        ks = sample_outcomes(dist, cfg.shots, rng)
        readings = (2 * math.pi / cfg.tau) * ks / 2.0 ** t
        hits = int(np.sum(np.abs(readings - lam) <= tolerance))
        freq = hits / cfg.shots
        return [dict(trial=i, seed=seed, m=p["m"], epsilon=p["epsilon"], corrected=p["corrected"],
                     t=t, tau=cfg.tau, eigenvalue=lam, shots=cfg.shots, hits=hits,
                     frequency=freq, meets_target=bool(freq >= 1 - p["epsilon"]))]

    recs = _map_trials(trial, cfg.trials, cfg.workers)
    summary = {"t": t, "tolerance": tolerance,
               "min_frequency": min(r["frequency"] for r in recs),
               "failures": sum(not r["meets_target"] for r in recs)}
    return cols, recs, summary


def _lloyd_convergence(cfg: ExperimentConfig):
    steps_list = sorted(cfg.params["steps"])
    cols = ["trial", "seed", "tau", "steps", "trace_norm_error", "ratio_to_previous"]

    def trial(i):
        seed = trial_seed(cfg.seed, i)
        ss = np.random.SeedSequence(seed).spawn(2)
        rho = random_density(1, 2, ss[0])
        sigma = random_density(1, 2, ss[1])
        target = conjugate_exact(rho, sigma, cfg.tau)
        rows, prev = [], None
        for s in steps_list:
            err = trace_norm(exponentiate_partial_swap(rho, sigma, cfg.tau, s).entries - target)
            rows.append(dict(trial=i, seed=seed, tau=cfg.tau, steps=s, trace_norm_error=err,
                             ratio_to_previous=None if prev is None else prev / err))
            prev = err
        return rows

    recs = _map_trials(trial, cfg.trials, cfg.workers)
    ratios = [r["ratio_to_previous"] for r in recs if r["ratio_to_previous"] is not None]
    summary = {"min_ratio": min(ratios) if ratios else None,
               "max_ratio": max(ratios) if ratios else None,
               "mean_ratio": float(np.mean(ratios)) if ratios else None}
    return cols, recs, summary


def _supervised_demo(cfg: ExperimentConfig):
    d = cfg.dataset
    data = generate_two_class_dataset(cfg.n, d["per_class"], d["spread"], d["separation"],
                                      seed=trial_seed(cfg.seed, DATASET_STREAM))
    model = data.model
    cols = ["trial", "seed", "truth", "predicted", "exact_label", "estimate0", "estimate1",
            "error_bound0", "error_bound1", "exact0", "exact1", "margin_exceeds_bounds",
            "agrees_with_exact"]

    def trial(i):
        seed = trial_seed(cfg.seed, i)
        sigma = data.test_states[i]
        dec = classify_supervised(model, sigma, _qpe(cfg, seed=seed))
        f0, f1 = fidelity_exact(model.rho0, sigma), fidelity_exact(model.rho1, sigma)
        exact_label = classify_exact_rule(model.rho0, model.rho1, sigma)
        return [dict(trial=i, seed=seed, truth=data.test_truths[i], predicted=dec.label,
                     exact_label=exact_label, estimate0=dec.estimate0.value,
                     estimate1=dec.estimate1.value, error_bound0=dec.estimate0.error_bound,
                     error_bound1=dec.estimate1.error_bound, exact0=f0, exact1=f1,
                     margin_exceeds_bounds=bool(abs(f0 - f1) > dec.estimate0.error_bound
                                                + dec.estimate1.error_bound),
                     agrees_with_exact=bool(dec.label == exact_label))]

    recs = _map_trials(trial, len(data.test_states), cfg.workers)
    conf = np.zeros((2, 2), dtype=int)
    for r in recs:
        conf[r["truth"], r["predicted"]] += 1
    summary = {"samples": len(recs),
               "accuracy": float(np.trace(conf) / conf.sum()),
               "exact_rule_accuracy": float(np.mean([r["exact_label"] == r["truth"] for r in recs])),
               "confusion": conf.tolist(),
               "copies_consumed": 2 * len(recs),
               "sound_margin_disagreements": sum(r["margin_exceeds_bounds"]
                                                 and not r["agrees_with_exact"] for r in recs)}
    return cols, recs, summary


def _unsupervised_demo(cfg: ExperimentConfig):
    oracle = parse_oracle_spec(cfg.oracle, cfg.n)
    refs = ReferenceStates.prepare(oracle)
    basis = classify_basis_vectors(refs.m_tilde, cfg.params["threshold"])
    cols = ["kind", "index", "seed", "truth", "q", "f_m_tilde", "f_m_perp_tilde",
            "predicted_exact", "predicted_estimated"]
    recs = []
    for j in range(oracle.N):
        recs.append(dict(kind="basis", index=j, seed=None, truth=int(oracle.labels[j]),
                         q=float(basis.q[j]), predicted_exact=int(basis.labels[j])))
    perfect = ReferenceStates.perfect(oracle)

    def trial(i):
        seed = trial_seed(cfg.seed, i)
        ss = np.random.SeedSequence(seed).spawn(2)
        sigma = random_pure_state(cfg.n, ss[0])
        est_seed = int(ss[1].generate_state(1)[0])
        return [dict(kind="state", index=i, seed=seed,
                     truth=classify_state(sigma, perfect),
                     f_m_tilde=abs(refs.m_tilde.overlap(sigma)) ** 2,
                     f_m_perp_tilde=abs(refs.m_perp_tilde.overlap(sigma)) ** 2,
                     predicted_exact=classify_state(sigma, refs),
                     predicted_estimated=classify_state(sigma, refs, _qpe(cfg, seed=est_seed),
                                                        mode="estimated"))]

    recs.extend(_map_trials(trial, cfg.trials, cfg.workers))
    states = [r for r in recs if r["kind"] == "state"]
    summary = {"N": oracle.N, "M": oracle.M, "k": refs.k, "k_perp": refs.k_perp,
               "overlap_m": refs.overlap, "overlap_m_perp": refs.overlap_perp,
               "basis_errors": int(np.sum(basis.labels != oracle.labels)),
               "low_confidence_indices": basis.low_confidence.tolist(),
               "state_exact_accuracy": float(np.mean([r["predicted_exact"] == r["truth"]
                                                      for r in states])) if states else None,
               "state_estimated_accuracy": float(np.mean([r["predicted_estimated"] == r["truth"]
                                                          for r in states])) if states else None}
    return cols, recs, summary


def _grover_sweep(cfg: ExperimentConfig):
    cols = ["n", "N", "M", "k", "k_optimal", "simulated_overlap", "closed_form_overlap", "abs_diff"]
    recs = []
    for n in range(1, cfg.params["n_max"] + 1):
        N = 1 << n
        for M in range(1, N):
            oracle = LabelOracle.from_indices(range(M), n)
            m_state, _ = oracle.ideal_states()
            k_opt = grover_iterations(N, M)
            for k in range(k_opt + 2):
                sim = abs(m_state.overlap(grover_run(oracle, k))) ** 2
                cf = grover_overlap(N, M, k)
                recs.append(dict(n=n, N=N, M=M, k=k, k_optimal=k_opt, simulated_overlap=sim,
                                 closed_form_overlap=cf, abs_diff=abs(sim - cf)))
    summary = {"rows": len(recs), "max_abs_diff": max(r["abs_diff"] for r in recs)}
    return cols, recs, summary


def _runtime_scaling(cfg: ExperimentConfig):
    p = cfg.params
    cols = ["rank", "repeat", "seed", "n", "t", "mode", "estimate", "exact", "elapsed_seconds"]
    recs = []
    for rank in p["ranks"]:
        for rep in range(p["repeats"]):
            seed = trial_seed(cfg.seed, rank * 1000 + rep)
            ss = np.random.SeedSequence(seed).spawn(3)
            rho = random_density(cfg.n, rank, ss[0])
            sigma = random_pure_state(cfg.n, ss[1])
            qc = _qpe(cfg, seed=int(ss[2].generate_state(1)[0]))
            start = time.perf_counter()
            est = estimate_fidelity(rho, sigma, qc)
            elapsed = time.perf_counter() - start
            recs.append(dict(rank=rank, repeat=rep, seed=seed, n=cfg.n, t=cfg.t,
                             mode=qc.mode.value, estimate=est.value,
                             exact=fidelity_exact(rho, sigma), elapsed_seconds=elapsed))
    table = {}
    for rank in p["ranks"]:
        times = [r["elapsed_seconds"] for r in recs if r["rank"] == rank]
        table[str(rank)] = {"trials": len(times), "mean_seconds": float(np.mean(times))}
    summary = {"trials_per_rank": {str(r): p["repeats"] for r in p["ranks"]}}
    return cols, recs, summary, {"by_rank": table}


EXPERIMENT_RUNNERS = {
    "fidelity-sweep": _fidelity_sweep,
    "error-bound-audit": _error_bound_audit,
    "register-sizing-audit": _register_sizing_audit,
    "lloyd-convergence": _lloyd_convergence,
    "supervised-demo": _supervised_demo,
    "unsupervised-demo": _unsupervised_demo,
    "grover-sweep": _grover_sweep,
    "runtime-scaling": _runtime_scaling,
}


class ExperimentError(RuntimeError):
    """A module error raised while an experiment was running."""


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> RunReport:
    """Run ``cfg.experiment``; write report.json and records.csv when an output is set."""
    start = time.perf_counter()
    try:
        result = EXPERIMENT_RUNNERS[cfg.experiment](cfg)
    except Exception as exc:
        raise ExperimentError(f"{cfg.experiment}: {type(exc).__name__}: {exc}") from exc
    cols, recs, summary = result[:3]
    timings = dict(result[3]) if len(result) > 3 else {}
    timings["total_seconds"] = time.perf_counter() - start
    report = RunReport(cfg.experiment, cfg.to_dict(), cols, recs, summary, timings)
    if write and cfg.output:
        out = Path(cfg.output)
        if not out.is_absolute() and cfg.source_dir:
            out = Path(cfg.source_dir) / out
        report.write(out)
    return report
