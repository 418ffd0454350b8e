"""Experiment configuration documents.

Configs are YAML mappings. Schema version 1::

    schema_version: 1            # optional, must be 1
    experiment: fidelity-sweep   # required, see EXPERIMENTS
    seed: 0
    mode: analytic-kernel        # analytic-kernel | full-circuit | sampled
    n: 2                         # system qubits (runtime-scaling: 3)
    t: 6                         # estimator register qubits
    tau: 0.9                     # evolution time, in (0,1)
    shots: 10000                 # sampled mode
    trials: 20
    workers: 1                   # thread pool size for independent trials
    output: runs/fidelity-sweep  # report directory
    dataset: {per_class: 10, spread: 0.1, separation: 0.25}
    oracle: "pattern: parity"    # inline oracle spec, or
    oracle_path: oracle.txt      # a file, relative to the config file
    params: {...}                # experiment-specific, see PARAM_DEFAULTS

Every violation is collected before raising, each tagged with its key path.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..qpe_fidelity import MAX_CIRCUIT_QUBITS, Mode

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "fidelity-sweep",
    "error-bound-audit",
    "register-sizing-audit",
    "lloyd-convergence",
    "supervised-demo",
    "unsupervised-demo",
    "grover-sweep",
    "runtime-scaling",
)

TOP_DEFAULTS: dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "mode": Mode.ANALYTIC.value,
    "n": 2,
    "t": 6,
    "tau": 0.9,
    "shots": 10000,
    "trials": 20,
    "workers": 1,
    "output": None,
    "oracle": None,
    "oracle_path": None,
}

# top-level defaults that differ per experiment
EXPERIMENT_TOP_DEFAULTS: dict[str, dict[str, Any]] = {
    "runtime-scaling": {"n": 3},  # room for ranks up to 8
}

DATASET_DEFAULTS = {"per_class": 10, "spread": 0.1, "separation": 0.25}

PARAM_DEFAULTS: dict[str, dict[str, Any]] = {
    "fidelity-sweep": {"rank": 2, "t_values": None},
    "error-bound-audit": {"n_values": [1, 2, 3], "t_values": [4, 5, 6, 7, 8],
                          "max_rank": 4, "cross_check_max_qubits": 12},
    "register-sizing-audit": {"m": 4, "epsilon": 0.1, "corrected": True},
    "lloyd-convergence": {"steps": [16, 32, 64, 128]},
    "supervised-demo": {},
    "unsupervised-demo": {"threshold": None},
    "grover-sweep": {"n_max": 6},
    "runtime-scaling": {"ranks": [1, 2, 4, 8], "repeats": 3},
}


class ConfigError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid config:\n  " + "\n  ".join(self.violations))


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    mode: str
    n: int
    t: int
    tau: float
    shots: int
    trials: int
    workers: int
    output: str | None
    dataset: dict
    oracle: str | None
    params: dict
    schema_version: int = SCHEMA_VERSION
    source_dir: str | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "seed": self.seed,
            "mode": self.mode,
            "n": self.n,
            "t": self.t,
            "tau": self.tau,
            "shots": self.shots,
            "trials": self.trials,
            "workers": self.workers,
            "output": self.output,
            "dataset": dict(self.dataset),
            "oracle": self.oracle,
            "params": copy.deepcopy(self.params),
        }

    def with_overrides(self, seed=None, output=None, mode=None) -> "ExperimentConfig":
        doc = self.to_dict()
        if seed is not None:
            doc["seed"] = seed
        if output is not None:
            doc["output"] = output
        if mode is not None:
            doc["mode"] = mode
        return build_config(doc, source_dir=self.source_dir)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _int_list(v) -> bool:
    return isinstance(v, list) and len(v) > 0 and all(_is_int(x) for x in v)


def parse_config(text: str, source_dir: str | Path | None = None) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"<document>: malformed YAML: {exc}"]) from None
    if not isinstance(doc, dict):
        raise ConfigError(["<document>: expected a key-value mapping at top level"])
    return build_config(doc, source_dir=source_dir)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), source_dir=path.parent)


def build_config(doc: dict, source_dir: str | Path | None = None) -> ExperimentConfig:
    errors: list[str] = []
    known = set(TOP_DEFAULTS) | {"experiment", "dataset", "params"}
    for key in doc:
        if key not in known:
            errors.append(f"{key}: unknown key")

    exp = doc.get("experiment")
    if exp is None:
        errors.append("experiment: required; valid names are " + ", ".join(EXPERIMENTS))
    elif exp not in EXPERIMENTS:
        errors.append(f"experiment: unknown experiment {exp!r}; valid names are "
                      + ", ".join(EXPERIMENTS))

    defaults = {**TOP_DEFAULTS, **EXPERIMENT_TOP_DEFAULTS.get(exp, {})}
    top = {k: doc.get(k, v) for k, v in defaults.items()}
    if top["schema_version"] != SCHEMA_VERSION:
        errors.append(f"schema_version: unsupported version {top['schema_version']!r}")
    if not _is_int(top["seed"]) or top["seed"] < 0:
        errors.append("seed: must be a non-negative integer")
    valid_modes = [m.value for m in Mode]
    if top["mode"] not in valid_modes:
        errors.append(f"mode: must be one of {', '.join(valid_modes)}")
    for key in ("n", "t", "shots", "trials", "workers"):
        if not _is_int(top[key]) or top[key] < 1:
            errors.append(f"{key}: must be an integer >= 1")
    if not _is_real(top["tau"]) or not 0.0 < top["tau"] < 1.0:
        errors.append("tau: tau must lie in (0,1)")
    elif top["tau"] is not None:
        top["tau"] = float(top["tau"])
    if (top["mode"] == Mode.CIRCUIT.value and _is_int(top["n"]) and _is_int(top["t"])
            and top["n"] + top["t"] > MAX_CIRCUIT_QUBITS):
        errors.append(f"t: full-circuit mode needs n + t <= {MAX_CIRCUIT_QUBITS}")
    if top["output"] is not None and not isinstance(top["output"], str):
        errors.append("output: must be a path string")

    dataset_doc = doc.get("dataset", {}) or {}
    dataset = dict(DATASET_DEFAULTS)
    if not isinstance(dataset_doc, dict):
        errors.append("dataset: must be a mapping")
    else:
        for key in dataset_doc:
            if key not in DATASET_DEFAULTS:
                errors.append(f"dataset.{key}: unknown key")
        dataset.update({k: v for k, v in dataset_doc.items() if k in DATASET_DEFAULTS})
    if not _is_int(dataset["per_class"]) or dataset["per_class"] < 1:
        errors.append("dataset.per_class: must be an integer >= 1")
    if not _is_real(dataset["spread"]) or dataset["spread"] < 0:
        errors.append("dataset.spread: must be >= 0")
    if not _is_real(dataset["separation"]) or not 0 <= dataset["separation"] <= 1:
        errors.append("dataset.separation: must lie in [0,1]")

    oracle = top.pop("oracle")
    oracle_path = top.pop("oracle_path")
    if oracle is not None and oracle_path is not None:
        errors.append("oracle_path: give either oracle or oracle_path, not both")
    if oracle is not None and not isinstance(oracle, str):
        errors.append("oracle: must be an oracle spec string")
    if oracle_path is not None:
        p = Path(oracle_path)
        if not p.is_absolute() and source_dir is not None:
            p = Path(source_dir) / p
        try:
            oracle = p.read_text()
        except OSError as exc:
            errors.append(f"oracle_path: cannot read {str(p)!r}: {exc.strerror}")
    if exp == "unsupervised-demo" and oracle is None and oracle_path is None:
        errors.append("oracle: unsupervised-demo requires an oracle spec")

    params = {}
    if exp in PARAM_DEFAULTS:
        params = copy.deepcopy(PARAM_DEFAULTS[exp])
        pdoc = doc.get("params", {}) or {}
        if not isinstance(pdoc, dict):
            errors.append("params: must be a mapping")
            pdoc = {}
        for key, val in pdoc.items():
            if key not in params:
                errors.append(f"params.{key}: unknown parameter for {exp}")
            else:
                params[key] = val
        errors.extend(_check_params(exp, params, top))

    if oracle is not None and _is_int(top["n"]) and top["n"] >= 1:
        from .oracle_spec import parse_oracle_spec
        try:
            parse_oracle_spec(oracle, top["n"])
        except ValueError as exc:
            errors.append(f"oracle: {exc}")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(experiment=exp, dataset=dataset, oracle=oracle, params=params,
                            source_dir=None if source_dir is None else str(source_dir), **top)


def _check_params(exp: str, p: dict, top: dict) -> list[str]:
    errs = []

    def bad(key, msg):
        errs.append(f"params.{key}: {msg}")

    if exp == "fidelity-sweep":
        if not _is_int(p["rank"]) or p["rank"] < 1:
            bad("rank", "must be an integer >= 1")
        elif _is_int(top["n"]) and p["rank"] > 2 ** top["n"]:
            bad("rank", f"must not exceed 2^n = {2 ** top['n']}")
        if p["t_values"] is not None and not (_int_list(p["t_values"])
                                              and min(p["t_values"]) >= 1):
            bad("t_values", "must be a non-empty list of integers >= 1")
        elif (p["t_values"] is not None and top["mode"] == Mode.CIRCUIT.value
              and _is_int(top["n"]) and top["n"] + max(p["t_values"]) > MAX_CIRCUIT_QUBITS):
            bad("t_values", f"full-circuit mode needs n + t <= {MAX_CIRCUIT_QUBITS}")
    elif exp == "error-bound-audit":
        for key in ("n_values", "t_values"):
            if not (_int_list(p[key]) and min(p[key]) >= 1):
                bad(key, "must be a non-empty list of integers >= 1")
        if not _is_int(p["max_rank"]) or p["max_rank"] < 1:
            bad("max_rank", "must be an integer >= 1")
        if not _is_int(p["cross_check_max_qubits"]) or p["cross_check_max_qubits"] > MAX_CIRCUIT_QUBITS:
            bad("cross_check_max_qubits", f"must be an integer <= {MAX_CIRCUIT_QUBITS}")
    elif exp == "register-sizing-audit":
        if not _is_int(p["m"]) or p["m"] < 1:
            bad("m", "must be an integer >= 1")
        if not _is_real(p["epsilon"]) or not 0 < p["epsilon"] < 1:
            bad("epsilon", "must lie in (0,1)")
        if not isinstance(p["corrected"], bool):
            bad("corrected", "must be true or false")
    elif exp == "lloyd-convergence":
        if not (_int_list(p["steps"]) and min(p["steps"]) >= 1):
            bad("steps", "must be a non-empty list of integers >= 1")
        elif _is_real(top["tau"]) and top["tau"] / min(p["steps"]) > 0.1:
            bad("steps", "tau / steps must not exceed 0.1 (partial-swap step limit)")
    elif exp == "unsupervised-demo":
        th = p["threshold"]
        if th is not None and (not _is_real(th) or not 0 <= th < 1):
            bad("threshold", "must lie in [0,1)")
    elif exp == "grover-sweep":
        if not _is_int(p["n_max"]) or not 1 <= p["n_max"] <= 10:
            bad("n_max", "must be an integer in [1, 10]")
    elif exp == "runtime-scaling":
        if not (_int_list(p["ranks"]) and min(p["ranks"]) >= 1):
            bad("ranks", "must be a non-empty list of integers >= 1")
        elif _is_int(top["n"]) and max(p["ranks"]) > 2 ** top["n"]:
            bad("ranks", f"ranks must not exceed 2^n = {2 ** top['n']}")
        if not _is_int(p["repeats"]) or p["repeats"] < 1:
            bad("repeats", "must be an integer >= 1")
    return errs
