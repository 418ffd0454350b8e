from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import RunReport, run_experiment
from .oracle_spec import OracleSpecError, parse_oracle_spec

__all__ = [
    "EXPERIMENTS", "ConfigError", "ExperimentConfig", "load_config", "parse_config",
    "RunReport", "run_experiment", "OracleSpecError", "parse_oracle_spec",
]
