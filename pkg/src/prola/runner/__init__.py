from .config import ExperimentConfig, load_config, read_config
from .experiment import AggregateResult, run_experiment, simulate_replication
from .outputs import write_outputs

__all__ = ["AggregateResult", "ExperimentConfig", "load_config", "read_config",
           "run_experiment", "simulate_replication", "write_outputs"]
