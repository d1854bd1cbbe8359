"""Fat-tree topologies, stochastic workloads and the experiment event loop."""

from .config import SOLVERS, ExperimentConfig
from .experiment import (CHAIN_COLUMNS, SUMMARY_COLUMNS, ChainRecord, ExperimentMetrics,
                         ResidualNetwork, read_chain_csv, replay_log, run_experiment,
                         write_chain_csv, write_summary_csv)
from .topology import generate_fat_tree, hosts
from .workload import (ARRIVAL, DEPARTURE, DEFAULT_LIFETIME, DEFAULT_RATE, Event, generate_requests,
                       generate_workload)

__all__ = ["SOLVERS", "ExperimentConfig", "CHAIN_COLUMNS", "SUMMARY_COLUMNS", "ChainRecord",
           "ExperimentMetrics", "ResidualNetwork", "read_chain_csv", "replay_log",
           "run_experiment", "write_chain_csv", "write_summary_csv", "generate_fat_tree", "hosts",
           "ARRIVAL", "DEPARTURE", "DEFAULT_LIFETIME", "DEFAULT_RATE", "Event", "generate_requests",
           "generate_workload"]
