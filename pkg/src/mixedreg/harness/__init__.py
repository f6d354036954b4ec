"""Experiment runner, lemma suites and command-line interface."""

from .config import ExperimentConfig
from .experiments import (ExperimentResult, TrialCell, TrialRecord, convergence_trace,
                          phase_transition, run_cells, run_trial, sample_complexity_sweep,
                          wilson_interval)

__all__ = ["ExperimentConfig", "ExperimentResult", "TrialCell", "TrialRecord",
           "convergence_trace", "phase_transition", "run_cells", "run_trial",
           "sample_complexity_sweep", "wilson_interval"]
