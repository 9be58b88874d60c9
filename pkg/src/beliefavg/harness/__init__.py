"""Experiment configuration, drivers and CSV output."""
from .config import SCENARIOS, ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (FIGURES, Repetition, RunSummary, SweepRow, figure_presets, mix_seed,
                          quantization_sweep, reproduce_figure, run_experiment, run_repetition)
from .output import TRACE_COLUMNS, read_trace_csv, write_trace_csv

__all__ = [
    "SCENARIOS", "ConfigError", "ExperimentConfig", "load_config", "parse_config",
    "FIGURES", "Repetition", "RunSummary", "SweepRow", "figure_presets", "mix_seed",
    "quantization_sweep", "reproduce_figure", "run_experiment", "run_repetition",
    "TRACE_COLUMNS", "read_trace_csv", "write_trace_csv",
]
