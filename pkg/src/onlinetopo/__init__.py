"""Online identification of sparse VAR-causality graphs.

Modules
-------
model       graphs, stable VAR coefficients, synthetic series
estimators  TISO / TIRSO online updates and step-size schedules
oracle      batch reference solvers and OSGD / PGD baselines
runner      stream a series through an estimator
metrics     NMSD, detection rates, regret and bound certificates
harness     experiment presets, Monte Carlo orchestration, artifacts
certify     end-to-end regret studies against the guarantees
io, ingest  file formats and CSV ingestion
cli         command-line entry point
"""

__version__ = "0.1.0"

from .estimators import (
    EstimatorConfig,
    StepSizeSchedule,
    graph_snapshot,
    group_shrink,
    tirso_init,
    tirso_step,
    tiso_init,
    tiso_step,
)
from .model import (
    SmoothTransitionConfig,
    TimeSeriesMatrix,
    VarParameters,
    generate_er_graph,
    sample_var_coefficients,
    simulate_smooth_transition,
    simulate_var,
)
from .harness import ExperimentConfig, load_result, preset, run_experiment
from .ingest import ingest_csv
from .runner import run_online

__all__ = [
    "EstimatorConfig",
    "ExperimentConfig",
    "SmoothTransitionConfig",
    "StepSizeSchedule",
    "TimeSeriesMatrix",
    "VarParameters",
    "generate_er_graph",
    "graph_snapshot",
    "group_shrink",
    "ingest_csv",
    "load_result",
    "preset",
    "run_experiment",
    "run_online",
    "sample_var_coefficients",
    "simulate_smooth_transition",
    "simulate_var",
    "tirso_init",
    "tirso_step",
    "tiso_init",
    "tiso_step",
]
