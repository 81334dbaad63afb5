"""Levy-driven Ornstein-Uhlenbeck samplers, couplings and TV estimates."""

from ._core import (
    AccuracyError,
    ConfigError,
    GateError,
    LevyMeasure,
    OUModel,
    PreconditionError,
    atomic_measure,
    check_model,
    coupled_walk,
    model,
    phi_inverse,
    reflection_sweep_ok,
    run_experiment,
    sample_endpoints,
    scalar_model,
    stable_measure,
    svc_length,
    svc_measure,
    svc_overlap,
    tv_bound,
    tv_exact_1d,
    tv_histogram,
    uniform_measure,
)

__all__ = [
    "AccuracyError",
    "ConfigError",
    "GateError",
    "LevyMeasure",
    "OUModel",
    "PreconditionError",
    "atomic_measure",
    "check_model",
    "coupled_walk",
    "model",
    "phi_inverse",
    "reflection_sweep_ok",
    "run_experiment",
    "sample_endpoints",
    "scalar_model",
    "stable_measure",
    "svc_length",
    "svc_measure",
    "svc_overlap",
    "tv_bound",
    "tv_exact_1d",
    "tv_histogram",
    "uniform_measure",
]
