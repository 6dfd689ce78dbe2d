"""Weak-value amplification of mirror quadratures with a single photon."""

from ._wvamp import (
    ExperimentConfig,
    RegimeViolation,
    UndefinedWeakValue,
    amplification_curve,
    closed_form_weak_values,
    displaced_overlap,
    run_cli,
    tri_mode_reduction,
    verify,
    weak_values,
)

__all__ = [
    "ExperimentConfig",
    "RegimeViolation",
    "UndefinedWeakValue",
    "amplification_curve",
    "closed_form_weak_values",
    "displaced_overlap",
    "run_cli",
    "tri_mode_reduction",
    "verify",
    "weak_values",
]
