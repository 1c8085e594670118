"""Evaluation protocol and comparison of representation methods."""
from .protocol import (  # noqa: F401
    SWEEP_AXES,
    SWEEP_COLUMNS,
    EvaluateConfig,
    Evaluation,
    derive_seed,
    evaluate_fit,
    run_protocol,
    score_representation,
    sweep,
    sweep_point,
)
