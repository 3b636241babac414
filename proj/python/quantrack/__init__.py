"""Streaming multi-quantile tracking, benchmarks and change detection."""

from ._core import (
    ConstraintError,
    Dumiqe,
    FormatError,
    Qewa,
    Tracker,
    detect,
    generate,
    log_lambda_grid,
    score,
    sweep,
    true_quantile,
)

__all__ = [
    "ConstraintError",
    "Dumiqe",
    "FormatError",
    "Qewa",
    "Tracker",
    "detect",
    "generate",
    "log_lambda_grid",
    "score",
    "sweep",
    "true_quantile",
]
