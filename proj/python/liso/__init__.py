"""Sparse additive isotonic regression with a total-variation penalty."""

from ._liso import (
    Model,
    StepFunction,
    cv,
    fit,
    fit_adaptive,
    lambda_max,
    model_from_json,
    univariate,
    __version__,
)

__all__ = [
    "Model",
    "StepFunction",
    "cv",
    "fit",
    "fit_adaptive",
    "lambda_max",
    "model_from_json",
    "univariate",
    "__version__",
]
