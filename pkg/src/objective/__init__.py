"""GLM objectives, centralized Newton oracles and effective dimension."""

from src.objective.glm import (
    LabeledData,
    LossFamily,
    Objective,
    SqrtHessianFactor,
    curvature_weights,
    gradient,
    hessian,
    loss,
    sketched_hessian,
    sqrt_hessian,
)
from src.objective.linalg import effective_dimension, solve_psd
from src.objective.newton import (
    ModelState,
    NewtonIterate,
    NewtonResult,
    centralized_newton,
    krr_closed_form,
    reference_optimum,
)

__all__ = [
    "LabeledData",
    "LossFamily",
    "ModelState",
    "NewtonIterate",
    "NewtonResult",
    "Objective",
    "SqrtHessianFactor",
    "centralized_newton",
    "curvature_weights",
    "effective_dimension",
    "gradient",
    "hessian",
    "krr_closed_form",
    "loss",
    "reference_optimum",
    "sketched_hessian",
    "solve_psd",
    "sqrt_hessian",
]
