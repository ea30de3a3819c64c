"""dirtgv: variational restoration of directional images.

Restores images whose texture follows a single main direction by solving
an L2 data-fit model with directional total-variation or second-order
directional total-generalized-variation regularization, via a
Chambolle-Pock primal-dual solver.  Includes automatic estimation of the
texture direction from the degraded image, exact-adjoint discrete
differential operators, degradation synthesis, and PGM/PNG file IO with
a CLI front end.
"""

__version__ = "0.1.0"

from .direction import EstimatorConfig, estimate_main_direction, pixelwise_angle, smooth_angle_field
from .diffops import ddiv_tensor, ddiv_vec, dgrad, div, grad, rotate_scale, sym_dgrad
from .estimators import DirectionalRestorer, MainDirectionEstimator
from .forward import ForwardOperator, NoiseSpec, add_noise, gaussian_blur, identity, phantom
from .grids import (
    DirectionParams,
    inner_product,
    pointwise_norm,
    psnr,
    validate_image,
    validate_sym_tensor_field,
    validate_vector_field,
)
from .regularizers import (
    NonConvergenceError,
    RegWeights,
    RegularizerSpec,
    dtv_energy,
    eval_dtgv2,
    project_ball,
    relaxed_energy,
    tv_energy,
)
from .solver import (
    IterationLog,
    SolveResult,
    SolverConfig,
    SolverDivergedError,
    estimate_lipschitz,
    power_method,
    solve_l2_dtgv2,
    solve_l2_first_order,
)

__all__ = [
    "__version__",
    "DirectionParams",
    "validate_image",
    "validate_vector_field",
    "validate_sym_tensor_field",
    "inner_product",
    "pointwise_norm",
    "psnr",
    "grad",
    "div",
    "rotate_scale",
    "dgrad",
    "ddiv_vec",
    "sym_dgrad",
    "ddiv_tensor",
    "RegWeights",
    "RegularizerSpec",
    "NonConvergenceError",
    "tv_energy",
    "dtv_energy",
    "relaxed_energy",
    "eval_dtgv2",
    "project_ball",
    "ForwardOperator",
    "identity",
    "gaussian_blur",
    "NoiseSpec",
    "add_noise",
    "phantom",
    "EstimatorConfig",
    "pixelwise_angle",
    "smooth_angle_field",
    "estimate_main_direction",
    "SolverConfig",
    "SolverDivergedError",
    "IterationLog",
    "SolveResult",
    "power_method",
    "estimate_lipschitz",
    "solve_l2_dtgv2",
    "solve_l2_first_order",
    "MainDirectionEstimator",
    "DirectionalRestorer",
]
