"""
dslift - Localized kernels and lifted approximation on data spaces.

A numerical toolkit for approximation on spaces described only through an
orthonormal eigensystem:

- **Trigonometric Jacobi spaces** on [0, pi] and zonal **ball spaces**
- **Localized kernels** Phi_n and the summability operator sigma_n
- **Heat kernels** with explicit truncation control
- **Joint spaces** coupling two Jacobi systems through banded connection
  coefficients, with image sets and the lifting of functions between them

Quick Start:
    >>> from dslift import JacobiParams, build_joint_jacobi, image_set
    >>> joint = build_joint_jacobi(JacobiParams(1.5, 1.5), JacobiParams(-0.5, -0.5), 64)
    >>> image = image_set(joint, (1.5708, 0.5), 1 / 16, 1 / 16)
    >>> image.interval("B")
"""

__version__ = "0.3.0"
__author__ = "dslift contributors"

from .orthopoly import JacobiParams, OrthoPolyBasis, QuadratureRule, build_basis, gauss_rule, value_at_one
from .dataspace import (
    BallSpace,
    DataSpace,
    GridFunction,
    Measure,
    TrigJacobiSpace,
    fourier_coefficients,
    make_ball_space,
    make_trig_jacobi_space,
)
from .kernels import (
    Filter,
    estimate_smoothness,
    filter_eval,
    heat_kernel,
    kernel_matrix,
    localization_profile,
    localized_kernel,
    sigma,
)
from .joint import (
    JointSpace,
    build_joint_jacobi,
    compute_cstar,
    connection_matrix,
    diffusion_distance,
    image_set,
    joint_heat_kernel,
    joint_kernel,
    joint_sigma,
    lift,
)
from .experiments import ExperimentConfig, ExperimentResult, run_experiment
from .exceptions import (
    DsliftError,
    ValidationError,
    ParameterDomainError,
    IncompatibleParametersError,
    IncompatibleSpacesError,
    UnsupportedOperationError,
    NumericalError,
    NumericalFailureError,
    InsufficientSpectrumError,
    NonConvergenceError,
)

__all__ = [
    # Polynomials
    "JacobiParams",
    "OrthoPolyBasis",
    "QuadratureRule",
    "build_basis",
    "gauss_rule",
    "value_at_one",
    # Data spaces
    "DataSpace",
    "TrigJacobiSpace",
    "BallSpace",
    "Measure",
    "GridFunction",
    "make_trig_jacobi_space",
    "make_ball_space",
    "fourier_coefficients",
    # Kernels
    "Filter",
    "filter_eval",
    "localized_kernel",
    "kernel_matrix",
    "sigma",
    "heat_kernel",
    "localization_profile",
    "estimate_smoothness",
    # Joint spaces
    "JointSpace",
    "connection_matrix",
    "build_joint_jacobi",
    "compute_cstar",
    "joint_kernel",
    "joint_sigma",
    "joint_heat_kernel",
    "image_set",
    "lift",
    "diffusion_distance",
    # Experiments
    "ExperimentConfig",
    "ExperimentResult",
    "run_experiment",
    # Exceptions
    "DsliftError",
    "ValidationError",
    "ParameterDomainError",
    "IncompatibleParametersError",
    "IncompatibleSpacesError",
    "UnsupportedOperationError",
    "NumericalError",
    "NumericalFailureError",
    "InsufficientSpectrumError",
    "NonConvergenceError",
]
