"""MaxPol FIR derivative kernels, derivative matrices and gradient recovery."""
from .diffmatrix import DerivMatrix, MatrixScheme, build_matrix, flip_direction
from .exact import factorial, hypercube_sum, solve_linear_exact
from .kernels import Kernel, KernelSpec, Scheme, design_kernel, fullband_closed_form, solve_kernel
from .recover import GradientField, RecoverySettings, recover_surface, solve_sylvester
from .response import eval_response, flatness_report
from .spectral import classify_case, eigenvalues, spectral_report

__version__ = "0.1.0"

__all__ = [
    "DerivMatrix",
    "GradientField",
    "Kernel",
    "KernelSpec",
    "MatrixScheme",
    "RecoverySettings",
    "Scheme",
    "build_matrix",
    "classify_case",
    "design_kernel",
    "eigenvalues",
    "eval_response",
    "factorial",
    "flatness_report",
    "flip_direction",
    "fullband_closed_form",
    "hypercube_sum",
    "recover_surface",
    "solve_kernel",
    "solve_linear_exact",
    "solve_sylvester",
    "spectral_report",
]
