"""Orthogonal continuous spline wavelets centered on irregular and golden-mean knot sequences."""
__version__ = "0.1.0"

from .centered import CenteredBasis, regroup, spline_basis, verify_centered, verify_orth_condition
from .coeff_matrices import assemble_M, be_factor, c_blocks, d_blocks, ghat_gtilde
from .errors import (
    ConsistencyError,
    ContractError,
    DependentSetError,
    DomainError,
    InvalidIntervalError,
    KnotNotFoundError,
    KnotwaveError,
    NotNestedError,
    WindowCutError,
)
from .knots import KnotWindow, TauNumber, beta_mu, classify, fibonacci_word, refine, tau_integers, tau_window
from .mra_wavelet import build_scaffold, build_wavelets, check_nested, scaffold_report
from .piecewise import PiecewisePoly, inner_product, norm

__all__ = [
    "CenteredBasis", "ConsistencyError", "ContractError", "DependentSetError", "DomainError",
    "InvalidIntervalError", "KnotNotFoundError", "KnotWindow", "KnotwaveError", "NotNestedError",
    "PiecewisePoly", "TauNumber", "WindowCutError", "assemble_M", "be_factor", "beta_mu",
    "build_scaffold", "build_wavelets", "c_blocks", "check_nested", "classify", "d_blocks",
    "fibonacci_word", "ghat_gtilde", "inner_product", "norm", "refine", "regroup",
    "scaffold_report", "spline_basis", "tau_integers", "tau_window", "verify_centered",
    "verify_orth_condition",
]
