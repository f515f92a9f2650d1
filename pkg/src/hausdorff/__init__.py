"""Symbol calculus for generalized Hausdorff operators on L2(R)."""

from .algebra import CommutativityReport, IncompatibleAlgebraError, check_commutativity, compose, lincomb
from .engine import (
    GridFunction,
    adjoint_apply,
    apply_direct,
    apply_via_symbol,
    conjugation_multiplier,
    estimate_norm,
    multiplier_discrepancy,
)
from .funcalc import (
    Contour,
    ContourError,
    ContractViolation,
    HoloFunction,
    apply_function,
    auto_contour,
    f1_f2_contour,
    f1_f2_eigen,
    winding_number,
)
from .grid import DEFAULT_S_GRID, DEFAULT_T_GRID, GridError, GridParams
from .kernel_model import (
    AuxFunction,
    BoundednessReport,
    GridTooSmallError,
    InadmissibleKernelError,
    KernelError,
    KernelPair,
    KernelSpec,
    admissibility,
    from_log_pair,
    to_log_pair,
)
from .spectrum import SpectralCurve, distance_to_spectrum, resolvent_regularity, spectrum_curve
from .symbol import OperatorHandle, Symbol, compute_symbol, multiply_symbols, operator_norm, symbol_at
from .transforms import SampledLine, convolve, fourier_l1, mellin_halfline

__version__ = "0.1.0"
