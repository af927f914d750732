"""Numerical b-calculus on the interval model."""

from .family import (
    KernelFamily,
    equivariance_defect,
    family_to_kernel,
    group_kernel_to_family,
    kernel_to_family,
)
from .grid import ModelGrid, simpson_weights
from .indicial import (
    HomomorphismReport,
    IndicialFunction,
    Spectrum,
    indicial,
    indicial_homomorphism_check,
    mellin,
    mellin_direct,
)
from .kernel import BKernel, load_function, load_kernel, save_function, save_kernel
from .ops import (
    BDifferentialOperator,
    apply,
    apply_diff,
    b_derivative,
    compose_diff_kernel,
    compose_kernel_diff,
    convolve,
    d_u,
    identity_kernel,
    quantize,
    translation_kernel,
)
from .symbols import Symbol, classical_symbol, excision, gaussian_symbol, plateau_cutoff, smooth_step
