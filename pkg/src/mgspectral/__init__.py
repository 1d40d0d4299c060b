"""Pseudo-spectral toolkit for the non-diffusive magneto-geostrophic equation
on the periodic 3-torus, specialized to perturbations supported on frequency
lines through the origin."""

__version__ = "0.1.0"

from .dynamics import ModelParams, linear_symbol, magnetic, nonlinear_term, rhs, velocity
from .fields import (
    GridSpec,
    LineField,
    SpectralField,
    embed_line,
    from_physical,
    random_field,
    random_line_data,
    restrict_line,
    sobolev_norm,
    to_physical,
)
from .lattice import (
    ConeSpec,
    FrequencyVector,
    LineSpec,
    canonicalize_line,
    cone_contains,
    line_contains,
    line_modes,
)
from .stepping import (
    IFRK4,
    PicardResult,
    Trajectory,
    integrate_exact_line,
    integrate_if_rk4,
    picard_solve,
    semigroup_apply,
    step_if_rk4,
    theoretical_times,
)
from .symbols import (
    SymbolTable,
    asymptotic_probe,
    build_symbol_table,
    cone_bounds,
    eval_A,
    eval_M,
    eval_M_exact,
    eval_b_multiplier,
    eval_sqrtM3,
    line_constants,
)

__all__ = [name for name in dir() if not name.startswith("_")]
