"""Numerical verification of local D-optimality."""

from .sweep import (
    GridConfig, VerificationReport, faces_conjecture_sweep, verify_faces, verify_full_grid,
)
from .reduced import (
    HyperbolicCoords, antagonistic_contour_experiment, contour_shape_check, from_hyperbolic,
    from_linear_contour, to_hyperbolic, to_linear_contour, verify_reduced,
)
from .inequalities import (
    Q0, Q1, diagonal_constants, equi2, equi2_check, h0, h1, h2, h_chain_check, h_split, minorante,
    q2, taylor2,
)
from .kdim import (
    KDimDesignMatrix, build_kdim_F, cross_check_diagonal_formula, incidence,
    kdim_diagonal_sensitivity, kdim_diagonal_sweep, pair_triple_incidence,
)
