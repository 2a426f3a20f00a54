"""Spectral fractional Laplacian with mixed Dirichlet-Neumann boundary data.

Two independent discretizations of the same operator: the eigenexpansion
route (diagonal action on eigencoefficients) and the weighted extension
problem on a truncated graded cylinder, plus the measure-theoretic
machinery to probe sup bounds, oscillation decay and Hölder regularity.
"""

__version__ = "0.1.0"

from .eigenbasis import EigenBasis, StiffnessMass, assemble, eigen_residual, first_eigenvalue, solve_eigen
from .errors import MixedFracError
from .extension import (
    CylinderField,
    CylinderGrid,
    WeightedSystem,
    assemble_weighted,
    build_cylinder,
    extend,
    fractional_flux,
    solve_extension,
    weighted_energy,
)
from .geometry import (
    BoundaryArc,
    BoundaryPartition,
    Grid,
    GridFunction,
    Interval,
    MovingFamily,
    Rectangle,
    boundary_measure,
    classify_boundary_nodes,
    discretize,
    make_domain,
    partition_at,
)
from .spectral import (
    FracParams,
    SpectralFunction,
    apply_frac_laplacian,
    hs_norm,
    lp_norm,
    project,
    solve_spectral,
    trace_constant_CD,
    truncation_error,
)

__all__ = [name for name in dir() if not name.startswith("_")]
