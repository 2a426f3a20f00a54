"""Fractional powers of the mixed-BC Laplacian via the eigenexpansion.

The operator acts diagonally on eigencoefficients, a_j -> lambda_j^s a_j,
over the space of expansions with sum a_j^2 lambda_j^s < infinity; its
inverse truncated to the computed basis solves the source problem.  The
normalization constant kappa_s = 2^(2s-1) Gamma(s) / Gamma(1-s) is the
unique one making the extension energy an isometry: the mode profile
normalized to 1 at y=0 carries the weighted flux 2^(1-2s) Gamma(1-s) /
Gamma(s) there, so kappa_s must be its reciprocal.  The flux consistency
checks in the test suite validate this numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .eigenbasis import EigenBasis
from .errors import BasisMismatch, InvalidFracOrder, SubcriticalDimension
from .geometry import Grid, GridFunction


def kappa_constant(s: float) -> float:
    """Flux normalization 2^(2s-1) Gamma(s) / Gamma(1-s)."""
    return 2.0 ** (2.0 * s - 1.0) * math.gamma(s) / math.gamma(1.0 - s)


@dataclass(frozen=True)
class FracParams:
    """Fractional order and its derived constants for a given dimension."""

    s: float
    ndim: int

    def __post_init__(self):
        if not (0.5 < self.s < 1.0):
            raise InvalidFracOrder(f"s must lie in (1/2, 1), got {self.s}")

    @property
    def kappa(self) -> float:
        return kappa_constant(self.s)

    @property
    def subcritical_all(self) -> bool:
        """True when N <= 2s: every exponent r is admissible for the trace."""
        return self.ndim <= 2.0 * self.s

    @property
    def two_star(self) -> float:
        if self.subcritical_all:
            raise SubcriticalDimension(
                f"2N/(N-2s) undefined for N={self.ndim}, s={self.s}"
            )
        return 2.0 * self.ndim / (self.ndim - 2.0 * self.s)


@dataclass(frozen=True)
class SpectralFunction:
    """Coefficients with respect to a computed eigenbasis."""

    coeffs: np.ndarray
    basis: EigenBasis

    def to_grid(self) -> GridFunction:
        return GridFunction(self.basis.vectors @ self.coeffs, self.basis.grid)


def _values(f, grid: Grid | None = None) -> np.ndarray:
    if isinstance(f, GridFunction):
        if grid is not None and f.grid is not grid and f.grid != grid:
            raise BasisMismatch("grid function lives on a different grid")
        return f.values
    return np.asarray(f, dtype=float)


def project(f, basis: EigenBasis) -> SpectralFunction:
    """Mass-weighted coefficients a_j = <f, phi_j>."""
    vals = _values(f, basis.grid)
    if vals.shape != (basis.grid.n_nodes,):
        raise BasisMismatch(
            f"function has shape {vals.shape}, grid has {basis.grid.n_nodes} nodes"
        )
    w = basis.grid.quad_weights()
    return SpectralFunction(basis.vectors.T @ (w * vals), basis)


def apply_frac_laplacian(u: SpectralFunction, s: float) -> SpectralFunction:
    """Coefficientwise action a_j -> lambda_j^s a_j."""
    FracParams(s, u.basis.grid.ndim)
    return SpectralFunction(u.coeffs * u.basis.eigenvalues**s, u.basis)


def solve_spectral(f, basis: EigenBasis, s: float) -> GridFunction:
    """Truncated-basis inverse: u = sum lambda_j^(-s) <f, phi_j> phi_j."""
    FracParams(s, basis.grid.ndim)
    a = project(f, basis).coeffs
    u = basis.vectors @ (basis.eigenvalues ** (-s) * a)
    return GridFunction(u, basis.grid)


def hs_norm(u: SpectralFunction, s: float) -> float:
    """Norm of the fractional-order space: (sum a_j^2 lambda_j^s)^(1/2)."""
    return float(np.sqrt(np.sum(u.coeffs**2 * u.basis.eigenvalues**s)))


def lp_norm(f, grid: Grid | None = None, p: float = 2.0) -> float:
    """Discrete L^p norm with trapezoidal weights; p = inf gives max|f|."""
    if isinstance(f, GridFunction):
        grid = f.grid
    vals = _values(f, grid)
    if not (p >= 1.0):
        raise ValueError(f"p must be >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(vals)))
    w = grid.quad_weights()
    return float(np.sum(w * np.abs(vals) ** p) ** (1.0 / p))


def truncation_error(f, basis: EigenBasis, s: float, J1: int, J2: int) -> float:
    """Relative sup gap between the J1- and J2-mode solutions."""
    if not (0 < J1 <= J2 <= basis.size):
        raise ValueError(f"need 0 < J1 <= J2 <= {basis.size}, got {J1}, {J2}")
    if J1 == J2:
        return 0.0
    a = project(f, basis).coeffs
    scaled = basis.eigenvalues ** (-s) * a
    u2 = basis.vectors[:, :J2] @ scaled[:J2]
    u1 = basis.vectors[:, :J1] @ scaled[:J1]
    denom = np.max(np.abs(u2))
    if denom == 0.0:
        return 0.0
    return float(np.max(np.abs(u1 - u2)) / denom)


# ---------------------------------------------------------------------------
# trace constant
# ---------------------------------------------------------------------------

def _trial_functions(basis: EigenBasis, part, rng: np.random.Generator):
    """Sampled trial family: eigenmodes, random mode combinations and
    boundary-layer profiles projected onto the basis."""
    J = basis.size
    for j in range(min(J, 32)):
        e = np.zeros(J)
        e[j] = 1.0
        yield e
    k = min(J, 64)
    for _ in range(64):
        c = np.zeros(J)
        c[:k] = rng.standard_normal(k)
        yield c
    if part is not None:
        d = geometry.distance_to_dirichlet(basis.grid, part)
        w = basis.grid.quad_weights()
        for width in (0.05, 0.2, 1.0):
            prof = 1.0 - np.exp(-d / (width * basis.grid.domain.diameter))
            yield basis.vectors.T @ (w * prof)


def trace_constant_CD(
    basis: EigenBasis,
    s: float,
    part=None,
    seed: int = 0,
) -> tuple[float, float]:
    """Estimate of the best trace constant and its eigenvalue upper bound.

    Returns (CD_rayleigh, CD_upper): the smallest sampled Rayleigh quotient
    ||u||_{H^s}^2 / ||u||_{L^{2*_s}}^2 (an upper estimate of the infimum) and
    |Omega|^(2s/N) lambda_1^s.  Raises SubcriticalDimension when N <= 2s.
    """
    grid = basis.grid
    params = FracParams(s, grid.ndim)
    two_star = params.two_star  # raises in the subcritical regime
    lam1 = basis.eigenvalues[0]
    upper = grid.domain.volume ** (2.0 * s / grid.ndim) * lam1**s
    rng = np.random.default_rng(seed)
    best = math.inf
    for coeffs in _trial_functions(basis, part, rng):
        sf = SpectralFunction(coeffs, basis)
        num = hs_norm(sf, s) ** 2
        if num == 0.0:
            continue
        den = lp_norm(sf.to_grid(), p=two_star) ** 2
        if den == 0.0:
            continue
        best = min(best, num / den)
    return float(best), float(upper)
