"""Degenerate extension problem on a truncated, y-graded cylinder.

The weak form integral of y^(1-2s) |grad U|^2 over Omega x (0, Y) is
discretized with piecewise-linear profiles in y on a graded mesh
y_k = Y (k/M)^q and the lumped base operator in x.  All weight integrals
per y-cell use the closed-form antiderivative y^(2-2s)/(2-2s), which is
finite at 0 because 1-2s in (-1, 0); midpoint sampling of the weight is
kept only as a diagnostic.  Lateral Dirichlet columns and the top cap are
eliminated; the load acts on the y=0 trace.

The assembled matrix is a weighted graph Laplacian, which yields both a
discrete maximum principle and an exact edge decomposition of the energy
used by the localized (ball-restricted) quantities.

kappa_s never enters the linear solves; it scales fluxes and energies as a
final factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import geometry
from .eigenbasis import full_operator
from .errors import BadGrading, EmptyDirichletSet, SolverDivergence
from .geometry import BoundaryPartition, Grid, GridFunction
from .spectral import FracParams, kappa_constant

AMG_THRESHOLD = 12000


# ---------------------------------------------------------------------------
# cylinder grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CylinderGrid:
    """Base grid times graded levels y_k = Y (k/M)^q, k = 0..M."""

    base: Grid
    y: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, CylinderGrid):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.y, other.y)

    @property
    def M(self) -> int:
        return len(self.y) - 1

    @property
    def height(self) -> float:
        return float(self.y[-1])

    def slab_integrals(self, s: float) -> np.ndarray:
        """Exact integrals of y^(1-2s) over each cell [y_k, y_k+1]."""
        e = 2.0 - 2.0 * s
        return np.diff(self.y**e) / e

    def midpoint_integrals(self, s: float) -> np.ndarray:
        """Midpoint-rule counterparts of slab_integrals (diagnostic only)."""
        mids = 0.5 * (self.y[:-1] + self.y[1:])
        return mids ** (1.0 - 2.0 * s) * np.diff(self.y)

    def node_integrals(self, s: float) -> np.ndarray:
        """Exact weight integrals over the dual cells around each level."""
        e = 2.0 - 2.0 * s
        mids = np.concatenate(([0.0], 0.5 * (self.y[:-1] + self.y[1:]), [self.y[-1]]))
        return np.diff(mids**e) / e

    def coords(self) -> np.ndarray:
        """Cylinder node coordinates, shape (n_base * (M+1), base_dim + 1)."""
        cb = self.base.coords()
        nb, M1 = len(cb), self.M + 1
        out = np.empty((nb * M1, cb.shape[1] + 1))
        out[:, :-1] = np.repeat(cb, M1, axis=0)
        out[:, -1] = np.tile(self.y, nb)
        return out


def build_cylinder(grid: Grid, Y: float, M: int, q: float = 2.0) -> CylinderGrid:
    """Graded cylinder over the grid; q >= 1 concentrates levels at y=0."""
    if Y <= 0:
        raise BadGrading(f"cylinder height must be positive, got {Y}")
    if q < 1.0:
        raise BadGrading(f"grading exponent must be >= 1, got {q}")
    if M < 2:
        raise BadGrading(f"need at least 2 levels, got {M}")
    y = Y * (np.arange(M + 1) / M) ** q
    return CylinderGrid(grid, y)


def default_height(lambda_1: float) -> float:
    """Truncation height 8 / sqrt(lambda_1): cap error ~ e^-8."""
    return 8.0 / np.sqrt(lambda_1)


# ---------------------------------------------------------------------------
# weighted system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedSystem:
    """Eliminated weighted stiffness with its edge decomposition.

    Unknowns are (free base node, level k < M), base-major.  ``edges`` holds
    the full-grid graph decomposition (ia, ka, ib, kb, w) with eliminated
    nodes kept as zero-valued endpoints, so that summing w (U_a - U_b)^2 over
    all edges reproduces the quadratic form of the full field exactly.
    """

    A: sp.csr_matrix
    cyl: CylinderGrid
    part: BoundaryPartition
    s: float
    free_base: np.ndarray
    edges: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @property
    def M(self) -> int:
        return self.cyl.M

    @property
    def n_dof(self) -> int:
        return len(self.free_base) * self.M

    def base_weights(self) -> np.ndarray:
        return self.cyl.base.quad_weights()

    def node_volumes(self) -> np.ndarray:
        """Weighted volume attached to each cylinder node, (n_base, M+1)."""
        return np.outer(self.base_weights(), self.cyl.node_integrals(self.s))


def assemble_weighted(cyl: CylinderGrid, part: BoundaryPartition, s: float) -> WeightedSystem:
    """Assemble the weighted bilinear form over the free cylinder nodes."""
    FracParams(s, cyl.base.ndim)
    base = geometry.classify_boundary_nodes(cyl.base, part)
    cyl = CylinderGrid(base, cyl.y)
    free = np.flatnonzero(base.free_mask())
    if len(free) == base.n_nodes:
        raise EmptyDirichletSet("lateral Dirichlet part is empty")

    nb = base.n_nodes
    M = cyl.M
    mfull = base.quad_weights()
    WA = cyl.slab_integrals(s)
    V = cyl.node_integrals(s)
    K, _ = full_operator(base)

    # horizontal couplings: off-diagonal stiffness entries, one per level
    Kc = sp.triu(K, k=1).tocoo()
    hw = -Kc.data  # positive edge weights
    n_h = len(hw)
    ia_h = np.repeat(Kc.row, M + 1)
    ib_h = np.repeat(Kc.col, M + 1)
    k_h = np.tile(np.arange(M + 1), n_h)
    w_h = np.repeat(hw, M + 1) * np.tile(V, n_h)

    # vertical couplings: consecutive levels within each column
    kv = np.tile(np.arange(M), nb)
    iv = np.repeat(np.arange(nb), M)
    w_v = np.repeat(mfull, M) * np.tile(WA / np.diff(cyl.y) ** 2, nb)

    ia = np.concatenate([ia_h, iv])
    ka = np.concatenate([k_h, kv])
    ib = np.concatenate([ib_h, iv])
    kb = np.concatenate([k_h, kv + 1])
    w = np.concatenate([w_h, w_v])

    # map full-grid endpoints to eliminated dof numbers (-1 = fixed at zero)
    dof_of = -np.ones(nb, dtype=np.int64)
    dof_of[free] = np.arange(len(free))
    da = np.where((dof_of[ia] >= 0) & (ka < M), dof_of[ia] * M + ka, -1)
    db = np.where((dof_of[ib] >= 0) & (kb < M), dof_of[ib] * M + kb, -1)

    n_dof = len(free) * M
    rows, cols, vals = [], [], []
    both = (da >= 0) & (db >= 0)
    rows.extend([da[both], db[both], da[both], db[both]])
    cols.extend([da[both], db[both], db[both], da[both]])
    vals.extend([w[both], w[both], -w[both], -w[both]])
    only_a = (da >= 0) & (db < 0)
    rows.append(da[only_a])
    cols.append(da[only_a])
    vals.append(w[only_a])
    only_b = (db >= 0) & (da < 0)
    rows.append(db[only_b])
    cols.append(db[only_b])
    vals.append(w[only_b])
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dof, n_dof),
    ).tocsr()
    return WeightedSystem(A, cyl, part, s, free, (ia, ka, ib, kb, w))


# ---------------------------------------------------------------------------
# fields and solvers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CylinderField:
    """Full field U(x_i, y_k), shape (n_base, M+1), zeros on eliminated nodes."""

    values: np.ndarray
    system: WeightedSystem
    diagnostics: dict | None = None

    @property
    def cyl(self) -> CylinderGrid:
        return self.system.cyl

    def trace(self) -> GridFunction:
        return GridFunction(self.values[:, 0].copy(), self.cyl.base)

    def coords(self) -> np.ndarray:
        return self.cyl.coords()

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def dof_vector(self) -> np.ndarray:
        return self.values[self.system.free_base, : self.system.M].ravel()


def _field_from_dofs(sys: WeightedSystem, x: np.ndarray, diagnostics=None) -> CylinderField:
    nb = sys.cyl.base.n_nodes
    vals = np.zeros((nb, sys.M + 1))
    vals[sys.free_base, : sys.M] = x.reshape(len(sys.free_base), sys.M)
    return CylinderField(vals, sys, diagnostics)


def _pcg(A: sp.csr_matrix, b: np.ndarray, rtol: float = 1e-11) -> tuple[np.ndarray, dict]:
    """Preconditioned CG; AMG preconditioner above a size threshold."""
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), {"iterations": 0, "relative_residual": 0.0}
    if A.shape[0] > AMG_THRESHOLD:
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(A, max_coarse=300)
        M = ml.aspreconditioner(cycle="V")
    else:
        d = A.diagonal()
        M = spla.LinearOperator(A.shape, matvec=lambda x: x / d)
    it = 0

    def cb(_):
        nonlocal it
        it += 1

    maxiter = min(max(2 * A.shape[0], 2000), 60000)
    x, info = spla.cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
    rel = float(np.linalg.norm(b - A @ x) / bnorm)
    if info != 0 or rel > 1e-10:
        raise SolverDivergence(
            f"CG stopped with relative residual {rel:.2e}",
            {"iterations": it, "info": info},
        )
    return x, {"iterations": it, "relative_residual": rel}


def solve_extension(sys: WeightedSystem, f) -> CylinderField:
    """Energy solution with flux data f on the trace."""
    fv = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
    kappa = kappa_constant(sys.s)
    b = np.zeros(sys.n_dof)
    m = sys.base_weights()[sys.free_base]
    b[:: sys.M] = m * fv[sys.free_base] / kappa
    x, diag = _pcg(sys.A, b)
    return _field_from_dofs(sys, x, diag)


def extend(u, cyl: CylinderGrid, part: BoundaryPartition, s: float) -> CylinderField:
    """Harmonic extension of trace data u (zero on the Dirichlet set)."""
    sys = assemble_weighted(cyl, part, s)
    uv = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
    fixed = ~sys.cyl.base.free_mask()
    if np.any(np.abs(uv[fixed]) > 1e-12 * (1 + np.max(np.abs(uv)))):
        raise ValueError("trace data must vanish on the Dirichlet set")
    nfree = len(sys.free_base)
    M = sys.M
    dofs = np.arange(nfree * M)
    trace_dofs = dofs[:: M]
    inner = np.setdiff1d(dofs, trace_dofs, assume_unique=True)
    u0 = uv[sys.free_base]
    b = -(sys.A[inner][:, trace_dofs] @ u0)
    Aii = sys.A[inner][:, inner].tocsr()
    x, diag = _pcg(Aii, b)
    full = np.zeros(nfree * M)
    full[trace_dofs] = u0
    full[inner] = x
    return _field_from_dofs(sys, full, diag)


def fractional_flux(U: CylinderField, s: float) -> GridFunction:
    """Weak-form flux at y=0: the fractional operator applied to the trace.

    Exactly consistent with the assembly: for any interior-harmonic field,
    flux_i = kappa_s (A U)_(i,0) / m_i on the free nodes, zero elsewhere.
    """
    sys = U.system
    if abs(s - sys.s) > 1e-14:
        raise ValueError(f"field was assembled with s={sys.s}, flux asked for s={s}")
    r = sys.A @ U.dof_vector()
    m = sys.base_weights()[sys.free_base]
    flux = np.zeros(sys.cyl.base.n_nodes)
    flux[sys.free_base] = kappa_constant(s) * r[:: sys.M] / m
    return GridFunction(flux, sys.cyl.base)


def weighted_energy(U: CylinderField, s: float, with_constant: bool = True) -> float:
    """Energy kappa_s * sum over edges of w (U_a - U_b)^2 of the full field."""
    ia, ka, ib, kb, w = U.system.edges
    diff = U.values[ia, ka] - U.values[ib, kb]
    e = float(np.sum(w * diff * diff))
    return kappa_constant(s) * e if with_constant else e


def local_energy(U: CylinderField, center, radius: float, with_constant: bool = False) -> float:
    """Raw energy restricted to edges with both endpoints in the ball."""
    sys = U.system
    c = sys.cyl.base.coords()
    y = sys.cyl.y
    center = np.asarray(center, dtype=float)
    ia, ka, ib, kb, w = sys.edges

    def inside(i, k):
        pts = np.column_stack([c[i], y[k]])
        return np.sum((pts - center) ** 2, axis=1) <= radius * radius

    mask = inside(ia, ka) & inside(ib, kb)
    diff = U.values[ia[mask], ka[mask]] - U.values[ib[mask], kb[mask]]
    e = float(np.sum(w[mask] * diff * diff))
    return kappa_constant(sys.s) * e if with_constant else e


def weighted_l2_ball(U: CylinderField, center, radius: float, shift: float = 0.0) -> float:
    """Weighted integral of (U - shift)^2 over nodes inside the ball."""
    sys = U.system
    vols = sys.node_volumes()
    coords = sys.cyl.coords()
    mask = geometry.nodes_in_ball(coords, center, radius).reshape(vols.shape)
    d = U.values - shift
    return float(np.sum(vols[mask] * d[mask] ** 2))
