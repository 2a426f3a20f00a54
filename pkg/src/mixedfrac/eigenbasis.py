"""Mixed-BC Laplacian assembly and its mass-orthonormal eigenpairs.

Discretization: second-order finite differences with a lumped (diagonal)
mass matrix.  Neumann nodes are closed by ghost reflection, which together
with the half-weight boundary mass is exactly the lumped P1 construction and
keeps the stiffness matrix symmetric.  Dirichlet rows and columns (including
interface nodes, since the Dirichlet set is closed) are eliminated.

Two eigensolvers are provided: a dense solver for small free-node counts,
doubling as the in-repo oracle, and a shift-free Lanczos iteration with full
reorthogonalization for larger problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import geometry
from .errors import ConvergenceFailure, EmptyDirichletSet
from .geometry import BoundaryPartition, Grid, MovingFamily

DENSE_LIMIT = 2000


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _line_matrices(n: int, h: float) -> tuple[sp.csr_matrix, np.ndarray]:
    """1D stiffness and lumped mass on a full line with natural ends."""
    main = np.full(n, 2.0 / h)
    main[0] = main[-1] = 1.0 / h
    off = np.full(n - 1, -1.0 / h)
    K = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    m = np.full(n, h)
    m[0] = m[-1] = h / 2.0
    return K, m


def full_operator(grid: Grid) -> tuple[sp.csr_matrix, np.ndarray]:
    """Stiffness and lumped mass over all nodes (natural BCs everywhere)."""
    if grid.ndim == 1:
        return _line_matrices(grid.npts[0], grid.spacing[0])
    Kx, mx = _line_matrices(grid.npts[0], grid.spacing[0])
    Ky, my = _line_matrices(grid.npts[1], grid.spacing[1])
    Mx = sp.diags(mx)
    My = sp.diags(my)
    K = sp.kron(Kx, My, format="csr") + sp.kron(Mx, Ky, format="csr")
    return K, np.kron(mx, my)


@dataclass(frozen=True)
class StiffnessMass:
    """Eliminated system: K phi = lambda diag(m) phi over free nodes."""

    K: sp.csr_matrix
    m: np.ndarray  # diagonal mass entries
    free_index: np.ndarray  # flat node indices of the free nodes
    grid: Grid

    @property
    def n_free(self) -> int:
        return len(self.free_index)


def assemble(grid: Grid, part: BoundaryPartition) -> StiffnessMass:
    """Assemble the eliminated stiffness/mass pair for a classified grid."""
    grid = geometry.classify_boundary_nodes(grid, part)
    free = np.flatnonzero(grid.free_mask())
    if len(free) == grid.n_nodes:
        raise EmptyDirichletSet("no Dirichlet node on the grid; lambda_1 would vanish")
    K, m = full_operator(grid)
    K_ff = K[free][:, free].tocsr()
    return StiffnessMass(K_ff, m[free], free, grid)


# ---------------------------------------------------------------------------
# eigenpairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenBasis:
    """Ascending eigenpairs, eigenvectors extended by zero to the full grid."""

    eigenvalues: np.ndarray  # (J,)
    vectors: np.ndarray  # (n_nodes, J)
    grid: Grid
    free_index: np.ndarray

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def mode(self, j: int) -> np.ndarray:
        """Full-grid values of the j-th eigenvector (1-based)."""
        return self.vectors[:, j - 1]


def default_mode_count(n_free: int, ndim: int) -> int:
    return min(n_free, 512 if ndim == 1 else 256)


def _lanczos_smallest(A: sp.spmatrix, nev: int, tol: float, seed: int):
    """Smallest nev eigenpairs by Lanczos with full reorthogonalization.

    Shift-free: works on A directly.  Convergence is monitored through the
    standard residual bound |beta_m * S[m-1, j]|; the Krylov dimension is
    capped at min(n, max(6*nev + 120, 700)).
    """
    n = A.shape[0]
    max_dim = min(n, max(6 * nev + 120, 700))
    rng = np.random.default_rng(seed)
    V = np.zeros((n, max_dim))
    alphas = np.zeros(max_dim)
    betas = np.zeros(max_dim)  # betas[i] couples V[:, i] and V[:, i + 1]

    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    V[:, 0] = v
    scale = None
    beta = 0.0
    check_at = max(2 * nev, 60)
    for m in range(1, max_dim + 1):
        w = A @ V[:, m - 1]
        alphas[m - 1] = V[:, m - 1] @ w
        # two-pass full reorthogonalization (subsumes the three-term recurrence)
        for _ in range(2):
            w -= V[:, :m] @ (V[:, :m].T @ w)
        beta = np.linalg.norm(w)
        if scale is None:
            scale = abs(alphas[0]) + beta
        theta = S = None
        if m >= check_at or m == max_dim or beta < 1e-13 * scale:
            check_at = m + max(nev // 2, 30)
            theta, S = sla.eigh_tridiagonal(alphas[:m], betas[: m - 1])
            if m >= nev:
                res = np.abs(beta * S[-1, :nev])
                if m == n or np.all(
                    res <= tol * np.maximum(np.abs(theta[:nev]), 1e-300)
                ):
                    X = V[:, :m] @ S[:, :nev]
                    return theta[:nev], X, {"iterations": m, "residuals": res}
        if beta < 1e-13 * scale:
            # exact invariant subspace without converged targets: give up
            # rather than patching the tridiagonal structure
            raise ConvergenceFailure(
                f"Lanczos breakdown at dimension {m} before convergence",
                {"iterations": m, "beta": float(beta)},
            )
        if m < max_dim:
            betas[m - 1] = beta
            V[:, m] = w / beta

    theta, S = sla.eigh_tridiagonal(alphas, betas[:-1])
    res = np.abs(beta * S[-1, :nev])
    raise ConvergenceFailure(
        f"Lanczos did not converge {nev} pairs in {max_dim} iterations",
        {"iterations": max_dim, "worst_residual": float(res.max()), "tol": tol},
    )


def solve_eigen(
    sm: StiffnessMass,
    J: int | None = None,
    method: str = "auto",
    tol: float = 1e-9,
    seed: int = 0,
) -> EigenBasis:
    """Smallest J eigenpairs of (K, M), M-orthonormal, ascending.

    method: "auto" picks the dense path for small problems (the oracle route)
    and Lanczos otherwise; "dense" / "lanczos" force a route.
    """
    n = sm.n_free
    if J is None:
        J = default_mode_count(n, sm.grid.ndim)
    if J > n:
        raise ValueError(f"requested {J} pairs from a {n}-dim operator")
    # diagonal mass: similarity transform to an ordinary symmetric problem
    d = np.sqrt(sm.m)
    Dinv = sp.diags(1.0 / d)
    A = (Dinv @ sm.K @ Dinv).tocsr()
    A = (A + A.T) * 0.5
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "lanczos"
    if method == "dense":
        lam, psi = sla.eigh(A.toarray())
        lam, psi = lam[:J], psi[:, :J]
    elif method == "lanczos":
        lam, psi, _ = _lanczos_smallest(A, J, tol, seed)
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    # Ritz vectors can lose strict orthogonality; tighten with one QR pass
    psi, _ = np.linalg.qr(psi)
    order = np.argsort(lam)
    lam = lam[order]
    psi = psi[:, order]
    phi = psi / d[:, None]
    # sign convention: largest-magnitude entry positive
    idx = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[idx, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    phi *= signs
    full = np.zeros((sm.grid.n_nodes, J))
    full[sm.free_index] = phi
    basis = EigenBasis(lam, full, sm.grid, sm.free_index)
    worst = eigen_residual(sm, basis)
    if worst > 1e-7:
        raise ConvergenceFailure(
            f"eigen residual {worst:.2e} above 1e-7",
            {"worst_residual": worst, "method": method},
        )
    return basis


def eigen_residual(sm: StiffnessMass, basis: EigenBasis) -> float:
    """max_j ||K phi_j - lambda_j M phi_j|| / (lambda_j ||phi_j||)."""
    if basis.size == 0:
        return 0.0
    phi = basis.vectors[sm.free_index]
    R = sm.K @ phi - (sm.m[:, None] * phi) * basis.eigenvalues[None, :]
    num = np.linalg.norm(R, axis=0)
    den = basis.eigenvalues * np.linalg.norm(phi, axis=0)
    return float(np.max(num / den))


def mass_orthonormality_error(sm: StiffnessMass, basis: EigenBasis) -> float:
    phi = basis.vectors[sm.free_index]
    G = phi.T @ (sm.m[:, None] * phi)
    return float(np.max(np.abs(G - np.eye(basis.size))))


def first_eigenvalue(family: MovingFamily, alpha: float, grid: Grid) -> float:
    """lambda_1 of the operator at the family's partition of measure alpha."""
    part = geometry.partition_at(family, alpha)
    sm = assemble(grid, part)
    basis = solve_eigen(sm, J=1)
    return float(basis.eigenvalues[0])
