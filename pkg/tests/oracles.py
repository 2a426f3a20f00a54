"""Independent numerical oracles used by the test suite.

These deliberately avoid the code paths they check: the vertical mode
profile comes from an ODE shooting solve (not from the weighted assembly),
eigenvalues come from separation of variables, and the iteration-lemma
thresholds are re-derived by bisection on the brute-force recursion.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from mixedfrac.regularity import IterationParamsB1, IterationParamsC7


def mode_profile_ode(s: float, tvals: np.ndarray, T: float = 40.0, t0: float = 1e-6) -> np.ndarray:
    """Decaying solution of psi'' + ((1-2s)/t) psi' = psi, psi(0) = 1.

    Shooting from the far field: integrate inward from T with the
    asymptotic decay slope, then normalize at t0 where the regular branch
    dominates (the singular branch is O(t0^{2s}) there).
    """
    tvals = np.asarray(tvals, dtype=float)
    T = max(T, 1.5 * float(np.max(tvals, initial=1.0)))

    def rhs(t, y):
        return [y[1], y[0] - (1.0 - 2.0 * s) / t * y[1]]

    # psi ~ t^(s - 1/2) e^(-t) far out, so psi'/psi ~ -1 + (s - 1/2)/T
    y0 = [1.0, -1.0 + (s - 0.5) / T]
    grid = np.unique(np.concatenate([tvals[tvals >= t0], [t0, T]]))
    sol = solve_ivp(rhs, (T, t0), y0, t_eval=grid[::-1], rtol=1e-11, atol=1e-280,
                    method="Radau")
    if not sol.success:
        raise RuntimeError(f"profile ODE integration failed: {sol.message}")
    t_sorted = sol.t[::-1]
    psi_sorted = sol.y[0][::-1]
    # normalize so that psi(0) = 1, correcting the regular branch's t^2 term
    psi0 = psi_sorted[np.searchsorted(t_sorted, t0)]
    psi0 /= 1.0 + t0**2 / (2.0 * (2.0 - 2.0 * s))
    out = np.interp(tvals, t_sorted, psi_sorted) / psi0
    out[tvals < t0] = 1.0
    return out


def interval_eigenvalues(n_modes: int, mixed: bool) -> np.ndarray:
    """Separation of variables on (0, pi): j^2 (Dirichlet) or (j-1/2)^2."""
    j = np.arange(1, n_modes + 1)
    return ((j - 0.5) ** 2) if mixed else (j.astype(float) ** 2)


def square_eigenvalues(n_modes: int) -> np.ndarray:
    """Tensor Dirichlet eigenvalues j^2 + k^2 on (0, pi)^2, ascending."""
    j = np.arange(1, 40)
    vals = (j[:, None] ** 2 + j[None, :] ** 2).ravel()
    return np.sort(vals)[:n_modes].astype(float)


def _vanishes_b1(p: IterationParamsB1, d: float, n_steps: int = 400) -> bool:
    """Iterate the maximal recurrence phi_{n+1} = C0 phi_n^b / (d 2^-(n+1))^a
    in log space along the De Giorgi levels; early exit once decided."""
    lp = math.log(p.phi0)
    start = lp
    logC, log2 = math.log(p.C0), math.log(2.0)
    for n in range(n_steps):
        lp = logC + p.b * lp - p.a * (math.log(d) - (n + 1) * log2)
        if lp < start - 60.0:
            return True
        if lp > start + 60.0:
            return False
    return lp < start - 40.0


def _vanishes_c7(p: IterationParamsC7, d: float, n_steps: int = 400) -> bool:
    lp = math.log(p.phi0)
    start = lp
    logC, log2 = math.log(p.C0), math.log(2.0)
    for n in range(n_steps):
        dk = math.log(p.ell * d) - (n + 1) * log2
        dr = math.log(p.r0 * p.ell) - (n + 1) * log2
        lp = logC + p.mu * lp - p.alpha * dk - p.gamma * dr
        if lp < start - 60.0:
            return True
        if lp > start + 60.0:
            return False
    return lp < start - 40.0


def bisect_threshold_b1(p: IterationParamsB1, rel_tol: float = 1e-12) -> float:
    """Critical step d separating vanishing from diverging recursions."""
    d_hi = 1.0
    while not _vanishes_b1(p, d_hi):
        d_hi *= 2.0
    d_lo = d_hi / 2.0
    while _vanishes_b1(p, d_lo):
        d_lo /= 2.0
    while (d_hi - d_lo) > rel_tol * d_hi:
        mid = 0.5 * (d_lo + d_hi)
        if _vanishes_b1(p, mid):
            d_hi = mid
        else:
            d_lo = mid
    return d_hi


def bisect_threshold_c7(p: IterationParamsC7, rel_tol: float = 1e-12) -> float:
    d_hi = 1.0
    while not _vanishes_c7(p, d_hi):
        d_hi *= 2.0
    d_lo = d_hi / 2.0
    while _vanishes_c7(p, d_lo):
        d_lo /= 2.0
    while (d_hi - d_lo) > rel_tol * d_hi:
        mid = 0.5 * (d_lo + d_hi)
        if _vanishes_c7(p, mid):
            d_hi = mid
        else:
            d_lo = mid
    return d_hi
