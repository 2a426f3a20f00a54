"""Measure-theoretic verification machinery: level sets, sup bounds,
oscillation decay, Hölder estimation and the two iteration lemmas.

Proof-internal constants (the Caccioppoli constant, the geometric
oscillation ratio, ...) are fitted from computed fields and reported; only
their finiteness and ranges are asserted.  The iteration-lemma thresholds
are closed-form and are the critical points of the corresponding model
recurrences, which is what the brute-force oracles in the tests verify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadExponent,
    DegenerateProfile,
    EmptyBall,
    ExponentViolation,
)
from .extension import CylinderField
from .geometry import GridFunction, nodes_in_ball
from .spectral import lp_norm

HOLDER_SEED = 0xFAC0
EXHAUSTIVE_LIMIT = 3000


# ---------------------------------------------------------------------------
# level sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSetStats:
    threshold: float
    above: float  # |{u > k}| with trapezoidal node weights
    below: float  # |{u < k}|


def level_set_measure(u: GridFunction, k: float) -> LevelSetStats:
    w = u.grid.quad_weights()
    return LevelSetStats(
        k,
        float(np.sum(w[u.values > k])),
        float(np.sum(w[u.values < k])),
    )


def weighted_levelset(U: CylinderField, k: float, center, r: float, s: float) -> float:
    """Weighted measure of {U > k} inside the ball B_r(center).

    Cell-based: a cell (base cell x y-slab) counts when its center lies in
    the ball and its vertex-averaged value exceeds k; its weighted volume is
    the base cell area times the closed-form slab integral of y^(1-2s).
    """
    cyl = U.cyl
    base = cyl.base
    vals = U.values
    slab = cyl.slab_integrals(s)
    ymid = 0.5 * (cyl.y[:-1] + cyl.y[1:])
    if base.ndim == 1:
        xs = base.axes[0]
        xc = 0.5 * (xs[:-1] + xs[1:])
        area = base.spacing[0]
        cell_avg = 0.5 * (vals[:-1, :] + vals[1:, :])  # (n-1, M+1)
        cell_avg = 0.5 * (cell_avg[:, :-1] + cell_avg[:, 1:])  # (n-1, M)
        cx, cy = np.meshgrid(xc, ymid, indexing="ij")
        centers = np.column_stack([cx.ravel(), cy.ravel()])
    else:
        nx, ny = base.npts
        xs, ys = base.axes
        g = vals.reshape(nx, ny, cyl.M + 1)
        avg_x = 0.5 * (g[:-1] + g[1:])
        avg_xy = 0.5 * (avg_x[:, :-1] + avg_x[:, 1:])
        cell_avg = 0.5 * (avg_xy[..., :-1] + avg_xy[..., 1:])  # (nx-1, ny-1, M)
        cell_avg = cell_avg.reshape(-1, cyl.M)
        area = base.spacing[0] * base.spacing[1]
        xc = 0.5 * (xs[:-1] + xs[1:])
        yc = 0.5 * (ys[:-1] + ys[1:])
        cx, cy, cz = np.meshgrid(xc, yc, ymid, indexing="ij")
        centers = np.column_stack([cx.ravel(), cy.ravel(), cz.ravel()])
    inside = nodes_in_ball(centers, center, r).reshape(cell_avg.shape)
    vol = area * np.broadcast_to(slab, cell_avg.shape)
    return float(np.sum(vol[inside & (cell_avg > k)]))


# ---------------------------------------------------------------------------
# sup bound
# ---------------------------------------------------------------------------

def verify_linfty_bound(u: GridFunction, f, s: float, p: float) -> float:
    """Ratio ||u||_inf / (||f||_p |Omega|^(2s/N - 1/p)).

    The bound constant is not computable; callers assert stability of this
    ratio across meshes and data instead.
    """
    N = u.grid.ndim
    if p <= N / (2.0 * s):
        raise ExponentViolation(f"need p > N/(2s) = {N / (2 * s):.4g}, got {p}")
    fnorm = lp_norm(f, u.grid, p)
    if fnorm == 0.0:
        return 0.0
    vol = u.grid.domain.volume ** (2.0 * s / N - 1.0 / p)
    return float(np.max(np.abs(u.values)) / (fnorm * vol))


# ---------------------------------------------------------------------------
# oscillation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscillationProfile:
    center: tuple
    radii: np.ndarray  # descending
    sup: np.ndarray
    inf: np.ndarray

    @property
    def omega(self) -> np.ndarray:
        return self.sup - self.inf


def oscillation_profile(field, center, radii) -> OscillationProfile:
    """sup - inf over grid nodes within each ball (radii descending)."""
    if isinstance(field, CylinderField):
        coords = field.coords()
        vals = field.flat()
    else:
        coords = field.grid.coords()
        vals = field.values
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    if np.any(radii <= 0):
        raise EmptyBall("radii must be positive")
    sup, inf = [], []
    for r in radii:
        m = nodes_in_ball(coords, center, r)
        if not np.any(m):
            raise EmptyBall(f"no node within radius {r} of {center}")
        sup.append(float(np.max(vals[m])))
        inf.append(float(np.min(vals[m])))
    return OscillationProfile(tuple(np.asarray(center)), radii, np.array(sup), np.array(inf))


@dataclass(frozen=True)
class HolderFit:
    tau: float
    goodness: float  # R^2 of the log-log fit
    ratios: np.ndarray  # omega(rho_{i+1}) / omega(rho_i), consecutive radii
    eta_bar: float  # largest finite ratio
    n_used: int


def fit_holder_exponent(profile: OscillationProfile) -> HolderFit:
    """Least-squares slope of log omega against log rho.

    Zero-oscillation radii (below node resolution) are excluded from the
    fit; at least 2 positive values are required, 4 or more give a
    meaningful slope.  The consecutive ratio ladder is reported alongside.
    """
    om = profile.omega
    pos = om > 0
    if not np.any(pos):
        raise DegenerateProfile("oscillation vanishes at every radius")
    if np.count_nonzero(pos) < 2:
        raise DegenerateProfile("fewer than 2 radii with positive oscillation")
    x = np.log(profile.radii[pos])
    y = np.log(om[pos])
    if np.ptp(y) == 0.0:
        tau, r2 = 0.0, 1.0
    else:
        A = np.column_stack([x, np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        tau = float(coef[0])
        resid = y - A @ coef
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(om[:-1] > 0, om[1:] / om[:-1], np.nan)
    finite = ratios[np.isfinite(ratios)]
    eta = float(np.max(finite)) if len(finite) else math.nan
    return HolderFit(tau, r2, ratios, eta, int(np.count_nonzero(pos)))


# ---------------------------------------------------------------------------
# Hölder seminorm
# ---------------------------------------------------------------------------

def holder_seminorm(
    u: GridFunction,
    gamma: float,
    seed: int = HOLDER_SEED,
    n_long_range: int = 1_000_000,
) -> float:
    """max over node pairs of |u(x) - u(y)| / |x - y|^gamma.

    Exhaustive (chunked) when the grid is small enough; otherwise all pairs
    within 4h plus a seeded stratified sample of long-range pairs.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    c = u.grid.coords()
    v = u.values
    n = len(v)
    if n <= EXHAUSTIVE_LIMIT:
        best = 0.0
        for i in range(n - 1):
            d2 = np.sum((c[i + 1 :] - c[i]) ** 2, axis=1)
            q = np.abs(v[i + 1 :] - v[i]) / d2 ** (gamma / 2.0)
            if len(q):
                best = max(best, float(np.max(q)))
        return best
    # short-range pairs within a 4h window
    best = 0.0
    h = max(u.grid.spacing)
    if u.grid.ndim == 2:
        nx, ny = u.grid.npts
        g = v.reshape(nx, ny)
        X = c[:, 0].reshape(nx, ny)
        Y = c[:, 1].reshape(nx, ny)
        for di in range(0, 5):
            for dj in range(-4, 5):
                if di == 0 and dj <= 0:
                    continue
                a = g[: nx - di, max(0, -dj) : ny - max(0, dj)]
                b = g[di:, max(0, dj) : ny - max(0, -dj)]
                dist = math.hypot(di * u.grid.spacing[0], dj * u.grid.spacing[1])
                if dist > 4 * h or dist == 0:
                    continue
                best = max(best, float(np.max(np.abs(a - b))) / dist**gamma)
    rng = np.random.default_rng(seed)
    ii = rng.integers(0, n, size=n_long_range)
    jj = rng.integers(0, n, size=n_long_range)
    keep = ii != jj
    ii, jj = ii[keep], jj[keep]
    d = np.sqrt(np.sum((c[ii] - c[jj]) ** 2, axis=1))
    best = max(best, float(np.max(np.abs(v[ii] - v[jj]) / d**gamma)))
    return best


def check_holder_pairs(u: GridFunction, gamma: float, H: float, slack: float = 1e-12) -> bool:
    """Re-scan: every node pair satisfies |u(x)-u(y)| <= H |x-y|^gamma."""
    c = u.grid.coords()
    v = u.values
    for i in range(len(v) - 1):
        d = np.sqrt(np.sum((c[i + 1 :] - c[i]) ** 2, axis=1))
        if np.any(np.abs(v[i + 1 :] - v[i]) > H * d**gamma + slack):
            return False
    return True


# ---------------------------------------------------------------------------
# iteration lemmas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IterationParamsB1:
    """phi(h) <= C0 phi(k)^b / (h - k)^a for k >= k0, phi nonincreasing."""

    C0: float
    a: float
    b: float
    phi0: float

    def __post_init__(self):
        if self.b <= 1.0:
            raise BadExponent(f"b must exceed 1, got {self.b}")
        if self.C0 <= 0 or self.a <= 0 or self.phi0 < 0:
            raise BadExponent("C0, a must be positive and phi0 nonnegative")


@dataclass(frozen=True)
class IterationParamsC7:
    """Two-index recurrence in the level k and the radius rho."""

    C0: float
    alpha: float
    gamma: float
    mu: float
    phi0: float
    r0: float
    ell: float = 0.5

    def __post_init__(self):
        if self.mu <= 1.0:
            raise BadExponent(f"mu must exceed 1, got {self.mu}")
        if not (0.0 < self.ell < 1.0):
            raise BadExponent(f"ell must lie in (0,1), got {self.ell}")
        if min(self.C0, self.alpha, self.gamma, self.r0) <= 0 or self.phi0 < 0:
            raise BadExponent("C0, alpha, gamma, r0 must be positive")


def lemma_B1_threshold(p: IterationParamsB1) -> float:
    """d with phi(k0 + d) = 0: d^a = 2^(ab/(b-1)) C0 phi0^(b-1)."""
    if p.phi0 == 0.0:
        return 0.0
    return (2.0 ** (p.a * p.b / (p.b - 1.0)) * p.C0 * p.phi0 ** (p.b - 1.0)) ** (1.0 / p.a)


def b1_log_sequence(p: IterationParamsB1, d: float, n_steps: int = 200) -> np.ndarray:
    """log phi along levels k_n = k0 + d (1 - 2^-n) for the maximal phi
    compatible with the recurrence; log-space to dodge overflow."""
    out = np.empty(n_steps + 1)
    out[0] = math.log(p.phi0)
    logC = math.log(p.C0)
    for n in range(n_steps):
        step = d * 2.0 ** -(n + 1)
        out[n + 1] = logC + p.b * out[n] - p.a * math.log(step)
    return out


def c7_log_sequence(p: IterationParamsC7, d: float, n_steps: int = 200) -> np.ndarray:
    """log phi along k_n = k0 + ell d (1 - 2^-n), r_n = r0 (1 - ell (1 - 2^-n))."""
    out = np.empty(n_steps + 1)
    out[0] = math.log(p.phi0)
    logC = math.log(p.C0)
    for n in range(n_steps):
        dk = p.ell * d * 2.0 ** -(n + 1)
        dr = p.r0 * p.ell * 2.0 ** -(n + 1)
        out[n + 1] = logC + p.mu * out[n] - p.alpha * math.log(dk) - p.gamma * math.log(dr)
    return out


def lemma_C7_threshold(p: IterationParamsC7) -> tuple[float, float]:
    """(d, ell) with phi(k0 + ell d, r0 (1 - ell)) = 0.

    d^alpha = C0 2^((alpha+gamma) mu/(mu-1)) phi0^(mu-1) / (ell^(alpha+gamma) r0^gamma).
    The De Giorgi sequence driven by this d is checked to vanish.
    """
    if p.phi0 == 0.0:
        return 0.0, p.ell
    d = (
        p.C0
        * 2.0 ** ((p.alpha + p.gamma) * p.mu / (p.mu - 1.0))
        * p.phi0 ** (p.mu - 1.0)
        / (p.ell ** (p.alpha + p.gamma) * p.r0**p.gamma)
    ) ** (1.0 / p.alpha)
    seq = c7_log_sequence(p, d)
    assert seq[-1] < seq[0] - 20.0, "recurrence did not vanish at the threshold"
    return float(d), p.ell
