"""End-to-end studies: solver equivalence, moving-boundary sweeps and
interface oscillation profiling.

Hard assertions cover only what holds at the discrete level (Rayleigh
monotonicity of lambda_1, linearity, the route-equivalence tolerances);
qualitative degenerations (seminorm blow-up, trace constant decay as the
Dirichlet part shrinks) are reported as trends.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import eigenbasis, extension, geometry, regularity, spectral
from .config import StudyConfig, SweepRow, version_string
from .errors import ConfigError, MissingField
from .geometry import GridFunction
from .profiles import make_profile

TRACE_TOL = 0.02
ISOMETRY_TOL = 0.02
FLUX_TOL = 0.02
TAU_RANGE = (0.0, 0.6)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    bound: float

    def line(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return f"[{verdict}] {self.name}: {self.value:.6g} (bound {self.bound:.6g})"


def _mode_count(cfg: StudyConfig, n_free: int, ndim: int) -> int:
    if cfg.modes == "auto":
        return eigenbasis.default_mode_count(n_free, ndim)
    return min(int(cfg.modes), n_free)


def _auto_radius(cfg: StudyConfig, grid) -> float:
    if cfg.profile_R == "auto":
        return 0.99 * grid.domain.diameter
    return float(cfg.profile_R)


def _setup(cfg: StudyConfig):
    """Grid, partition, operator and eigenbasis from a config."""
    dom = geometry.make_domain(cfg.domain_spec())
    grid = geometry.discretize(dom, cfg.n)
    part = cfg.partition_obj()
    if part is None:
        raise MissingField("config needs a partition (or dirichlet_ends in 1D)")
    sm = eigenbasis.assemble(grid, part)
    J = _mode_count(cfg, sm.n_free, grid.ndim)
    basis = eigenbasis.solve_eigen(sm, J, method=cfg.method, seed=cfg.seed)
    return sm.grid, part, sm, basis


def _cylinder(cfg: StudyConfig, grid, lambda1: float):
    Y = extension.default_height(lambda1) if cfg.cylinder_Y == "auto" else float(cfg.cylinder_Y)
    return extension.build_cylinder(grid, Y, int(cfg.cylinder_M), float(cfg.cylinder_q))


# ---------------------------------------------------------------------------
# equivalence study
# ---------------------------------------------------------------------------

def run_equivalence(cfg: StudyConfig) -> dict:
    """Spectral and extension routes on identical data; gap report."""
    grid, part, sm, basis = _setup(cfg)
    s = cfg.s
    f = make_profile(cfg.f, grid, basis)
    u_spec = spectral.solve_spectral(f, basis, s)

    cyl = _cylinder(cfg, grid, basis.eigenvalues[0])
    sys = extension.assemble_weighted(cyl, part, s)
    U = extension.solve_extension(sys, f)
    tr = U.trace()

    denom = np.max(np.abs(u_spec.values))
    trace_gap = float(np.max(np.abs(tr.values - u_spec.values)) / denom) if denom else 0.0

    iso_gap = 0.0
    for j in range(1, min(5, basis.size) + 1):
        phi = GridFunction(basis.mode(j), grid)
        W = extension.extend(phi, cyl, part, s)
        target = basis.eigenvalues[j - 1] ** s
        iso_gap = max(iso_gap, abs(extension.weighted_energy(W, s) - target) / target)

    phi1 = GridFunction(basis.mode(1), grid)
    W1 = extension.extend(phi1, cyl, part, s)
    flux = extension.fractional_flux(W1, s)
    target = basis.eigenvalues[0] ** s * basis.mode(1)
    flux_gap = float(np.max(np.abs(flux.values - target)) / np.max(np.abs(target)))

    checks = [
        Check("trace_gap", trace_gap <= TRACE_TOL, trace_gap, TRACE_TOL),
        Check("isometry_gap", iso_gap <= ISOMETRY_TOL, iso_gap, ISOMETRY_TOL),
        Check("flux_gap", flux_gap <= FLUX_TOL, flux_gap, FLUX_TOL),
    ]
    return {
        "lambda1": float(basis.eigenvalues[0]),
        "trace_gap": trace_gap,
        "isometry_gap": float(iso_gap),
        "flux_gap": flux_gap,
        "cylinder": {"Y": cyl.height, "M": cyl.M},
        "solver": U.diagnostics,
        "checks": checks,
    }


# ---------------------------------------------------------------------------
# moving-boundary sweep
# ---------------------------------------------------------------------------

def _tau_at_center(u: GridFunction, center, R: float) -> float:
    radii = [R * 0.25**i for i in range(4)]
    try:
        prof = regularity.oscillation_profile(u, center, radii)
        return regularity.fit_holder_exponent(prof).tau
    except (regularity.DegenerateProfile, regularity.EmptyBall):
        return math.nan


def run_alpha_sweep(cfg: StudyConfig) -> dict:
    """One row per alpha: lambda_1, trace-constant bound, sup norm, seminorm."""
    family = cfg.family_obj()
    alphas = sorted(cfg.alpha_list())
    if len(alphas) < 5:
        raise ConfigError(f"sweeps need at least 5 alpha values, got {len(alphas)}")
    dom = family.domain
    grid = geometry.discretize(dom, cfg.n)
    s = cfg.s
    R = _auto_radius(cfg, grid)
    rows = []
    for alpha in alphas:
        part = geometry.partition_at(family, alpha)
        sm = eigenbasis.assemble(grid, part)
        J = _mode_count(cfg, sm.n_free, 2)
        basis = eigenbasis.solve_eigen(sm, J, method=cfg.method, seed=cfg.seed)
        lam1 = float(basis.eigenvalues[0])
        cd_upper = dom.volume ** (2.0 * s / 2.0) * lam1**s
        f = make_profile(cfg.f, sm.grid, basis)
        u = spectral.solve_spectral(f, basis, s)
        H = regularity.holder_seminorm(u, cfg.gamma, seed=cfg.seed)
        gpts = part.gamma_points()
        center = gpts[0] if gpts else (dom.lx / 2.0, 0.0)
        tau = _tau_at_center(u, center, R)
        rows.append(SweepRow(alpha, lam1, cd_upper, float(np.max(np.abs(u.values))), H, tau))

    lam = np.array([r.lambda1 for r in rows])
    Hs = np.array([r.holder_H for r in rows])
    cds = np.array([r.cd_upper for r in rows])
    a = np.array([r.alpha for r in rows])
    checks = [
        Check(
            "lambda1_nondecreasing",
            bool(np.all(np.diff(lam) >= -1e-10 * lam[-1])),
            float(np.min(np.diff(lam))),
            0.0,
        ),
    ]
    h_trend = stats.spearmanr(a, Hs).statistic if len(set(Hs)) > 1 else 0.0
    cd_trend = stats.spearmanr(a, cds).statistic if len(set(cds)) > 1 else 0.0
    return {
        "rows": rows,
        "checks": checks,
        "h_spearman": float(h_trend),
        "cd_spearman": float(cd_trend),
        "cd_endpoint_ratio": float(cds[0] / cds[-1]),
        "h_endpoint_ratio": float(Hs[0] / Hs[-1]),
    }


# ---------------------------------------------------------------------------
# interface profile
# ---------------------------------------------------------------------------

def run_interface_profile(cfg: StudyConfig) -> dict:
    """Oscillation decay of the extension around an interface point."""
    grid, part, sm, basis = _setup(cfg)
    s = cfg.s
    f = make_profile(cfg.f, grid, basis)
    cyl = _cylinder(cfg, grid, basis.eigenvalues[0])
    sys = extension.assemble_weighted(cyl, part, s)
    U = extension.solve_extension(sys, f)
    u = U.trace()

    gpts = part.gamma_points()
    at_interface = bool(gpts)
    if at_interface:
        center2d = gpts[0]
    else:
        # pure Dirichlet: profile at a smooth boundary point, reported only
        center2d = (grid.domain.lx / 2.0, 0.0) if grid.ndim == 2 else (grid.domain.a,)
    center = tuple(center2d) + (0.0,)
    R = _auto_radius(cfg, grid)
    radii = [R * 0.25**i for i in range(5)]
    profile = regularity.oscillation_profile(U, center, radii)
    fit = regularity.fit_holder_exponent(profile)

    H = regularity.holder_seminorm(u, cfg.gamma, seed=cfg.seed)
    ratio = regularity.verify_linfty_bound(u, f, s, cfg.p)
    umax = float(np.max(u.values))
    ks = np.linspace(0.0, umax, 10)[1:-1]
    table = [[float(k), regularity.level_set_measure(u, k).above] for k in ks]

    checks = []
    if at_interface:
        checks.append(
            Check("tau_in_range", TAU_RANGE[0] < fit.tau <= TAU_RANGE[1], fit.tau, TAU_RANGE[1])
        )
        checks.append(Check("eta_bar_below_one", fit.eta_bar < 1.0, fit.eta_bar, 1.0))
    return {
        "center": [float(x) for x in center],
        "at_interface": at_interface,
        "radii": [float(r) for r in radii],
        "omega": [float(w) for w in profile.omega],
        "gamma": cfg.gamma,
        "tau_fit": fit.tau,
        "eta_bar_fit": fit.eta_bar,
        "fit_goodness": fit.goodness,
        "ratios": [float(r) for r in fit.ratios],
        "seminorm": H,
        "linfty_ratio": ratio,
        "levelset_table": table,
        "solver": U.diagnostics,
        "checks": checks,
    }


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def export_basis(basis, out_dir, fmt: str = "csv", name: str = "basis") -> list[Path]:
    """Eigenvalue CSV plus one CSV per eigenvector, or a JSON envelope."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        p = out_dir / f"{name}_eigenvalues.csv"
        lines = ["j,lambda"] + [f"{j + 1},{lam:.16g}" for j, lam in enumerate(basis.eigenvalues)]
        p.write_text("\n".join(lines) + "\n")
        written.append(p)
        for j in range(basis.size):
            q = out_dir / f"{name}_eigvec_{j + 1:04d}.csv"
            np.savetxt(q, basis.vectors[:, j], delimiter=",")
            written.append(q)
    if fmt in ("json", "both"):
        payload = {
            "schema": "mixedfrac.basis.v1",
            "version": version_string(),
            "eigenvalues": [float(x) for x in basis.eigenvalues],
            "vectors": basis.vectors.T.tolist(),
        }
        p = out_dir / f"{name}.json"
        p.write_text(json.dumps(payload) + "\n")
        written.append(p)
    return written


def export_grid_function(u: GridFunction, out_dir, name: str, fmt: str = "csv",
                         extra: dict | None = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    coords = u.grid.coords()
    written = []
    if fmt in ("csv", "both"):
        header = "x,u" if u.grid.ndim == 1 else "x1,x2,u"
        p = out_dir / f"{name}.csv"
        np.savetxt(p, np.column_stack([coords, u.values]), delimiter=",",
                   header=header, comments="")
        written.append(p)
    if fmt in ("json", "both"):
        payload = {
            "schema": "mixedfrac.gridfunction.v1",
            "version": version_string(),
            "coords": coords.tolist(),
            "values": u.values.tolist(),
        }
        if extra:
            payload.update(extra)
        p = out_dir / f"{name}.json"
        p.write_text(json.dumps(payload) + "\n")
        written.append(p)
    return written


def export_field(U, out_dir, name: str = "field", fmt: str = "csv") -> list[Path]:
    """Cylinder field as (x, y, U) rows, or a JSON envelope with diagnostics."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    coords = U.coords()
    written = []
    if fmt in ("csv", "both"):
        header = "x,y,U" if coords.shape[1] == 2 else "x1,x2,y,U"
        p = out_dir / f"{name}.csv"
        np.savetxt(p, np.column_stack([coords, U.flat()]), delimiter=",",
                   header=header, comments="")
        written.append(p)
    if fmt in ("json", "both"):
        payload = {
            "schema": "mixedfrac.cylinderfield.v1",
            "version": version_string(),
            "coords": coords.tolist(),
            "values": U.flat().tolist(),
            "diagnostics": U.diagnostics,
        }
        p = out_dir / f"{name}.json"
        p.write_text(json.dumps(payload) + "\n")
        written.append(p)
    return written
