"""Flat key = value study configuration and tabular result emission.

Config files hold one ``key = value`` pair per line; ``#`` starts a comment.
Unknown keys and malformed values are rejected with the offending line
number.  Defaults are recorded explicitly so every emitted artifact can echo
the fully resolved configuration.

Results go out as a fixed-header CSV (byte-identical for identical config
and seed) and/or a JSON envelope embedding the resolved config; CSV output
gets a ``<name>.config.json`` sidecar carrying the same echo.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .errors import ConfigError, MissingField, NoData
from .geometry import (
    BoundaryArc,
    BoundaryPartition,
    Interval,
    MovingFamily,
    Rectangle,
    partition_1d,
    partition_from_arcs,
)

CSV_HEADER = "alpha,lambda1,cd_upper,linf,holder_H,tau_fit"

_DEFAULTS = {
    "domain": "rectangle",
    "a": 0.0,
    "b": 3.141592653589793,
    "lx": 3.141592653589793,
    "ly": 3.141592653589793,
    "n": 49,
    "s": 0.75,
    "p": 2.0,
    "f": None,  # required
    "partition": None,
    "dirichlet_ends": None,
    "family_anchor_edge": "bottom",
    "family_anchor_t": 0.0,
    "family_direction": "both",
    "alphas": None,
    "eps": "auto",
    "modes": "auto",
    "method": "auto",
    "cylinder_Y": "auto",
    "cylinder_M": 64,
    "cylinder_q": 2.0,
    "gamma": 0.4,
    "profile_R": "auto",
    "seed": 20240,
    "out": "results",
    "format": "csv",
}

_INT_KEYS = {"n", "cylinder_M", "seed"}
_FLOAT_KEYS = {
    "a", "b", "lx", "ly", "s", "p", "family_anchor_t", "cylinder_q", "gamma",
}
_CHOICES = {
    "domain": ("interval", "rectangle"),
    "family_direction": ("ccw", "cw", "both"),
    "format": ("csv", "json", "both"),
    "method": ("auto", "dense", "lanczos"),
}


@dataclass
class StudyConfig:
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError as e:
            raise AttributeError(key) from e

    def resolved(self) -> dict:
        return dict(self.values)

    # ---- derived objects -------------------------------------------------

    def domain_spec(self):
        if self.domain == "interval":
            return Interval(self.a, self.b)
        return Rectangle(self.lx, self.ly)

    def partition_obj(self) -> BoundaryPartition | None:
        dom = self.domain_spec()
        if self.domain == "interval":
            if self.dirichlet_ends is None:
                return None
            ends = [e.strip() for e in self.dirichlet_ends.split(",") if e.strip()]
            return partition_1d(dom, ends)
        if self.partition is None:
            return None
        arcs = []
        for piece in self.partition.split(","):
            try:
                edge, t0, t1 = piece.strip().split(":")
                arcs.append(BoundaryArc(edge, float(t0), float(t1)))
            except ValueError as e:
                raise ConfigError(f"bad partition triple {piece!r}") from e
        return partition_from_arcs(dom, arcs)

    def family_obj(self) -> MovingFamily:
        dom = self.domain_spec()
        if self.domain != "rectangle":
            raise ConfigError("moving families need a rectangle domain")
        eps = None if self.eps == "auto" else float(self.eps)
        return MovingFamily(
            dom, self.family_anchor_edge, self.family_anchor_t,
            self.family_direction, eps,
        )

    def alpha_list(self) -> list[float]:
        if self.alphas is None:
            raise MissingField("alphas is required for sweeps")
        return [float(x) for x in str(self.alphas).split(",") if x.strip()]


def _coerce(key: str, raw: str, line_no: int):
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"line {line_no}: {key} expects an integer, got {raw!r}")
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"line {line_no}: {key} expects a number, got {raw!r}")
    if key in _CHOICES and raw not in _CHOICES[key]:
        raise ConfigError(
            f"line {line_no}: {key} must be one of {_CHOICES[key]}, got {raw!r}"
        )
    return raw


def _validate(cfg: StudyConfig, lines: dict):
    def where(key):
        return f"line {lines[key]}: " if key in lines else ""

    if cfg.f is None:
        raise MissingField("missing required key: f (source profile)")
    if not (0.5 < cfg.s < 1.0):
        raise ConfigError(f"{where('s')}s must lie in (1/2, 1), got {cfg.s}")
    N = 1 if cfg.domain == "interval" else 2
    if cfg.p <= N / (2.0 * cfg.s):
        raise ConfigError(
            f"{where('p')}p must exceed N/(2s) = {N / (2 * cfg.s):.4g}, got {cfg.p}"
        )
    if cfg.n < 3:
        raise ConfigError(f"{where('n')}n must be at least 3, got {cfg.n}")
    if cfg.cylinder_M < 8:
        raise ConfigError(
            f"{where('cylinder_M')}cylinder_M must be at least 8, got {cfg.cylinder_M}"
        )
    if cfg.cylinder_q < 1.0:
        raise ConfigError(f"{where('cylinder_q')}cylinder_q must be >= 1")
    if not (0.0 < cfg.gamma < 1.0):
        raise ConfigError(f"{where('gamma')}gamma must lie in (0, 1)")
    if cfg.domain == "interval" and not (cfg.b > cfg.a):
        raise ConfigError(f"{where('b')}interval needs b > a")
    if cfg.domain == "rectangle" and (cfg.lx <= 0 or cfg.ly <= 0):
        raise ConfigError(f"{where('lx')}rectangle sides must be positive")


def parse_config(path) -> StudyConfig:
    """Parse and validate a flat key = value configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = dict(_DEFAULTS)
    lines = {}
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, val = stripped.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        values[key] = _coerce(key, val, line_no)
        lines[key] = line_no
    cfg = StudyConfig(values)
    _validate(cfg, lines)
    return cfg


def config_from_dict(overrides: dict) -> StudyConfig:
    """Programmatic config: defaults plus overrides, validated."""
    values = dict(_DEFAULTS)
    for k, v in overrides.items():
        if k not in _DEFAULTS:
            raise ConfigError(f"unknown key {k!r}")
        values[k] = v
    cfg = StudyConfig(values)
    _validate(cfg, {})
    return cfg


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    alpha: float
    lambda1: float
    cd_upper: float
    linf: float
    holder_H: float
    tau_fit: float


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"mixedfrac-{__version__}+{out.stdout.strip()}"
    except OSError:
        pass
    return f"mixedfrac-{__version__}"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def emit_results(rows, fmt: str, out_dir, cfg: StudyConfig, name: str = "sweep") -> list[Path]:
    """Write rows as CSV and/or a JSON envelope; returns the written paths.

    The CSV is pure tabular data under the fixed header; the resolved config
    travels in the JSON envelope and in the CSV's .config.json sidecar.
    """
    rows = list(rows)
    if not rows:
        raise NoData("no rows to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    echo = {"config": cfg.resolved(), "version": version_string()}
    if fmt in ("csv", "both"):
        lines = [CSV_HEADER]
        for r in rows:
            lines.append(
                ",".join(_fmt(v) for v in (r.alpha, r.lambda1, r.cd_upper,
                                            r.linf, r.holder_H, r.tau_fit))
            )
        p = out_dir / f"{name}.csv"
        p.write_text("\n".join(lines) + "\n")
        side = out_dir / f"{name}.config.json"
        side.write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
        written.extend([p, side])
    if fmt in ("json", "both"):
        payload = dict(echo)
        payload["rows"] = [asdict(r) for r in rows]
        p = out_dir / f"{name}.json"
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        written.append(p)
    if not written:
        raise ConfigError(f"unknown output format {fmt!r}")
    return written


def parse_rows_json(path) -> list[SweepRow]:
    """Round-trip helper: rows back out of a JSON envelope."""
    payload = json.loads(Path(path).read_text())
    return [SweepRow(**r) for r in payload["rows"]]
