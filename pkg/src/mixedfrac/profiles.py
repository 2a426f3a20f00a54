"""Named analytic source profiles evaluated on a grid.

Profiles are picked by name so studies stay reproducible without data
ingestion.  A raw-CSV loader is provided as a convenience for external data.
"""

from __future__ import annotations

import numpy as np

from .eigenbasis import EigenBasis
from .errors import ConfigError
from .geometry import Grid, GridFunction

PROFILE_NAMES = ("constant", "bump", "step")


def make_profile(name: str, grid: Grid, basis: EigenBasis | None = None) -> GridFunction:
    """constant | bump | step | mode:<j> (mode needs an eigenbasis)."""
    c = grid.coords()
    if name == "constant":
        return GridFunction(np.ones(grid.n_nodes), grid)
    if name == "bump":
        if grid.ndim == 1:
            center = np.array([(grid.domain.a + grid.domain.b) / 2.0])
        else:
            center = np.array([grid.domain.lx / 2.0, grid.domain.ly / 2.0])
        sigma = grid.domain.diameter / 8.0
        d2 = np.sum((c - center) ** 2, axis=1)
        return GridFunction(np.exp(-d2 / (2.0 * sigma**2)), grid)
    if name == "step":
        if grid.ndim == 1:
            mid = (grid.domain.a + grid.domain.b) / 2.0
        else:
            mid = grid.domain.lx / 2.0
        return GridFunction((c[:, 0] > mid).astype(float), grid)
    if name.startswith("mode:"):
        j = int(name.split(":", 1)[1])
        if basis is None:
            raise ConfigError(f"profile {name!r} needs a computed eigenbasis")
        if not (1 <= j <= basis.size):
            raise ConfigError(f"mode index {j} outside 1..{basis.size}")
        return GridFunction(basis.mode(j).copy(), grid)
    if name.startswith("csv:"):
        return load_profile_csv(name.split(":", 1)[1], grid)
    raise ConfigError(f"unknown profile {name!r}")


def load_profile_csv(path: str, grid: Grid) -> GridFunction:
    """Node values from a CSV whose last column is f, in grid node order."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    vals = data[:, -1]
    if len(vals) != grid.n_nodes:
        raise ConfigError(
            f"profile file has {len(vals)} rows, grid has {grid.n_nodes} nodes"
        )
    return GridFunction(vals.astype(float), grid)
