import pathlib
import sys

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

import mixedfrac as mf
from mixedfrac import geometry

PI = np.pi


@pytest.fixture(scope="session")
def interval():
    return mf.Interval(0.0, PI)


@pytest.fixture(scope="session")
def square():
    return mf.Rectangle(PI, PI)


@pytest.fixture(scope="session")
def setup_1d(interval):
    """Cached (grid, partition, operator, basis) for 1D problems on (0, pi)."""
    cache = {}

    def get(n, J=None, ends=("a",)):
        key = (n, J, tuple(sorted(ends)))
        if key not in cache:
            grid = mf.discretize(interval, n)
            part = geometry.partition_1d(interval, set(ends))
            sm = mf.assemble(grid, part)
            basis = mf.solve_eigen(sm, J)
            cache[key] = (sm.grid, part, sm, basis)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def setup_2d(square):
    """Cached (grid, partition, operator, basis) for 2D problems on (0, pi)^2.

    dirichlet: "full" (all four edges), "bottom", or "half-bottom".
    """
    arcs = {
        "full": [geometry.BoundaryArc(e, 0.0, PI) for e in ("bottom", "right", "top", "left")],
        "bottom": [geometry.BoundaryArc("bottom", 0.0, PI)],
        "half-bottom": [geometry.BoundaryArc("bottom", 0.0, PI / 2)],
    }
    cache = {}

    def get(n, J=None, dirichlet="full", method="auto"):
        key = (n, J, dirichlet, method)
        if key not in cache:
            grid = mf.discretize(square, n)
            part = geometry.partition_from_arcs(square, arcs[dirichlet])
            sm = mf.assemble(grid, part)
            basis = mf.solve_eigen(sm, J, method=method)
            cache[key] = (sm.grid, part, sm, basis)
        return cache[key]

    return get
