"""Computational domains, boundary partitions and uniform grids.

The boundary of a rectangle is parametrized by arclength, counterclockwise
from the bottom-left corner:

    bottom [0, lx) -> right [lx, lx+ly) -> top [lx+ly, 2lx+ly) -> left [.., P)

A Dirichlet set is a finite union of closed arcs; its complement is the
(relatively open) Neumann set, and the arc endpoints form the interface.
In 1D the "boundary measure" is counting measure on the two endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    AlphaOutOfRange,
    EmptyBall,
    InvalidDomain,
    InvalidPartition,
    TooCoarse,
)

# Node tags. Interface nodes count as Dirichlet for elimination purposes
# (the Dirichlet set is closed).
INTERIOR = 0
DIRICHLET = 1
NEUMANN = 2
INTERFACE = 3

_EDGE_ORDER = ("bottom", "right", "top", "left")


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    @property
    def ndim(self) -> int:
        return 1

    @property
    def volume(self) -> float:
        return self.b - self.a

    @property
    def boundary_measure(self) -> float:
        # counting measure on {a, b}
        return 2.0

    @property
    def diameter(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class Rectangle:
    lx: float
    ly: float

    @property
    def ndim(self) -> int:
        return 2

    @property
    def volume(self) -> float:
        return self.lx * self.ly

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.lx + self.ly)

    @property
    def boundary_measure(self) -> float:
        return self.perimeter

    @property
    def diameter(self) -> float:
        return math.hypot(self.lx, self.ly)

    def edge_length(self, edge: str) -> float:
        if edge in ("bottom", "top"):
            return self.lx
        if edge in ("left", "right"):
            return self.ly
        raise InvalidDomain(f"unknown edge {edge!r}")

    def edge_offset(self, edge: str) -> float:
        off = 0.0
        for e in _EDGE_ORDER:
            if e == edge:
                return off
            off += self.edge_length(e)
        raise InvalidDomain(f"unknown edge {edge!r}")

    def boundary_point(self, t: float) -> tuple[float, float]:
        """Map a global perimeter parameter (ccw from (0,0)) to coordinates."""
        t = t % self.perimeter
        if t < self.lx:
            return (t, 0.0)
        t -= self.lx
        if t < self.ly:
            return (self.lx, t)
        t -= self.ly
        if t < self.lx:
            return (self.lx - t, self.ly)
        t -= self.lx
        return (0.0, self.ly - t)


DomainSpec = Interval | Rectangle


def make_domain(spec: DomainSpec) -> DomainSpec:
    """Validate a domain specification and return it."""
    if isinstance(spec, Interval):
        if not (spec.b > spec.a):
            raise InvalidDomain(f"interval needs b > a, got [{spec.a}, {spec.b}]")
        return spec
    if isinstance(spec, Rectangle):
        if not (spec.lx > 0 and spec.ly > 0):
            raise InvalidDomain(f"rectangle sides must be positive, got {spec.lx} x {spec.ly}")
        return spec
    raise InvalidDomain(f"unsupported domain spec {spec!r}")


# ---------------------------------------------------------------------------
# boundary partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryArc:
    """Closed arc [t0, t1] in edge-local arclength."""

    edge: str
    t0: float
    t1: float

    def length(self) -> float:
        return self.t1 - self.t0


def _merge_intervals(ivs: list[tuple[float, float]], period: float) -> list[tuple[float, float]]:
    """Merge closed intervals on the circle of the given period.

    Output intervals live in [0, period) by left endpoint and may wrap around;
    a wrapping interval is returned as (g0, g1) with g1 > period.
    """
    if not ivs:
        return []
    flat = []
    for g0, g1 in ivs:
        length = g1 - g0
        g0 %= period
        flat.append((g0, g0 + length))
    flat.sort()
    merged = [list(flat[0])]
    for g0, g1 in flat[1:]:
        if g0 <= merged[-1][1] + 1e-12 * period:
            merged[-1][1] = max(merged[-1][1], g1)
        else:
            merged.append([g0, g1])
    # merge across the wrap point: last interval touching first+period
    if len(merged) > 1 and merged[-1][1] >= merged[0][0] + period - 1e-12 * period:
        merged[0][0] = merged[-1][0] - period
        merged[0][1] = max(merged[0][1], merged[-1][1] - period)
        merged.pop()
    return [(g0, g1) for g0, g1 in merged]


@dataclass(frozen=True)
class BoundaryPartition:
    """Dirichlet part of the boundary; everything else is Neumann.

    2D: ``arcs`` is a non-empty tuple of disjoint closed arcs, with total
    length alpha in (0, perimeter].  1D: ``points`` is a non-empty subset of
    {"a", "b"} and alpha is its cardinality.
    """

    domain: DomainSpec
    arcs: tuple[BoundaryArc, ...] = ()
    points: frozenset = frozenset()

    def __post_init__(self):
        if self.domain.ndim == 1:
            if self.arcs:
                raise InvalidPartition("1D partitions use endpoint labels, not arcs")
            if not self.points:
                raise InvalidPartition("Dirichlet set must have positive measure")
            if not self.points <= {"a", "b"}:
                raise InvalidPartition(f"unknown endpoint labels {self.points}")
            return
        if not self.arcs:
            raise InvalidPartition("Dirichlet set must have positive measure")
        for arc in self.arcs:
            elen = self.domain.edge_length(arc.edge)
            if not (0.0 <= arc.t0 < arc.t1 <= elen + 1e-12 * elen):
                raise InvalidPartition(f"arc {arc} outside its edge (length {elen})")
        merged = self._merged()
        total = sum(g1 - g0 for g0, g1 in merged)
        raw = sum(a.length() for a in self.arcs)
        if total < raw - 1e-9 * self.domain.perimeter:
            raise InvalidPartition("Dirichlet arcs overlap")
        if total > self.domain.perimeter + 1e-9 * self.domain.perimeter:
            raise InvalidPartition("Dirichlet arcs exceed the boundary")

    def _merged(self) -> list[tuple[float, float]]:
        P = self.domain.perimeter
        ivs = [
            (self.domain.edge_offset(a.edge) + a.t0, self.domain.edge_offset(a.edge) + a.t1)
            for a in self.arcs
        ]
        return _merge_intervals(ivs, P)

    @property
    def alpha(self) -> float:
        if self.domain.ndim == 1:
            return float(len(self.points))
        return sum(g1 - g0 for g0, g1 in self._merged())

    def is_full(self) -> bool:
        return self.alpha >= self.domain.boundary_measure * (1 - 1e-12)

    def gamma_params(self) -> list[float]:
        """Global perimeter parameters of the Dirichlet/Neumann interface."""
        if self.domain.ndim == 1 or self.is_full():
            return []
        P = self.domain.perimeter
        pts = []
        for g0, g1 in self._merged():
            pts.extend((g0 % P, g1 % P))
        return sorted(set(pts))

    def gamma_points(self) -> list[tuple[float, float]]:
        """Interface points as coordinates on the boundary."""
        return [self.domain.boundary_point(t) for t in self.gamma_params()]

    def distance_on_boundary(self, t: float) -> float:
        """Circular arclength distance from parameter t to the Dirichlet set."""
        P = self.domain.perimeter
        t = t % P
        best = math.inf
        for g0, g1 in self._merged():
            # candidate offsets account for the circular wrap
            for shift in (-P, 0.0, P):
                lo, hi = g0 + shift, g1 + shift
                if lo <= t <= hi:
                    return 0.0
                best = min(best, abs(t - lo), abs(t - hi))
        return best


def partition_1d(domain: Interval, ends) -> BoundaryPartition:
    """Dirichlet set on an interval: any non-empty subset of {"a", "b"}."""
    return BoundaryPartition(make_domain(domain), points=frozenset(ends))


def partition_from_arcs(domain: Rectangle, arcs) -> BoundaryPartition:
    return BoundaryPartition(make_domain(domain), arcs=tuple(arcs))


def boundary_measure(part: BoundaryPartition) -> float:
    """Total Dirichlet measure: arclength in 2D, point count in 1D."""
    return part.alpha


def _global_interval_to_arcs(domain: Rectangle, g0: float, g1: float) -> list[BoundaryArc]:
    """Split a global parameter interval into per-edge arcs."""
    P = domain.perimeter
    if g1 - g0 >= P - 1e-12 * P:
        return [BoundaryArc(e, 0.0, domain.edge_length(e)) for e in _EDGE_ORDER]
    length = g1 - g0
    g0 %= P
    g1 = g0 + length
    arcs = []
    offsets = [domain.edge_offset(e) for e in _EDGE_ORDER]
    lengths = [domain.edge_length(e) for e in _EDGE_ORDER]
    for wrap in (0.0, P):
        for off, elen, e in zip(offsets, lengths, _EDGE_ORDER):
            lo = max(g0, off + wrap)
            hi = min(g1, off + elen + wrap)
            if hi - lo > 1e-14 * P:
                arcs.append(BoundaryArc(e, lo - off - wrap, hi - off - wrap))
    return arcs


@dataclass(frozen=True)
class MovingFamily:
    """Nested family of Dirichlet sets grown from an anchor point.

    ``direction`` is "ccw", "cw" or "both"; "both" grows symmetrically to
    either side of the anchor.  Nesting and exact measure hold for all three
    by construction.
    """

    domain: Rectangle
    anchor_edge: str = "bottom"
    anchor_t: float = 0.0
    direction: str = "both"
    eps: float | None = None

    def __post_init__(self):
        make_domain(self.domain)
        if self.direction not in ("ccw", "cw", "both"):
            raise InvalidPartition(f"unknown growth direction {self.direction!r}")
        elen = self.domain.edge_length(self.anchor_edge)
        if not (0.0 <= self.anchor_t <= elen):
            raise InvalidPartition("anchor parameter outside its edge")
        if self.eps is None:
            object.__setattr__(self, "eps", self.domain.perimeter / 20.0)

    @property
    def alpha_max(self) -> float:
        return self.domain.perimeter

    def anchor_param(self) -> float:
        return self.domain.edge_offset(self.anchor_edge) + self.anchor_t


def partition_at(family: MovingFamily, alpha: float) -> BoundaryPartition:
    """Dirichlet set of measure alpha from the family's growth rule."""
    P = family.domain.perimeter
    if not (family.eps - 1e-12 * P <= alpha <= P + 1e-12 * P):
        raise AlphaOutOfRange(f"alpha={alpha} outside [{family.eps}, {P}]")
    alpha = min(alpha, P)
    g = family.anchor_param()
    if family.direction == "ccw":
        g0, g1 = g, g + alpha
    elif family.direction == "cw":
        g0, g1 = g - alpha, g
    else:
        g0, g1 = g - alpha / 2.0, g + alpha / 2.0
    arcs = _global_interval_to_arcs(family.domain, g0, g1)
    return BoundaryPartition(family.domain, arcs=tuple(arcs))


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform tensor grid with per-node boundary tags.

    Node order is x-major in 2D: flat index = ix * n[1] + iy.
    """

    domain: DomainSpec
    npts: tuple[int, ...]
    axes: tuple[np.ndarray, ...]
    spacing: tuple[float, ...]
    tags: np.ndarray  # int8, flat

    def __eq__(self, other):
        # same node set; boundary tags are an overlay and do not count
        if not isinstance(other, Grid):
            return NotImplemented
        return self.domain == other.domain and self.npts == other.npts

    @property
    def ndim(self) -> int:
        return self.domain.ndim

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.npts))

    def coords(self) -> np.ndarray:
        """Node coordinates, shape (n_nodes, ndim)."""
        if self.ndim == 1:
            return self.axes[0][:, None]
        X, Y = np.meshgrid(self.axes[0], self.axes[1], indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def boundary_mask(self) -> np.ndarray:
        if self.ndim == 1:
            m = np.zeros(self.n_nodes, dtype=bool)
            m[0] = m[-1] = True
            return m
        nx, ny = self.npts
        ix, iy = np.divmod(np.arange(self.n_nodes), ny)
        return (ix == 0) | (ix == nx - 1) | (iy == 0) | (iy == ny - 1)

    def free_mask(self) -> np.ndarray:
        """Nodes that carry unknowns (everything not Dirichlet/interface)."""
        return (self.tags != DIRICHLET) & (self.tags != INTERFACE)

    def dirichlet_mask(self) -> np.ndarray:
        return ~self.free_mask()

    def quad_weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights (the lumped mass), flat."""
        ws = []
        for n, h in zip(self.npts, self.spacing):
            w = np.full(n, h)
            w[0] = w[-1] = h / 2.0
            ws.append(w)
        if self.ndim == 1:
            return ws[0]
        return np.outer(ws[0], ws[1]).ravel()

    def node_index(self, *ij) -> int:
        if self.ndim == 1:
            return ij[0]
        return ij[0] * self.npts[1] + ij[1]

    def nearest_node(self, point) -> int:
        c = self.coords()
        return int(np.argmin(np.sum((c - np.asarray(point)) ** 2, axis=1)))


def discretize(spec: DomainSpec, n: int) -> Grid:
    """Uniform grid with n nodes per axis; boundary starts out Neumann."""
    make_domain(spec)
    if n < 3:
        raise TooCoarse(f"need at least 3 nodes per axis, got {n}")
    if spec.ndim == 1:
        xs = np.linspace(spec.a, spec.b, n)
        h = (spec.b - spec.a) / (n - 1)
        tags = np.zeros(n, dtype=np.int8)
        tags[0] = tags[-1] = NEUMANN
        return Grid(spec, (n,), (xs,), (h,), tags)
    xs = np.linspace(0.0, spec.lx, n)
    ys = np.linspace(0.0, spec.ly, n)
    hx = spec.lx / (n - 1)
    hy = spec.ly / (n - 1)
    grid = Grid(spec, (n, n), (xs, ys), (hx, hy), np.zeros(n * n, dtype=np.int8))
    tags = np.where(grid.boundary_mask(), NEUMANN, INTERIOR).astype(np.int8)
    return replace(grid, tags=tags)


def _boundary_params(grid: Grid) -> list[tuple[int, list[tuple[str, float]]]]:
    """(node, [(edge, local t), ...]) for every boundary node; corners get two."""
    dom = grid.domain
    nx, ny = grid.npts
    xs, ys = grid.axes
    out = {}

    def add(i, j, edge, t):
        out.setdefault(grid.node_index(i, j), []).append((edge, t))

    for i in range(nx):
        add(i, 0, "bottom", xs[i])
        add(i, ny - 1, "top", dom.lx - xs[i])
    for j in range(ny):
        add(nx - 1, j, "right", ys[j])
        add(0, j, "left", dom.ly - ys[j])
    return sorted(out.items())


def classify_boundary_nodes(grid: Grid, part: BoundaryPartition) -> Grid:
    """Tag boundary nodes against a partition; returns a new grid.

    A node is Dirichlet when it lies within half a grid spacing of the closed
    Dirichlet set (ties included: the closed set wins).  Nodes coinciding
    with an interface point are tagged INTERFACE and are eliminated together
    with the Dirichlet nodes.
    """
    if grid.domain != part.domain:
        raise InvalidPartition("grid and partition must share the domain")
    tags = grid.tags.copy()
    if grid.ndim == 1:
        tags[0] = DIRICHLET if "a" in part.points else NEUMANN
        tags[-1] = DIRICHLET if "b" in part.points else NEUMANN
        return replace(grid, tags=tags)

    dom = grid.domain
    P = dom.perimeter
    hx, hy = grid.spacing
    snap = {"bottom": hx / 2, "top": hx / 2, "left": hy / 2, "right": hy / 2}
    gamma = part.gamma_params()
    eps = 1e-9 * P
    for node, reps in _boundary_params(grid):
        tag = NEUMANN
        for edge, tloc in reps:
            g = dom.edge_offset(edge) + tloc
            dist = part.distance_on_boundary(g)
            if any(_circ_dist(g, gp, P) <= eps for gp in gamma):
                tag = INTERFACE
                break
            if dist <= snap[edge] * (1 + 1e-12):
                tag = DIRICHLET
        tags[node] = tag
    return replace(grid, tags=tags)


def _circ_dist(a: float, b: float, period: float) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def distance_to_dirichlet(grid: Grid, part: BoundaryPartition) -> np.ndarray:
    """Euclidean distance from every node to the Dirichlet set (sampled)."""
    if grid.ndim == 1:
        xs = grid.axes[0]
        ds = []
        if "a" in part.points:
            ds.append(np.abs(xs - grid.domain.a))
        if "b" in part.points:
            ds.append(np.abs(xs - grid.domain.b))
        return np.minimum.reduce(ds)
    P = grid.domain.perimeter
    n_samp = 8192
    ts = []
    for g0, g1 in part._merged():
        k = max(2, int(np.ceil((g1 - g0) / P * n_samp)))
        ts.append(np.linspace(g0, g1, k))
    ts = np.concatenate(ts)
    pts = np.array([grid.domain.boundary_point(t) for t in ts])
    c = grid.coords()
    # chunked min-distance to keep memory flat
    out = np.full(len(c), np.inf)
    for lo in range(0, len(pts), 512):
        d = np.sqrt(((c[:, None, :] - pts[None, lo : lo + 512, :]) ** 2).sum(-1))
        out = np.minimum(out, d.min(axis=1))
    return out


# ---------------------------------------------------------------------------
# grid functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridFunction:
    """Scalar values on the nodes of a grid (flat storage)."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        if self.values.shape != (self.grid.n_nodes,):
            raise InvalidDomain(
                f"values shape {self.values.shape} does not match grid ({self.grid.n_nodes},)"
            )

    @staticmethod
    def from_callable(grid: Grid, fn) -> "GridFunction":
        c = grid.coords()
        if grid.ndim == 1:
            vals = np.asarray([fn(x[0]) for x in c], dtype=float)
        else:
            vals = np.asarray([fn(x[0], x[1]) for x in c], dtype=float)
        return GridFunction(vals, grid)

    def reshape(self) -> np.ndarray:
        if self.grid.ndim == 1:
            return self.values
        return self.values.reshape(self.grid.npts)


def nodes_in_ball(coords: np.ndarray, center, radius: float) -> np.ndarray:
    """Boolean mask of points within the closed Euclidean ball."""
    center = np.asarray(center, dtype=float)
    if coords.shape[1] != center.shape[0]:
        raise EmptyBall(
            f"center dimension {center.shape[0]} does not match coords {coords.shape[1]}"
        )
    return np.sum((coords - center) ** 2, axis=1) <= radius * radius
