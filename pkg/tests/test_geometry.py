import numpy as np
import pytest

import mixedfrac as mf
from mixedfrac import geometry
from mixedfrac.errors import AlphaOutOfRange, InvalidDomain, InvalidPartition, TooCoarse
from mixedfrac.geometry import (
    DIRICHLET,
    INTERFACE,
    NEUMANN,
    BoundaryArc,
    MovingFamily,
    boundary_measure,
    classify_boundary_nodes,
    discretize,
    make_domain,
    partition_1d,
    partition_at,
    partition_from_arcs,
)

PI = np.pi


class TestDomains:
    def test_interval_valid(self):
        dom = make_domain(mf.Interval(0.0, PI))
        assert dom.boundary_measure == 2.0

    def test_rectangle_perimeter(self):
        dom = make_domain(mf.Rectangle(PI, PI))
        assert dom.boundary_measure == pytest.approx(4 * PI)

    def test_inverted_interval_rejected(self):
        with pytest.raises(InvalidDomain):
            make_domain(mf.Interval(1.0, 0.0))

    def test_nonpositive_rectangle_rejected(self):
        with pytest.raises(InvalidDomain):
            make_domain(mf.Rectangle(PI, -1.0))

    def test_boundary_point_walk(self):
        dom = mf.Rectangle(2.0, 1.0)
        assert dom.boundary_point(0.0) == (0.0, 0.0)
        assert dom.boundary_point(2.0) == (2.0, 0.0)
        assert dom.boundary_point(3.0) == (2.0, 1.0)
        assert dom.boundary_point(5.0) == (0.0, 1.0)
        assert dom.boundary_point(6.0) == (0.0, 0.0)


class TestPartitions:
    def test_measure_sums_arcs(self):
        dom = mf.Rectangle(1.0, 1.0)
        part = partition_from_arcs(dom, [BoundaryArc("bottom", 0.0, 0.3),
                                         BoundaryArc("top", 0.2, 0.4)])
        assert boundary_measure(part) == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(InvalidPartition):
            partition_from_arcs(mf.Rectangle(1.0, 1.0), [])
        with pytest.raises(InvalidPartition):
            partition_1d(mf.Interval(0.0, 1.0), set())

    def test_full_boundary(self):
        dom = mf.Rectangle(PI, PI)
        part = partition_from_arcs(dom, [BoundaryArc(e, 0.0, PI)
                                         for e in ("bottom", "right", "top", "left")])
        assert boundary_measure(part) == pytest.approx(4 * PI)
        assert part.is_full()
        assert part.gamma_points() == []

    def test_overlapping_arcs_rejected(self):
        dom = mf.Rectangle(1.0, 1.0)
        with pytest.raises(InvalidPartition):
            partition_from_arcs(dom, [BoundaryArc("bottom", 0.0, 0.5),
                                      BoundaryArc("bottom", 0.4, 0.8)])

    def test_1d_counting_measure(self):
        part = partition_1d(mf.Interval(0.0, PI), {"a", "b"})
        assert boundary_measure(part) == 2.0

    def test_gamma_points_of_half_bottom(self):
        dom = mf.Rectangle(PI, PI)
        part = partition_from_arcs(dom, [BoundaryArc("bottom", 0.0, PI / 2)])
        pts = part.gamma_points()
        assert len(pts) == 2  # the corner anchor and the edge midpoint
        assert any(np.allclose(p, (PI / 2, 0.0)) for p in pts)


class TestMovingFamily:
    def test_corner_growth_covers_bottom_and_left(self):
        dom = mf.Rectangle(PI, PI)
        fam = MovingFamily(dom, "bottom", 0.0, "both")
        part = partition_at(fam, 2 * PI)
        edges = {a.edge for a in part.arcs}
        assert edges == {"bottom", "left"}
        for arc in part.arcs:
            assert arc.t0 == pytest.approx(0.0)
            assert arc.t1 == pytest.approx(PI)

    def test_full_measure_limit(self):
        dom = mf.Rectangle(PI, PI)
        fam = MovingFamily(dom, "bottom", 0.0, "both")
        part = partition_at(fam, 4 * PI)
        assert part.is_full()

    def test_alpha_below_floor_rejected(self):
        dom = mf.Rectangle(PI, PI)
        fam = MovingFamily(dom, "bottom", 0.0, "both")
        with pytest.raises(AlphaOutOfRange):
            partition_at(fam, fam.eps / 2)

    @pytest.mark.parametrize("direction", ["ccw", "cw", "both"])
    def test_measure_exactness(self, direction):
        dom = mf.Rectangle(PI, PI)
        fam = MovingFamily(dom, "bottom", 1.0, direction)
        P = dom.perimeter
        for alpha in np.linspace(fam.eps, P, 17):
            part = partition_at(fam, alpha)
            assert abs(boundary_measure(part) - alpha) <= 1e-12 * P

    @pytest.mark.parametrize("direction", ["ccw", "cw", "both"])
    def test_nesting(self, direction):
        dom = mf.Rectangle(2.0, 1.0)
        fam = MovingFamily(dom, "right", 0.5, direction)
        alphas = np.linspace(fam.eps, dom.perimeter, 9)
        parts = [partition_at(fam, a) for a in alphas]
        # every arc of the smaller set lies inside the bigger set
        for small, big in zip(parts, parts[1:]):
            for arc in small.arcs:
                off = dom.edge_offset(arc.edge)
                for t in np.linspace(arc.t0, arc.t1, 7):
                    assert big.distance_on_boundary(off + t) <= 1e-12


class TestGrids:
    def test_1d_nodes(self):
        g = discretize(mf.Interval(0.0, PI), 5)
        assert np.allclose(g.axes[0], [0, PI / 4, PI / 2, 3 * PI / 4, PI])
        assert int(np.sum(g.boundary_mask())) == 2

    def test_2d_counts(self):
        g = discretize(mf.Rectangle(1.0, 1.0), 4)
        assert g.n_nodes == 16
        assert int(np.sum(g.boundary_mask())) == 12

    def test_too_coarse(self):
        with pytest.raises(TooCoarse):
            discretize(mf.Interval(0.0, 1.0), 2)

    def test_quad_weights_sum_to_volume(self):
        g = discretize(mf.Rectangle(2.0, 3.0), 7)
        assert np.sum(g.quad_weights()) == pytest.approx(6.0)


class TestClassification:
    def test_1d_mixed(self):
        g = discretize(mf.Interval(0.0, PI), 5)
        part = partition_1d(mf.Interval(0.0, PI), {"a"})
        g = classify_boundary_nodes(g, part)
        assert g.tags[0] == DIRICHLET
        assert g.tags[-1] == NEUMANN

    def test_closed_set_wins_at_corners(self):
        dom = mf.Rectangle(PI, PI)
        g = discretize(dom, 9)
        part = partition_from_arcs(dom, [BoundaryArc("bottom", 0.0, PI)])
        g = classify_boundary_nodes(g, part)
        t = g.tags.reshape(9, 9)
        # whole bottom row including the two shared corners
        assert np.all(t[:, 0] != NEUMANN)
        assert t[0, 0] != NEUMANN and t[8, 0] != NEUMANN
        # everything else on the boundary is Neumann
        assert np.all(t[:, 8][1:-1] == NEUMANN) or np.all(t[:, 8] == NEUMANN)

    def test_interface_at_edge_midpoint(self):
        dom = mf.Rectangle(PI, PI)
        g = discretize(dom, 9)
        part = partition_from_arcs(dom, [BoundaryArc("bottom", 0.0, PI / 2)])
        g = classify_boundary_nodes(g, part)
        t = g.tags.reshape(9, 9)
        assert t[4, 0] == INTERFACE  # node exactly at the arc endpoint
        assert t[0, 0] == INTERFACE  # the corner anchor is the other endpoint
        assert np.all(t[1:4, 0] == DIRICHLET)
        assert np.all(t[6:, 0] == NEUMANN)
        # interface nodes are eliminated together with Dirichlet ones
        assert not g.free_mask()[g.node_index(4, 0)]

    def test_idempotence(self):
        dom = mf.Rectangle(PI, PI)
        g = discretize(dom, 9)
        part = partition_from_arcs(dom, [BoundaryArc("bottom", 0.0, PI / 2)])
        g1 = classify_boundary_nodes(g, part)
        g2 = classify_boundary_nodes(g1, part)
        assert np.array_equal(g1.tags, g2.tags)

    def test_domain_mismatch_rejected(self):
        g = discretize(mf.Rectangle(1.0, 1.0), 5)
        part = partition_from_arcs(mf.Rectangle(2.0, 1.0), [BoundaryArc("bottom", 0.0, 1.0)])
        with pytest.raises(InvalidPartition):
            classify_boundary_nodes(g, part)


class TestDistance:
    def test_distance_to_dirichlet_1d(self):
        g = discretize(mf.Interval(0.0, PI), 5)
        part = partition_1d(mf.Interval(0.0, PI), {"a"})
        d = geometry.distance_to_dirichlet(g, part)
        assert np.allclose(d, g.axes[0])

    def test_distance_to_dirichlet_2d(self):
        dom = mf.Rectangle(PI, PI)
        g = discretize(dom, 9)
        part = partition_from_arcs(dom, [BoundaryArc("bottom", 0.0, PI)])
        d = geometry.distance_to_dirichlet(g, part).reshape(9, 9)
        assert np.allclose(d, np.broadcast_to(g.axes[1], (9, 9)), atol=2e-3)
