import math

import numpy as np
import pytest

from subdiff import geometry as geo

BALL2 = geo.Ball((0.0, 0.0), 1.0)
IV = geo.Interval(0.0, 1.0)
HS2 = geo.HalfSpace((0.0, 1.0), 0.0)
HS1 = geo.HalfSpace((1.0,), 0.0)
CUSP = geo.GraphDomain(geo.PowerCusp(0.5, 1.5), alpha=0.5)


class TestDistances:
    def test_ball_center(self):
        assert geo.dist_to_boundary(BALL2, np.array([0.0, 0.0])) == 1.0

    def test_half_space_height(self):
        assert geo.dist_to_boundary(HS2, np.array([7.3, 0.3])) == pytest.approx(0.3)

    def test_interval(self):
        assert geo.dist_to_boundary(IV, np.array([0.25])) == 0.25
        assert geo.dist_to_boundary(IV, np.array([0.8])) == pytest.approx(0.2)

    def test_outside_is_zero(self):
        assert geo.dist_to_boundary(BALL2, np.array([2.0, 0.0])) == 0.0
        assert geo.dist_to_boundary(IV, np.array([-0.5])) == 0.0

    def test_graph_cusp_against_dense_oracle(self):
        x = np.array([0.0, 0.2])
        s = np.linspace(-2, 2, 1_000_001)
        brute = np.sqrt(s**2 + (0.2 - 0.5 * np.abs(s) ** 1.5) ** 2).min()
        assert geo.dist_to_boundary(CUSP, x) == pytest.approx(brute, abs=1e-6)

    def test_graph_generic_point_against_dense_oracle(self):
        x = np.array([0.3, 0.5])
        s = np.linspace(-2, 3, 2_000_001)
        brute = np.sqrt((s - 0.3) ** 2 + (0.5 - 0.5 * np.abs(s) ** 1.5) ** 2).min()
        assert geo.dist_to_boundary(CUSP, x) == pytest.approx(brute, abs=1e-6)

    @pytest.mark.parametrize("dom,lo,hi", [
        (BALL2, -1.3, 1.3),
        (IV, -0.3, 1.3),
        (CUSP, -1.0, 1.5),
    ], ids=["ball", "interval", "cusp"])
    def test_one_lipschitz(self, dom, lo, hi):
        rng = np.random.default_rng(5)
        d = dom.dim
        X = rng.uniform(lo, hi, size=(2000, d))
        Y = rng.uniform(lo, hi, size=(2000, d))
        dX = np.atleast_1d(dom.dist(X))
        dY = np.atleast_1d(dom.dist(Y))
        gap = np.abs(dX - dY) - np.linalg.norm(X - Y, axis=1)
        assert gap.max() <= 1e-6

    def test_membership_iff_positive_distance(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(-1.5, 1.5, size=(3000, 2))
        inside = np.atleast_1d(BALL2.contains(X))
        dist = np.atleast_1d(BALL2.dist(X))
        assert np.all(inside == (dist > 1e-12))

    def test_dist_below_any_boundary_sample(self):
        rng = np.random.default_rng(7)
        us = rng.random(3000)
        bpts = np.array([BALL2.boundary_point(u) for u in us])
        x = np.array([0.4, 0.2])
        dists = np.linalg.norm(bpts - x, axis=1)
        dx = float(BALL2.dist(x))
        assert dx <= dists.min() + 1e-12
        assert dists.min() - dx <= 1e-3  # densest sample nearly achieves it


class TestCorkscrew:
    def test_half_space_flat(self):
        z = HS2.boundary_point(0.0)
        zr = geo.corkscrew_point(HS2, z, 0.5)
        assert HS2.dist(zr) == pytest.approx(0.5)

    def test_ball_inward_radial(self):
        zr = geo.corkscrew_point(BALL2, np.array([1.0, 0.0]), 0.2)
        assert np.linalg.norm(zr - np.array([1.0, 0.0])) == pytest.approx(0.2)
        assert BALL2.dist(zr) >= 0.1

    def test_interval_endpoint(self):
        zr = geo.corkscrew_point(IV, np.array([0.0]), 0.3)
        assert zr[0] == pytest.approx(0.3)
        assert IV.dist(zr) == pytest.approx(0.3)

    @pytest.mark.parametrize("dom", [BALL2, IV, HS2, CUSP,
                                     geo.ComplementOfBall((0.0, 0.0), 1.0)],
                             ids=["ball", "interval", "halfspace", "cusp", "complement"])
    def test_kappa_certified_on_random_draws(self, dom):
        rng = np.random.default_rng(8)
        for _ in range(200):
            z = dom.boundary_point(rng.random())
            r = rng.uniform(0.01, 0.8)
            zr = dom.corkscrew(z, r)
            delta = float(dom.dist(zr))
            assert dom.kappa * r - 1e-12 <= delta <= r + 1e-9
            assert np.linalg.norm(np.asarray(zr) - np.asarray(z)) == pytest.approx(r, rel=1e-9)

    def test_failure_reports_achieved_ratio(self):
        # interval corkscrew with r beyond the midpoint cannot certify kappa
        narrow = geo.Interval(0.0, 0.2)
        with pytest.raises(geo.CorkscrewError) as exc:
            narrow.corkscrew(np.array([0.0]), 0.19)
        assert 0 <= exc.value.achieved < 1


class TestBoxMembership:
    def test_half_space_inside(self):
        assert geo.box_membership(HS2, np.array([0.0, 0.5]), 0.1, 1.0,
                                  np.array([0.2, 0.05]))

    def test_half_space_above_box(self):
        assert not geo.box_membership(HS2, np.array([0.0, 0.5]), 0.1, 1.0,
                                      np.array([0.2, 0.2]))

    def test_graph_box(self):
        y = np.array([0.1, 0.5 * 0.1**1.5 + 0.05])
        assert geo.box_membership(CUSP, np.array([0.0, 0.05]), 0.1, 0.5, y)

    def test_needs_graph_chart(self):
        with pytest.raises(ValueError):
            geo.box_membership(BALL2, np.array([0.0, 0.5]), 0.1, 1.0, np.array([0.0, 0.05]))


class TestGraphFunction:
    def test_gradient_holder_bound(self):
        g = geo.PowerCusp(0.5, 1.5)
        rng = np.random.default_rng(9)
        s = rng.uniform(-1, 1, size=(4000, 1))
        sp = rng.uniform(-1, 1, size=(4000, 1))
        dg = np.abs(g.grad(s)[:, 0] - g.grad(sp)[:, 0])
        holder = g.holder_seminorm * np.abs(s[:, 0] - sp[:, 0]) ** g.alpha
        assert np.all(dg <= holder + 1e-12)
        # the sign flip across the cusp makes the plain c*p constant too small
        loose = g.c * g.p * np.abs(s[:, 0] - sp[:, 0]) ** g.alpha
        assert not np.all(dg <= loose + 1e-12)

    def test_flat_graph_matches_half_space(self):
        flat = geo.GraphDomain(geo.FlatGraph(), alpha=1.0)
        rng = np.random.default_rng(10)
        X = rng.uniform(-1, 1, size=(500, 2))
        assert np.allclose(np.atleast_1d(flat.dist(X)),
                           np.atleast_1d(HS2.dist(X)), atol=1e-12)


class TestIntersectionAndSegments:
    def test_intersection_distance_is_min(self):
        loc = geo.Intersection(HS2, geo.Ball((0.0, 0.0), 0.5))
        x = np.array([[0.0, 0.1], [0.0, 0.45], [0.0, 0.6]])
        d = np.atleast_1d(loc.dist(x))
        assert d[0] == pytest.approx(0.1)
        assert d[1] == pytest.approx(0.05)
        assert d[2] == 0.0

    def test_ball_segment_exit_exact(self):
        out = BALL2.segment_exit_point(np.array([[0.0, 0.0]]), np.array([[2.0, 0.0]]))
        assert np.allclose(out, [[1.0, 0.0]])

    def test_half_space_segment_exit(self):
        out = HS2.segment_exit_point(np.array([[0.3, 0.5]]), np.array([[0.7, -0.5]]))
        assert out[0, 1] == pytest.approx(0.0, abs=1e-12)
        assert out[0, 0] == pytest.approx(0.5)

    def test_generic_bisection_lands_on_boundary(self):
        out = CUSP.segment_exit_point(np.array([[0.0, 0.5]]), np.array([[1.5, 0.5]]))
        s = out[0, 0]
        assert out[0, 1] == pytest.approx(0.5 * abs(s) ** 1.5, abs=1e-9)


class TestConfig:
    def test_round_trip_catalog(self):
        dom = geo.domain_from_config({"shape": "interval", "a": 0.0, "b": 2.0})
        assert isinstance(dom, geo.Interval) and dom.b == 2.0
        dom = geo.domain_from_config({"shape": "ball", "center": [0.0, 0.0], "radius": 1.5})
        assert isinstance(dom, geo.Ball)
        dom = geo.domain_from_config({"shape": "graph", "graph": "power_cusp",
                                      "c": 0.5, "p": 1.5})
        assert isinstance(dom, geo.GraphDomain)
        assert dom.alpha == pytest.approx(0.5)

    def test_unknown_shape_lists_catalog(self):
        with pytest.raises(ValueError, match="interval"):
            geo.domain_from_config({"shape": "mesh"})
