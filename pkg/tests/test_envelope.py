import math

import numpy as np
import pytest

from subdiff import bernstein as bf
from subdiff import envelope as env
from subdiff.geometry import Ball, HalfSpace, Interval

ST1 = bf.stable(1.0)
DRIFT = bf.drift_only()
IV = Interval(0.0, 1.0)
HS1 = HalfSpace((1.0,), 0.0)
P1 = env.EnvelopeParams(C=1.0, c1=1.0, c2=1.0)


def h_reference(dom, exp, params, t, x, y):
    """Independently coded scalar evaluator of the Dirichlet envelope."""
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    d = dom.dim
    bx = min(1.0, float(dom.dist(x)) / math.sqrt(t))
    by = min(1.0, float(dom.dist(y)) / math.sqrt(t))
    r = float(np.linalg.norm(x - y))
    tmd = t ** (-d / 2.0)
    if r == 0.0:
        profile = tmd
    else:
        lam = bf.inv_phi(exp, 1.0 / t)
        s = (tmd * math.exp(-params.c1 * r * r / t)
             + t * bf.eval_H(exp, 1.0 / (r * r)) / r**d
             + lam ** (d / 2.0) * math.exp(-params.c2 * r * r * lam))
        profile = min(tmd, s)
    return params.C * bx * by * profile


def g_reference(dom, x, y):
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    d = dom.dim
    r = float(np.linalg.norm(x - y))
    dd = float(dom.dist(x)) * float(dom.dist(y))
    if d >= 3:
        return min(1.0, dd / r**2) * r ** (2 - d)
    if d == 2:
        return math.log1p(dd / r**2)
    return min(math.sqrt(dd), dd / r) if r > 0 else math.sqrt(dd)


class TestHEnvelope:
    def test_zero_on_boundary(self):
        assert env.h_envelope(IV, ST1, P1, 0.1, np.array([0.0]), np.array([0.5])) == 0.0
        assert env.h_envelope(IV, ST1, P1, 0.1, np.array([-1.0]), np.array([0.5])) == 0.0

    def test_on_diagonal_saturates(self):
        # deep interior, delta >= sqrt(t): bracket = t^{-d/2}
        v = env.h_envelope(IV, ST1, P1, 0.04, np.array([0.5]), np.array([0.5]))
        assert v == pytest.approx(0.04 ** (-0.5), rel=1e-14)

    def test_dual_implementation_agreement(self):
        rng = np.random.default_rng(11)
        params = env.EnvelopeParams(C=2.3, c1=0.7, c2=1.4)
        for dom in (IV, HS1):
            for _ in range(2500):
                t = float(rng.uniform(0.01, 2.0))
                x = rng.uniform(-0.2, 1.2, size=1)
                y = rng.uniform(-0.2, 1.2, size=1)
                a = env.h_envelope(dom, ST1, params, t, x, y)
                b = h_reference(dom, ST1, params, t, x, y)
                assert a == pytest.approx(b, rel=1e-12, abs=1e-300)

    def test_exact_symmetry(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            t = float(rng.uniform(0.01, 1.0))
            x = rng.uniform(0, 1, size=1)
            y = rng.uniform(0, 1, size=1)
            assert (env.h_envelope(IV, ST1, P1, t, x, y)
                    == env.h_envelope(IV, ST1, P1, t, y, x))

    def test_monotone_in_separation_on_rays(self):
        # fixed boundary factors (deep half-space points), increasing r
        heights = 50.0
        rs = np.linspace(0.1, 6.0, 40)
        for t in (0.05, 0.5):
            vals = [env.h_envelope(HS1, ST1, P1, t, np.array([heights]),
                                   np.array([heights + r])) for r in rs]
            # boundary factors constant = 1 here; profile must not increase
            assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_drift_only_reduces_to_gaussian_band(self):
        t, x, y = 0.1, np.array([5.0]), np.array([5.4])
        v = env.h_envelope(HS1, DRIFT, P1, t, x, y)
        tmd = t**-0.5
        gauss = tmd * math.exp(-0.16 / t)
        sub = (1 / t) ** 0.5 * math.exp(-0.16 / t)
        assert v == pytest.approx(min(tmd, gauss + 0.0 + sub), rel=1e-12)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            env.h_envelope(IV, ST1, P1, 0.0, np.array([0.5]), np.array([0.6]))


class TestQInterior:
    def test_hand_composed_value(self):
        # stable(1), d=1, t=1, r=1: H(1) + phiinv(1)^{1/2} e^{-phiinv(1)}
        lam = bf.inv_phi(ST1, 1.0)       # lam + sqrt(lam) = 1
        expected = 0.5 + math.sqrt(lam) * math.exp(-lam)
        got = env.q_interior(ST1, 1.0, np.array([0.0]), np.array([1.0]))
        assert got == pytest.approx(expected, rel=1e-12)
        assert lam == pytest.approx(((math.sqrt(5) - 1) / 2) ** 2, rel=1e-10)

    def test_linear_in_time_for_small_t(self):
        r = 1.0
        x, y = np.array([0.0]), np.array([r])
        base = env.q_interior(ST1, 1e-6, x, y)
        half = env.q_interior(ST1, 5e-7, x, y)
        assert half == pytest.approx(base / 2, rel=1e-3)

    def test_drift_only_gaussian_term_alone(self):
        t = 0.3
        x, y = np.array([0.0]), np.array([0.7])
        v = env.q_interior(DRIFT, t, x, y)
        assert v == pytest.approx((1 / t) ** 0.5 * math.exp(-0.49 / t), rel=1e-12)

    def test_diagonal_rejected(self):
        with pytest.raises(ValueError):
            env.q_interior(ST1, 1.0, np.array([0.3]), np.array([0.3]))


class TestGEnvelope:
    def test_d3_saturated_min(self):
        ball = Ball((0.0, 0.0, 0.0), 2.0)
        x = np.array([0.0, 0.0, 0.0])
        y = np.array([0.5, 0.0, 0.0])
        # delta product 2 * 1.5 >= r^2: value = r^{-1}
        assert env.g_envelope(ball, x, y) == pytest.approx(2.0)

    def test_d1_interval_hand_value(self):
        assert env.g_envelope(IV, np.array([0.25]), np.array([0.75])) == pytest.approx(0.125)

    def test_zero_on_boundary(self):
        ball = Ball((0.0, 0.0, 0.0), 1.0)
        x = np.array([1.0, 0.0, 0.0])
        y = np.array([0.2, 0.0, 0.0])
        assert env.g_envelope(ball, x, y) == 0.0
        assert env.g_envelope(IV, np.array([0.0]), np.array([0.3])) == 0.0
        d2 = Ball((0.0, 0.0), 1.0)
        assert env.g_envelope(d2, np.array([1.0, 0.0]), np.array([0.0, 0.0])) == 0.0

    def test_dual_implementation_agreement(self):
        rng = np.random.default_rng(13)
        doms = [IV, Ball((0.0, 0.0), 1.0), Ball((0.0, 0.0, 0.0), 1.0)]
        for dom in doms:
            for _ in range(2500):
                x = rng.uniform(-1, 1, size=dom.dim)
                y = rng.uniform(-1, 1, size=dom.dim)
                if np.allclose(x, y):
                    continue
                assert env.g_envelope(dom, x, y) == pytest.approx(
                    g_reference(dom, x, y), rel=1e-12, abs=1e-300)

    def test_d1_diagonal_saturates(self):
        v = env.g_envelope(IV, np.array([0.3]), np.array([0.3]))
        assert v == pytest.approx(0.3)

    def test_diagonal_rejected_for_d2_and_up(self):
        with pytest.raises(ValueError):
            env.g_envelope(Ball((0.0, 0.0), 1.0), np.array([0.1, 0.1]), np.array([0.1, 0.1]))


class TestJEnvelope:
    def test_stable_hand_value(self):
        assert env.j_envelope(ST1, 1.0, 1) == pytest.approx(0.5)

    def test_halving_scales_by_power(self):
        for beta, d in ((1.0, 1), (0.5, 2), (1.5, 3)):
            stb = bf.stable(beta)
            r = 0.4
            ratio = env.j_envelope(stb, r / 2, d) / env.j_envelope(stb, r, d)
            assert ratio == pytest.approx(2.0 ** (d + beta), rel=1e-12)

    def test_drift_only_vanishes(self):
        assert env.j_envelope(DRIFT, 0.5, 2) == 0.0


class TestEnvelopeDomination:
    def test_gauss_plus_sub_below_jump_term_with_fitted_constant(self):
        # for r >= R and t <= T the Gaussian and subordinated-Gaussian terms
        # are controlled by the H-term up to one finite constant
        R, T = 0.5, 1.0
        c = []
        for r in np.linspace(R, 5.0, 15):
            for t in np.geomspace(1e-3, T, 15):
                lam = bf.inv_phi(ST1, 1.0 / t)
                lhs = (t**-0.5 * math.exp(-r * r / (4 * 1.0 * t))
                       + math.sqrt(lam) * math.exp(-1.0 * r * r * lam))
                rhs = t * bf.eval_H(ST1, r**-2) / r
                c.append(lhs / rhs)
        assert max(c) < 50.0  # finite fitted constant; 50 has ample slack

    def test_params_validated(self):
        with pytest.raises(ValueError):
            env.EnvelopeParams(C=0.0)
        with pytest.raises(ValueError):
            env.EnvelopeParams(c1=-1.0)
        with pytest.raises(ValueError):
            env.EnvelopeParams(c2=math.inf)
