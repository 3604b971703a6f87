import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import erfc

from subdiff import bernstein as bf

ST1 = bf.stable(1.0)
CGS1 = bf.conjugate_geometric_stable(1.0)
CGAMMA = bf.conjugate_gamma()
EXPL = bf.exponential_levy()
DRIFT = bf.drift_only()
CATALOG = [ST1, bf.stable(0.5), bf.stable(1.5), CGS1, CGAMMA, EXPL]


class TestEvalPhi:
    def test_stable_closed_form(self):
        assert bf.eval_phi(ST1, 4.0) == pytest.approx(2.0, abs=1e-14)

    def test_drift_only_has_no_jump_part(self):
        assert bf.eval_phi(DRIFT, 7.0) == 0.0

    def test_conjugate_gamma_vanishes_at_zero(self):
        # lam/log(1+lam) - 1 -> 0 as lam -> 0+
        for lam in (1e-6, 1e-9, 1e-12):
            v = bf.eval_phi(CGAMMA, lam)
            assert 0.0 < v < lam

    def test_nonpositive_argument_rejected(self):
        with pytest.raises(ValueError):
            bf.eval_phi(ST1, -1.0)
        with pytest.raises(ValueError):
            bf.eval_phi(ST1, 0.0)

    def test_custom_quadrature_matches_closed_form(self):
        # mu(s) = e^{-2s}: phi(lam) = lam / (2 (2 + lam))
        cust = bf.custom(lambda s: math.exp(-2.0 * s), label="exp2")
        for lam in (0.3, 1.0, 5.0, 40.0):
            assert bf.eval_phi(cust, lam) == pytest.approx(lam / (2 * (2 + lam)), rel=1e-8)

    def test_increasing_and_concave(self):
        lams = np.logspace(-2, 3, 30)
        for exp in CATALOG:
            vals = np.array([bf.eval_phi(exp, u) for u in lams])
            assert np.all(np.diff(vals) > 0)
            second = np.diff(np.diff(vals) / np.diff(lams))
            assert np.all(second <= 1e-12)


class TestBernsteinSigns:
    @pytest.mark.parametrize("exp", CATALOG, ids=str)
    def test_alternating_derivative_signs(self, exp):
        # (-1)^{n-1} phi^(n) >= 0 for n = 1, 2, 3 by central differences
        for lam in (0.1, 1.0, 10.0, 100.0):
            h = lam * 1e-3
            f = lambda u: bf.eval_phi(exp, u)
            d1 = (f(lam + h) - f(lam - h)) / (2 * h)
            d2 = (f(lam + h) - 2 * f(lam) + f(lam - h)) / h**2
            d3 = (f(lam + 2 * h) - 2 * f(lam + h) + 2 * f(lam - h) - f(lam - 2 * h)) / (2 * h**3)
            scale = abs(f(lam)) / lam + 1e-30
            assert d1 >= -1e-8 * scale
            assert d2 <= 1e-8 * scale / lam
            assert d3 >= -1e-6 * scale / lam**2


class TestH:
    def test_stable_closed_form(self):
        # symbolic: H(lam) = (1 - beta/2) lam^{beta/2}
        assert bf.eval_H(ST1, 4.0) == pytest.approx(1.0, abs=1e-14)
        assert bf.eval_H(bf.stable(0.5), 16.0) == pytest.approx(0.75 * 2.0, rel=1e-14)

    def test_drift_only_is_zero(self):
        for lam in (0.1, 3.0, 1e4):
            assert bf.eval_H(DRIFT, lam) == 0.0

    def test_conjugate_geometric_stable_asymptote(self):
        # H(lam) ~ lam / (log lam)^2 up to constants for large lam
        lam = 1e4
        ref = lam / math.log(lam) ** 2
        assert ref / 4 <= bf.eval_H(CGS1, lam) <= 4 * ref

    def test_matches_phi_minus_lam_phi_prime(self):
        for exp in CATALOG:
            for lam in (0.2, 1.0, 7.0, 300.0):
                direct = bf.eval_phi(exp, lam) - lam * bf.eval_phi_prime(exp, lam)
                assert bf.eval_H(exp, lam) == pytest.approx(direct, rel=1e-9, abs=1e-12)

    def test_nonnegative_and_nondecreasing(self):
        lams = np.logspace(-3, 5, 60)
        for exp in CATALOG:
            vals = np.asarray(bf.eval_H(exp, lams))
            assert np.all(vals >= 0)
            assert np.all(np.diff(vals) >= -1e-10 * vals[1:])

    def test_doubling_inequality(self):
        # H(lam s) <= lam^2 H(s) for lam >= 1
        s_grid = np.logspace(-2, 2, 12)
        for exp in CATALOG:
            for lam in (1.0, 1.7, 4.0, 32.0):
                lhs = np.asarray(bf.eval_H(exp, lam * s_grid))
                rhs = lam**2 * np.asarray(bf.eval_H(exp, s_grid))
                assert np.all(lhs <= rhs * (1 + 1e-12))


class TestInvPhi:
    def test_trivial_values(self):
        assert bf.inv_phi(ST1, 2.0) == pytest.approx(1.0, rel=1e-12)
        assert bf.inv_phi(DRIFT, 5.0) == 5.0

    def test_hand_bisection_value(self):
        # lam + sqrt(lam) = 6 at lam = 4
        assert bf.inv_phi(ST1, 6.0) == pytest.approx(4.0, rel=1e-12)

    @pytest.mark.parametrize("exp", CATALOG, ids=str)
    def test_round_trip(self, exp):
        for lam in np.logspace(-4, 4, 17):
            y = lam + bf.eval_phi(exp, lam)
            assert bf.inv_phi(exp, y) == pytest.approx(lam, rel=1e-8)


class TestPsiFamily:
    def test_stable_closed_form(self):
        fam = bf.psi_family(ST1, 0.5)
        assert fam.psi == pytest.approx(1.0, rel=1e-12)      # psi(r) = 2r
        assert fam.psi0 == pytest.approx(0.25, rel=1e-12)
        # int_0^r psi0(s)/s ds = r/2 for beta = 1
        assert fam.big_psi == pytest.approx(0.25 + 0.25 + 0.5 ** (2 - fam.eps), rel=1e-8)

    def test_psi0_vanishes_at_zero(self):
        small = bf.psi_family(ST1, 1e-4).psi0
        big = bf.psi_family(ST1, 1e-2).psi0
        assert small < big / 10

    def test_drift_only_degenerate(self):
        with pytest.raises(bf.DegenerateExponentError):
            bf.psi_family(DRIFT, 0.5)

    def test_eps_window_enforced(self):
        with pytest.raises(ValueError):
            bf.psi_family(ST1, 0.5, eps=2.5)

    def test_big_psi_decreases_to_zero(self):
        vals = [bf.psi_family(CGS1, r).big_psi for r in (0.4, 0.1, 0.02)]
        assert vals[0] > vals[1] > vals[2] > 0


class TestPotentialDensity:
    def test_drift_only_constant_one(self):
        for t in (0.0, 0.3, 10.0):
            assert bf.potential_density(DRIFT, t) == 1.0

    def test_u_zero_is_one(self):
        for exp in CATALOG:
            assert bf.potential_density(exp, 0.0) == 1.0

    def test_stable_half_exact(self):
        # 1/(lam + sqrt(lam)) inverts to e^t erfc(sqrt(t))
        for t in (0.05, 0.3, 1.0, 4.0):
            exact = math.exp(t) * erfc(math.sqrt(t))
            assert bf.potential_density(ST1, t) == pytest.approx(exact, rel=1e-6)

    def test_exponential_levy_exact(self):
        # (1+lam)/(lam(lam+2)) inverts to 1/2 + e^{-2t}/2
        for t in (0.1, 1.0, 3.0):
            exact = 0.5 + 0.5 * math.exp(-2 * t)
            assert bf.potential_density(EXPL, t) == pytest.approx(exact, rel=1e-6)

    def test_custom_euler_cross_check(self):
        cust = bf.custom(lambda s: math.exp(-2.0 * s), label="exp2")
        # full exponent lam + lam/(2(2+lam)): u(t) = 0.8 + 0.2 e^{-2.5 t}
        for t in (0.2, 1.0):
            exact = 0.8 + 0.2 * math.exp(-2.5 * t)
            assert bf.potential_density(cust, t) == pytest.approx(exact, rel=1e-4)

    @pytest.mark.parametrize("exp", CATALOG, ids=str)
    def test_monotone_in_unit_interval(self, exp):
        ts = np.linspace(0.05, 3.0, 12)
        vals = [bf.potential_density(exp, t) for t in ts]
        assert all(0 < v <= 1 for v in vals)
        assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))


class TestLevyDensity:
    def test_exponential_levy_closed(self):
        for t in (0.2, 1.0, 5.0):
            assert bf.levy_density(EXPL, t) == pytest.approx(math.exp(-t), rel=1e-12)

    def test_stable_closed(self):
        a = 0.5
        for t in (0.1, 2.0):
            assert bf.levy_density(ST1, t) == pytest.approx(
                a / math.gamma(1 - a) * t ** (-1 - a), rel=1e-12)

    def test_conjugate_inversion_consistent_with_tail_difference(self):
        # mu(t) should match the numerically exact tail differences
        from subdiff.sampler import _levy_tail
        tail = _levy_tail(CGAMMA)
        for t in (0.3, 1.0):
            h = 1e-4 * t
            fd = (tail.tail(t - h) - tail.tail(t + h)) / (2 * h)
            assert bf.levy_density(CGAMMA, t) == pytest.approx(fd, rel=1e-4)


class TestScalingWitness:
    def test_exact_power_half(self):
        w = bf.estimate_scaling(lambda u: math.sqrt(u), a=0.0,
                                grid=np.logspace(-2, 2, 25))
        assert w.gamma == pytest.approx(0.5, abs=1e-9)
        assert w.delta == pytest.approx(0.5, abs=1e-9)
        assert w.c_L == pytest.approx(1.0, abs=1e-9)
        assert w.C_U == pytest.approx(1.0, abs=1e-9)

    def test_exact_power_two(self):
        w = bf.estimate_scaling(lambda u: u * u, a=0.0, grid=np.logspace(-1, 3, 30))
        assert w.gamma == pytest.approx(2.0, abs=1e-9)
        assert w.delta == pytest.approx(2.0, abs=1e-9)

    def test_conjugate_geometric_stable_a1(self):
        w = bf.estimate_scaling(lambda u: bf.eval_H(CGS1, u), a=2.0,
                                grid=np.logspace(1, 5, 40))
        assert w.delta <= 1.05
        assert w.gamma > 0.5
        assert w.a1_holds

    def test_sandwich_holds_on_grid(self):
        grid = np.logspace(0.5, 4, 25)
        w = bf.estimate_scaling(lambda u: bf.eval_H(CGAMMA, u), a=2.0, grid=grid)
        vals = np.array([bf.eval_H(CGAMMA, u) for u in grid])
        assert w.check(vals)

    def test_needs_twenty_points(self):
        with pytest.raises(ValueError):
            bf.estimate_scaling(lambda u: u, a=0.0, grid=np.logspace(0, 1, 10))

    def test_rejects_nonpositive_values(self):
        with pytest.raises(ValueError):
            bf.estimate_scaling(lambda u: u - 5.0, a=0.0, grid=np.logspace(0, 1, 21))


class TestScalingIntegralLemmas:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
    def test_psi_integral_ratio_window(self, beta):
        # psi(r) int_r^1 ds/(s psi(s)) stays in [0.05, 20]; closed form
        # (1 - r^beta)/beta for the stable family
        stb = bf.stable(beta)
        for r in np.geomspace(1e-3, 0.9, 10):
            iq = integrate.quad(lambda s: bf.eval_H(stb, s**-2) / s, r, 1.0, limit=200)[0]
            ratio = iq / bf.eval_H(stb, r**-2)
            assert 0.05 <= ratio <= 20.0
            assert ratio == pytest.approx((1 - r**beta) / beta, rel=1e-6)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
    def test_upper_integral_bound_with_fitted_constant(self, beta):
        # int_s^1 du/psi(u) <= c (psi0(s)/s + s^{1-eps}) with one finite c
        stb = bf.stable(beta)
        eps = 1.7
        cs = []
        for s in np.geomspace(1e-3, 1.0, 12):
            lhs = integrate.quad(lambda u: bf.eval_H(stb, u**-2), s, 1.0, limit=200)[0]
            fam = bf.psi_family(stb, s, eps=eps)
            cs.append(lhs / (fam.psi0 / s + s ** (1 - eps)))
        assert max(cs) < 10.0
