"""Independent closed-form and quadrature references.

Everything here assumes identity diffusion coefficients with generator
(1/2) Laplacian, i.e. Brownian increments of variance t per coordinate.
The interval kernel switches between an image series (small t) and the
sine eigenseries (large t) at t = 0.1, evaluating both at the seam and
demanding 1e-10 agreement.  All series carry tail bounds below 1e-10 at
the evaluation arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import bernstein as bf
from .geometry import Ball, Domain, HalfSpace, Interval

__all__ = [
    "killed_bm_kernel",
    "killed_interval_defect",
    "interval_survival",
    "potential_occupation",
    "resurrection_kernel",
    "stable_subordinator_density",
    "half_ball_exit_through_sphere",
    "interval_green",
    "SeriesKernel",
]

SWITCH_T = 0.1
N_IMAGES = 8
N_EIGEN = 40


@dataclass(frozen=True)
class SeriesKernel:
    """Evaluation record: which series, truncation order, tail bound."""

    domain: str
    order: int
    tail_bound: float


def _gauss(t, u):
    return np.exp(-u * u / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def _unit_interval_kernel(t, x, y):
    """p_D on (0,1) for (1/2)Laplacian; x, y scalars in (0,1)."""
    if t <= SWITCH_T:
        return _interval_images(t, x, y)
    return _interval_eigen(t, x, y)


def _interval_images(t, x, y):
    n = np.arange(-N_IMAGES, N_IMAGES + 1)
    val = np.sum(_gauss(t, y - x + 2 * n)) - np.sum(_gauss(t, y + x + 2 * n))
    return max(val, 0.0)


def _interval_eigen(t, x, y):
    k = np.arange(1, N_EIGEN + 1)
    val = 2.0 * np.sum(np.exp(-k**2 * math.pi**2 * t / 2.0)
                       * np.sin(k * math.pi * x) * np.sin(k * math.pi * y))
    return max(val, 0.0)


def _check_seam(x, y):
    a = _interval_images(SWITCH_T, x, y)
    b = _interval_eigen(SWITCH_T, x, y)
    if abs(a - b) > 1e-10:
        raise RuntimeError(f"interval kernel series disagree at the switch: {a} vs {b}")


def killed_bm_kernel(dom: Domain, t: float, x, y) -> float:
    """Dirichlet kernel of Brownian motion (generator Laplacian/2) in dom.

    dom must be an Interval or a one-dimensional HalfSpace; the interval is
    rescaled to (0,1) by Brownian scaling.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    xv = float(np.atleast_1d(x)[0])
    yv = float(np.atleast_1d(y)[0])
    if isinstance(dom, Interval):
        L = dom.b - dom.a
        xs, ys = (xv - dom.a) / L, (yv - dom.a) / L
        if not (0 < xs < 1 and 0 < ys < 1):
            raise ValueError("x, y must lie inside the interval")
        ts = t / L**2
        if abs(ts - SWITCH_T) < 1e-12:
            _check_seam(xs, ys)
        return _unit_interval_kernel(ts, xs, ys) / L
    if isinstance(dom, HalfSpace):
        if dom.dim != 1:
            raise ValueError("half-space kernel oracle is one-dimensional")
        sgn = dom.normal[0]
        hx, hy = sgn * xv - dom.offset, sgn * yv - dom.offset
        if hx <= 0 or hy <= 0:
            raise ValueError("x, y must lie inside the half-space")
        return float(_gauss(t, hy - hx) - _gauss(t, hy + hx))
    raise ValueError("killed kernel oracle supports interval and half_space only")


def killed_kernel_series_info(dom: Domain, t: float) -> SeriesKernel:
    """Truncation certificate for the interval series at clock t."""
    if not isinstance(dom, Interval):
        return SeriesKernel("half_space", 1, 0.0)
    ts = t / (dom.b - dom.a) ** 2
    if ts <= SWITCH_T:
        far = 2 * N_IMAGES - 1
        return SeriesKernel("interval-images", N_IMAGES,
                            float(4 * _gauss(ts, far)))
    tail = 2 * math.exp(-(N_EIGEN + 1) ** 2 * math.pi**2 * ts / 2.0) / (
        1 - math.exp(-math.pi**2 * ts))
    return SeriesKernel("interval-eigen", N_EIGEN, float(tail))


def killed_interval_defect(t: float, y: float, z: float) -> float:
    """p(t,y,z) - p_D(t,y,z) on the unit interval, nonnegative by construction.

    Computed from the image series directly (the free n=0 term cancels), so
    small values are not produced by catastrophic cancellation.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    n_img = max(N_IMAGES, int(3 + 3 * math.sqrt(t)))
    n = np.arange(-n_img, n_img + 1)
    pos = np.sum(_gauss(t, y + z + 2 * n))
    nz = n[n != 0]
    neg = np.sum(_gauss(t, y - z + 2 * nz))
    return max(float(pos - neg), 0.0)


def interval_survival(t: float, x: float, a: float = 0.0, b: float = 1.0) -> float:
    """P_x(tau > t) for Brownian motion (Laplacian/2) on (a, b), eigenseries."""
    L = b - a
    xs, ts = (x - a) / L, t / L**2
    if not 0 < xs < 1:
        return 0.0
    k = np.arange(1, N_EIGEN + 1)
    coef = 2.0 * (1.0 - np.cos(k * math.pi)) / (k * math.pi)
    val = np.sum(coef * np.exp(-k**2 * math.pi**2 * ts / 2.0) * np.sin(k * math.pi * xs))
    return float(min(max(val, 0.0), 1.0))


def interval_green(x: float, y: float, a: float = 0.0, b: float = 1.0) -> float:
    """Green function of (1/2)Laplacian on (a,b): 2(x-a)(b-y)/(b-a) for x<y."""
    if not (a < x < b and a < y < b):
        return 0.0
    lo, hi = min(x, y), max(x, y)
    return 2.0 * (lo - a) * (b - hi) / (b - a)


def potential_occupation(dom: Domain, exp: bf.LaplaceExponent, x, y,
                         rtol: float = 1e-8) -> float:
    """Occupation density of the subordinate killed diffusion:
    int_0^inf p_D(t, x, y) u(t) dt with u the subordinator potential density.

    Identity coefficients; dom in {interval, half_space}.  The quadrature is
    split at the killed-kernel mode |x-y|^2 and at the domain's diffusive
    scale.
    """
    xv = float(np.atleast_1d(x)[0])
    yv = float(np.atleast_1d(y)[0])
    if xv == yv:
        raise ValueError("x and y must differ")

    if exp.kind == "drift_only":
        u_of = lambda t: 1.0
    else:
        u_cache = {}

        def u_of(t):
            if t not in u_cache:
                u_cache[t] = bf.potential_density(exp, t)
            return u_cache[t]

    def f(t):
        return killed_bm_kernel(dom, t, xv, yv) * u_of(t)

    r2 = (xv - yv) ** 2
    pieces = sorted({r2, 1.0})
    val = 0.0
    err = 0.0
    lo = 0.0
    for hi in pieces:
        v, e = integrate.quad(f, lo, hi, limit=300, epsabs=1e-12, epsrel=1e-10)
        val += v
        err += e
        lo = hi
    v, e = integrate.quad(f, lo, np.inf, limit=300, epsabs=1e-12, epsrel=1e-10)
    val += v
    err += e
    if val > 0 and err > max(rtol * val, 1e-10):
        raise bf.QuadratureError(f"potential occupation quadrature error {err:.2e}")
    return float(val)


def resurrection_kernel(dom: Domain, exp: bf.LaplaceExponent, y, z,
                        tail_target: float = 1e-12) -> float:
    """Excess jump intensity q_D(y, z) = int (p - p_D)(t, y, z) mu(t) dt.

    Interval domain, identity coefficients, exponents with closed-form Levy
    density (stable, exponential_levy, custom).  Near t = 0 the defect dies
    faster than any power; the cutoff t_min carries a certified tail bound
    below tail_target relative to the result.
    """
    if not isinstance(dom, Interval):
        raise ValueError("resurrection kernel oracle needs an interval domain")
    if exp.kind not in ("stable", "exponential_levy", "custom"):
        raise ValueError("resurrection kernel needs a closed-form Levy density")
    L = dom.b - dom.a
    ys = (float(np.atleast_1d(y)[0]) - dom.a) / L
    zs = (float(np.atleast_1d(z)[0]) - dom.a) / L
    if ys == zs:
        raise ValueError("y and z must differ")
    if not (0 < ys < 1 and 0 < zs < 1):
        raise ValueError("y, z must lie inside the interval")

    def mu(t):
        return bf.levy_density(exp, t)

    # unit-interval reduction: p_{(a,b)} pair at clock t equals unit pair at
    # t/L^2 scaled by 1/L, and mu integrates with dt = L^2 dts
    def f(ts):
        return killed_interval_defect(ts, ys, zs) * mu(ts * L * L) * L

    m = max(min(ys, 1 - ys), min(zs, 1 - zs))
    t_min = m * m / (2.0 * 41.5)  # exp(-41.5) ~ 1e-18 suppression at the cutoff

    def tail_bound(ts):
        return _gauss(ts, m) * mu(ts * L * L) * L

    pieces = sorted({m * m, (ys - zs) ** 2, 1.0})
    val = 0.0
    lo = t_min
    for hi in pieces:
        if hi > lo:
            val += integrate.quad(f, lo, hi, limit=200)[0]
            lo = hi
    val += integrate.quad(f, lo, np.inf, limit=200)[0]
    tail, _ = integrate.quad(tail_bound, 0.0, t_min, limit=200)
    if val > 0 and tail > tail_target * val:
        raise RuntimeError(f"resurrection tail certificate failed: {tail:.2e} vs {val:.2e}")
    return float(val)


# ---------------------------------------------------------------------------
# one-sided stable density


def _kanter_A(u, alpha):
    return (np.sin(alpha * u) ** (alpha / (1 - alpha)) * np.sin((1 - alpha) * u)
            / np.sin(u) ** (1.0 / (1 - alpha)))


def stable_subordinator_density(beta: float, t: float, s) -> float:
    """Density of the pure-jump beta/2-stable subordinator at time t.

    beta = 1 has the closed form (t/(2 sqrt(pi))) s^{-3/2} exp(-t^2/(4s));
    other beta use the Zolotarev integral representation by quadrature.
    """
    if not (0 < beta < 2):
        raise ValueError("beta must be in (0, 2)")
    if t <= 0:
        raise ValueError("t must be positive")
    s_arr = np.asarray(s, dtype=float)
    alpha = beta / 2.0
    scale = t ** (1.0 / alpha)

    if beta == 1.0:
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(
                s_arr > 0,
                t / (2.0 * math.sqrt(math.pi)) * s_arr**-1.5
                * np.exp(-t**2 / (4.0 * np.where(s_arr > 0, s_arr, 1.0))),
                0.0)
        return out if np.ndim(s) else float(out)

    def unit_density(v):
        if v <= 0:
            return 0.0
        w = v ** (-alpha / (1 - alpha))

        def g(u):
            a_u = _kanter_A(u, alpha)
            return a_u * math.exp(-a_u * w)

        integral = integrate.quad(g, 0.0, math.pi, limit=200)[0]
        return (alpha / (1 - alpha)) * v ** (-1.0 / (1 - alpha)) * integral / math.pi

    flat = np.atleast_1d(s_arr)
    out = np.array([unit_density(sv / scale) / scale for sv in flat]).reshape(s_arr.shape)
    return out if np.ndim(s) else float(out)


# ---------------------------------------------------------------------------
# harmonic measure of the half-ball (Brownian motion)


def half_ball_exit_through_sphere(x, r: float) -> float:
    """P_x(BM exits the half-ball B(0,r) cap {x_d > 0} through the sphere).

    d = 1 reduces to the harmonic function x/r; d = 2 integrates the disk
    Poisson kernel with the reflection image over the upper arc.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = len(x)
    if d == 1:
        if not 0 < x[0] < r:
            raise ValueError("x must lie inside (0, r)")
        return float(x[0] / r)
    if d != 2:
        raise ValueError("half-ball oracle implemented for d in {1, 2}")
    if not (np.linalg.norm(x) < r and x[1] > 0):
        raise ValueError("x must lie inside the upper half-disk")
    xbar = np.array([x[0], -x[1]])
    rx2 = r**2 - float(x @ x)

    def dens(theta):
        w = np.array([r * math.cos(theta), r * math.sin(theta)])
        direct = 1.0 / float((x - w) @ (x - w))
        image = 1.0 / float((xbar - w) @ (xbar - w))
        return rx2 / (2.0 * math.pi * r) * (direct - image) * r

    val, err = integrate.quad(dens, 0.0, math.pi, limit=200)
    if err > 1e-9:
        raise bf.QuadratureError(f"half-ball harmonic measure quad error {err:.2e}")
    return float(val)


def ball_mean_exit_time(dom: Ball, x) -> float:
    """E_x tau for Brownian motion (Laplacian/2) in a ball: (R^2 - |x-c|^2)/d."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float((dom.radius**2 - np.sum((x - np.asarray(dom.center)) ** 2)) / dom.dim)
