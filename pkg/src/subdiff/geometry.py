"""Domain geometry: membership, boundary distance, corkscrew points.

The catalog is curated so that every shape has an exact (or certified
numeric) boundary distance, which the envelope formulas and the
boundary-crossing corrections rely on:

    interval(a, b)                d = 1
    ball(center, radius)
    half_space(normal, offset)    D = {x : n.x > offset}
    complement_of_ball(center, radius)
    graph_domain(Gamma, ...)      D = {x : x_d > Gamma(x_tilde)}

Graph functions come from a small named catalog (power_cusp includes a
genuinely non-C^{1,1} boundary for alpha < 1).  An intersection combinator
covers the localized sets D (cap) B(z0, r) used by exit-distribution
experiments; its boundary distance min(d_A, d_B) is exact.

Points are numpy arrays; every query accepts a single point of shape (d,)
or a batch of shape (n, d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

__all__ = [
    "Domain",
    "Interval",
    "Ball",
    "HalfSpace",
    "ComplementOfBall",
    "GraphDomain",
    "Intersection",
    "GraphFunction",
    "PowerCusp",
    "FlatGraph",
    "domain_from_config",
    "dist_to_boundary",
    "corkscrew_point",
    "box_membership",
    "CorkscrewError",
]

MEMBERSHIP_TOL = 1e-12


class CorkscrewError(RuntimeError):
    """Corkscrew certification failed; carries the achieved delta/r ratio."""

    def __init__(self, msg, achieved):
        super().__init__(msg)
        self.achieved = achieved


def _atleast_2d(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


class Domain:
    """Base open-set descriptor; subclasses fill in the geometry."""

    dim: int
    # corkscrew constant reported for the shape, capped below 1/4 to match
    # the reporting convention for the certified constant
    kappa: float = 0.2499

    def contains(self, x):
        raise NotImplementedError

    def dist(self, x):
        """Distance to the boundary for x in D; 0 for x outside D."""
        raise NotImplementedError

    def project_to_boundary(self, x):
        """A nearest boundary point (used for bridge-exit placement)."""
        raise NotImplementedError

    def boundary_point(self, u):
        """A boundary point from an abstract parameter in [0,1)^k (tests)."""
        raise NotImplementedError

    def segment_exit_point(self, x_in, x_out, iters: int = 60):
        """Boundary crossing of the segment [x_in, x_out], x_in in D, x_out not.

        Generic bisection on membership; shapes with closed-form crossings
        override.  Batched: both arguments (n, d).
        """
        a = np.array(x_in, dtype=float, copy=True)
        b = np.array(x_out, dtype=float, copy=True)
        for _ in range(iters):
            mid = 0.5 * (a + b)
            inside = self.contains(mid)
            a[inside] = mid[inside]
            b[~inside] = mid[~inside]
        return 0.5 * (a + b)

    def diameter(self) -> float:
        raise NotImplementedError

    def corkscrew(self, z, r):
        """Interior point on partial B(z, r) with delta comparable to r."""
        raise NotImplementedError

    def _certify_corkscrew(self, z_r, r):
        d = float(self.dist(z_r))
        if d < self.kappa * r - 1e-12 or d > r + 1e-9:
            raise CorkscrewError(
                f"corkscrew certification failed: delta/r = {d / r:.4f} "
                f"outside [{self.kappa:.4f}, 1]", d / r)
        return z_r


@dataclass(frozen=True)
class Interval(Domain):
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("interval needs a < b")

    dim = 1

    def contains(self, x):
        x2, single = _atleast_2d(x)
        out = (x2[:, 0] > self.a + MEMBERSHIP_TOL) & (x2[:, 0] < self.b - MEMBERSHIP_TOL)
        return out[0] if single else out

    def dist(self, x):
        x2, single = _atleast_2d(x)
        d = np.minimum(x2[:, 0] - self.a, self.b - x2[:, 0])
        d = np.maximum(d, 0.0)
        return d[0] if single else d

    def project_to_boundary(self, x):
        x2, single = _atleast_2d(x)
        left = (x2[:, 0] - self.a) <= (self.b - x2[:, 0])
        out = np.where(left, self.a, self.b)[:, None]
        return out[0] if single else out

    def boundary_point(self, u):
        return np.array([self.a if u < 0.5 else self.b])

    def diameter(self):
        return self.b - self.a

    def corkscrew(self, z, r):
        z = np.asarray(z, dtype=float)
        inward = 1.0 if abs(z[0] - self.a) < abs(z[0] - self.b) else -1.0
        return self._certify_corkscrew(z + np.array([inward * r]), r)


@dataclass(frozen=True)
class Ball(Domain):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if self.radius <= 0:
            raise ValueError("ball needs positive radius")

    @property
    def dim(self):
        return len(self.center)

    def _c(self):
        return np.asarray(self.center)

    def contains(self, x):
        x2, single = _atleast_2d(x)
        out = np.linalg.norm(x2 - self._c(), axis=1) < self.radius - MEMBERSHIP_TOL
        return out[0] if single else out

    def dist(self, x):
        x2, single = _atleast_2d(x)
        d = np.maximum(self.radius - np.linalg.norm(x2 - self._c(), axis=1), 0.0)
        return d[0] if single else d

    def project_to_boundary(self, x):
        x2, single = _atleast_2d(x)
        v = x2 - self._c()
        nrm = np.linalg.norm(v, axis=1, keepdims=True)
        nrm = np.where(nrm < 1e-300, 1.0, nrm)
        out = self._c() + self.radius * v / nrm
        return out[0] if single else out

    def boundary_point(self, u):
        ang = 2 * math.pi * float(np.atleast_1d(u)[0])
        if self.dim == 1:
            return self._c() + np.array([self.radius if ang < math.pi else -self.radius])
        v = np.zeros(self.dim)
        v[0], v[1] = math.cos(ang), math.sin(ang)
        return self._c() + self.radius * v

    def diameter(self):
        return 2 * self.radius

    def segment_exit_point(self, x_in, x_out, iters=60):
        # line-sphere intersection, exact
        c = self._c()
        p = np.asarray(x_in, dtype=float) - c
        q = np.asarray(x_out, dtype=float) - c
        d = q - p
        aa = np.sum(d * d, axis=1)
        bb = 2 * np.sum(p * d, axis=1)
        cc = np.sum(p * p, axis=1) - self.radius**2
        disc = np.maximum(bb * bb - 4 * aa * cc, 0.0)
        aa = np.where(aa < 1e-300, 1.0, aa)
        s = (-bb + np.sqrt(disc)) / (2 * aa)
        s = np.clip(s, 0.0, 1.0)
        return c + p + s[:, None] * d

    def corkscrew(self, z, r):
        z = np.asarray(z, dtype=float)
        n_out = (z - self._c()) / self.radius
        return self._certify_corkscrew(z - r * n_out, r)


@dataclass(frozen=True)
class HalfSpace(Domain):
    """D = {x : normal . x > offset}; normal is normalized on construction."""

    normal: tuple
    offset: float = 0.0

    def __post_init__(self):
        n = np.atleast_1d(np.asarray(self.normal, dtype=float))
        nrm = np.linalg.norm(n)
        if nrm == 0:
            raise ValueError("half-space normal must be nonzero")
        object.__setattr__(self, "normal", tuple(n / nrm))
        object.__setattr__(self, "offset", float(self.offset) / nrm)

    kappa = 0.2499

    @property
    def dim(self):
        return len(self.normal)

    def _n(self):
        return np.asarray(self.normal)

    def _h(self, x2):
        return x2 @ self._n() - self.offset

    def contains(self, x):
        x2, single = _atleast_2d(x)
        out = self._h(x2) > MEMBERSHIP_TOL
        return out[0] if single else out

    def dist(self, x):
        x2, single = _atleast_2d(x)
        d = np.maximum(self._h(x2), 0.0)
        return d[0] if single else d

    def project_to_boundary(self, x):
        x2, single = _atleast_2d(x)
        out = x2 - self._h(x2)[:, None] * self._n()
        return out[0] if single else out

    def boundary_point(self, u):
        base = self.offset * self._n()
        if self.dim == 1:
            return base
        tang = np.zeros(self.dim)
        tang[1] = float(np.atleast_1d(u)[0])
        return base + tang - (tang @ self._n()) * self._n()

    def diameter(self):
        return math.inf

    def segment_exit_point(self, x_in, x_out, iters=60):
        h1 = self._h(np.asarray(x_in, dtype=float))
        h2 = self._h(np.asarray(x_out, dtype=float))
        w = np.where(np.abs(h1 - h2) < 1e-300, 0.5, h1 / np.where(np.abs(h1 - h2) < 1e-300, 1.0, h1 - h2))
        w = np.clip(w, 0.0, 1.0)
        return np.asarray(x_in) + w[:, None] * (np.asarray(x_out) - np.asarray(x_in))

    def corkscrew(self, z, r):
        z = np.asarray(z, dtype=float)
        return self._certify_corkscrew(z + r * self._n(), r)


@dataclass(frozen=True)
class ComplementOfBall(Domain):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if self.radius <= 0:
            raise ValueError("needs positive radius")

    @property
    def dim(self):
        return len(self.center)

    def _c(self):
        return np.asarray(self.center)

    def contains(self, x):
        x2, single = _atleast_2d(x)
        out = np.linalg.norm(x2 - self._c(), axis=1) > self.radius + MEMBERSHIP_TOL
        return out[0] if single else out

    def dist(self, x):
        x2, single = _atleast_2d(x)
        d = np.maximum(np.linalg.norm(x2 - self._c(), axis=1) - self.radius, 0.0)
        return d[0] if single else d

    def project_to_boundary(self, x):
        x2, single = _atleast_2d(x)
        v = x2 - self._c()
        nrm = np.linalg.norm(v, axis=1, keepdims=True)
        nrm = np.where(nrm < 1e-300, 1.0, nrm)
        out = self._c() + self.radius * v / nrm
        return out[0] if single else out

    def boundary_point(self, u):
        return Ball(self.center, self.radius).boundary_point(u)

    def diameter(self):
        return math.inf

    def corkscrew(self, z, r):
        z = np.asarray(z, dtype=float)
        n_out = (z - self._c()) / self.radius
        return self._certify_corkscrew(z + r * n_out, r)


# ---------------------------------------------------------------------------
# graph domains


class GraphFunction:
    """C^{1,alpha} graph Gamma: R^{d-1} -> R from the named catalog."""

    name = "graph"

    def value(self, s):
        raise NotImplementedError

    def grad(self, s):
        raise NotImplementedError

    def value_radial(self, rho):
        """Gamma as a function of |s| (catalog functions are radial)."""
        raise NotImplementedError

    def grad_radial(self, rho):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerCusp(GraphFunction):
    """Gamma(s) = c |s|^p with p = 1 + alpha in (1, 2]; gradient is only
    alpha-Holder at the origin, so alpha < 1 gives a non-C^{1,1} boundary."""

    c: float
    p: float

    def __post_init__(self):
        if not (1.0 < self.p <= 2.0) or self.c <= 0:
            raise ValueError("power cusp needs c > 0 and p in (1, 2]")

    name = "power_cusp"

    @property
    def alpha(self):
        return self.p - 1.0

    @property
    def holder_seminorm(self):
        # |grad(s) - grad(s')| <= c p 2^{1-alpha} |s-s'|^alpha; the factor
        # 2^{1-alpha} comes from the sign flip across the cusp
        return self.c * self.p * 2.0 ** (1.0 - self.alpha)

    def value(self, s):
        s2 = np.atleast_2d(np.asarray(s, dtype=float))
        return self.c * np.linalg.norm(s2, axis=1) ** self.p

    def grad(self, s):
        s2 = np.atleast_2d(np.asarray(s, dtype=float))
        rho = np.linalg.norm(s2, axis=1, keepdims=True)
        safe = np.where(rho < 1e-300, 1.0, rho)
        return self.c * self.p * safe ** (self.p - 2.0) * s2 * (rho > 0)

    def value_radial(self, rho):
        return self.c * np.abs(rho) ** self.p

    def grad_radial(self, rho):
        return self.c * self.p * np.sign(rho) * np.abs(rho) ** (self.p - 1.0)


@dataclass(frozen=True)
class FlatGraph(GraphFunction):
    """Gamma = 0: the graph domain degenerates to the upper half-space."""

    name = "flat"

    def value(self, s):
        s2 = np.atleast_2d(np.asarray(s, dtype=float))
        return np.zeros(len(s2))

    def grad(self, s):
        s2 = np.atleast_2d(np.asarray(s, dtype=float))
        return np.zeros_like(s2)

    def value_radial(self, rho):
        return np.zeros_like(np.asarray(rho, dtype=float))

    def grad_radial(self, rho):
        return np.zeros_like(np.asarray(rho, dtype=float))


@dataclass(frozen=True)
class GraphDomain(Domain):
    """Points above a radial C^{1,alpha} graph: D = {x : x_d > Gamma(x~)}."""

    gamma: GraphFunction
    alpha: float
    lam0: float = 1.0   # Holder seminorm Lambda_0 of grad Gamma
    r0: float = 1.0     # localization radius R_0 <= 1
    d: int = 2

    def __post_init__(self):
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must be in (0, 1]")
        if self.d < 2:
            raise ValueError("graph domains need d >= 2")

    @property
    def dim(self):
        return self.d

    def _split(self, x2):
        return x2[:, :-1], x2[:, -1]

    def contains(self, x):
        x2, single = _atleast_2d(x)
        s, h = self._split(x2)
        out = h - self.gamma.value(s) > MEMBERSHIP_TOL
        return out[0] if single else out

    def dist(self, x):
        x2, single = _atleast_2d(x)
        out = np.array([self._dist_single(row) for row in x2])
        return out[0] if single else out

    def _meridian(self, row):
        """Reduce to the 2d meridian plane (catalog graphs are radial)."""
        s, h = row[:-1], row[-1]
        return float(np.linalg.norm(s)), float(h)

    def _dist_single(self, row):
        rho, h = self._meridian(row)
        v = h - float(self.gamma.value_radial(rho))
        if v <= 0:
            return 0.0
        lo, hi = rho - v, rho + v  # minimizer distance to (rho, h) is <= v
        return math.sqrt(self._min_dist2_meridian(rho, h, lo, hi))

    def _min_dist2_meridian(self, rho, h, lo, hi, coarse=512):
        def f(s):
            return (s - rho) ** 2 + (h - float(self.gamma.value_radial(s))) ** 2

        grid = np.linspace(lo, hi, coarse)
        vals = np.array([f(s) for s in grid])
        k = int(np.argmin(vals))
        a = grid[max(k - 1, 0)]
        b = grid[min(k + 1, coarse - 1)]
        res = optimize.minimize_scalar(f, bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-14})
        return min(float(res.fun), float(vals[k]))

    def project_to_boundary(self, x):
        x2, single = _atleast_2d(x)
        out = np.empty_like(x2)
        for i, row in enumerate(x2):
            out[i] = self._project_single(row)
        return out[0] if single else out

    def _project_single(self, row):
        rho, h = self._meridian(row)
        v = h - float(self.gamma.value_radial(rho))
        if v <= 0:
            v = abs(v) + 1e-6

        def f(s):
            return (s - rho) ** 2 + (h - float(self.gamma.value_radial(s))) ** 2

        lo, hi = rho - abs(v) - 1e-9, rho + abs(v) + 1e-9
        grid = np.linspace(lo, hi, 512)
        vals = np.array([f(s) for s in grid])
        k = int(np.argmin(vals))
        res = optimize.minimize_scalar(
            f, bounds=(grid[max(k - 1, 0)], grid[min(k + 1, 511)]),
            method="bounded", options={"xatol": 1e-14})
        s_star = float(res.x)
        out = np.array(row, dtype=float)
        s_vec = row[:-1]
        nrm = np.linalg.norm(s_vec)
        direction = s_vec / nrm if nrm > 1e-300 else _e1(self.d - 1)
        out[:-1] = s_star * direction
        out[-1] = float(self.gamma.value_radial(s_star))
        return out

    def boundary_point(self, u):
        s = float(np.atleast_1d(u)[0]) * 2.0 - 1.0
        out = np.zeros(self.d)
        out[0] = s
        out[-1] = float(self.gamma.value_radial(s))
        return out

    def diameter(self):
        return math.inf

    def inward_normal(self, z):
        z = np.asarray(z, dtype=float)
        g = self.gamma.grad(z[:-1])[0]
        nu = np.concatenate([-g, [1.0]])
        return nu / np.linalg.norm(nu)

    def corkscrew(self, z, r):
        z = np.asarray(z, dtype=float)
        z_r = z + r * self.inward_normal(z)
        return self._certify_corkscrew(z_r, r)

    @property
    def kappa(self):
        # certified numerically over a (z, r) sample, capped at the reporting
        # convention; cached per descriptor
        key = (self.gamma, self.r0)
        if key not in _KAPPA_CACHE:
            ratios = []
            for us in np.linspace(0.05, 0.95, 7):
                z = self.boundary_point(us)
                for r in (self.r0 * 0.9, self.r0 * 0.3, self.r0 * 0.05):
                    z_r = z + r * self.inward_normal(z)
                    ratios.append(float(self.dist(z_r)) / r)
            _KAPPA_CACHE[key] = min(0.2499, 0.95 * min(ratios))
        return _KAPPA_CACHE[key]


_KAPPA_CACHE: dict = {}


def _e1(k):
    v = np.zeros(k)
    v[0] = 1.0
    return v


@dataclass(frozen=True)
class Intersection(Domain):
    """Intersection of two domains; dist = min of the two is exact."""

    first: Domain
    second: Domain

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise ValueError("dimension mismatch")

    @property
    def dim(self):
        return self.first.dim

    def contains(self, x):
        return self.first.contains(x) & self.second.contains(x)

    def dist(self, x):
        return np.minimum(self.first.dist(x), self.second.dist(x)) * self.contains(x)

    def project_to_boundary(self, x):
        x2, single = _atleast_2d(x)
        pa = np.atleast_2d(self.first.project_to_boundary(x2))
        pb = np.atleast_2d(self.second.project_to_boundary(x2))
        take_a = self.first.dist(x2) <= self.second.dist(x2)
        out = np.where(take_a[:, None], pa, pb)
        return out[0] if single else out

    def segment_exit_point(self, x_in, x_out, iters=60):
        return Domain.segment_exit_point(self, x_in, x_out, iters)

    def boundary_point(self, u):
        return self.first.boundary_point(u)

    def diameter(self):
        return min(self.first.diameter(), self.second.diameter())

    def corkscrew(self, z, r):
        raise NotImplementedError("corkscrew not defined for intersections")


# ---------------------------------------------------------------------------
# spec operations (thin functional wrappers)


def dist_to_boundary(dom: Domain, x):
    """Euclidean distance to the boundary, 0 outside D (envelope semantics)."""
    return dom.dist(x)


def corkscrew_point(dom: Domain, z, r: float):
    """Interior point z_r in D with |z_r - z| = r and kappa*r <= delta <= r."""
    if r <= 0:
        raise ValueError("r must be positive")
    return dom.corkscrew(z, r)


def box_membership(dom: Domain, x, a: float, r: float, y) -> bool:
    """Whether y lies in the boundary box at x: {0 < rho(y) < a} cap B(z_x, r).

    rho is the graph height y_d - Gamma(y~) (for half-spaces the distance to
    the hyperplane) and z_x is the boundary projection of x.  Defined only
    for shapes carrying a graph chart.
    """
    if not isinstance(dom, (HalfSpace, GraphDomain)):
        raise ValueError(f"box membership needs a graph chart; {type(dom).__name__} has none")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z_x = dom.project_to_boundary(x)
    if isinstance(dom, HalfSpace):
        rho = float(np.asarray(y) @ np.asarray(dom.normal) - dom.offset)
    else:
        rho = float(y[-1] - dom.gamma.value(y[:-1])[0])
    return bool(0.0 < rho < a and np.linalg.norm(y - z_x) < r)


# ---------------------------------------------------------------------------
# configuration


def domain_from_config(fields: dict) -> Domain:
    """Build a shape from flat config keys (shape=..., plus parameters)."""
    shape = fields.get("shape")
    if shape == "interval":
        return Interval(float(fields["a"]), float(fields["b"]))
    if shape == "ball":
        return Ball(tuple(np.atleast_1d(fields["center"])), float(fields["radius"]))
    if shape == "half_space":
        return HalfSpace(tuple(np.atleast_1d(fields["normal"])), float(fields.get("offset", 0.0)))
    if shape == "complement_of_ball":
        return ComplementOfBall(tuple(np.atleast_1d(fields["center"])), float(fields["radius"]))
    if shape == "graph":
        gname = fields.get("graph", "power_cusp")
        if gname == "power_cusp":
            g = PowerCusp(float(fields.get("c", 0.5)), float(fields.get("p", 1.5)))
            alpha = g.alpha
        elif gname == "flat":
            g = FlatGraph()
            alpha = 1.0
        else:
            raise ValueError(f"unknown graph function {gname!r}; valid: power_cusp, flat")
        return GraphDomain(g, alpha=float(fields.get("alpha", alpha)),
                           lam0=float(fields.get("lam0", 1.0)),
                           r0=float(fields.get("r0", 1.0)),
                           d=int(fields.get("d", 2)))
    raise ValueError(f"unknown shape {shape!r}; valid: interval, ball, half_space, "
                     "complement_of_ball, graph")
