"""Path sampling: subordinators, killed diffusions, and subordinate processes.

The subordinate process Y advances in operational time steps dt.  Each step
the clock gains dt (unit drift) plus the pure-jump increment J; the
diffusion is advanced in two stages with different killing semantics:

  * drift stage, clock length dt: swept continuously, so besides the
    endpoint membership test a Brownian-bridge crossing probability
    exp(-2 d1 d2 / (sigma^2 dt)) against the nearest boundary is applied;
  * jump stage, clock length J: one Gaussian displacement, killing checked
    at the landing point only (Y = X at clock times sees nothing inside a
    clock jump).

The subordinate killed process Z^D shares the trajectory and additionally
dies when the underlying diffusion crosses the boundary inside a clock
jump, which is again a bridge check on the jump stage.  By construction the
Z lifetime never exceeds the Y exit time path by path.

Pure-jump increments: the stable catalog entry is sampled exactly by
Kanter's representation; the other entries use compound Poisson above a
truncation eps with the neglected mean added back as drift.  The
truncation level is chosen so the neglected variance int_0^eps s^2 mu ds
stays below var_budget * dt.  Tail masses and partial moments come from
machine-precision Talbot inversions of phi/lam, phi/lam^2 and
phi/lam^3 - phi'/lam^2, never from integrating a tabulated density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import bernstein as bf
from .geometry import Domain

__all__ = [
    "DiffusionSpec",
    "PathRealization",
    "one_sided_stable",
    "sample_subordinator",
    "subordinator_totals",
    "sample_killed_diffusion",
    "sample_Y",
    "sample_Z_D",
    "exit_stats",
    "diffusion_exit_stats",
    "survival_stats",
    "coupled_survival",
    "JumpPart",
]

VAR_BUDGET = 1e-6          # neglected small-jump variance per unit dt
EXIT_CONTINUOUS = 0
EXIT_JUMP = 1
EXIT_CENSORED = 2
_MODE_NAMES = {EXIT_CONTINUOUS: "continuous", EXIT_JUMP: "jump", EXIT_CENSORED: "censored-at-horizon"}


# ---------------------------------------------------------------------------
# diffusion coefficient catalog


@dataclass(frozen=True)
class DiffusionSpec:
    """Diffusion coefficient field a(x) = c(x) I from a smooth catalog.

    identity: c = 1.  smooth_anisotropic: c(x) = exp(theta sin(k.x)) with
    theta = log(lam0), k = (1,..,1)/sqrt(d), so c ranges over
    [1/lam0, lam0] and the divergence-form drift (1/2) grad c is closed
    form.  The Dini modulus is linear: ell(r) = d * lam0 * log(lam0) * r.
    """

    kind: str = "identity"
    lam0: float = 1.0

    def __post_init__(self):
        if self.kind not in ("identity", "smooth_anisotropic"):
            raise ValueError("diffusion kind must be identity or smooth_anisotropic")
        if self.lam0 < 1.0:
            raise ValueError("ellipticity constant lam0 must be >= 1")

    @property
    def is_identity(self):
        return self.kind == "identity" or self.lam0 == 1.0

    def diffusivity(self, x):
        if self.is_identity:
            return np.ones(len(x))
        d = x.shape[1]
        theta = math.log(self.lam0)
        return np.exp(theta * np.sin(x.sum(axis=1) / math.sqrt(d)))

    def drift(self, x, c=None):
        if self.is_identity:
            return 0.0
        d = x.shape[1]
        theta = math.log(self.lam0)
        if c is None:
            c = self.diffusivity(x)
        # grad c = c * theta * cos(k.x) * k; drift = grad c / 2
        scal = 0.5 * c * theta * np.cos(x.sum(axis=1) / math.sqrt(d)) / math.sqrt(d)
        return scal[:, None] * np.ones(d)

    def ell(self, r):
        d_guess = 1
        return d_guess * self.lam0 * math.log(max(self.lam0, 1.0)) * np.asarray(r)


# ---------------------------------------------------------------------------
# subordinator machinery


def one_sided_stable(alpha: float, n: int, rng) -> np.ndarray:
    """n samples of the standard positive alpha-stable law, E e^{-lam S} = e^{-lam^alpha}.

    Kanter's representation: S = (A(U)/E)^{(1-alpha)/alpha} with U uniform
    on (0, pi) and E unit exponential.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    u = rng.uniform(0.0, math.pi, n)
    e = rng.standard_exponential(n)
    a = (np.sin(alpha * u) ** (alpha / (1 - alpha)) * np.sin((1 - alpha) * u)
         / np.sin(u) ** (1.0 / (1 - alpha)))
    return (a / e) ** ((1 - alpha) / alpha)


class _LevyTail:
    """Cached tail function and partial moments of a catalog Levy density."""

    def __init__(self, exp: bf.LaplaceExponent):
        self.exp = exp

    def tail(self, s: float) -> float:
        """mu_bar(s) = int_s^inf mu(u) du."""
        e = self.exp
        if e.kind == "stable":
            a = e.beta / 2.0
            return s ** (-a) / math.gamma(1.0 - a)
        if e.kind == "exponential_levy":
            return math.exp(-s)
        if e.kind == "custom":
            from scipy import integrate
            return integrate.quad(e.levy, s, np.inf, limit=200)[0]
        return max(bf.talbot(lambda lam: bf.eval_phi(e, lam) / lam, s, m=24), 0.0)

    def moment1(self, s: float) -> float:
        """int_0^s u mu(u) du (the compensator drift of truncation at s)."""
        e = self.exp
        if e.kind == "stable":
            a = e.beta / 2.0
            return a / ((1 - a) * math.gamma(1 - a)) * s ** (1 - a)
        if e.kind == "exponential_levy":
            return 1.0 - (1.0 + s) * math.exp(-s)
        if e.kind == "custom":
            from scipy import integrate
            return integrate.quad(lambda u: u * e.levy(u), 0.0, s, limit=200)[0]
        i2 = bf.talbot(lambda lam: bf.eval_phi(e, lam) / lam**2, s, m=24)
        return max(i2 - s * self.tail(s), 0.0)

    def moment2(self, s: float) -> float:
        """int_0^s u^2 mu(u) du (the neglected variance of truncation at s)."""
        e = self.exp
        if e.kind == "stable":
            a = e.beta / 2.0
            return a / ((2 - a) * math.gamma(1 - a)) * s ** (2 - a)
        if e.kind == "exponential_levy":
            return 2.0 - (s * s + 2 * s + 2.0) * math.exp(-s)
        if e.kind == "custom":
            from scipy import integrate
            return integrate.quad(lambda u: u * u * e.levy(u), 0.0, s, limit=200)[0]
        i3 = bf.talbot(
            lambda lam: bf.eval_phi(e, lam) / lam**3 - bf.eval_phi_prime(e, lam) / lam**2,
            s, m=24)
        return max(2.0 * i3 - s * s * self.tail(s), 0.0)

    def solve_eps(self, target_var: float) -> float:
        """Largest truncation eps with moment2(eps) <= target_var (log bisection)."""
        lo, hi = -30.0, 2.0
        if self.moment2(math.exp(lo)) > target_var:
            raise ValueError("compensator integral effectively divergent at the "
                             f"requested budget {target_var:g}")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self.moment2(math.exp(mid)) <= target_var:
                lo = mid
            else:
                hi = mid
        return math.exp(lo)


_TAIL_CACHE: dict = {}


def _levy_tail(exp: bf.LaplaceExponent) -> _LevyTail:
    key = (exp.kind, exp.beta) if exp.kind != "custom" else ("custom", exp.label, id(exp.levy))
    if key not in _TAIL_CACHE:
        _TAIL_CACHE[key] = _LevyTail(exp)
    return _TAIL_CACHE[key]


class JumpPart:
    """Per-step pure-jump increment generator for a fixed step dt."""

    def __init__(self, exp: bf.LaplaceExponent, dt: float, var_budget: float = VAR_BUDGET):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.exp = exp
        self.dt = dt
        if exp.kind == "drift_only":
            self.mode = "none"
        elif exp.kind == "stable":
            self.mode = "exact"
            self.alpha = exp.beta / 2.0
            self.scale = dt ** (1.0 / self.alpha)
        else:
            self.mode = "cpois"
            tail = _levy_tail(exp)
            self.eps = tail.solve_eps(var_budget * dt)
            self.rate = tail.tail(self.eps)
            self.compensator = tail.moment1(self.eps)  # added drift per unit time
            self._build_sampling_grid(tail)

    def _build_sampling_grid(self, tail: _LevyTail, per_decade: int = 32):
        lo, hi = self.eps, 1e14
        n = max(int(per_decade * math.log10(hi / lo)), 16)
        s_grid = np.exp(np.linspace(math.log(lo), math.log(hi), n))
        t_vals = np.array([tail.tail(s) for s in s_grid])
        t_vals[0] = self.rate
        # keep the strictly positive, strictly decreasing prefix
        good = t_vals > max(1e-250, 1e-15 * self.rate)
        k = int(np.argmin(good)) if not good.all() else len(s_grid)
        s_grid, t_vals = s_grid[:k], t_vals[:k]
        t_vals = np.minimum.accumulate(t_vals)
        keep = np.concatenate([[True], np.diff(t_vals) < 0])
        self._log_s = np.log(s_grid[keep])
        self._log_tail = np.log(t_vals[keep])

    def sample(self, n: int, rng) -> np.ndarray:
        """Pure-jump increments over one step dt for n paths."""
        if self.mode == "none":
            return np.zeros(n)
        if self.mode == "exact":
            return self.scale * one_sided_stable(self.alpha, n, rng)
        counts = rng.poisson(self.rate * self.dt, n)
        out = np.full(n, self.compensator * self.dt)
        total = int(counts.sum())
        if total:
            u = rng.random(total)
            # inverse transform on the tabulated tail: tail(s) = u * rate
            log_t = np.log(u * self.rate)
            sizes = np.exp(np.interp(log_t, self._log_tail[::-1], self._log_s[::-1]))
            out += np.bincount(np.repeat(np.arange(n), counts), weights=sizes, minlength=n)
        return out


def sample_subordinator(exp: bf.LaplaceExponent, horizon: float, dt: float, rng,
                        var_budget: float = VAR_BUDGET) -> np.ndarray:
    """Increment sequence of S over [0, horizon] at step dt (one path).

    Every increment is dt (unit drift) plus the pure-jump part over dt.
    """
    n_steps = max(int(round(horizon / dt)), 1)
    jp = JumpPart(exp, dt, var_budget)
    return dt + jp.sample(n_steps, rng)


def subordinator_totals(exp: bf.LaplaceExponent, t: float, n: int, rng,
                        n_steps: int = 1, var_budget: float = VAR_BUDGET) -> np.ndarray:
    """n independent samples of S_t, each the sum of n_steps increments."""
    dt = t / n_steps
    jp = JumpPart(exp, dt, var_budget)
    out = np.full(n, t, dtype=float)
    for _ in range(n_steps):
        out += jp.sample(n, rng)
    return out


# ---------------------------------------------------------------------------
# killed path engines


@dataclass
class PathRealization:
    """One recorded trajectory with exit metadata."""

    times: np.ndarray
    states: np.ndarray
    clock: np.ndarray                  # operational clock S_t along the grid
    exit_time: float
    exit_location: Optional[np.ndarray]
    exit_mode: str
    z_life: Optional[float] = None     # lifetime of the subordinate killed twin


class _BatchState:
    """Compacting batch bookkeeping: arrays live on the active subset."""

    def __init__(self, n, x0, dom):
        d = dom.dim
        x0 = np.asarray(x0, dtype=float)
        self.x = np.tile(x0, (n, 1)) if x0.ndim == 1 else np.array(x0, dtype=float)
        if self.x.shape != (n, d):
            raise ValueError(f"x0 must broadcast to ({n}, {d})")
        if not np.all(dom.contains(self.x)):
            raise ValueError("x0 must lie inside the domain")
        self.idx = np.arange(n)
        self.delta = np.atleast_1d(dom.dist(self.x))
        self.exit_time = np.full(n, np.nan)
        self.exit_mode = np.full(n, EXIT_CENSORED, dtype=np.int8)
        self.exit_loc = np.full((n, d), np.nan)
        self.z_time = np.full(n, np.nan)
        self.z_alive = np.ones(n, dtype=bool)

    @property
    def n_active(self):
        return len(self.idx)

    def kill(self, local_mask, times, locs, mode):
        gi = self.idx[local_mask]
        self.exit_time[gi] = times
        self.exit_mode[gi] = mode
        self.exit_loc[gi] = locs
        zm = self.z_alive[gi]
        self.z_time[gi[zm]] = np.atleast_1d(times)[zm] if np.ndim(times) else times
        self.z_alive[gi] = False

    def kill_z_only(self, local_mask, times):
        gi = self.idx[local_mask]
        zm = self.z_alive[gi]
        self.z_time[gi[zm]] = np.atleast_1d(times)[zm] if np.ndim(times) else times
        self.z_alive[gi] = False

    def drop(self, keep_local):
        self.idx = self.idx[keep_local]
        self.x = self.x[keep_local]
        self.delta = self.delta[keep_local]


def exit_stats(spec: DiffusionSpec, exp: bf.LaplaceExponent, dom: Domain, x0,
               n: int, dt: float, horizon: float, rng, *,
               track_z: bool = False,
               occupation: Optional[Sequence[Callable]] = None,
               var_budget: float = VAR_BUDGET,
               collect_positions_at: Optional[float] = None) -> dict:
    """Vectorized batch of Y paths killed outside dom.

    Returns exit times, modes ('continuous'/'jump'/'censored-at-horizon'
    codes 0/1/2), exit locations, optional Z^D lifetimes, optional
    occupation sums per region (trapezoidal on the operational clock), and
    optional positions of the paths alive at collect_positions_at.
    """
    n_steps = max(int(round(horizon / dt)), 1)
    jp = JumpPart(exp, dt, var_budget)
    st = _BatchState(n, x0, dom)
    aniso = not spec.is_identity

    occ = None
    occ_prev = None
    if occupation is not None:
        occ = np.zeros((n, len(occupation)))
        occ_prev = np.column_stack([np.asarray(p(st.x), dtype=float) for p in occupation])

    snap_step = None
    snapshot = {}
    if collect_positions_at is not None:
        snap_step = int(round(collect_positions_at / dt))

    max_bridge_p = 0.0

    for k in range(n_steps):
        m = st.n_active
        if m == 0:
            break
        x = st.x
        delta = st.delta

        jumps = jp.sample(m, rng)

        if aniso:
            c = spec.diffusivity(x)
            mu_dt = spec.drift(x, c) * dt
            sig = np.sqrt(c * dt)[:, None]
        else:
            c = 1.0
            mu_dt = 0.0
            sig = math.sqrt(dt)
        z = rng.standard_normal(x.shape)
        x_cont = x + mu_dt + sig * z

        inside = np.atleast_1d(dom.contains(x_cont))
        # direct continuous exits: crossing point of the segment
        if not inside.all():
            out_loc = dom.segment_exit_point(x[~inside], x_cont[~inside])
            st.kill(~inside, (k + 0.5) * dt, out_loc, EXIT_CONTINUOUS)

        # bridge crossing for the continuously swept stage
        u = rng.random(m)
        delta_new = np.where(inside, np.atleast_1d(dom.dist(x_cont)), 0.0)
        p_bridge = np.exp(-2.0 * delta * delta_new / (c * dt + 1e-300))
        p_bridge = np.where(inside, p_bridge, 0.0)
        if p_bridge.size:
            max_bridge_p = max(max_bridge_p, float(p_bridge.max()))
        crossed = inside & (u < p_bridge)
        if crossed.any():
            wgt = delta[crossed] / (delta[crossed] + delta_new[crossed] + 1e-300)
            mid = x[crossed] + wgt[:, None] * (x_cont[crossed] - x[crossed])
            st.kill(crossed, (k + np.clip(wgt, 0.05, 0.95)) * dt,
                    np.atleast_2d(dom.project_to_boundary(mid)), EXIT_CONTINUOUS)

        live = inside & ~crossed
        x_now = x_cont
        delta_now = delta_new

        # jump stage
        jump_mask = live & (jumps > 0)
        if jump_mask.any():
            j_sz = jumps[jump_mask]
            xj = x_now[jump_mask]
            if aniso:
                cj = spec.diffusivity(xj)
                muj = spec.drift(xj, cj) * j_sz[:, None]
                sig = np.sqrt(cj * j_sz)[:, None]
            else:
                muj = 0.0
                sig = np.sqrt(j_sz)[:, None]
            zj = rng.standard_normal(xj.shape)
            x_land = xj + muj + sig * zj
            land_inside = np.atleast_1d(dom.contains(x_land))

            jump_exit = np.zeros(m, dtype=bool)
            jump_exit[np.flatnonzero(jump_mask)[~land_inside]] = True
            if jump_exit.any():
                st.kill(jump_exit, (k + 1.0) * dt, x_land[~land_inside], EXIT_JUMP)

            if track_z and land_inside.any():
                # did the underlying diffusion cross during the clock jump?
                dj1 = delta_now[jump_mask]
                dj2 = np.zeros(len(xj))
                dj2[land_inside] = np.atleast_1d(dom.dist(x_land[land_inside]))
                sigma2j = cj if aniso else 1.0
                uz = rng.random(len(xj))
                z_cross = land_inside & (uz < np.exp(-2.0 * dj1 * dj2 / (sigma2j * j_sz + 1e-300)))
                if z_cross.any():
                    zc = np.zeros(m, dtype=bool)
                    zc[np.flatnonzero(jump_mask)[z_cross]] = True
                    st.kill_z_only(zc, (k + 1.0) * dt)

            upd = np.flatnonzero(jump_mask)[land_inside]
            x_now = x_now.copy()
            delta_now = delta_now.copy()
            x_now[upd] = x_land[land_inside]
            delta_now[upd] = np.atleast_1d(dom.dist(x_land[land_inside]))
            live = live & ~jump_exit

        if occ is not None:
            ind_new = np.zeros((m, occ.shape[1]))
            if live.any():
                vals = np.column_stack([np.asarray(p(x_now[live]), dtype=float)
                                        for p in occupation])
                ind_new[live] = vals
            occ[st.idx] += 0.5 * dt * (occ_prev[st.idx] + ind_new)
            occ_prev[st.idx] = ind_new

        st.x = x_now
        st.delta = delta_now
        if not live.all():
            st.drop(live)   # occ and occ_prev stay globally indexed

        if snap_step is not None and k + 1 == snap_step:
            snapshot["positions"] = st.x.copy()
            snapshot["alive_idx"] = st.idx.copy()

    # censored paths
    cens = np.isnan(st.exit_time)
    st.exit_time[cens] = n_steps * dt
    st.z_time[st.z_alive] = n_steps * dt

    if max_bridge_p > 0.5:
        warnings.warn(f"bridge crossing probability reached {max_bridge_p:.2f} > 0.5; "
                      "dt is too coarse near the boundary, refine the step",
                      RuntimeWarning, stacklevel=2)

    out = {
        "exit_time": st.exit_time,
        "exit_mode": st.exit_mode,
        "exit_location": st.exit_loc,
        "censored": cens,
        "max_bridge_p": max_bridge_p,
    }
    if track_z:
        out["z_life"] = st.z_time
    if occ is not None:
        out["occupation"] = occ
    if snap_step is not None:
        out["positions"] = snapshot.get("positions", np.empty((0, dom.dim)))
        out["alive_idx"] = snapshot.get("alive_idx", np.empty(0, dtype=int))
    return out


def diffusion_exit_stats(spec: DiffusionSpec, dom: Domain, x0, n: int, dt: float,
                         horizon: float, rng, **kw) -> dict:
    """Killed diffusion X^D batch: the Y engine with a drift-only clock."""
    return exit_stats(spec, bf.drift_only(), dom, x0, n, dt, horizon, rng, **kw)


def survival_stats(spec: DiffusionSpec, exp: bf.LaplaceExponent, dom: Domain, x0,
                   n: int, dt: float, t: float, rng, **kw) -> dict:
    """Run to fixed time t; adds 'alive' (tau > t) to the batch output."""
    n_steps = max(int(round(t / dt)), 1)
    res = exit_stats(spec, exp, dom, x0, n, t / n_steps, n_steps * (t / n_steps), rng, **kw)
    res["alive"] = res["censored"]
    return res


def coupled_survival(spec: DiffusionSpec, exp: bf.LaplaceExponent,
                     dom_small: Domain, dom_big: Domain, x0, n: int, dt: float,
                     t: float, rng, var_budget: float = VAR_BUDGET) -> dict:
    """Survival masks in two nested domains driven by shared randomness.

    The same increments and the same bridge uniforms drive both membership
    tests; since dist_small <= dist_big pointwise for nested domains, the
    coupling is monotone and alive_small <= alive_big path by path.
    """
    n_steps = max(int(round(t / dt)), 1)
    jp = JumpPart(exp, dt, var_budget)
    x = np.tile(np.asarray(x0, dtype=float), (n, 1))
    doms = (dom_small, dom_big)
    alive = [np.ones(n, dtype=bool), np.ones(n, dtype=bool)]
    delta = [np.atleast_1d(d.dist(x)) for d in doms]
    aniso = not spec.is_identity

    for k in range(n_steps):
        any_alive = alive[0] | alive[1]
        if not any_alive.any():
            break
        jumps = jp.sample(n, rng)
        if aniso:
            c = spec.diffusivity(x)
            mu_dt = spec.drift(x, c) * dt
            sig = np.sqrt(c * dt)[:, None]
        else:
            c = 1.0
            mu_dt = 0.0
            sig = math.sqrt(dt)
        x_cont = x + mu_dt + sig * rng.standard_normal(x.shape)
        u = rng.random(n)
        for i, dom in enumerate(doms):
            inside = np.atleast_1d(dom.contains(x_cont))
            dnew = np.where(inside, np.atleast_1d(dom.dist(x_cont)), 0.0)
            p = np.where(inside, np.exp(-2.0 * delta[i] * dnew / ((c if aniso else 1.0) * dt + 1e-300)), 1.0)
            alive[i] &= inside & (u >= p)
            delta[i] = dnew

        jmask = jumps > 0
        x_land = x_cont.copy()
        if jmask.any():
            sizes = jumps[jmask]
            if aniso:
                cj = spec.diffusivity(x_cont[jmask])
                x_land[jmask] = (x_cont[jmask] + spec.drift(x_cont[jmask], cj) * sizes[:, None]
                                 + np.sqrt(cj * sizes)[:, None] * rng.standard_normal((jmask.sum(), x.shape[1])))
            else:
                x_land[jmask] = x_cont[jmask] + np.sqrt(sizes)[:, None] * rng.standard_normal(
                    (int(jmask.sum()), x.shape[1]))
            for i, dom in enumerate(doms):
                inside = np.atleast_1d(dom.contains(x_land))
                alive[i] &= inside
                delta[i] = np.where(inside, np.atleast_1d(dom.dist(x_land)), 0.0)
        x = x_land

    return {"alive_small": alive[0], "alive_big": alive[1]}


# ---------------------------------------------------------------------------
# single recorded paths (inspection, tests)


def sample_Y(spec: DiffusionSpec, exp: bf.LaplaceExponent, dom: Domain, x0,
             horizon: float, dt: float, rng, track_z: bool = True,
             var_budget: float = VAR_BUDGET) -> PathRealization:
    """One recorded trajectory of the killed subordinate process Y^D."""
    return _sample_single(spec, exp, dom, x0, horizon, dt, rng, track_z, var_budget)


def sample_Z_D(spec: DiffusionSpec, exp: bf.LaplaceExponent, dom: Domain, x0,
               horizon: float, dt: float, rng,
               var_budget: float = VAR_BUDGET) -> PathRealization:
    """One trajectory of the subordinate killed process Z^D = X^D(S_t).

    Shares the construction of sample_Y; the path is truncated at the Z
    lifetime sigma_{tau^X_D}, which never exceeds the Y exit time.
    """
    p = _sample_single(spec, exp, dom, x0, horizon, dt, rng, True, var_budget)
    if p.z_life is not None and p.z_life < p.exit_time:
        keep = p.times <= p.z_life
        return PathRealization(times=p.times[keep], states=p.states[keep],
                               clock=p.clock[keep], exit_time=p.z_life,
                               exit_location=None, exit_mode="continuous",
                               z_life=p.z_life)
    return PathRealization(times=p.times, states=p.states, clock=p.clock,
                           exit_time=p.z_life if p.z_life is not None else p.exit_time,
                           exit_location=p.exit_location, exit_mode=p.exit_mode,
                           z_life=p.z_life)


def sample_killed_diffusion(spec: DiffusionSpec, dom: Domain, x0,
                            clock_amount: float, dt: float, rng) -> PathRealization:
    """One recorded killed diffusion path (exact Gaussian increments when
    the coefficients are the identity)."""
    return _sample_single(spec, bf.drift_only(), dom, x0, clock_amount, dt, rng, False, VAR_BUDGET)


def _sample_single(spec, exp, dom, x0, horizon, dt, rng, track_z, var_budget):
    res_n = 1
    n_steps = max(int(round(horizon / dt)), 1)
    jp = JumpPart(exp, dt, var_budget)
    x = np.asarray(x0, dtype=float)[None, :]
    if not np.all(dom.contains(x)):
        raise ValueError("x0 must lie inside the domain")
    times = [0.0]
    states = [x[0].copy()]
    clock = [0.0]
    delta = float(np.atleast_1d(dom.dist(x))[0])
    s_now = 0.0
    z_life = None
    exit_time = n_steps * dt
    exit_mode = "censored-at-horizon"
    exit_loc = None
    aniso = not spec.is_identity

    for k in range(n_steps):
        j = float(jp.sample(res_n, rng)[0])
        if aniso:
            c = float(spec.diffusivity(x)[0])
            mu_dt = spec.drift(x, np.array([c])) * dt
        else:
            c = 1.0
            mu_dt = 0.0
        x_cont = x + mu_dt + math.sqrt(c * dt) * rng.standard_normal(x.shape)
        inside = bool(np.atleast_1d(dom.contains(x_cont))[0])
        u = float(rng.random())
        if not inside:
            loc = np.atleast_2d(dom.segment_exit_point(x, x_cont))[0]
            exit_time = (k + 0.5) * dt
            exit_mode = "continuous"
            exit_loc = loc
            if z_life is None:
                z_life = exit_time
            break
        d_new = float(np.atleast_1d(dom.dist(x_cont))[0])
        if u < math.exp(-2.0 * delta * d_new / (c * dt)):
            w = delta / (delta + d_new + 1e-300)
            mid = x + w * (x_cont - x)
            exit_time = (k + max(min(w, 0.95), 0.05)) * dt
            exit_mode = "continuous"
            exit_loc = np.atleast_2d(dom.project_to_boundary(mid))[0]
            if z_life is None:
                z_life = exit_time
            break
        x = x_cont
        delta = d_new
        s_now += dt
        if j > 0:
            if aniso:
                cj = float(spec.diffusivity(x)[0])
                x_land = (x + spec.drift(x, np.array([cj])) * j
                          + math.sqrt(cj * j) * rng.standard_normal(x.shape))
            else:
                cj = 1.0
                x_land = x + math.sqrt(j) * rng.standard_normal(x.shape)
            land_inside = bool(np.atleast_1d(dom.contains(x_land))[0])
            if not land_inside:
                exit_time = (k + 1.0) * dt
                exit_mode = "jump"
                exit_loc = x_land[0].copy()
                if z_life is None:
                    z_life = exit_time
                break
            if track_z and z_life is None:
                d_land = float(np.atleast_1d(dom.dist(x_land))[0])
                if rng.random() < math.exp(-2.0 * delta * d_land / (cj * j)):
                    z_life = (k + 1.0) * dt
            x = x_land
            delta = float(np.atleast_1d(dom.dist(x))[0])
            s_now += j
        times.append((k + 1.0) * dt)
        states.append(x[0].copy())
        clock.append(s_now)

    if z_life is None:
        z_life = exit_time
    return PathRealization(times=np.array(times), states=np.array(states),
                           clock=np.array(clock), exit_time=float(exit_time),
                           exit_location=exit_loc, exit_mode=exit_mode,
                           z_life=float(z_life) if track_z else None)
