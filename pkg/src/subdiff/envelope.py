"""Closed-form heat-kernel and Green-function envelopes.

The Dirichlet envelope combines a boundary factor (1 ^ delta/sqrt(t)) for
each endpoint with an interior profile

    t^{-d/2} ^ ( t^{-d/2} e^{-c1 r^2/t}
                 + t H(r^{-2}) / r^d
                 + phiinv(1/t)^{d/2} e^{-c2 r^2 phiinv(1/t)} )

where r = |x-y| and phiinv inverts the full exponent lam + phi(lam).  The
rate constants c1, c2 and the multiplicative constant are free parameters
fitted by the estimator module, never derived here.  On the diagonal the
profile is t^{-d/2} (the jump term dominates the minimum as r -> 0).

Points outside the domain carry delta = 0, matching the zero exterior
condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bernstein as bf
from .geometry import Domain

__all__ = ["EnvelopeParams", "h_envelope", "q_interior", "g_envelope", "j_envelope"]


@dataclass(frozen=True)
class EnvelopeParams:
    """Multiplicative constant and the two exponential rates of the envelope."""

    C: float = 1.0
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        for name in ("C", "c1", "c2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"envelope parameter {name} must be positive and finite")


def _pair_geometry(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        return x[None, :], y[None, :], True
    return x, y, False


def h_envelope(dom: Domain, exp: bf.LaplaceExponent, params: EnvelopeParams,
               t: float, x, y):
    """Dirichlet heat kernel envelope h_{D,c1,c2}(t, x, y)."""
    if t <= 0:
        raise ValueError("t must be positive")
    x2, y2, single = _pair_geometry(x, y)
    d = dom.dim
    sqt = np.sqrt(t)
    bx = np.minimum(1.0, np.atleast_1d(dom.dist(x2)) / sqt)
    by = np.minimum(1.0, np.atleast_1d(dom.dist(y2)) / sqt)
    r = np.linalg.norm(x2 - y2, axis=1)
    out = params.C * bx * by * _interior_profile(exp, params, t, r, d)
    return out[0] if single else out


def _interior_profile(exp, params, t, r, d):
    tmd = t ** (-d / 2.0)
    r = np.asarray(r, dtype=float)
    on_diag = r == 0.0
    r_safe = np.where(on_diag, 1.0, r)
    lam_t = bf.inv_phi(exp, 1.0 / t)
    gauss = tmd * np.exp(-params.c1 * r_safe**2 / t)
    jump = t * np.asarray(bf.eval_H(exp, r_safe**-2)) / r_safe**d
    sub = lam_t ** (d / 2.0) * np.exp(-params.c2 * r_safe**2 * lam_t)
    profile = np.minimum(tmd, gauss + jump + sub)
    return np.where(on_diag, tmd, profile)


def q_interior(exp: bf.LaplaceExponent, t: float, x, y):
    """Interior two-term profile tH(r^-2)/r^d + phiinv(1/t)^{d/2} e^{-r^2 phiinv(1/t)}."""
    if t <= 0:
        raise ValueError("t must be positive")
    x2, y2, single = _pair_geometry(x, y)
    d = x2.shape[1]
    r = np.linalg.norm(x2 - y2, axis=1)
    if np.any(r == 0):
        raise ValueError("q_interior is undefined on the diagonal x = y")
    lam_t = bf.inv_phi(exp, 1.0 / t)
    out = (t * np.asarray(bf.eval_H(exp, r**-2)) / r**d
           + lam_t ** (d / 2.0) * np.exp(-r**2 * lam_t))
    return out[0] if single else out


def g_envelope(dom: Domain, x, y):
    """Green function envelope g_D(x, y); branches on the dimension of dom.

    Diverges on the diagonal for d >= 2 (an error); for d = 1 the minimum
    saturates there at sqrt(delta(x) delta(y)).
    """
    x2, y2, single = _pair_geometry(x, y)
    d = dom.dim
    r = np.linalg.norm(x2 - y2, axis=1)
    dd = np.atleast_1d(dom.dist(x2)) * np.atleast_1d(dom.dist(y2))
    if d >= 3:
        if np.any(r == 0):
            raise ValueError("g_envelope diverges on the diagonal for d >= 3")
        out = np.minimum(1.0, dd / r**2) * r ** (2.0 - d)
    elif d == 2:
        if np.any(r == 0):
            raise ValueError("g_envelope diverges on the diagonal for d = 2")
        out = np.log1p(dd / r**2)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(r > 0, dd / np.where(r > 0, r, 1.0), np.inf)
        out = np.minimum(np.sqrt(dd), ratio)
    return out[0] if single else out


def j_envelope(exp: bf.LaplaceExponent, r, d: int):
    """Jump kernel envelope H(r^-2) / r^d."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("r must be positive")
    out = np.asarray(bf.eval_H(exp, r_arr**-2)) / r_arr**d
    return out if np.ndim(r) else float(out)
