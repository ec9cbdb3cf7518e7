"""Special functions and Laplace-type integrals for Gaussian tail asymptotics.

Every excursion formula in this package is expressed relative to the
standard Gaussian tail asymptote

    psi(u) = exp(-u^2 / 2) / (sqrt(2 pi) u),

and the variance decay away from the maximum set enters through
integrals of the form

    L_f(lam) = integral over a box of exp(-lam f(s)) ds.

This module provides the exact tail, a generic adaptive quadrature for
L_f, and the closed-form leading asymptotics of L_f when f is a sum of
per-axis power laws b_j |s_j|^beta_j.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc

__all__ = [
    "PowerLawTerm",
    "PowerLawSpec",
    "psi",
    "gauss_tail",
    "laplace_numeric",
    "laplace_powerlaw_asym",
    "power_law_f",
]


@dataclass(frozen=True)
class PowerLawTerm:
    """One axis of a local power-law form b |s|^beta.

    ``two_sided`` says whether the axis extends to both sides of the
    origin (interior point) or only to one side (boundary point); the
    Laplace factor for the axis is 2 Gamma(1+1/beta) (lam b)^(-1/beta)
    in the first case and half that in the second.
    """

    coeff: float
    exponent: float
    two_sided: bool = True

    def __post_init__(self):
        if not (self.coeff > 0):
            raise ValueError("power-law coefficient must be positive, got %r" % (self.coeff,))
        if not (self.exponent > 0):
            raise ValueError("power-law exponent must be positive, got %r" % (self.exponent,))


@dataclass(frozen=True)
class PowerLawSpec:
    """Separable local form f(s) = sum_j b_j |s_j|^{beta_j}, one term per axis."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(
            t if isinstance(t, PowerLawTerm) else PowerLawTerm(*t) for t in self.terms
        )
        if not terms:
            raise ValueError("PowerLawSpec needs at least one term")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self):
        return len(self.terms)

    def coeffs(self):
        return np.array([t.coeff for t in self.terms])

    def exponents(self):
        return np.array([t.exponent for t in self.terms])


def psi(u):
    """Gaussian tail asymptote exp(-u^2/2) / (sqrt(2 pi) u) for u > 0.

    Accepts a scalar or an array; strictly decreasing on [1, inf).
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("psi requires u > 0")
    out = np.exp(-0.5 * arr**2) / (math.sqrt(2.0 * math.pi) * arr)
    return float(out) if np.ndim(u) == 0 else out


def gauss_tail(u):
    """Exact upper tail 1 - Phi(u) of the standard normal distribution.

    Computed through the complementary error function, which keeps full
    relative accuracy far into the tail where 1 - Phi(u) underflows the
    naive difference.
    """
    arr = np.asarray(u, dtype=float)
    out = 0.5 * erfc(arr / math.sqrt(2.0))
    return float(out) if np.ndim(u) == 0 else out


def _normalize_box(box):
    """Return the box as a tuple of (lo, hi) pairs."""
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = box[None, :]
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError("box must be a (lo, hi) pair or a sequence of them")
    if np.any(box[:, 0] >= box[:, 1]):
        raise ValueError("box bounds must satisfy lo < hi on every axis")
    return [(float(lo), float(hi)) for lo, hi in box]


def laplace_numeric(f, box, lam, rel_tol=1e-8):
    """Adaptive quadrature of integral exp(-lam f(s)) ds over a box.

    The integrand concentrates sharply near the minimum of f when lam
    is large.  The minimum is assumed to sit at the origin (the calling
    conventions of the local expansions guarantee this), so each axis
    through 0 is integrated over a geometric partition anchored there;
    the partition is refined inward until the untouched inner width
    cannot hold a relative mass of rel_tol.  This keeps the quadrature
    exact in the regime where the concentration scale (lam b)^(-1/beta)
    is far below the box size and a fixed rule would miss the peak.

    Parameters
    ----------
    f : callable
        Nonnegative scalar field.  For a one-dimensional box it is
        called with a float, otherwise with a length-d array.
    box : sequence
        (lo, hi) pair, or one pair per axis.
    lam : float
        Positive scale parameter.
    rel_tol : float
        Relative error target per axis.

    Returns
    -------
    value : float
    err_est : float
        Estimated relative error of the result.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    bounds = _normalize_box(box)
    d = len(bounds)
    worst_rel = [0.0]

    def eval_f(coords):
        point = coords[0] if d == 1 else np.asarray(coords)
        val = f(point)
        if not np.isfinite(val):
            raise ValueError("integrand is not finite at s=%r" % (point,))
        return val

    def plain_quad(g, lo, hi):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=rel_tol, limit=200)
        if val != 0.0:
            worst_rel[0] = max(worst_rel[0], abs(err / val))
        return val

    def anchored_quad(g, length):
        # integral of g over [0, length] when g may concentrate at 0
        if length <= 0.0:
            return 0.0
        g_anchor = g(0.0)
        total = 0.0
        width = length
        while True:
            inner = width / 8.0
            total += plain_quad(g, inner, width)
            width = inner
            if width * g_anchor <= rel_tol * total or width < 1e-300:
                break
        # close with the untouched sliver [0, width]
        total += width * (g_anchor + g(width)) / 2.0
        return total

    def integrate_axis(axis, prefix):
        lo, hi = bounds[axis]

        def g(x):
            coords = prefix + [x]
            if axis == d - 1:
                return math.exp(-lam * eval_f(coords))
            return integrate_axis(axis + 1, coords)

        if lo <= 0.0 <= hi:
            return anchored_quad(g, hi) + anchored_quad(lambda x: g(-x), -lo)
        return plain_quad(g, lo, hi)

    value = integrate_axis(0, [])
    return value, worst_rel[0]


def laplace_powerlaw_asym(spec, lam):
    """Leading large-lam asymptotics of L_f for f(s) = sum b_j |s_j|^{beta_j}.

    Each two-sided axis contributes 2 Gamma(1 + 1/beta_j) (lam b_j)^(-1/beta_j),
    a one-sided axis contributes half of that.  This is the exact limit of
    laplace_numeric over any box whose interior contains the origin face
    by face, and the relative error decays like a power of 1/lam.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    value = 1.0
    for term in spec.terms:
        side = 2.0 if term.two_sided else 1.0
        value *= side * math.gamma(1.0 + 1.0 / term.exponent)
        value *= (lam * term.coeff) ** (-1.0 / term.exponent)
    return value


def power_law_f(spec):
    """Return the callable f(s) = sum_j b_j |s_j|^{beta_j} for a spec.

    The callable accepts a float for one-term specs and a vector with
    one entry per term otherwise, matching the calling convention of
    laplace_numeric.
    """
    coeffs = spec.coeffs()
    exponents = spec.exponents()

    if spec.dim == 1:
        b, beta = coeffs[0], exponents[0]

        def f_scalar(s):
            return b * abs(s) ** beta

        return f_scalar

    def f_vector(s):
        s = np.asarray(s, dtype=float)
        return float(np.sum(coeffs * np.abs(s) ** exponents))

    return f_vector
