"""Built-in models: a regression corpus with known structure.

Each maker returns a fully populated :class:`~excursion.model.FieldModel`
whose local data (exponents, amplitudes, variance forms) are exact, so
the asymptotic pipeline can be checked against closed forms, and whose
simulation plans are exact in law, so Monte Carlo can be checked against
the asymptotics.

Stationary correlations use the kernels exp(-|tau|^alpha), which are
positive definite for alpha in (0, 2] and realize the local expansion
1 - r(tau) = |tau|^alpha (1 + o(1)) with unit amplitude.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    Chart,
    Component,
    CorrelationStructure,
    Domain,
    FieldModel,
    MaxSet,
    ModelError,
    SimulationPlan,
    VarianceProfile,
    register_recipe,
)
from .specfun import PowerLawSpec, gauss_tail

__all__ = [
    "make_ou",
    "make_bm_sup",
    "make_power_family",
    "make_two_point",
    "make_bessel",
    "make_bessel_bridge",
    "make_fractional_bessel",
    "make_chi_square",
    "bessel_asym",
    "brownian_sup_exact",
    "list_models",
]


def _exp_kernel(alpha):
    def kernel(tau):
        return np.exp(-np.abs(tau) ** alpha)

    return kernel


def _sphere_area(d):
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ---------------------------------------------------------------------------
# Scalar-parameter models


def make_ou(span=1.0):
    """Unit-variance stationary field with correlation e^(-|tau|) on [0, span].

    Constant variance makes the whole interval the maximum set; the tail
    is H_1 * span * u^2 psi(u).
    """
    span = float(span)
    if span <= 0:
        raise ModelError("span must be positive")
    kernel = _exp_kernel(1.0)
    chart = Chart("box", tangent_axes=(0,), box=((0.0, span),))
    return FieldModel(
        d=1,
        domain=Domain("box", ((0.0, span),)),
        correlation=CorrelationStructure(
            (1.0,), (1.0,), full_correlation=lambda s, t: kernel(np.asarray(s) - np.asarray(t))
        ),
        variance=VarianceProfile(),
        maxset=MaxSet("interval", 1, (chart,)),
        sim=SimulationPlan(
            "scalar", kernel=kernel, engine="circulant", maxset_distance=lambda t: np.zeros_like(t)
        ),
        model_id="ou:span=%g" % span,
    )


def make_bm_sup():
    """Brownian motion on [0, 1]: the transition case with closed oracle.

    sigma(t) = sqrt(t) peaks at the right endpoint with 1 - sigma ~
    (1-t)/2, and 1 - r(t, t+s) ~ |s|/(2t), so beta = alpha = 1 with
    kappa = 1 at t = 1: P(sup > u) ~ P_1(1, one-sided) psi(u) = 2 psi(u),
    matching the reflection principle 2(1 - Phi(u)).
    """

    def sigma(p):
        return math.sqrt(max(float(np.atleast_1d(p)[0]), 0.0))

    def amplitude(p):
        t = float(np.atleast_1d(p)[0])
        return np.array([0.5 / max(t, 1e-8)])

    def cov(s, t):
        return np.minimum(s, t)

    chart = Chart("points", points=(1.0,), boundary=True)
    return FieldModel(
        d=1,
        domain=Domain("box", ((0.0, 1.0),)),
        correlation=CorrelationStructure(
            (1.0,),
            amplitude,
            full_correlation=lambda s, t: np.minimum(s, t)
            / np.sqrt(np.maximum(np.asarray(s) * np.asarray(t), 1e-300)),
        ),
        variance=VarianceProfile(sigma, (PowerLawSpec(((0.5, 1.0, False),)),)),
        maxset=MaxSet("point", 0, (chart,)),
        sim=SimulationPlan("scalar", engine="bm", maxset_distance=lambda t: 1.0 - t),
        model_id="bm_sup",
    )


def make_power_family(alpha, beta, a, t0=None, boundary_flag=False):
    """The scalar power-law family: correlation exponent alpha, variance
    exponent beta, variance amplitude a, peak at t0.

    sigma(t) = exp(-a |t - t0|^beta) realizes 1 - sigma ~ a|t-t0|^beta
    with an everywhere-valid profile; the kernel exp(-|tau|^alpha)
    realizes 1 - r ~ |tau|^alpha.  The regime is decided by sign(beta -
    alpha): flatter variance is stationary-like, balanced is the
    transition case, sharper variance leaves a bare psi(u).
    """
    alpha, beta, a = float(alpha), float(beta), float(a)
    if not (0.0 < alpha <= 2.0):
        raise ModelError("alpha must lie in (0, 2]")
    if beta <= 0 or a <= 0:
        raise ModelError("need beta > 0 and a > 0")
    boundary_flag = bool(boundary_flag)
    if t0 is None:
        t0 = 0.0 if boundary_flag else 0.5
    t0 = float(t0)
    if not (0.0 <= t0 <= 1.0) or (boundary_flag and t0 not in (0.0, 1.0)):
        raise ModelError("t0 must lie in [0, 1], and on its edge when boundary_flag is set")
    kernel = _exp_kernel(alpha)

    def sigma(p):
        t = float(np.atleast_1d(p)[0])
        return math.exp(-a * abs(t - t0) ** beta)

    def profile(t):
        return np.exp(-a * np.abs(np.asarray(t, dtype=float) - t0) ** beta)

    chart = Chart("points", points=(t0,), boundary=boundary_flag)
    spec = {"alpha": alpha, "beta": beta, "a": a, "t0": t0}
    return FieldModel(
        d=1,
        domain=Domain("box", ((0.0, 1.0),)),
        correlation=CorrelationStructure(
            (alpha,), (1.0,), full_correlation=lambda s, t: kernel(np.asarray(s) - np.asarray(t))
        ),
        variance=VarianceProfile(
            sigma, (PowerLawSpec(((a, beta, not boundary_flag),)),)
        ),
        maxset=MaxSet("point", 0, (chart,)),
        sim=SimulationPlan(
            # the squared-exponential kernel at alpha = 2 has no
            # nonnegative circulant embedding, so factor it directly
            "scalar", kernel=kernel, sigma=profile,
            cov=lambda s, t: kernel(np.asarray(s) - np.asarray(t)),
            engine="chol" if alpha == 2.0 else "circulant",
            maxset_distance=lambda t: np.abs(t - t0),
        ),
        model_id="power:" + ",".join("%s=%g" % (k, spec[k]) for k in sorted(spec)),
    )


def make_two_point(a=2.0, beta=0.75, t_left=0.3, t_right=0.7):
    """Two separated variance peaks with a sharper-than-alpha drop.

    With beta < alpha = 1 each peak contributes a bare psi(u), so the
    tail is card(M) psi(u) = 2 psi(u) exactly in the limit.
    """
    a, beta = float(a), float(beta)
    if not (0.0 < beta < 1.0):
        raise ModelError("need 0 < beta < alpha = 1 for the two-point model")
    if a <= 0:
        raise ModelError("need a > 0")
    t_left, t_right = float(t_left), float(t_right)
    if not (0.0 < t_left < t_right < 1.0):
        raise ModelError("peaks must be interior and ordered")
    kernel = _exp_kernel(1.0)

    def dist(t):
        return np.minimum(np.abs(np.asarray(t, dtype=float) - t_left), np.abs(np.asarray(t, dtype=float) - t_right))

    def sigma(p):
        t = float(np.atleast_1d(p)[0])
        return 1.0 - a * min(abs(t - t_left), abs(t - t_right)) ** beta

    def profile(t):
        return 1.0 - a * dist(t) ** beta

    if sigma(0.0) <= 0 or sigma(1.0) <= 0 or sigma(0.5 * (t_left + t_right)) <= 0:
        raise ModelError("variance profile crosses zero; reduce a")
    form = PowerLawSpec(((a, beta, True),))
    charts = (
        Chart("points", points=(t_left,)),
        Chart("points", points=(t_right,)),
    )
    return FieldModel(
        d=1,
        domain=Domain("box", ((0.0, 1.0),)),
        correlation=CorrelationStructure(
            (1.0,), (1.0,), full_correlation=lambda s, t: kernel(np.asarray(s) - np.asarray(t))
        ),
        variance=VarianceProfile(sigma, (form, form)),
        maxset=MaxSet("points", 0, charts, (Component("M", (0, 1), 0),)),
        sim=SimulationPlan(
            "scalar", kernel=kernel, sigma=profile, engine="circulant", maxset_distance=dist
        ),
        model_id="two_point:a=%g,beta=%g" % (a, beta),
    )


# ---------------------------------------------------------------------------
# Cylinder (dual-norm) models


def _sphere_chart(d, t0, boundary, sigma_needs_v=False):
    """Chart {t0} x S^{d-1} with tangent sphere axes and a normal time axis."""

    def samples(k):
        out = []
        for i in range(int(k)):
            v = np.zeros(d)
            v[i % d] = 1.0
            out.append(np.concatenate([[t0], v]))
        return out

    def local_point(theta, offsets):
        theta = np.asarray(theta, dtype=float)
        off = np.asarray(offsets, dtype=float)
        t = theta[0] + off[0]
        v = theta[1:].copy()
        w = off[1:d]
        if np.any(w):
            # move along the tangent plane at v, then renormalize
            w_emb = np.zeros(d)
            basis = [e for e in np.eye(d) if abs(e @ v) < 0.9]
            for c, e in zip(w, basis):
                w_emb += c * e
            v = v + w_emb
            v = v / np.linalg.norm(v)
        return np.concatenate([[t], v])

    return Chart(
        "sphere",
        tangent_axes=tuple(range(1, d)),
        exact_volume=_sphere_area(d),
        boundary=boundary,
        local_point=local_point,
        samples=samples,
    )


def make_bessel(d):
    """Norm of d independent Brownian motions on [0, 1] (dual field on the sphere).

    sup over the cylinder [0,1] x S^{d-1} of <v, W(t)> equals
    sup ||W(t)||.  The maximum set is {1} x S^{d-1}; time is a balanced
    (transition) normal axis with kappa = 1, the sphere directions are
    tangential with alpha = 2, giving
    P(sup > u) ~ 2^(2 - d/2) / Gamma(d/2) * u^(d-2) * e^(-u^2/2).
    """
    d = int(d)
    if d < 2:
        raise ModelError("need d >= 2")

    def sigma(p):
        return math.sqrt(min(max(float(np.atleast_1d(p)[0]), 0.0), 1.0))

    chart = _sphere_chart(d, 1.0, boundary=True)
    return FieldModel(
        d=d,
        domain=Domain("cylinder", ((0.0, 1.0),), sphere_dim=d),
        correlation=CorrelationStructure((1.0,) + (2.0,) * (d - 1), (0.5,) * d),
        variance=VarianceProfile(sigma, (PowerLawSpec(((0.5, 1.0, False),)),)),
        maxset=MaxSet("sphere", d - 1, (chart,)),
        sim=SimulationPlan(
            "coordinates", engine="bm", n_coords=d, weights=(1.0,) * d,
            maxset_distance=lambda t: 1.0 - t,
        ),
        model_id="bessel:d=%d" % d,
    )


def bessel_asym(d, u):
    """Tail of sup ||W_d|| over [0, 1]: 2^(2-d/2)/Gamma(d/2) u^(d-2) e^(-u^2/2).

    This is the constant the per-axis assembly produces: sphere volume
    2 pi^(d/2)/Gamma(d/2) times (H_2 / sqrt(2))^(d-1) for the tangential
    sphere directions times 2 for the one-sided balanced time axis,
    divided by sqrt(2 pi) from psi(u).  At d = 2 the coefficient is 2;
    at d = 3 it is 2 sqrt(2/pi).
    """
    d = int(d)
    if d < 2:
        raise ModelError("need d >= 2")
    u = np.asarray(u, dtype=float)
    coeff = 2.0 ** (2.0 - d / 2.0) / math.gamma(d / 2.0)
    out = coeff * u ** (d - 2.0) * np.exp(-u * u / 2.0)
    return float(out) if out.ndim == 0 else out


def make_bessel_bridge(d):
    """Norm of d independent Brownian bridges, time truncated to [0.05, 0.95].

    The field is normalized by the peak deviation: coordinates
    2 B_0(t) with variance 4t(1-t), so sigma(t) = 2 sqrt(t(1-t)) peaks
    at t = 1/2 with 1 - sigma ~ 2 (t - 1/2)^2.  Time has alpha = 1,
    amplitude 2, and a flatter (beta = 2) variance drop: the time axis
    is stationary-like, the sphere stays tangential.
    """
    d = int(d)
    if d < 2:
        raise ModelError("need d >= 2")

    def sigma(p):
        t = float(np.atleast_1d(p)[0])
        return 2.0 * math.sqrt(max(t * (1.0 - t), 0.0))

    def cov(s, t):
        return 4.0 * (np.minimum(s, t) - np.asarray(s) * np.asarray(t))

    chart = _sphere_chart(d, 0.5, boundary=False)
    return FieldModel(
        d=d,
        domain=Domain("cylinder", ((0.05, 0.95),), sphere_dim=d),
        correlation=CorrelationStructure((1.0,) + (2.0,) * (d - 1), (2.0,) + (0.5,) * (d - 1)),
        variance=VarianceProfile(sigma, (PowerLawSpec(((2.0, 2.0, True),)),)),
        maxset=MaxSet("sphere", d - 1, (chart,)),
        sim=SimulationPlan(
            "coordinates", cov=cov, engine="chol", n_coords=d, weights=(1.0,) * d,
            maxset_distance=lambda t: np.abs(t - 0.5),
        ),
        model_id="bessel_bridge:d=%d" % d,
    )


def make_fractional_bessel(d, hurst):
    """Norm of d independent fractional Brownian motions on [0, 1].

    sigma(t) = t^H peaks at t = 1 with 1 - sigma ~ H (1-t); the time
    correlation exponent is 2H.  The regime therefore follows
    sign(1 - 2H): H < 1/2 is stationary-like, H = 1/2 is the Bessel
    transition case, H > 1/2 is Talagrand-like.
    """
    d = int(d)
    if d < 2:
        raise ModelError("need d >= 2")
    hurst = float(hurst)
    if not (0.0 < hurst < 1.0):
        raise ModelError("need 0 < H < 1")

    def sigma(p):
        return min(max(float(np.atleast_1d(p)[0]), 0.0), 1.0) ** hurst

    def cov(s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        h2 = 2.0 * hurst
        return 0.5 * (s**h2 + t**h2 - np.abs(s - t) ** h2)

    chart = _sphere_chart(d, 1.0, boundary=True)
    return FieldModel(
        d=d,
        domain=Domain("cylinder", ((0.0, 1.0),), sphere_dim=d),
        correlation=CorrelationStructure((2.0 * hurst,) + (2.0,) * (d - 1), (0.5,) * d),
        variance=VarianceProfile(sigma, (PowerLawSpec(((hurst, 1.0, False),)),)),
        maxset=MaxSet("sphere", d - 1, (chart,)),
        sim=SimulationPlan(
            "coordinates", cov=cov, engine="chol", n_coords=d, weights=(1.0,) * d,
            maxset_distance=lambda t: 1.0 - t,
        ),
        model_id="fractional_bessel:H=%g,d=%d" % (hurst, d),
    )


def make_chi_square(b, sigma_profile=None, t0=0.5, a=1.0, beta_t=2.0, span=1.0):
    """Square root of a generalized chi-square field as a dual sphere field.

    The coordinates are independent unit-variance stationary processes
    with correlation e^(-|tau|), scaled by weights b_j and a common time
    profile.  The standard deviation is sigma(t, v) =
    profile(t) sqrt(sum_j b_j^2 v_j^2) / max_j b_j.  Supported maximizer
    geometries:

    * equal weights, flat profile: the full cylinder (homogeneous case);
    * equal weights, peaked profile: the ring {t0} x S^{d-1};
    * strict leading weight: two antipodal points (peaked profile) or
      two strips [0, span] x {+-e_1} (flat profile).

    ``sigma_profile`` is either None (flat) or the string "peaked" for
    profile(t) = exp(-a |t - t0|^beta_t).
    """
    b = tuple(float(x) for x in b)
    d = len(b)
    if d < 2:
        raise ModelError("need at least two weights")
    if any(x <= 0 for x in b):
        raise ModelError("weights must be positive")
    if sigma_profile not in (None, "peaked"):
        raise ModelError(
            "sigma_profile must be None or 'peaked'; distinct per-coordinate "
            "profiles are outside the supported geometry"
        )
    lead = b[0]
    equal = all(x == lead for x in b[1:])
    if not equal and not (lead > max(b[1:]) and len(set(b[1:])) == 1):
        raise ModelError(
            "supported weight patterns: all equal, or one leading weight "
            "b_1 > b_2 = ... = b_d (put the leading weight first)"
        )
    peaked = sigma_profile == "peaked"
    a, beta_t, t0, span = float(a), float(beta_t), float(t0), float(span)
    if peaked and not (0.0 < t0 < span):
        raise ModelError("t0 must be interior")

    w = tuple(x / lead for x in b)
    kernel = _exp_kernel(1.0)

    def profile(t):
        if not peaked:
            return 1.0
        return math.exp(-a * abs(t - t0) ** beta_t)

    def sigma(p):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.size == 1:
            return profile(p[0])
        v = p[1 : 1 + d]
        return profile(p[0]) * math.sqrt(float(np.sum((np.array(w) * v) ** 2)))

    alphas = (1.0,) + (2.0,) * (d - 1)
    q2 = (w[1] if d > 1 else 1.0) ** 2

    # charts and normal forms per geometry
    if equal and not peaked:
        chart = Chart(
            "box", tangent_axes=tuple(range(d)), box=((0.0, span),), volume=_sphere_area(d)
        )
        maxset = MaxSet("cylinder", d, (chart,))
        forms = ()
        amps = (1.0,) + (0.5,) * (d - 1)
    elif equal and peaked:
        chart = _sphere_chart(d, t0, boundary=False)
        maxset = MaxSet("sphere", d - 1, (chart,))
        forms = (PowerLawSpec(((a, beta_t, True),)),)
        amps = (1.0,) + (0.5,) * (d - 1)
    else:
        amps = (1.0,) + (0.5 * q2,) * (d - 1)
        sphere_terms = tuple((0.5 * (1.0 - q2), 2.0, True) for _ in range(d - 1))
        if peaked:
            def pole_chart(sign):
                v = np.zeros(d)
                v[0] = sign

                def local_point(theta, offsets, _v=v):
                    off = np.asarray(offsets, dtype=float)
                    t = float(np.atleast_1d(theta)[0]) + off[0]
                    vv = _v.copy()
                    if np.any(off[1:]):
                        vv = vv + np.concatenate([[0.0], off[1:d]])
                        vv = vv / np.linalg.norm(vv)
                    return np.concatenate([[t], vv])

                return Chart(
                    "points",
                    points=(np.concatenate([[t0], v]),),
                    local_point=local_point,
                )

            charts = (pole_chart(+1.0), pole_chart(-1.0))
            maxset = MaxSet("points", 0, charts, (Component("M", (0, 1), 0),))
            form = PowerLawSpec(((a, beta_t, True),) + sphere_terms)
            forms = (form, form)
        else:
            def strip_chart(sign):
                v = np.zeros(d)
                v[0] = sign

                def samples(k, _v=v):
                    ts = np.linspace(0.0, span, int(k) + 2)[1:-1]
                    return [np.concatenate([[t], _v]) for t in ts]

                def local_point(theta, offsets, _v=v):
                    off = np.asarray(offsets, dtype=float)
                    t = float(np.atleast_1d(theta)[0]) + off[0]
                    vv = _v.copy()
                    if np.any(off[1:]):
                        vv = vv + np.concatenate([[0.0], off[1:d]])
                        vv = vv / np.linalg.norm(vv)
                    return np.concatenate([[t], vv])

                return Chart(
                    "box",
                    tangent_axes=(0,),
                    box=((0.0, span),),
                    local_point=local_point,
                    samples=samples,
                )

            charts = (strip_chart(+1.0), strip_chart(-1.0))
            maxset = MaxSet("strips", 1, charts, (Component("M", (0, 1), 1),))
            form = PowerLawSpec(sphere_terms)
            forms = (form, form)

    return FieldModel(
        d=d,
        domain=Domain("cylinder", ((0.0, span),), sphere_dim=d),
        correlation=CorrelationStructure(alphas, amps),
        variance=VarianceProfile(None if (equal and not peaked) else sigma, forms),
        maxset=maxset,
        sim=SimulationPlan(
            "coordinates", kernel=kernel, engine="circulant", n_coords=d, weights=w,
            sigma=(lambda t: np.exp(-a * np.abs(np.asarray(t) - t0) ** beta_t)) if peaked else None,
            maxset_distance=(lambda t: np.abs(np.asarray(t) - t0)) if peaked else (lambda t: np.zeros_like(np.asarray(t, dtype=float))),
        ),
        model_id="chi_square:" + ",".join(
            ["b=%s" % "x".join("%g" % x for x in b)]
            + (["peaked,a=%g,beta_t=%g,t0=%g" % (a, beta_t, t0)] if peaked else [])
        ),
    )


# ---------------------------------------------------------------------------
# Oracles


def brownian_sup_exact(u):
    """P(sup_{[0,1]} W > u) = 2(1 - Phi(u)), the reflection principle."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("need u >= 0")
    out = 2.0 * np.asarray(gauss_tail(u))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Registry

_DESCRIPTIONS = (
    ("ou", "stationary e^(-|tau|) field on an interval", "StationaryLike", True),
    ("bm_sup", "Brownian motion on [0,1], peak at t=1", "Transition", True),
    ("power", "scalar power family sigma=exp(-a|t-t0|^beta), kernel e^(-|tau|^alpha)", "by sign(beta-alpha)", True),
    ("two_point", "two sharp variance peaks, card(M)=2", "Talagrand", True),
    ("bessel", "norm of d Brownian motions (dual sphere field)", "Transition", True),
    ("bessel_bridge", "norm of d Brownian bridges, peak at t=1/2", "StationaryLike", False),
    ("fractional_bessel", "norm of d fractional Brownian motions", "by sign(1-2H)", False),
    ("chi_square", "generalized chi-square dual field with weights b", "by weights/profile", False),
)


def list_models():
    """Rows (id, description, regime, has_reference_formula)."""
    return [
        {"id": mid, "description": desc, "regime": regime, "reference": ref}
        for mid, desc, regime, ref in _DESCRIPTIONS
    ]


register_recipe("ou", make_ou)
register_recipe("bm_sup", make_bm_sup)
register_recipe("power", make_power_family)
register_recipe(
    "two_point",
    lambda a=2.0, beta=0.75: make_two_point(a=a, beta=beta),
)
register_recipe("bessel", make_bessel)
register_recipe("bessel_bridge", make_bessel_bridge)
register_recipe(
    "fractional_bessel", lambda d=2, H=0.75: make_fractional_bessel(d, H)
)
register_recipe(
    "chi_square",
    lambda d=2, b1=1.0, b2=1.0, profile="flat", a=1.0, beta_t=2.0: make_chi_square(
        (b1,) + (b2,) * (int(d) - 1),
        sigma_profile=None if profile == "flat" else "peaked",
        a=a,
        beta_t=beta_t,
    ),
)
