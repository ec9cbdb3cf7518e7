"""Assembly of excursion tail formulas P(sup X > u) ~ K L(u) u^rho psi(u).

Every maximizer component contributes one summand.  Working per model
axis in the rescaled window coordinates:

* an axis tangent to the maximum set contributes a homogeneous-case
  constant H_alpha, an amplitude normalization A_i(t)^(1/alpha_i)
  integrated over the set, and a power u^(2/alpha_i);
* a normal axis whose variance exponent beta exceeds the correlation
  exponent alpha (flatter variance) contributes a Laplace factor
  c Gamma(1+1/beta) b^(-1/beta), the constant H_alpha with its
  amplitude normalization, and the reduced power u^(2/alpha - 2/beta);
* a normal axis with beta = alpha contributes a transition constant
  P(alpha, kappa) with kappa = b/A and no power of u;
* a normal axis with beta < alpha (sharper variance) contributes 1:
  a single rescaled window already captures the whole excursion mass.

The three named regimes are the uniform special cases of this
bookkeeping; mixed models sum the component summands and report which
one dominates for large u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ConstantsPolicy, resolve_pickands, resolve_transition
from .model import ModelError, classify_regime
from .specfun import laplace_numeric, psi

__all__ = [
    "AsymComponent",
    "AsymptoticResult",
    "maxset_integral",
    "asym_locally_homogeneous",
    "asym_stationary_like",
    "asym_talagrand",
    "asym_transition",
    "asym_general",
    "trichotomy_1d",
    "informative_width",
]


@dataclass
class AsymComponent:
    """One maximizer component's summand K L(u) u^rho psi(u)."""

    label: str
    K: float
    K_lo: float
    K_hi: float
    rho: float
    regime: str
    log_power: float = 0.0
    L: object = None  # optional slowly varying numeric factor L(u)

    def evaluate(self, u):
        u = np.asarray(u, dtype=float)
        out = self.K * u**self.rho * psi(u)
        if self.log_power:
            out = out * np.log(u) ** self.log_power
        if self.L is not None:
            out = out * self.L(u)
        return float(out) if out.ndim == 0 else out


@dataclass
class AsymptoticResult:
    """Assembled tail formula with its per-component breakdown."""

    components: tuple
    regime: str
    model_id: str = "model"
    dominance_u: float = 1.0

    @property
    def leading(self):
        return max(self.components, key=lambda c: (c.rho, c.K))

    @property
    def leading_constant(self):
        return self.leading.K

    @property
    def u_exponent(self):
        return self.leading.rho

    @property
    def band(self):
        lead = self.leading
        return (lead.K_lo, lead.K_hi)

    def evaluate(self, u):
        total = None
        for comp in self.components:
            val = comp.evaluate(u)
            total = val if total is None else total + val
        return total

    def evaluate_band(self, u):
        lo = sum(c.K_lo / c.K * c.evaluate(u) if c.K else 0.0 for c in self.components)
        hi = sum(c.K_hi / c.K * c.evaluate(u) if c.K else 0.0 for c in self.components)
        return lo, hi

    def formula(self):
        lead = self.leading
        extra = " (+%d smaller summands)" % (len(self.components) - 1) if len(self.components) > 1 else ""
        logpart = " log^%g(u)" % lead.log_power if lead.log_power else ""
        return "P(u) ~ %.6g * u^%.6g%s * Psi(u)%s" % (lead.K, lead.rho, logpart, extra)


# ---------------------------------------------------------------------------
# Quadrature over the maximum set


def maxset_integral(maxset, integrand):
    """Integrate a positive function over the maximum set, chart by chart.

    Point charts use counting measure.  Box charts use tensor
    Gauss-Legendre quadrature with the chart's volume element, doubling
    the order until the result changes by less than 1e-8 relative.
    Sphere charts carry their exact volume and are evaluated at a
    representative point, which is exact for the rotation-invariant
    integrands produced by the models here.
    """
    total = 0.0
    for cid, chart in enumerate(maxset.charts):
        if chart.kind == "points":
            total += sum(float(integrand(p)) for p in chart.points)
            continue
        if chart.kind == "sphere":
            rep = chart.representative_points(1)[0]
            total += chart.exact_volume * float(integrand(rep))
            continue
        if chart.kind != "box":
            raise ModelError("cannot integrate over chart kind %r" % (chart.kind,))
        prev = None
        order = 16
        while order <= 256:
            val = _box_quadrature(chart, integrand, order)
            if prev is not None and abs(val - prev) <= 1e-8 * max(abs(val), 1e-300):
                break
            prev = val
            order *= 2
        else:
            raise ValueError(
                "maxset quadrature did not settle on chart %d (last change %.3e)"
                % (cid, abs(val - prev))
            )
        total += val
    return total


def _box_quadrature(chart, integrand, order):
    axes = []
    weights = []
    for lo, hi in chart.box:
        x, w = np.polynomial.legendre.leggauss(order)
        axes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    def vol(t):
        if chart.volume is None:
            return 1.0
        return chart.volume(t) if callable(chart.volume) else float(chart.volume)

    if len(axes) == 1:
        vals = np.array([float(integrand(t)) * vol(t) for t in axes[0]])
        return float(np.sum(weights[0] * vals))
    if len(axes) == 2:
        total = 0.0
        for x0, w0 in zip(axes[0], weights[0]):
            for x1, w1 in zip(axes[1], weights[1]):
                p = np.array([x0, x1])
                total += w0 * w1 * float(integrand(p)) * vol(p)
        return total
    raise ModelError("box charts of dimension > 2 are not supported")


# ---------------------------------------------------------------------------
# Per-component assembly


def _isclose(a, b):
    return abs(a - b) <= 1e-9 * max(abs(a), abs(b))


def _component_summand(model, component, policy, label=None):
    """Assemble (K, band, rho, regime) for one maximizer component."""
    policy = policy or ConstantsPolicy()
    alphas = model.correlation.alphas
    K = 0.0
    rel_var = 0.0
    rho = None
    kinds = set()
    for cid in component.chart_ids:
        chart = model.maxset.charts[cid]
        tangent = list(chart.tangent_axes)
        normal = model.normal_axes(chart)
        form = model.normal_form(cid)
        if form is None and normal:
            raise ModelError(
                "chart %d has normal axes but no local variance form; "
                "numeric Laplace handling needs asym_stationary_like" % cid
            )

        factor = 1.0
        chart_rho = 0.0
        for i in tangent:
            est = resolve_pickands(alphas[i], policy)
            factor *= est.value
            if est.std_err:
                rel_var += (est.std_err / est.value) ** 2
            chart_rho += 2.0 / alphas[i]

        if normal and form is not None:
            amps = model.correlation.amplitude(chart.representative_points(1)[0])
            for axis, term in zip(normal, form.terms):
                alpha = alphas[axis]
                beta = term.exponent
                if _isclose(beta, alpha):
                    kappa = term.coeff / amps[axis]
                    est = resolve_transition(alpha, kappa, term.two_sided, policy)
                    factor *= est.value
                    if est.std_err:
                        rel_var += (est.std_err / est.value) ** 2
                    kinds.add("Transition")
                elif beta > alpha:
                    side = 2.0 if term.two_sided else 1.0
                    est = resolve_pickands(alpha, policy)
                    factor *= (
                        side
                        * math.gamma(1.0 + 1.0 / beta)
                        * term.coeff ** (-1.0 / beta)
                        * est.value
                        * amps[axis] ** (1.0 / alpha)
                    )
                    if est.std_err:
                        rel_var += (est.std_err / est.value) ** 2
                    chart_rho += 2.0 / alpha - 2.0 / beta
                    kinds.add("StationaryLike")
                else:
                    kinds.add("Talagrand")
        if tangent:
            def tangential_amplitude(t, _axes=tuple(tangent)):
                amp = model.correlation.amplitude(t)
                return float(np.prod([amp[i] ** (1.0 / alphas[i]) for i in _axes]))

            sub = type(model.maxset)(model.maxset.kind, model.maxset.dim, (chart,))
            factor *= maxset_integral(sub, tangential_amplitude)
        else:
            factor *= len(chart.points) if chart.kind == "points" else 1.0

        if rho is None:
            rho = chart_rho
        elif not _isclose(rho, chart_rho):
            raise ModelError(
                "charts of component %r disagree on the u exponent (%g vs %g); "
                "split them into separate components" % (component.label, rho, chart_rho)
            )
        K += factor

    if not kinds:
        # no normal axes anywhere: constant variance on the component
        regime = "StationaryLike"
    elif len(kinds) == 1:
        regime = kinds.pop()
    else:
        regime = "Mixed"
    rel = math.sqrt(rel_var)
    return AsymComponent(
        label or component.label,
        K,
        K * max(0.0, 1.0 - 1.96 * rel),
        K * (1.0 + 1.96 * rel),
        rho or 0.0,
        regime,
    )


def _dominance_threshold(components):
    if len(components) < 2:
        return 1.0
    lead = max(components, key=lambda c: (c.rho, c.K))
    u_star = math.e  # informative_width and log factors need u > 1
    for comp in components:
        if comp is lead:
            continue
        if _isclose(comp.rho, lead.rho):
            if lead.K < 10.0 * comp.K:
                return math.inf
            continue
        ratio = 10.0 * comp.K / lead.K
        if ratio > 0:
            u_star = max(u_star, ratio ** (1.0 / (lead.rho - comp.rho)))
    return u_star


def asym_general(model, policy=None, regime=None):
    """Sum the component summands of a (possibly mixed) model."""
    regime = regime or classify_regime(model)
    comps = tuple(
        _component_summand(model, component, policy) for component in model.maxset.components
    )
    return AsymptoticResult(comps, regime.tag, model.model_id, _dominance_threshold(comps))


def _checked(model, policy, expected):
    regime = classify_regime(model)
    if regime.tag != expected:
        raise ModelError("regime is %s, expected %s" % (regime.tag, expected))
    return asym_general(model, policy, regime)


def asym_stationary_like(model, policy=None):
    """Tail formula when the variance is flatter than the correlation decay.

    Uses the closed power-law Laplace factor when the model carries the
    local variance form; otherwise falls back to numeric quadrature of
    exp(-u^2 f) over the normal box at each requested level (the factor
    is then carried as a slowly varying L(u) instead of a power of u).
    """
    forms = model.variance.normal_forms
    has_normals = any(model.normal_axes(c) for c in model.maxset.charts)
    if forms or not has_normals:
        return _checked(model, policy, "StationaryLike")
    if model.variance.sigma is None or model.domain.kind != "box" or model.d != 1:
        raise ModelError("need a local variance form or a 1d numeric profile")
    regime = classify_regime(model)
    if regime.tag != "StationaryLike":
        raise ModelError("regime is %s, expected StationaryLike" % regime.tag)
    chart = model.maxset.charts[0]
    point = chart.representative_points(1)[0]
    alpha = model.correlation.alphas[0]
    amp = float(model.correlation.amplitude(point)[0])
    est = resolve_pickands(alpha, policy or ConstantsPolicy())
    lo, hi = model.domain.bounds[0]

    def L(u):
        def f(s):
            return model.variance.f_at(point + s)
        val, _ = laplace_numeric(f, (lo - point, hi - point), float(u) ** 2)
        return val

    comp = AsymComponent(
        "M", est.value * amp ** (1.0 / alpha), est.value * amp ** (1.0 / alpha),
        est.value * amp ** (1.0 / alpha), 2.0 / alpha, "StationaryLike", L=L,
    )
    return AsymptoticResult((comp,), "StationaryLike", model.model_id)


def asym_talagrand(model, policy=None):
    """Tail formula when the variance drops faster than the correlation."""
    return _checked(model, policy, "Talagrand")


def asym_transition(model, policy=None):
    """Tail formula when variance decay and correlation decay balance."""
    return _checked(model, policy, "Transition")


def asym_locally_homogeneous(model, region=None, policy=None):
    """Constant-variance case: K = H prod_i over the region integral.

    ``region`` restricts the (full-dimensional) maximum set to a sub-box.
    """
    for chart in model.maxset.charts:
        if model.normal_axes(chart):
            raise ModelError("variance is not constant on the region")
    if region is None:
        return _checked(model, policy, "StationaryLike")
    from .model import Chart, Component, MaxSet

    region = tuple((float(lo), float(hi)) for lo, hi in np.atleast_2d(region))
    base = model.maxset.charts[0]
    chart = Chart("box", base.tangent_axes, box=region, volume=base.volume)
    maxset = MaxSet("region", len(region), (chart,))
    sub = type(model)(
        model.d, model.domain, model.correlation, model.variance, maxset,
        model.sim, model.model_id,
    )
    regime = classify_regime(sub)
    if regime.tag != "StationaryLike":
        raise ModelError("regime is %s, expected StationaryLike" % regime.tag)
    return asym_general(sub, policy, regime)


def trichotomy_1d(a, beta, alpha, interval=(0.0, 1.0), t0=None, boundary_flag=False, policy=None):
    """Closed-form dispatch for the scalar power-law family.

    sigma = 1 - a |t - t0|^beta near its peak, 1 - r = |s|^alpha: the
    tail is C1 u^(2/alpha - 2/beta) psi(u) for beta > alpha (variance
    flatter), C2 psi(u) for beta = alpha, and psi(u) for beta < alpha.
    """
    if not a > 0 or not beta > 0 or not 0 < alpha <= 2:
        raise ValueError("need a > 0, beta > 0, alpha in (0, 2]")
    lo, hi = interval
    if t0 is None:
        t0 = lo if boundary_flag else 0.5 * (lo + hi)
    if not lo <= t0 <= hi:
        raise ValueError("t0 must lie in the interval")
    policy = policy or ConstantsPolicy()
    if _isclose(beta, alpha):
        est = resolve_transition(alpha, a, not boundary_flag, policy)
        comp = AsymComponent(
            "M", est.value,
            est.value * max(0.0, 1.0 - 1.96 * (est.std_err / est.value if est.value else 0.0)),
            est.value * (1.0 + 1.96 * (est.std_err / est.value if est.value else 0.0)),
            0.0, "Transition",
        )
        return AsymptoticResult((comp,), "Transition", "trichotomy")
    if beta < alpha:
        comp = AsymComponent("M", 1.0, 1.0, 1.0, 0.0, "Talagrand")
        return AsymptoticResult((comp,), "Talagrand", "trichotomy")
    side = 1.0 if boundary_flag else 2.0
    est = resolve_pickands(alpha, policy)
    K = 1.0
    K *= est.value
    K *= side * math.gamma(1.0 + 1.0 / beta) * a ** (-1.0 / beta) * 1.0 ** (1.0 / alpha)
    rel = est.std_err / est.value if est.value else 0.0
    rho = 0.0
    rho += 2.0 / alpha - 2.0 / beta
    comp = AsymComponent(
        "M", K, K * max(0.0, 1.0 - 1.96 * rel), K * (1.0 + 1.96 * rel), rho, "StationaryLike"
    )
    return AsymptoticResult((comp,), "StationaryLike", "trichotomy")


def informative_width(u, gamma_value=None):
    """Width of the tube around the maximum set that carries the tail mass.

    eps(u) = 2 gamma(u) / u + 2 log^2(u) / u^2 with the default
    gamma(u) = 1 / log(u); any bounded gamma makes the width vanish as
    u grows.
    """
    if not u > 1:
        raise ValueError("need u > 1")
    if gamma_value is None:
        gamma_value = 1.0 / math.log(u)
    if gamma_value < 0:
        raise ValueError("gamma must be nonnegative")
    return 2.0 * gamma_value / u + 2.0 * math.log(u) ** 2 / (u * u)
