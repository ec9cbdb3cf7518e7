"""Data contract for Gaussian fields whose variance peaks on a submanifold.

A field is described by four pieces:

* a :class:`CorrelationStructure` giving the per-axis local exponents
  alpha_i and amplitudes A_i(t) of 1 - r, together with the level
  scalings q_i(u) = u^(-2/alpha_i) and C_{i,t} = A_i(t)^(-1/alpha_i);
* a :class:`VarianceProfile` with the standard deviation sigma(t),
  normalized to max sigma = 1, and optionally the local power-law form
  of 1 - sigma in the directions normal to the maximum set;
* a :class:`MaxSet` listing the charts of the set M where sigma = 1;
* an optional :class:`SimulationPlan` telling the Monte Carlo harness
  how to draw exact paths of the field.

The regime of the field is decided by the limit of u^2 (1 - sigma)
along rescaled directions: a zero limit means the variance is flatter
than the correlation decay (stationary-like), a finite limit means the
two balance (transition), an infinite limit means the variance drops
faster (Talagrand).  :func:`classify_regime` estimates these limits
numerically from the model evaluators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .specfun import PowerLawSpec

__all__ = [
    "ModelError",
    "ClassificationError",
    "CorrelationStructure",
    "VarianceProfile",
    "Chart",
    "Component",
    "MaxSet",
    "Domain",
    "SimulationPlan",
    "FieldModel",
    "Regime",
    "LimitClassification",
    "build_model",
    "register_recipe",
    "h_eval",
    "h1_limit",
    "classify_regime",
    "validate_model",
    "validate_regular_variation",
    "parse_model_spec",
    "serialize_model_spec",
    "DEFAULT_U_LADDER",
]

DEFAULT_U_LADDER = tuple(float(u) for u in np.geomspace(5.0, 500.0, 7))


class ModelError(ValueError):
    """Raised when a model description violates the data contract."""


class ClassificationError(RuntimeError):
    """Raised when regime probes are inconclusive."""


@dataclass(frozen=True)
class CorrelationStructure:
    """Local form 1 - r_t(s) ~ sum_i A_i(t) |s_i|^{alpha_i}.

    Parameters
    ----------
    alphas : tuple of float
        Per-axis exponents in (0, 2].
    amplitudes : tuple of float or callable
        Either constant per-axis amplitudes or a callable t -> array.
    full_correlation : callable, optional
        Exact correlation r(s, t) between domain points, used only by
        the Monte Carlo harness.
    """

    alphas: tuple
    amplitudes: object
    full_correlation: object = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    @property
    def d(self):
        return len(self.alphas)

    def amplitude(self, t=None):
        """Per-axis amplitude vector A(t)."""
        if callable(self.amplitudes):
            return np.asarray(self.amplitudes(t), dtype=float)
        return np.asarray(self.amplitudes, dtype=float)

    def q(self, u):
        """Per-axis level scaling q_i(u) = u^(-2/alpha_i)."""
        u = np.asarray(u, dtype=float)
        alphas = np.array(self.alphas)
        return u[..., None] ** (-2.0 / alphas) if u.ndim else u ** (-2.0 / alphas)

    def c_factors(self, t=None):
        """Amplitude normalizations C_{i,t} = A_i(t)^(-1/alpha_i)."""
        return self.amplitude(t) ** (-1.0 / np.array(self.alphas))


@dataclass(frozen=True)
class VarianceProfile:
    """Standard deviation sigma(t), normalized so that max sigma = 1.

    ``sigma=None`` means sigma is identically 1.  ``normal_forms`` holds
    the local power-law form of 1 - sigma in the normal directions, one
    :class:`PowerLawSpec` per maxset chart (or None for full-dimensional
    charts that have no normal directions).
    """

    sigma: object = None
    normal_forms: tuple = ()

    def sigma_at(self, point):
        if self.sigma is None:
            return 1.0
        return float(self.sigma(point))

    def f_at(self, point):
        """Variance decay f = (1 - sigma^2) / 2 entering the Laplace integral."""
        s = self.sigma_at(point)
        return 0.5 * (1.0 - s * s)


@dataclass(frozen=True)
class Chart:
    """One chart of the maximum set.

    Parameters
    ----------
    kind : str
        "points", "box" or "sphere".
    tangent_axes : tuple of int
        Model axes tangent to the set along this chart.
    points : tuple, optional
        For kind "points", the maximizer locations.
    box : tuple, optional
        For kind "box", (lo, hi) per tangent axis.
    volume : callable, optional
        Volume element on the chart parameters (box charts).
    exact_volume : float, optional
        Total chart volume when known in closed form (sphere charts).
    boundary : bool
        True when the chart sits on the domain boundary.
    local_point : callable, optional
        (theta, offsets) -> domain point used to probe sigma off the
        set; offsets is a length-d vector over model axes.  Defaults to
        coordinate translation for box domains.
    samples : callable, optional
        k -> array of k domain points on the chart, for validation.
    """

    kind: str
    tangent_axes: tuple = ()
    points: tuple = ()
    box: tuple = ()
    volume: object = None
    exact_volume: object = None
    boundary: bool = False
    local_point: object = None
    samples: object = None

    @property
    def dim(self):
        if self.kind == "points":
            return 0
        if self.kind == "box":
            return len(self.box)
        return len(self.tangent_axes)

    def representative_points(self, k=3):
        """A few domain points lying on the chart."""
        if self.samples is not None:
            return list(self.samples(k))
        if self.kind == "points":
            return list(self.points)
        if self.kind == "box":
            mids = np.array([(lo + hi) / 2.0 for lo, hi in self.box])
            lows = np.array([lo + 0.25 * (hi - lo) for lo, hi in self.box])
            highs = np.array([lo + 0.75 * (hi - lo) for lo, hi in self.box])
            pts = [mids, lows, highs][:k]
            return [p if p.size > 1 else float(p[0]) for p in pts]
        raise ModelError("chart of kind %r cannot enumerate points" % (self.kind,))

    def offset_point(self, theta, offsets):
        """Domain point at chart location theta displaced by per-axis offsets."""
        if self.local_point is not None:
            return self.local_point(theta, offsets)
        base = np.atleast_1d(np.asarray(theta, dtype=float)).copy()
        out = base + np.asarray(offsets, dtype=float)[: base.size]
        return float(out[0]) if out.size == 1 else out


@dataclass(frozen=True)
class Component:
    """A sub-manifold of the partitioned maximum set."""

    label: str
    chart_ids: tuple
    dim: int


@dataclass(frozen=True)
class MaxSet:
    """The set M of variance maximizers: charts plus an optional partition."""

    kind: str
    dim: int
    charts: tuple
    components: tuple = ()

    def __post_init__(self):
        if not self.components:
            comps = (Component("M", tuple(range(len(self.charts))), self.dim),)
            object.__setattr__(self, "components", comps)
        dims = [c.dim for c in self.components]
        if any(d1 > d2 for d1, d2 in zip(dims, dims[1:])):
            raise ModelError("component dimensions must be nondecreasing")


@dataclass(frozen=True)
class Domain:
    """Parameter domain: a box, or an interval times a unit sphere."""

    kind: str
    bounds: tuple = ()
    sphere_dim: int = 0

    @property
    def box_dim(self):
        return len(self.bounds)


@dataclass(frozen=True)
class SimulationPlan:
    """Recipe for exact Monte Carlo sampling of the field.

    kind "scalar": a stationary ``kernel`` (correlation of the lag) or a
    two-argument covariance ``cov``, multiplied by the profile ``sigma``.
    kind "coordinates": independent coordinate processes combined by the
    weighted Euclidean norm, which removes the sphere factor of a
    product domain from the Monte Carlo grid exactly.
    """

    kind: str
    kernel: object = None
    cov: object = None
    sigma: object = None
    engine: str = "circulant"
    n_coords: int = 1
    weights: tuple = ()
    maxset_distance: object = None


@dataclass(frozen=True)
class FieldModel:
    """Validated description of a Gaussian field."""

    d: int
    domain: Domain
    correlation: CorrelationStructure
    variance: VarianceProfile
    maxset: MaxSet
    sim: object = None
    model_id: str = "model"

    def normal_axes(self, chart):
        return tuple(i for i in range(self.d) if i not in chart.tangent_axes)

    def normal_form(self, chart_id):
        forms = self.variance.normal_forms
        if not forms:
            return None
        return forms[chart_id]


@dataclass(frozen=True)
class LimitClassification:
    """Outcome of a single rescaled variance-limit probe."""

    kind: str  # "zero" | "finite" | "infinite" | "inconclusive"
    value: object
    slope: float
    g_values: tuple


@dataclass(frozen=True)
class ProbeResult:
    component: str
    chart_id: int
    axis: int
    direction: float
    outcome: LimitClassification


@dataclass(frozen=True)
class Regime:
    """Regime tag with the probe evidence that produced it."""

    tag: str  # "StationaryLike" | "Transition" | "Talagrand" | "Mixed"
    evidence: tuple
    component_tags: tuple = ()
    dominance: tuple = ()


def h_eval(model, s):
    """Normalized local structure function h(s) = sum_i |s_i|^{alpha_i}."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    alphas = np.array(model.correlation.alphas)
    if s.shape[-1] != alphas.size:
        raise ValueError("direction has %d entries, model has %d axes" % (s.shape[-1], alphas.size))
    return float(np.sum(np.abs(s) ** alphas)) if s.ndim == 1 else np.sum(np.abs(s) ** alphas, axis=-1)


def _fit_loglog(u, g):
    logu = np.log(u)
    logg = np.log(g)
    coeffs = np.polyfit(logu, logg, 1)
    resid = logg - np.polyval(coeffs, logu)
    return coeffs[0], float(np.max(np.abs(resid)))


def h1_limit(model, t, s, u_ladder=DEFAULT_U_LADDER, locate=None):
    """Classify the limit of g(u) = u^2 (1 - sigma(t + C_t q(u) s)).

    Evaluates g on the ladder of levels and fits the slope of log g
    against log u.  A slope below -0.1 is classified as a zero limit,
    a slope within [-0.1, 0.1] as a finite limit (value = median of the
    upper half of the ladder), a slope above 0.1 as an infinite limit.
    A poor linear fit yields "inconclusive".

    ``locate`` maps a per-axis offset vector to a domain point; the
    default translates t coordinatewise, which is appropriate for box
    domains.
    """
    u_ladder = np.asarray(u_ladder, dtype=float)
    if u_ladder.size < 4 or u_ladder[-1] / u_ladder[0] < 99.0:
        raise ValueError("u ladder needs >= 4 points spanning >= 2 decades")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    cfac = model.correlation.c_factors(t)
    g = np.empty(u_ladder.size)
    for k, u in enumerate(u_ladder):
        offsets = cfac * model.correlation.q(u) * s
        if locate is None:
            base = np.atleast_1d(np.asarray(t, dtype=float)).copy()
            point = base + offsets[: base.size]
            point = float(point[0]) if point.size == 1 else point
        else:
            point = locate(offsets)
        g[k] = u * u * (1.0 - model.variance.sigma_at(point))
    if np.max(np.abs(g)) < 1e-12:
        return LimitClassification("zero", 0.0, float("-inf"), tuple(g))
    # 1 - sigma is computed by cancellation, so values below the double
    # precision floor (relative eps against sigma = 1, amplified by u^2)
    # carry no information.  A resolvable, decreasing prefix that dives
    # under the floor certifies a zero limit; anything else unresolvable
    # stays inconclusive.
    floor = u_ladder**2 * 1e-13
    dead = g <= floor
    if np.all(dead):
        return LimitClassification("zero", 0.0, float("-inf"), tuple(g))
    if np.any(dead):
        k = int(np.argmax(dead))
        head = g[:k]
        if k >= 2 and np.all(dead[k:]) and np.all(np.diff(head) < 0):
            return LimitClassification("zero", 0.0, float("-inf"), tuple(g))
        return LimitClassification("inconclusive", None, float("nan"), tuple(g))
    slope, resid = _fit_loglog(u_ladder, g)
    if resid > 0.3:
        return LimitClassification("inconclusive", None, slope, tuple(g))
    if slope < -0.1:
        return LimitClassification("zero", 0.0, slope, tuple(g))
    if slope > 0.1:
        return LimitClassification("infinite", None, slope, tuple(g))
    value = float(np.median(g[u_ladder >= np.median(u_ladder)]))
    return LimitClassification("finite", value, slope, tuple(g))


_CLASS_TO_TAG = {"zero": "StationaryLike", "finite": "Transition", "infinite": "Talagrand"}


def _component_rho(model, component):
    """Power of u contributed by a component: tangential axes plus the
    Laplace gain of the flatter-than-alpha normal axes."""
    alphas = np.array(model.correlation.alphas)
    rho = 0.0
    chart = model.maxset.charts[component.chart_ids[0]]
    rho += float(np.sum(2.0 / alphas[list(chart.tangent_axes)]))
    form = model.normal_form(component.chart_ids[0])
    if form is not None:
        normal = model.normal_axes(chart)
        for axis, term in zip(normal, form.terms):
            if term.exponent > alphas[axis]:
                rho += 2.0 / alphas[axis] - 2.0 / term.exponent
    return rho


def default_probe_plan(model, signs=True):
    """Probes covering each component, chart and normal direction class."""
    plan = []
    for comp in model.maxset.components:
        for cid in comp.chart_ids:
            chart = model.maxset.charts[cid]
            normal = model.normal_axes(chart)
            if not normal:
                plan.append((comp.label, cid, None, +1.0))
                continue
            form = model.normal_form(cid)
            for j, axis in enumerate(normal):
                two_sided = True if form is None else form.terms[j].two_sided
                dirs = (+1.0, -1.0) if (two_sided and signs) else (-1.0 if chart.boundary else +1.0,)
                for sgn in dirs:
                    plan.append((comp.label, cid, axis, sgn))
    return plan


def classify_regime(model, probe_plan=None, u_ladder=DEFAULT_U_LADDER):
    """Aggregate rescaled variance-limit probes into a Regime.

    Every probe evaluates :func:`h1_limit` at a chart representative
    point along one normal axis.  Components whose probes all share one
    class get that class's tag; anything else is Mixed.  Inconclusive
    probes raise :class:`ClassificationError`.
    """
    if probe_plan is None:
        probe_plan = default_probe_plan(model)
    evidence = []
    bad = []
    for comp_label, cid, axis, sgn in probe_plan:
        chart = model.maxset.charts[cid]
        theta = chart.representative_points(1)[0]
        if axis is None:
            outcome = LimitClassification("zero", 0.0, float("-inf"), ())
        else:
            s = np.zeros(model.d)
            s[axis] = sgn
            locate = None
            if chart.local_point is not None:
                locate = lambda offsets, _c=chart, _t=theta: _c.offset_point(_t, offsets)
            outcome = h1_limit(model, theta, s, u_ladder=u_ladder, locate=locate)
        if outcome.kind == "inconclusive":
            bad.append((comp_label, cid, axis, sgn))
        evidence.append(ProbeResult(comp_label, cid, -1 if axis is None else axis, sgn, outcome))
    if bad:
        raise ClassificationError("inconclusive probes, refine ladder: %r" % (bad,))

    comp_tags = []
    for comp in model.maxset.components:
        kinds = {e.outcome.kind for e in evidence if e.component == comp.label}
        if len(kinds) == 1:
            comp_tags.append((comp.label, _CLASS_TO_TAG[kinds.pop()]))
        else:
            comp_tags.append((comp.label, "Mixed"))
    tags = {t for _, t in comp_tags}
    tag = tags.pop() if len(tags) == 1 else "Mixed"
    order = sorted(
        model.maxset.components, key=lambda c: _component_rho(model, c), reverse=True
    )
    return Regime(tag, tuple(evidence), tuple(comp_tags), tuple(c.label for c in order))


def validate_regular_variation(model, u_ladder=DEFAULT_U_LADDER):
    """Check the fitted log-log slope of every q_i(u) against -2/alpha_i.

    Returns a list of (axis, slope, target) and raises on any slope more
    than 0.05 away from its target.
    """
    u = np.asarray(u_ladder, dtype=float)
    if u[-1] / u[0] < 99.0:
        raise ValueError("u ladder must span >= 2 decades")
    report = []
    for i, alpha in enumerate(model.correlation.alphas):
        qi = u ** (-2.0 / alpha)
        slope, _ = _fit_loglog(u, qi)
        target = -2.0 / alpha
        report.append((i, float(slope), target))
        if abs(slope - target) > 0.05:
            raise ModelError(
                "axis %d: q slope %.4f outside +-0.05 of %.4f" % (i, slope, target)
            )
    return report


def validate_model(model, n_samples=64):
    """Collect contract violations; empty list means the model is valid."""
    problems = []
    corr = model.correlation
    for i, a in enumerate(corr.alphas):
        if not (0.0 < a <= 2.0):
            problems.append("axis %d: alpha out of (0,2]: %r" % (i, a))
    if len(corr.alphas) != model.d:
        problems.append("dimension mismatch: %d alphas for d=%d" % (len(corr.alphas), model.d))

    charts = model.maxset.charts
    forms = model.variance.normal_forms
    if forms and len(forms) != len(charts):
        problems.append("normal_forms count %d != chart count %d" % (len(forms), len(charts)))

    for cid, chart in enumerate(charts):
        try:
            pts = chart.representative_points(3)
        except ModelError as exc:
            problems.append(str(exc))
            continue
        amp_ref = None
        for p in pts:
            amp = corr.amplitude(p)
            if np.any(amp <= 0):
                problems.append("chart %d: nonpositive amplitude at t=%r" % (cid, p))
            if amp_ref is None:
                amp_ref = amp
            sig = model.variance.sigma_at(p)
            if abs(sig - 1.0) > 1e-10:
                problems.append("chart %d: sigma(t)=%r != 1 on maxset at t=%r" % (cid, sig, p))
        form = forms[cid] if forms else None
        normal = model.normal_axes(chart)
        if form is not None and len(form.terms) != len(normal):
            problems.append(
                "chart %d: normal form has %d terms for %d normal axes"
                % (cid, len(form.terms), len(normal))
            )
        # sigma must drop below 1 just off the set along each normal axis
        theta = pts[0]
        for j, axis in enumerate(normal):
            sgn = -1.0 if chart.boundary else 1.0
            offsets = np.zeros(model.d)
            offsets[axis] = sgn * 1e-2
            point = chart.offset_point(theta, offsets)
            if model.variance.sigma_at(point) >= 1.0:
                problems.append(
                    "chart %d: sigma does not drop off the maxset along axis %d" % (cid, axis)
                )

    if corr.full_correlation is not None and model.domain.kind == "box":
        rng = np.random.default_rng(0)
        lo, hi = model.domain.bounds[0]
        pts = rng.uniform(lo, hi, size=n_samples)
        r_diag = np.asarray(corr.full_correlation(pts, pts))
        if np.max(np.abs(r_diag - 1.0)) > 1e-10:
            problems.append("full_correlation r(s,s) != 1")
        pairs = rng.uniform(lo, hi, size=(2, n_samples))
        r_off = np.asarray(corr.full_correlation(pairs[0], pairs[1]))
        if np.max(np.abs(r_off)) > 1.0 + 1e-12:
            problems.append("full_correlation |r| > 1")
    return problems


# ---------------------------------------------------------------------------
# Recipe registry and config plumbing

_RECIPES = {}


def register_recipe(name, builder):
    _RECIPES[name] = builder


def _registry():
    if not _RECIPES:
        from . import zoo  # noqa: F401  (populates the registry on import)
    return _RECIPES


def parse_model_spec(text):
    """Parse an inline recipe string "name:key=value,key=value" to a dict."""
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not _ or not key:
                raise ModelError("bad model parameter %r in %r" % (item, text))
            try:
                num = float(val)
                params[key] = int(num) if num == int(num) and "." not in val and "e" not in val.lower() else num
            except ValueError:
                params[key] = val
    return {"recipe": name, "params": params}


def serialize_model_spec(spec):
    """Canonical inline string for a parsed model spec."""
    params = spec.get("params", {})
    if not params:
        return spec["recipe"]
    body = ",".join("%s=%s" % (k, _fmt_param(params[k])) for k in sorted(params))
    return "%s:%s" % (spec["recipe"], body)


def _fmt_param(v):
    if isinstance(v, float) and v == int(v):
        return "%d" % int(v) if abs(v) < 1e15 else repr(v)
    return repr(v) if not isinstance(v, str) else v


def build_model(config):
    """Build and validate a FieldModel from a config.

    Accepts an inline recipe string ("power:alpha=1,beta=2,a=1"), a dict
    {"recipe": name, "params": {...}}, or a dict with a "model" entry of
    either form (as read from a config file).
    """
    if isinstance(config, str):
        config = parse_model_spec(config)
    if "model" in config and "recipe" not in config:
        inner = config["model"]
        config = parse_model_spec(inner) if isinstance(inner, str) else inner
    recipe = config.get("recipe")
    if recipe is None:
        raise ModelError("config is missing the 'recipe' field")
    registry = _registry()
    if recipe not in registry:
        raise ModelError("unknown recipe %r; known: %s" % (recipe, ", ".join(sorted(registry))))
    try:
        model = registry[recipe](**config.get("params", {}))
    except TypeError as exc:
        raise ModelError("bad parameters for recipe %r: %s" % (recipe, exc))
    problems = validate_model(model)
    if problems:
        raise ModelError("; ".join(problems))
    return model


def load_config(path):
    """Load a JSON run config and check its schema version."""
    with open(path, "r") as fh:
        cfg = json.load(fh)
    version = cfg.get("schema_version")
    if version != 1:
        raise ModelError("unsupported schema_version %r (expected 1)" % (version,))
    return cfg
