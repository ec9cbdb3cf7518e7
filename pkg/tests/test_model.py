"""Tests for the model data structures, probes and regime classification."""

import numpy as np
import pytest

from excursion.model import (
    Chart,
    CorrelationStructure,
    Domain,
    FieldModel,
    MaxSet,
    ModelError,
    VarianceProfile,
    build_model,
    classify_regime,
    h1_limit,
    h_eval,
    load_config,
    parse_model_spec,
    serialize_model_spec,
    validate_model,
    validate_regular_variation,
)


def _flat_interval_model(alphas=(1.0,), amplitudes=(1.0,), sigma=None, forms=()):
    d = len(alphas)
    chart = Chart("box", tangent_axes=tuple(range(d)), box=((0.0, 1.0),) * d)
    if sigma is not None:
        chart = Chart("points", points=(0.5,))
    return FieldModel(
        d=d,
        domain=Domain("box", ((0.0, 1.0),) * d),
        correlation=CorrelationStructure(alphas, amplitudes),
        variance=VarianceProfile(sigma, forms),
        maxset=MaxSet("interval", 0 if sigma is not None else d, (chart,)),
    )


def test_build_ou_model():
    model = build_model("ou")
    assert model.d == 1
    assert model.domain.kind == "box"
    assert model.correlation.alphas == (1.0,)
    assert validate_model(model) == []
    assert classify_regime(model).tag == "StationaryLike"


def test_build_rejects_alpha_out_of_range():
    with pytest.raises(ModelError, match="alpha"):
        build_model("power:alpha=2.5,beta=2,a=1")
    # raw structures get the same check from the validator
    model = _flat_interval_model(alphas=(2.5,), amplitudes=(1.0,))
    assert any("alpha out of (0,2]" in p for p in validate_model(model))


def test_build_rejects_unknown_recipe():
    with pytest.raises(ModelError, match="unknown recipe"):
        build_model("no_such_model")


def test_bessel_structure():
    model = build_model("bessel:d=2")
    assert model.d == 2
    assert model.domain.kind == "cylinder"
    assert model.domain.sphere_dim == 2
    assert model.maxset.dim == 1
    assert model.correlation.alphas == (1.0, 2.0)


def test_h_eval_values():
    model = _flat_interval_model(alphas=(1.0, 2.0), amplitudes=(1.0, 1.0))
    assert h_eval(model, (0.0, 0.0)) == 0.0
    assert h_eval(model, (2.0, 3.0)) == pytest.approx(11.0, rel=1e-14)
    # evenness and per-axis scaling
    assert h_eval(model, (-2.0, -3.0)) == h_eval(model, (2.0, 3.0))
    lam = 1.7
    assert h_eval(model, (lam * 2.0, 0.0)) == pytest.approx(
        lam * h_eval(model, (2.0, 0.0)), rel=1e-14
    )
    assert h_eval(model, (0.0, lam * 3.0)) == pytest.approx(
        lam**2 * h_eval(model, (0.0, 3.0)), rel=1e-14
    )


def test_h_eval_log_slope_is_min_alpha():
    # along the diagonal the small-s behavior is governed by the
    # smallest exponent
    model = _flat_interval_model(alphas=(0.5, 2.0), amplitudes=(1.0, 1.0))
    eps = np.geomspace(1e-6, 1e-4, 5)
    vals = np.array([h_eval(model, (e, e)) for e in eps])
    slope = np.polyfit(np.log(eps), np.log(vals), 1)[0]
    assert slope == pytest.approx(0.5, abs=1e-3)


def test_h_eval_rejects_wrong_dimension():
    model = _flat_interval_model(alphas=(1.0, 2.0), amplitudes=(1.0, 1.0))
    with pytest.raises(ValueError):
        h_eval(model, (1.0,))


def test_h1_limit_constant_sigma_is_zero_class():
    model = build_model("ou")
    out = h1_limit(model, 0.5, 1.0)
    assert out.kind == "zero"
    assert out.value == 0.0


def test_h1_limit_zero_class_when_beta_exceeds_alpha():
    model = build_model("power:alpha=1,beta=2,a=1")
    out = h1_limit(model, 0.5, 1.0)
    assert out.kind == "zero"


def test_h1_limit_exact_finite_value():
    # sigma = 1 - |t - 1/2| with alpha = 1 gives g(u) = |s| at every
    # level, so the fitted limit is exact
    model = _flat_interval_model(
        alphas=(1.0,), sigma=lambda t: 1.0 - abs(t - 0.5)
    )
    out = h1_limit(model, 0.5, 2.5)
    assert out.kind == "finite"
    assert out.value == pytest.approx(2.5, rel=1e-12)
    out = h1_limit(model, 0.5, -1.0)
    assert out.value == pytest.approx(1.0, rel=1e-12)


def test_h1_limit_infinite_class():
    model = build_model("power:alpha=1,beta=0.5,a=1")
    out = h1_limit(model, 0.5, 1.0)
    assert out.kind == "infinite"


def test_h1_limit_rejects_short_ladder():
    model = build_model("ou")
    with pytest.raises(ValueError):
        h1_limit(model, 0.5, 1.0, u_ladder=(5.0, 10.0, 20.0))
    with pytest.raises(ValueError):
        h1_limit(model, 0.5, 1.0, u_ladder=(5.0, 6.0, 7.0, 8.0))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
def test_classification_grid_matches_exponent_sign(alpha, beta):
    model = build_model("power:alpha=%g,beta=%g,a=1.0" % (alpha, beta))
    tag = classify_regime(model).tag
    if beta > alpha:
        assert tag == "StationaryLike"
    elif beta == alpha:
        assert tag == "Transition"
    else:
        assert tag == "Talagrand"


def test_classification_carries_evidence():
    regime = classify_regime(build_model("power:alpha=1,beta=1,a=2"))
    assert regime.tag == "Transition"
    assert regime.component_tags == (("M", "Transition"),)
    assert len(regime.evidence) == 2  # interior point, both directions
    for probe in regime.evidence:
        assert probe.outcome.kind == "finite"
        assert probe.outcome.value == pytest.approx(2.0, rel=0.05)


def test_regular_variation_slopes():
    model = _flat_interval_model(alphas=(1.0, 2.0), amplitudes=(1.0, 1.0))
    report = validate_regular_variation(model)
    assert [axis for axis, _, _ in report] == [0, 1]
    slopes = [slope for _, slope, _ in report]
    assert slopes[0] == pytest.approx(-2.0, abs=0.05)
    assert slopes[1] == pytest.approx(-1.0, abs=0.05)


def test_regular_variation_needs_two_decades():
    model = build_model("ou")
    with pytest.raises(ValueError):
        validate_regular_variation(model, u_ladder=np.geomspace(5, 50, 5))


def test_parse_round_trip():
    spec = parse_model_spec("power:alpha=1,beta=2,a=1.5")
    assert spec["recipe"] == "power"
    assert spec["params"] == {"alpha": 1, "beta": 2, "a": 1.5}
    text = serialize_model_spec(spec)
    assert parse_model_spec(text) == spec
    model = build_model(spec)
    assert model.correlation.alphas == (1.0,)


def test_parse_rejects_malformed_params():
    with pytest.raises(ModelError):
        parse_model_spec("power:alpha")
    with pytest.raises(ModelError):
        parse_model_spec("power:=1")


def test_build_accepts_config_dict_forms():
    direct = build_model({"recipe": "ou", "params": {"span": 2.0}})
    nested = build_model({"model": "ou:span=2"})
    assert direct.model_id == nested.model_id
    assert direct.domain.bounds == ((0.0, 2.0),)


def test_build_rejects_bad_recipe_params():
    with pytest.raises(ModelError, match="bad parameters"):
        build_model({"recipe": "ou", "params": {"nonsense": 1.0}})


def test_validate_detects_sigma_not_one_on_maxset():
    model = _flat_interval_model(
        alphas=(1.0,), sigma=lambda t: 0.9 - abs(t - 0.5)
    )
    problems = validate_model(model)
    assert any("sigma" in p for p in problems)


def test_validate_detects_sigma_not_dropping():
    # claims a point maximizer but sigma stays at 1 nearby
    model = _flat_interval_model(alphas=(1.0,), sigma=lambda t: 1.0)
    problems = validate_model(model)
    assert any("does not drop" in p for p in problems)


def test_component_order_is_validated():
    from excursion.model import Component

    charts = (
        Chart("box", tangent_axes=(0,), box=((0.0, 1.0),)),
        Chart("points", points=(0.5,)),
    )
    with pytest.raises(ModelError, match="nondecreasing"):
        MaxSet(
            "mixed",
            1,
            charts,
            components=(Component("a", (0,), 1), Component("b", (1,), 0)),
        )


def test_load_config_checks_schema_version(tmp_path):
    good = tmp_path / "good.json"
    good.write_text('{"schema_version": 1, "model": "ou"}')
    cfg = load_config(str(good))
    assert cfg["model"] == "ou"
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 2, "model": "ou"}')
    with pytest.raises(ModelError, match="schema_version"):
        load_config(str(bad))
