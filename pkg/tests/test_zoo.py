"""Tests for the model recipes and their reference tail formulas."""

import math

import numpy as np
import pytest
from scipy import special

from excursion.asymptotics import asym_general
from excursion.model import ModelError, build_model, classify_regime, validate_model
from excursion.montecarlo import mc_exceedance
from excursion.simulate import GridSpec
from excursion.specfun import gauss_tail, psi
from excursion.zoo import (
    bessel_asym,
    brownian_sup_exact,
    list_models,
    make_chi_square,
    make_fractional_bessel,
    make_two_point,
)

BUILDABLE = (
    "ou",
    "bm_sup",
    "power:alpha=1,beta=2,a=1",
    "two_point",
    "bessel:d=2",
    "bessel_bridge:d=2",
    "fractional_bessel",
    "chi_square",
)


@pytest.mark.parametrize("spec", BUILDABLE)
def test_recipes_build_and_validate(spec):
    model = build_model(spec)
    assert validate_model(model) == []
    assert model.model_id.startswith(spec.split(":")[0])


def test_registry_lists_every_recipe():
    rows = list_models()
    assert len(rows) == 8
    ids = {row["id"] for row in rows}
    assert ids == {spec.split(":")[0] for spec in BUILDABLE}
    for row in rows:
        assert set(row) == {"id", "description", "regime", "reference"}


def test_regime_tags():
    expected = {
        "ou": "StationaryLike",
        "bm_sup": "Transition",
        "two_point": "Talagrand",
        "bessel:d=2": "Transition",
        "bessel_bridge:d=2": "StationaryLike",
        "power:alpha=1,beta=2,a=1": "StationaryLike",
        "power:alpha=1,beta=1,a=1": "Transition",
        "power:alpha=1.5,beta=0.5,a=1": "Talagrand",
    }
    for spec, tag in expected.items():
        assert classify_regime(build_model(spec)).tag == tag, spec


# ---------------------------------------------------------------------------
# interval models


def test_ou_constant_scales_with_span():
    res = asym_general(build_model("ou"))
    assert res.leading_constant == pytest.approx(1.0, rel=1e-12)
    assert res.u_exponent == pytest.approx(2.0)
    res2 = asym_general(build_model("ou:span=2"))
    assert res2.leading_constant == pytest.approx(2.0, rel=1e-12)


def test_bm_sup_pipeline_reproduces_reflection_constant():
    res = asym_general(build_model("bm_sup"))
    assert res.regime == "Transition"
    assert res.leading_constant == pytest.approx(2.0, rel=1e-12)
    assert res.u_exponent == 0.0
    # 2 psi(u) vs the exact 2 (1 - Phi(u)): the ratio is the psi accuracy
    u = 3.0
    assert brownian_sup_exact(u) / res.evaluate(u) == pytest.approx(
        gauss_tail(u) / psi(u), rel=1e-12
    )


def test_brownian_sup_exact_values():
    assert brownian_sup_exact(0.0) == 1.0
    assert brownian_sup_exact(1.0) == pytest.approx(0.3173105078629141, rel=1e-12)
    vals = brownian_sup_exact(np.array([0.0, 1.0, 2.0]))
    assert vals.shape == (3,)
    assert vals[2] == pytest.approx(2.0 * gauss_tail(2.0), rel=1e-14)
    with pytest.raises(ValueError):
        brownian_sup_exact(-1.0)


def test_two_point_tail_is_twice_psi():
    res = asym_general(build_model("two_point"))
    assert res.regime == "Talagrand"
    assert res.leading_constant == 2.0
    assert res.u_exponent == 0.0
    assert res.evaluate(3.0) == 2.0 * psi(3.0)


def test_two_point_simulation_approaches_the_tail():
    est = mc_exceedance(
        build_model("two_point"), 3.0, grid=GridSpec.uniform(0.0, 1.0, 2049),
        n=30_000, seed=0,
    )
    assert est.p_hat == pytest.approx(0.00293333, abs=1e-7)
    assert 0.8 <= est.p_hat / (2.0 * psi(3.0)) <= 1.1


def test_two_point_parameter_validation():
    with pytest.raises(ModelError, match="beta"):
        make_two_point(beta=1.2)
    with pytest.raises(ModelError, match="ordered"):
        make_two_point(t_left=0.7, t_right=0.3)
    with pytest.raises(ModelError, match="crosses zero"):
        make_two_point(a=5.0)


# ---------------------------------------------------------------------------
# vector-norm (dual sphere) models


def test_bessel_assembly_matches_closed_coefficient():
    for d in (2, 3, 4, 5):
        res = asym_general(build_model("bessel:d=%d" % d))
        u = 3.0
        assert res.evaluate(u) == pytest.approx(bessel_asym(d, u), rel=1e-12), d
        assert res.u_exponent == pytest.approx(d - 1.0)
    assert bessel_asym(2, 3.0) == pytest.approx(2.0 * math.exp(-4.5), rel=1e-12)
    assert bessel_asym(3, 3.0) == pytest.approx(
        2.0 * math.sqrt(2.0 / math.pi) * 3.0 * math.exp(-4.5), rel=1e-12
    )
    with pytest.raises(ModelError):
        bessel_asym(1, 3.0)


def test_bessel_series_oracle_confirms_the_coefficient():
    # first-passage series for the planar Brownian norm: P(sup ||W_2|| < u)
    # = sum_k 2 / (j_k J_1(j_k)) exp(-j_k^2 / (2 u^2)) over zeros of J_0
    jz = special.jn_zeros(0, 400)
    ak = 2.0 / (jz * special.j1(jz))

    def exact_tail(u):
        return 1.0 - float(np.sum(ak * np.exp(-(jz**2) / (2.0 * u * u))))

    assert 0.9999 < exact_tail(0.5) < 1.0
    ratios = [bessel_asym(2, u) / exact_tail(u) for u in (2.5, 3.0, 4.0, 5.0, 6.0)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 1.0) < 0.02
    # a coefficient of sqrt(pi) instead of 2 would sit 11% low forever
    wrong = [math.sqrt(math.pi) * math.exp(-u * u / 2.0) / exact_tail(u) for u in (5.0, 6.0)]
    assert all(abs(w - 1.0) > 0.09 for w in wrong)


def test_bessel_simulation_against_series_oracle():
    est = mc_exceedance(
        build_model("bessel:d=2"), 2.5, grid=GridSpec.uniform(0.0, 1.0, 2049),
        n=20_000, seed=0,
    )
    assert est.p_hat == pytest.approx(0.07725, abs=1e-7)
    jz = special.jn_zeros(0, 400)
    ak = 2.0 / (jz * special.j1(jz))
    exact = 1.0 - float(np.sum(ak * np.exp(-(jz**2) / (2.0 * 2.5 * 2.5))))
    assert 0.85 <= est.p_hat / exact <= 1.05


def test_bessel_bridge_constant():
    res = asym_general(build_model("bessel_bridge:d=2"))
    assert res.regime == "StationaryLike"
    assert res.leading_constant == pytest.approx(2.0 * math.pi, rel=1e-12)
    assert res.u_exponent == pytest.approx(2.0)


def test_fractional_bessel_regimes_and_limits():
    # H = 1/2 is the Brownian case exactly
    half = asym_general(make_fractional_bessel(2, 0.5))
    brown = asym_general(build_model("bessel:d=2"))
    assert half.leading_constant == pytest.approx(brown.leading_constant, rel=1e-12)
    # H > 1/2: the single end point carries the tail, which is the
    # chi_d tail 2^(1-d/2)/Gamma(d/2) u^(d-2) e^(-u^2/2) exactly
    tal = asym_general(make_fractional_bessel(3, 0.75))
    assert tal.regime == "Talagrand"
    coeff = tal.leading_constant / math.sqrt(2.0 * math.pi)
    assert coeff == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-12)
    assert tal.u_exponent == pytest.approx(2.0)
    # H < 1/2 flattens the variance drop relative to the correlation
    assert classify_regime(make_fractional_bessel(2, 0.3)).tag == "StationaryLike"
    with pytest.raises(ModelError, match="H"):
        make_fractional_bessel(2, 1.5)
    with pytest.raises(ModelError, match="d >= 2"):
        make_fractional_bessel(1, 0.5)


def test_chi_square_geometries():
    flat3 = asym_general(make_chi_square((1.0, 1.0, 1.0)))
    assert flat3.regime == "StationaryLike"
    assert flat3.leading_constant == pytest.approx(2.0, rel=1e-12)
    assert flat3.u_exponent == pytest.approx(4.0)

    flat2 = asym_general(make_chi_square((1.0, 1.0)))
    assert flat2.leading_constant == pytest.approx(math.sqrt(2.0 * math.pi), rel=1e-12)
    assert flat2.u_exponent == pytest.approx(3.0)

    ring = asym_general(make_chi_square((1.0, 1.0, 1.0), "peaked"))
    assert ring.leading_constant == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-12)
    assert ring.u_exponent == pytest.approx(3.0)

    poles = asym_general(make_chi_square((2.0, 1.0), "peaked"))
    assert poles.regime == "Mixed"
    assert poles.leading_constant == pytest.approx(
        2.0 * math.sqrt(math.pi) * math.sqrt(4.0 / 3.0), rel=1e-12
    )
    assert poles.u_exponent == pytest.approx(1.0)

    strips = asym_general(make_chi_square((2.0, 1.0)))
    assert strips.regime == "Transition"
    assert strips.leading_constant == pytest.approx(2.0 * math.sqrt(4.0 / 3.0), rel=1e-12)
    assert strips.u_exponent == pytest.approx(2.0)


def test_chi_square_weight_validation():
    with pytest.raises(ModelError, match="two weights"):
        make_chi_square((1.0,))
    with pytest.raises(ModelError, match="positive"):
        make_chi_square((1.0, -1.0))
    with pytest.raises(ModelError, match="leading weight"):
        make_chi_square((1.0, 2.0))
    with pytest.raises(ModelError, match="leading weight"):
        make_chi_square((3.0, 2.0, 1.0))
    with pytest.raises(ModelError, match="sigma_profile"):
        make_chi_square((1.0, 1.0), "linear")


def test_power_family_spans_the_trichotomy():
    for alpha, beta, want in (
        (1.0, 0.5, "Talagrand"),
        (1.0, 1.0, "Transition"),
        (1.0, 2.0, "StationaryLike"),
        (2.0, 2.0, "Transition"),
        (2.0, 3.0, "StationaryLike"),
    ):
        model = build_model("power:alpha=%g,beta=%g,a=1" % (alpha, beta))
        assert asym_general(model).regime == want
