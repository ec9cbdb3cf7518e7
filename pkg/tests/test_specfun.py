"""Tests for the scalar special functions and Laplace-integral helpers."""

import math

import numpy as np
import pytest

from excursion.specfun import (
    PowerLawSpec,
    gauss_tail,
    laplace_numeric,
    laplace_powerlaw_asym,
    power_law_f,
    psi,
)


def test_psi_reference_values():
    assert psi(1.0) == pytest.approx(0.241970724519143, rel=1e-12)
    assert psi(2.0) == pytest.approx(0.026995483256594, rel=1e-12)
    assert psi(3.0) == pytest.approx(0.00147728280397934, rel=1e-12)


def test_psi_vectorized_matches_scalar():
    u = np.array([0.5, 1.0, 2.5, 7.0])
    out = psi(u)
    assert out.shape == u.shape
    for i, ui in enumerate(u):
        assert out[i] == psi(float(ui))


def test_psi_rejects_nonpositive_levels():
    with pytest.raises(ValueError):
        psi(0.0)
    with pytest.raises(ValueError):
        psi(-2.0)
    with pytest.raises(ValueError):
        psi(np.array([1.0, 0.0]))


def test_gauss_tail_reference_values():
    assert gauss_tail(0.0) == 0.5
    assert gauss_tail(3.0) == pytest.approx(0.0013498980316301, rel=1e-12)
    # symmetry of the normal law
    assert gauss_tail(-1.3) == pytest.approx(1.0 - gauss_tail(1.3), rel=1e-14)


def test_gauss_tail_approaches_psi():
    # gauss_tail(u) = psi(u) (1 + O(u^-2)); at u = 8 they agree to 2%
    assert gauss_tail(8.0) / psi(8.0) == pytest.approx(1.0, abs=0.02)


def test_psi_dominates_gauss_tail():
    u = np.linspace(0.2, 10.0, 50)
    assert np.all(psi(u) > gauss_tail(u))


def test_laplace_numeric_volume_when_f_vanishes():
    value, err = laplace_numeric(lambda s: 0.0, ((0, 1), (0, 1)), 5.0)
    assert value == pytest.approx(1.0, rel=1e-10)
    assert err < 1e-8


def test_laplace_numeric_gaussian_axis():
    value, _ = laplace_numeric(lambda s: s**2, (-1, 1), 100.0)
    oracle = math.sqrt(math.pi) / 10.0 * math.erf(10.0)
    assert value == pytest.approx(oracle, rel=1e-8)
    assert value == pytest.approx(0.177245385090552, rel=1e-10)


def test_laplace_numeric_exponential_axis():
    value, _ = laplace_numeric(lambda s: abs(s), (-1, 1), 10.0)
    assert value == pytest.approx(2.0 * (1.0 - math.exp(-10.0)) / 10.0, rel=1e-8)
    assert value == pytest.approx(0.199990920014048, rel=1e-10)


def test_laplace_numeric_rejects_bad_inputs():
    with pytest.raises(ValueError):
        laplace_numeric(lambda s: abs(s), (-1, 1), 0.0)
    with pytest.raises(ValueError):
        laplace_numeric(lambda s: float("nan"), (-1, 1), 10.0)


def test_powerlaw_spec_validation():
    with pytest.raises(ValueError):
        PowerLawSpec(())
    with pytest.raises(ValueError):
        PowerLawSpec(((0.0, 1.0, True),))
    with pytest.raises(ValueError):
        PowerLawSpec(((1.0, -2.0, True),))


def test_powerlaw_asym_reference_values():
    two_quad = PowerLawSpec(((1.0, 2.0, True),))
    assert laplace_powerlaw_asym(two_quad, 1.0) == pytest.approx(
        math.sqrt(math.pi), rel=1e-12
    )
    two_lin = PowerLawSpec(((2.0, 1.0, True),))
    assert laplace_powerlaw_asym(two_lin, 10.0) == pytest.approx(0.1, rel=1e-12)
    one_lin = PowerLawSpec(((1.0, 1.0, False),))
    assert laplace_powerlaw_asym(one_lin, 10.0) == pytest.approx(0.1, rel=1e-12)


def test_powerlaw_asym_factorizes_over_axes():
    spec = PowerLawSpec(((1.0, 1.0, True), (1.0, 2.0, True)))
    value = laplace_powerlaw_asym(spec, 1e4)
    assert value == pytest.approx(3.54490770181103e-06, rel=1e-12)
    parts = [
        laplace_powerlaw_asym(PowerLawSpec((term,)), 1e4) for term in spec.terms
    ]
    assert value == pytest.approx(parts[0] * parts[1], rel=1e-12)


def test_powerlaw_asym_matches_numeric_integral():
    spec = PowerLawSpec(((1.0, 1.0, True), (1.0, 2.0, True)))
    numeric, _ = laplace_numeric(power_law_f(spec), ((-0.5, 0.5), (-0.5, 0.5)), 1e3)
    assert numeric == pytest.approx(laplace_powerlaw_asym(spec, 1e3), rel=1e-6)


def test_powerlaw_asym_sharp_concentration():
    # at lam = 1e6 with beta = 1/2 the mass sits in a window of width
    # ~1e-12; the quadrature must still find it
    spec = PowerLawSpec(((2.5, 0.5, True),))
    numeric, _ = laplace_numeric(power_law_f(spec), (-2, 2), 1e6)
    assert numeric == pytest.approx(laplace_powerlaw_asym(spec, 1e6), rel=1e-9)


def test_powerlaw_asym_monotone_approach():
    # the relative gap between the numeric integral and the asymptotic
    # formula shrinks as lam grows.  On the box [-c, c] with f = |s| the
    # gap is exp(-lam c) exactly, which spans twelve orders of magnitude
    # over the lam grid; the box holds the effective support (several
    # decay lengths) already at the smallest lam.
    spec = PowerLawSpec(((1.0, 1.0, True),))
    f = power_law_f(spec)
    c = 0.026
    gaps = []
    for lam in (1e2, 1e3, 1e4):
        numeric, _ = laplace_numeric(f, (-c, c), lam)
        gaps.append(abs(numeric / laplace_powerlaw_asym(spec, lam) - 1.0))
    assert gaps[0] == pytest.approx(math.exp(-1e2 * c), rel=1e-6)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.01


def test_power_law_f_evaluates_terms():
    f = power_law_f(PowerLawSpec(((2.0, 1.5, True),)))
    assert f(0.5) == pytest.approx(2.0 * 0.5**1.5, rel=1e-14)
    g = power_law_f(PowerLawSpec(((1.0, 1.0, True), (1.0, 2.0, True))))
    assert g(np.array([0.5, 0.5])) == pytest.approx(0.5 + 0.25, rel=1e-14)
