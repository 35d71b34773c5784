"""Piecewise nonlinearities: evaluation, antiderivatives, splicing, JSON."""
from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from radialshoot.errors import ContinuityGap, DomainExceeded, OrderingViolated
from radialshoot.nonlinearity import (LinearBridge, NonlinearitySpec, Piece,
                                      Power, PowerMinusLinear, PolynomialExpr,
                                      Scaled, build_jump_family,
                                      polynomial_spec, power_spec,
                                      power_minus_linear_spec, scaled_spec)

from oracles import poly_antideriv, poly_eval, poly_from_roots


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

def test_power_values_and_antiderivative():
    spec = power_spec(3.0)
    s = np.array([0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(spec.f(s), s ** 3)
    np.testing.assert_allclose(spec.F(s), s ** 4 / 4.0)
    np.testing.assert_allclose(spec.f_prime(s), 3.0 * s ** 2)


def test_power_minus_linear_exact_fractions():
    spec = power_minus_linear_spec(2.0)
    # F(3) = 27/3 - 9/2 = 9/2 exactly
    assert spec.F(3.0) == float(Fraction(9, 2))
    assert spec.f(3.0) == 6.0
    # 1/3 - 1/2 rounds once per operation: allow an ulp
    assert spec.F(1.0) == pytest.approx(float(Fraction(-1, 6)), rel=4e-16)


def test_odd_extension():
    spec = power_minus_linear_spec(2.0)
    s = np.linspace(0.1, 5.0, 23)
    np.testing.assert_array_equal(spec.f(-s), -np.asarray(spec.f(s)))
    # F is even for odd f
    np.testing.assert_array_equal(spec.F(-s), np.asarray(spec.F(s)))
    np.testing.assert_array_equal(spec.f_prime(-s), np.asarray(spec.f_prime(s)))


def test_antiderivative_matches_quadrature():
    spec = build_jump_family(
        [power_minus_linear_spec(2.0), power_spec(2.0)],
        [4.0], [0.25], [9.0])
    for s in (0.7, 2.0, 3.9, 4.1, 4.6, 7.0):
        val, err = quad(lambda t: float(spec.f(t)), 0.0, s, limit=200)
        assert abs(float(spec.F(s)) - val) < 1e-9 + 10.0 * err


def test_polynomial_matches_fraction_oracle():
    # root at 0 keeps f(0) = 0, as every odd nonlinearity must
    roots = [Fraction(0), Fraction(1, 2), Fraction(2), Fraction(7, 2)]
    coeffs = poly_from_roots(roots, Fraction(1, 4))
    spec = polynomial_spec([float(c) for c in coeffs])
    anti = poly_antideriv(coeffs)
    for s in (Fraction(1, 4), Fraction(1), Fraction(3), Fraction(5)):
        assert float(spec.f(float(s))) == pytest.approx(
            float(poly_eval(coeffs, s)), rel=1e-15, abs=1e-15)
        assert float(spec.F(float(s))) == pytest.approx(
            float(poly_eval(anti, s)), rel=1e-14, abs=1e-15)


def test_scaled_spec_is_pointwise_multiple():
    base = power_minus_linear_spec(2.0)
    spec = scaled_spec(base, 100.0)
    s = np.linspace(0.0, 6.0, 17)
    np.testing.assert_allclose(spec.f(s), 100.0 * np.asarray(base.f(s)),
                               rtol=1e-15)
    np.testing.assert_allclose(spec.F(s), 100.0 * np.asarray(base.F(s)),
                               rtol=1e-15)


# ---------------------------------------------------------------------------
# spec validation
# ---------------------------------------------------------------------------

def test_pieces_must_tile_without_gaps():
    with pytest.raises(ValueError):
        NonlinearitySpec((Piece(0.0, 1.0, Power(2.0)),
                          Piece(1.5, 2.0, Power(2.0))))


def test_pieces_must_join_continuously():
    # s^2 ends at 1 with value 1; a bridge starting at value 2 is a jump
    with pytest.raises(ContinuityGap):
        NonlinearitySpec((Piece(0.0, 1.0, Power(2.0)),
                          Piece(1.0, 2.0, LinearBridge(1.0, 2.0, 2.0, 3.0))))


def test_domain_is_enforced():
    spec = build_jump_family([power_minus_linear_spec(2.0), power_spec(2.0)],
                             [4.0], [0.25], [9.0])
    assert math.isinf(spec.domain_top)
    bounded = NonlinearitySpec((Piece(0.0, 2.0, Power(2.0)),))
    with pytest.raises(DomainExceeded):
        bounded.f(2.5)


# ---------------------------------------------------------------------------
# jump families
# ---------------------------------------------------------------------------

def test_jump_family_layout_and_continuity():
    f1 = power_minus_linear_spec(2.0)
    donor = power_spec(2.0)
    fam = build_jump_family([f1, donor], [8.772], [0.1], [10.0])
    # base piece, bridge, scaled donor
    kinds = [p.form.to_dict()["kind"] for p in fam.pieces]
    assert kinds == ["power_minus_linear", "linear_bridge", "scaled"]
    assert fam.pieces[1].lo == 8.772
    assert fam.pieces[1].hi == pytest.approx(8.872)
    # continuity across both joints
    for joint in (8.772, 8.872):
        below = float(fam.f(joint - 1e-12))
        above = float(fam.f(joint + 1e-12))
        assert above == pytest.approx(below, rel=1e-6)
    # the donor tail really is A^2 * donor
    s = 10.0
    assert float(fam.f(s)) == pytest.approx(10.0 * float(donor.f(s)),
                                            rel=1e-15)


def test_jump_family_rejects_overlapping_bridges():
    f1 = power_minus_linear_spec(2.0)
    donor = power_spec(2.0)
    with pytest.raises(OrderingViolated):
        # second junction sits inside the first bridge
        build_jump_family([f1, donor, donor], [5.0, 5.05], [0.1, 0.1],
                          [10.0, 0.1])


def test_jump_family_requires_positive_donors_at_junctions():
    f1 = power_minus_linear_spec(2.0)
    donor = power_minus_linear_spec(2.0)
    with pytest.raises(ValueError):
        # donor f(s) = s^2 - s is negative at 0.5: no valid splice there
        build_jump_family([f1, donor], [0.5], [0.1], [10.0])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_round_trip_simple_and_spliced():
    specs = [
        power_spec(4.0),
        power_minus_linear_spec(2.0),
        polynomial_spec([0.0, -1.0, 1.0]),
        build_jump_family([power_minus_linear_spec(2.0), power_spec(2.0)],
                          [8.772], [0.1], [10.0]),
    ]
    for spec in specs:
        again = NonlinearitySpec.from_json(spec.to_json())
        assert again == spec


def test_json_document_shape():
    doc = json.loads(power_minus_linear_spec(2.0).to_json())
    assert doc["domain_top"] is None
    assert doc["pieces"][0]["lo"] == 0.0
    assert doc["pieces"][0]["form"] == {"kind": "power_minus_linear",
                                        "p": 2.0}


def test_from_dict_rejects_inconsistent_top():
    doc = {"pieces": [{"lo": 0.0, "hi": 2.0, "form": {"kind": "power",
                                                      "p": 2.0}}],
           "domain_top": 3.0}
    with pytest.raises(ValueError):
        NonlinearitySpec.from_dict(doc)
