import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dilatlt.constants import MomentOrder
from dilatlt.potentials import (PotentialSpec, StripError, assumption_check, combine, decay_exponent,
                                dilated_abs_power, evaluate_dilated, gaussian, negative_part_power,
                                rational_decay, sech_squared, strip_halfwidth, zero)

betas = st.floats(-1.5, 1.5)
xs = st.floats(-30, 30)


def test_undilated_values():
    assert evaluate_dilated(sech_squared(-2), 0, 0.0) == -2
    assert evaluate_dilated(rational_decay(3, 0.5), 0, 1.0) == pytest.approx(3 / math.sqrt(2), rel=1e-15)
    assert evaluate_dilated(gaussian(1, 2), 0, 1.0) == pytest.approx(math.exp(-2), rel=1e-15)
    assert evaluate_dilated(zero(), 0.3j, 2.0) == 0


def test_sech_no_overflow():
    v = evaluate_dilated(sech_squared(1), 0.5j, np.array([-800.0, 800.0]))
    assert np.all(np.isfinite(v)) and np.all(np.abs(v) < 1e-300)


@given(betas, xs)
def test_sech_matches_cmath(beta, x):
    z = complex(math.cos(beta), math.sin(beta)) * x
    ref = 1 / complex(np.cosh(z)) ** 2 if abs(z.real) < 300 else 0
    got = evaluate_dilated(sech_squared(1), 1j * beta, x)
    assert abs(got - ref) <= 1e-12 * max(1, abs(ref))


@given(betas, xs, st.floats(0.3, 3))
def test_rational_continuation_is_principal(beta, x, s):
    # along the real direction the continued value agrees with the real formula
    z = complex(math.cos(beta), math.sin(beta)) * x
    got = evaluate_dilated(rational_decay(1, s), 1j * beta, x)
    ref = complex(1 + z * z) ** (-s)
    assert abs(got - ref) <= 1e-12 * max(1, abs(ref))


def test_real_dilation_is_substitution():
    spec = combine(sech_squared(-2 + 1j), rational_decay(1, 0.75))
    x = np.linspace(-4, 4, 9)
    assert np.allclose(evaluate_dilated(spec, 0.4, x), evaluate_dilated(spec, 0, math.exp(0.4) * x), rtol=1e-14)


@given(st.floats(0.01, 1.5), st.floats(0, 20))
def test_conjugate_symmetry_for_real_profile(beta, x):
    spec = sech_squared(-3)
    a = evaluate_dilated(spec, 1j * beta, x)
    b = evaluate_dilated(spec, -1j * beta, x)
    assert abs(a - b.conjugate()) <= 1e-13 * max(1, abs(a))


def test_strip():
    assert strip_halfwidth(sech_squared(1)) == math.pi / 2
    assert strip_halfwidth(gaussian(1)) == math.pi / 4
    assert strip_halfwidth(zero()) == math.inf
    with pytest.raises(StripError):
        evaluate_dilated(rational_decay(1, 1), 1.6j, 0.0)
    with pytest.raises(StripError):
        dilated_abs_power(gaussian(1), math.pi / 4, 1.0)


def test_parameter_validation():
    with pytest.raises(ValueError):
        rational_decay(1, 0)
    with pytest.raises(ValueError):
        gaussian(1, -1)


def test_round_trip_dict():
    spec = combine(sech_squared(-2 - 2j), rational_decay(1.5, 0.75), gaussian(0.5j, 2))
    back = PotentialSpec.from_dict(spec.to_dict())
    assert back == spec
    with pytest.raises(ValueError):
        PotentialSpec.from_dict({"terms": [{"family": "square_well", "c": 1}]})


def test_scaled_and_flags():
    spec = sech_squared(-2).scaled(0.5)
    assert spec.terms[0].c == -1
    assert spec.is_real and not sech_squared(1j).is_real
    assert zero().is_zero and sech_squared(0).is_zero


def test_negative_part():
    f = negative_part_power(combine(sech_squared(-2), rational_decay(3, 1)), 1.5)
    x = np.array([0.0, 10.0])
    assert f(x)[0] == pytest.approx(0.0)  # -2 + 3 > 0
    with pytest.raises(ValueError):
        negative_part_power(sech_squared(1j), 1.0)


def test_decay_and_admissibility():
    assert decay_exponent(rational_decay(1, 0.75), 2.0) == 3.0
    assert decay_exponent(sech_squared(1), 2.0) is None
    assert assumption_check(rational_decay(1, 0.75), MomentOrder(1)).ok
    rep = assumption_check(rational_decay(1, 0.25), MomentOrder(1))
    assert not rep.lp_ok
    rep = assumption_check(gaussian(1), MomentOrder(1))
    assert rep.lp_ok and not rep.strip_ok_for_theorem and not rep.ok
