import math

import pytest
from hypothesis import given, strategies as st

from dilatlt.constants import (CLASSICAL_SHARP, DLL_BOUND, MomentOrder, ScopeError, classical_constant,
                               cone_prefactor, flls_constant, gamma_fn, lt_constant)
from oracles import GAMMA_4_3


def test_gamma_examples():
    assert gamma_fn(2) == 1.0
    assert gamma_fn(2.5) == pytest.approx(3 * math.sqrt(math.pi) / 4, rel=1e-15)
    assert gamma_fn(4.3) == pytest.approx(GAMMA_4_3, rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_gamma_domain(x):
    with pytest.raises(ValueError):
        gamma_fn(x)


@given(st.floats(0.5, 20.0))
def test_gamma_recursion(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-12)


def test_gamma_against_mpmath_sweep():
    mp = pytest.importorskip("mpmath")
    for x in [0.5, 0.75, 1.3, 3.7, 10.25, 27.5, 50.0]:
        assert gamma_fn(x) == pytest.approx(float(mp.gamma(x)), rel=1e-12)


def test_classical_constant_examples():
    assert classical_constant(MomentOrder(1, 1)) == pytest.approx(2 / (3 * math.pi), rel=1e-14)
    assert classical_constant(MomentOrder(1.5, 1)) == pytest.approx(3 / 16, rel=1e-15)
    assert classical_constant(MomentOrder(0, 3)) == pytest.approx(1 / (6 * math.pi ** 2), rel=1e-14)


def test_lt_constant_modes():
    c = lt_constant(MomentOrder(1.5, 1))
    assert c.mode == CLASSICAL_SHARP and c.value == pytest.approx(3 / 16, rel=1e-15)
    c = lt_constant(MomentOrder(1, 1))
    assert c.mode == DLL_BOUND
    assert c.value == pytest.approx(2 / (3 * math.sqrt(3)), rel=1e-14)
    assert c.value == math.pi / math.sqrt(3) * classical_constant(MomentOrder(1, 1))
    c = lt_constant(MomentOrder(2, 2))
    assert c.mode == CLASSICAL_SHARP and c.value == classical_constant(MomentOrder(2, 2))


def test_lt_constant_rejects_small_gamma():
    with pytest.raises(ScopeError):
        lt_constant(MomentOrder(0.5, 1))


def test_flls_examples():
    assert flls_constant(MomentOrder(1.5, 1)) == 0.75
    assert classical_constant(MomentOrder(1.5, 1)) == 3 / 16
    assert flls_constant(MomentOrder(1, 1)) == pytest.approx(2 ** 1.75 * 2 / (3 * math.sqrt(3)), rel=1e-14)
    assert flls_constant(MomentOrder(1, 1)) == pytest.approx(1.2946, abs=5e-5)
    assert flls_constant(MomentOrder(1, 2)) == pytest.approx(4 * lt_constant(MomentOrder(1, 2)).value, rel=1e-15)


def test_cone_prefactor_examples():
    o = MomentOrder(1, 1)
    assert cone_prefactor(o, math.inf) == flls_constant(o)
    assert cone_prefactor(o, 2) == pytest.approx(flls_constant(o) * 2 ** 1.5, rel=1e-14)
    assert cone_prefactor(MomentOrder(1.5, 1), 1) == pytest.approx(0.75 * 9, rel=1e-14)
    with pytest.raises(ValueError):
        cone_prefactor(o, 0)


@pytest.mark.parametrize("gamma", [1, 1.5, 2])
def test_classical_decreasing_in_dimension(gamma):
    vals = [classical_constant(MomentOrder(gamma, d)) for d in (1, 2, 3)]
    assert vals[0] > vals[1] > vals[2]


@given(st.floats(1.0, 10.0), st.integers(1, 4))
def test_lt_at_least_classical(gamma, d):
    o = MomentOrder(gamma, d)
    assert lt_constant(o).value >= classical_constant(o)


@given(st.floats(1.0, 4.0), st.floats(0.01, 100.0))
def test_cone_decreasing_in_kappa(gamma, kappa):
    o = MomentOrder(gamma, 1)
    assert cone_prefactor(o, kappa) > cone_prefactor(o, kappa * 1.5) > flls_constant(o)


def test_cone_limit():
    o = MomentOrder(1, 1)
    assert cone_prefactor(o, 1e12) == pytest.approx(flls_constant(o), rel=1e-11)


def test_moment_order_validation():
    with pytest.raises(ScopeError):
        MomentOrder(1, 0)
    with pytest.raises(ScopeError):
        MomentOrder(-1, 1)
    assert MomentOrder(1.5, 1).p == 2.0


@given(st.integers(0, 40), st.integers(1, 6))
def test_exact_path_agrees_with_float_gamma(twice_gamma, d):
    g = twice_gamma / 2
    ref = gamma_fn(g + 1) / (2 ** d * math.pi ** (d / 2) * gamma_fn(g + d / 2 + 1))
    assert classical_constant(MomentOrder(g, d)) == pytest.approx(ref, rel=1e-13)
