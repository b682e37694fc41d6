"""The frozen reference tables agree with a fresh arbitrary-precision derivation."""
import math

import numpy as np
import pytest

import oracles

mp = pytest.importorskip("mpmath")


@pytest.mark.parametrize("c", sorted(oracles.PT_EIGENVALUES, key=lambda z: (z.real, z.imag)))
def test_poschl_teller_table(c):
    lam, values = oracles.pt_oracle(c)
    assert abs(lam - oracles.PT_LAMBDA[c]) <= 1e-15
    assert len(values) == len(oracles.PT_EIGENVALUES[c])
    for a, b in zip(values, oracles.PT_EIGENVALUES[c]):
        assert abs(a - b) <= 1e-15 * max(1, abs(b))
    assert abs(lam * (lam + 1) + c) <= 1e-13


def test_gamma_value():
    assert float(mp.gamma(4.3)) == pytest.approx(oracles.GAMMA_4_3, rel=1e-16)


@pytest.mark.parametrize("s,p", sorted(oracles.QUARTIC_INTEGRALS))
def test_quartic_table(s, p):
    with mp.workdps(30):
        direct = mp.quad(lambda x: (1 + x ** 4) ** (-s * p / 2), [-mp.inf, 0, mp.inf])
    assert float(direct) == pytest.approx(oracles.QUARTIC_INTEGRALS[(s, p)], rel=1e-15)
    assert oracles.quartic_integral(s * p / 2) == pytest.approx(float(direct), rel=1e-14)


def test_dilated_sech_table():
    with mp.workdps(30):
        w = mp.expjpi(mp.mpf(1) / 4)
        f = lambda x: abs(2 / mp.cosh(w * x) ** 2) ** mp.mpf(1.5)
        direct = mp.quad(f, [-mp.inf, -2, 0, 2, mp.inf])
    assert float(direct) == pytest.approx(oracles.SECH2_DILATED_P15, rel=1e-14)


def test_trapezoid_oracle_on_gaussian():
    assert oracles.trapezoid_sinh(lambda x: np.exp(-x * x), n=200_001, T=6) == pytest.approx(math.sqrt(math.pi),
                                                                                            rel=1e-14)


def test_jacobi_oracle_on_known_spectrum():
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12)))
    d = np.arange(12.0) - 5.5
    A = Q @ np.diag(d) @ Q.conj().T
    assert np.allclose(oracles.jacobi_hermitian(A), d, atol=1e-12)
