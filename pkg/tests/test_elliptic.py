import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import E_HALF, K_HALF, agm_k, quad_e, quad_f
from softring.elliptic import EllipticDomainError, ellip_e, ellip_ek, ellip_f, ellip_k

HALF = 1.0 / math.sqrt(2.0)


def test_frozen_oracles_match_live_oracles():
    assert agm_k(HALF) == pytest.approx(K_HALF, abs=1e-15)
    assert quad_e(math.pi / 2, HALF) == pytest.approx(E_HALF, abs=1e-13)


@pytest.mark.parametrize("phi", [math.pi / 2, math.pi / 4])
def test_zero_modulus_is_amplitude(phi):
    assert ellip_f(phi, 0.0) == pytest.approx(phi, abs=1e-15)
    assert ellip_e(phi, 0.0) == pytest.approx(phi, abs=1e-15)


def test_complete_integrals_at_half_square_root():
    assert abs(ellip_k(HALF) - K_HALF) <= 1e-12
    assert abs(ellip_ek(HALF) - E_HALF) <= 1e-12


def test_second_kind_at_unit_modulus_is_one():
    assert ellip_e(math.pi / 2, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_first_kind_diverges_only_at_the_corner():
    with pytest.raises(EllipticDomainError):
        ellip_f(math.pi / 2, 1.0)
    # eta sin(phi) = 1 below pi/2 is still integrable: here the integral is
    # half of int_0^{pi/2} cos(u)^(-1/2) du, a Beta function
    exact = 0.5 * math.sqrt(math.pi) * math.gamma(0.25) / (2.0 * math.gamma(0.75))
    assert ellip_f(math.pi / 4, math.sqrt(2.0)) == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("phi, eta", [(-0.1, 0.5), (math.pi / 2 + 0.1, 0.5), (math.pi / 2, 1.2), (0.3, -0.1)])
def test_domain_errors(phi, eta):
    with pytest.raises(EllipticDomainError):
        ellip_f(phi, eta)
    with pytest.raises(EllipticDomainError):
        ellip_e(phi, eta)


def test_vectorised_matches_scalar():
    phi = np.linspace(0.0, math.pi / 2, 7)
    eta = np.full_like(phi, 0.6)
    assert np.allclose(ellip_f(phi, eta), [ellip_f(p, 0.6) for p in phi], rtol=0, atol=1e-15)


def test_thousand_random_points_against_quadrature():
    rng = np.random.default_rng(12345)
    phi = rng.uniform(0.0, math.pi / 2, 1000)
    reach = 0.999 / np.maximum(np.sin(phi), 1e-12)
    eta = rng.uniform(0.0, 1.0, 1000) * np.minimum(reach, 1.5)
    f = ellip_f(phi, eta)
    e = ellip_e(phi, eta)
    for i in range(1000):
        assert abs(f[i] - quad_f(phi[i], eta[i])) <= 1e-10
        assert abs(e[i] - quad_e(phi[i], eta[i])) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(phi=st.floats(0.05, math.pi / 2), a=st.floats(0.0, 0.98), b=st.floats(0.0, 0.98))
def test_monotone_in_modulus(phi, a, b):
    lo, hi = sorted((a, b))
    s = math.sin(phi)
    lo, hi = lo / s if s > 1 else lo, hi / s if s > 1 else hi
    assert ellip_f(phi, hi) >= ellip_f(phi, lo)
    assert ellip_e(phi, hi) <= ellip_e(phi, lo)


@settings(max_examples=100, deadline=None)
@given(phi=st.floats(0.0, math.pi / 2))
def test_zero_modulus_identity(phi):
    assert ellip_f(phi, 0.0) == pytest.approx(phi, abs=1e-15)
    assert ellip_e(phi, 0.0) == pytest.approx(phi, abs=1e-15)
