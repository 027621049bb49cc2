import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from haxc.errors import CapabilityError, DomainError
from haxc.generators import (Clayton, Gumbel, IndependenceExp, MAX_DERIV_ORDER,
                             log_abs_psi_deriv, log_neg_dpsi_inv, psi, psi_inv)

FAMILIES = [Clayton(4 / 3), Clayton(0.2), Clayton(5.0), Gumbel(0.5), Gumbel(0.93),
            Gumbel(0.2), Gumbel(1.0), IndependenceExp()]


def test_psi_examples():
    assert psi(Clayton(4 / 3), 0.0) == 1.0
    assert_allclose(psi(Gumbel(0.5), 4.0), np.exp(-2), rtol=1e-15)
    assert_allclose(psi(IndependenceExp(), 1.0), np.exp(-1), rtol=1e-15)


def test_psi_inv_examples():
    for g in FAMILIES:
        assert psi_inv(g, 1.0) == 0.0
    assert_allclose(psi_inv(Gumbel(0.5), np.exp(-2)), 4.0, rtol=1e-14)
    assert_allclose(psi_inv(Clayton(2.0), 0.25), 15.0, rtol=1e-14)


def test_log_neg_dpsi_inv_examples():
    assert_allclose(log_neg_dpsi_inv(Clayton(1.0), 0.5), np.log(4), rtol=1e-14)
    assert_allclose(log_neg_dpsi_inv(IndependenceExp(), 0.5), np.log(2), rtol=1e-14)
    assert_allclose(log_neg_dpsi_inv(Gumbel(1.0), np.exp(-1)), 1.0, rtol=1e-14)


def test_log_abs_deriv_examples():
    assert_allclose(log_abs_psi_deriv(Clayton(1.0), 2, 1.0), np.log(2 / 8), rtol=1e-14)
    assert_allclose(log_abs_psi_deriv(IndependenceExp(), 7, 3.5), -3.5)
    assert_allclose(log_abs_psi_deriv(Gumbel(0.5), 1, 1.0), np.log(0.5 * np.exp(-1)), rtol=1e-14)


@pytest.mark.parametrize("g", FAMILIES, ids=repr)
def test_psi_inverse_identity(g):
    u = np.linspace(1e-3, 1 - 1e-3, 401)
    assert_allclose(g.psi(g.psi_inv(u)), u, rtol=1e-12)


@pytest.mark.parametrize("g", FAMILIES, ids=repr)
def test_psi_monotone(g):
    t = np.linspace(0, 20, 500)
    v = g.psi(t)
    assert v[0] == 1.0
    assert np.all(np.diff(v) <= 0)
    assert np.all((v > 0) & (v <= 1))


def _mp_psi(g):
    if isinstance(g, Clayton):
        return lambda t: (1 + t) ** (-1 / mpmath.mpf(g.theta))
    if isinstance(g, Gumbel):
        return lambda t: mpmath.exp(-t ** mpmath.mpf(g.alpha))
    return lambda t: mpmath.exp(-t)


@pytest.mark.parametrize("g", FAMILIES, ids=repr)
def test_derivatives_match_high_precision_differences(g):
    # central differences carried out in 60-digit arithmetic
    f = _mp_psi(g)
    with mpmath.workdps(60):
        for t in (0.05, 0.5, 1.0, 3.0, 12.0):
            for k in range(1, 11):
                ref = mpmath.diff(f, mpmath.mpf(t), k)
                assert ref != 0
                # sign alternation: (-1)^k psi^(k) > 0
                assert (-1) ** k * ref > 0
                got = np.exp(g.log_abs_deriv(k, t))
                assert abs(got / float(abs(ref)) - 1) < 1e-4, (k, t)


def test_gumbel_derivatives_vectorised():
    g = Gumbel(0.4)
    t = np.array([0.1, 1.0, 7.0])
    vec = g.log_abs_deriv(5, t)
    assert vec.shape == (3,)
    assert_allclose(vec, [g.log_abs_deriv(5, x) for x in t])


def test_clayton_extreme_orders_finite():
    assert np.isfinite(Clayton(0.01).log_abs_deriv(12, 1e-8))
    assert np.isfinite(Gumbel(0.05).log_abs_deriv(12, 1e6))


def test_domain_errors():
    with pytest.raises(DomainError):
        Gumbel(0.5).psi(-1.0)
    with pytest.raises(DomainError):
        Clayton(1.0).psi_inv(0.0)
    with pytest.raises(DomainError):
        Clayton(1.0).psi_inv(1.5)
    with pytest.raises(DomainError):
        Gumbel(0.5).log_neg_dpsi_inv(1.0)
    with pytest.raises(DomainError):
        Clayton(-1.0)
    with pytest.raises(DomainError):
        Gumbel(1.5)
    with pytest.raises(CapabilityError):
        Gumbel(0.5).log_abs_deriv(MAX_DERIV_ORDER + 1, 1.0)


def test_kendall_tau_calibration():
    assert_allclose(Clayton.from_tau(0.4).theta, 4 / 3)
    assert_allclose(Clayton.from_tau(0.2).theta, 0.5)
    assert_allclose(Gumbel.from_tau(0.5).alpha, 0.5)
