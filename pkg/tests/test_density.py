import itertools

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import stirling2

from haxc.archimax import cdf_axc
from haxc.density import (axc_density, axc_log_density, enumerate_partitions,
                          gumbel_partition_coefficients, gumbel_stdf_density_fastpath)
from haxc.errors import CapabilityError, DomainError
from haxc.evc import evc_cdf
from haxc.generators import Clayton, Gumbel, IndependenceExp
from haxc.hierarchy import HierarchyTree
from haxc.stdf import (GumbelStdf, HuslerReissStdf, MaxStdf, NegativeLogisticStdf,
                       NestedGumbelStdf, SumStdf, falling_factorial)


def mixed_fd(f, u, h, richardson=False):
    """Central mixed difference of f over all coordinates."""
    u = np.asarray(u, dtype=float)
    d = u.size

    def central(hh):
        total = 0.0
        for signs in itertools.product((1, -1), repeat=d):
            total += np.prod(signs) * f(u + hh * np.array(signs))
        return total / (2 * hh) ** d

    if richardson:
        return (4 * central(h / 2) - central(h)) / 3
    return central(h)


@pytest.mark.parametrize("d", range(1, 8))
def test_partition_counts(d):
    parts = list(enumerate_partitions(d))
    assert len(parts) == int(mpmath.bell(d))
    for k in range(1, d + 1):
        assert sum(1 for kk, _ in parts if kk == k) == round(stirling2(d, k, exact=True))
    seen = set()
    for k, blocks in parts:
        assert len(blocks) == k
        assert sorted(j for b in blocks for j in b) == list(range(d))
        seen.add(frozenset(frozenset(b) for b in blocks))
    assert len(seen) == len(parts)
    ks = [k for k, _ in parts]
    assert ks == sorted(ks)


def test_partition_dim_cap():
    with pytest.raises(CapabilityError):
        next(enumerate_partitions(13))
    with pytest.raises(DomainError):
        next(enumerate_partitions(0))


def test_clayton_ac_density():
    # bivariate Clayton theta = 1 at (0.5, 0.5): 2 * 16 / 27
    assert_allclose(axc_log_density(Clayton(1), SumStdf(2), [0.5, 0.5]), np.log(32 / 27),
                    rtol=1e-13)


@pytest.mark.parametrize("theta", [0.5, 4 / 3, 3.0])
def test_ac_density_closed_form(theta):
    u = np.random.default_rng(3).uniform(0.05, 0.95, size=(10, 3))
    psi = Clayton(theta)
    t = psi.psi_inv(u).sum(axis=1)
    # d-th derivative of (1 + t)^(-1/theta) times prod (-psi^{-1})'
    ref = (np.log((1 / theta) * (1 / theta + 1) * (1 / theta + 2)) - (1 / theta + 3) * np.log1p(t)
           + np.sum(np.log(theta) - (theta + 1) * np.log(u), axis=1))
    assert_allclose(axc_log_density(psi, SumStdf(3), u), ref, rtol=1e-10)


def test_evc_density_gumbel_closed_form():
    # bivariate Gumbel EVC density
    a = 0.5
    u = np.array([[0.5, 0.5], [0.2, 0.7], [0.9, 0.35]])
    x = -np.log(u)
    s = np.sum(x ** (1 / a), axis=1)
    ell = s ** a
    dx = (x[:, 0] * x[:, 1]) ** (1 / a - 1)
    ref = np.exp(-ell) / (u[:, 0] * u[:, 1]) * dx * (s ** (2 * a - 2) + (1 / a - 1) * s ** (a - 2))
    assert_allclose(axc_density(IndependenceExp(), GumbelStdf(a, 2), u), ref, rtol=1e-10)


def test_evc_density_fd():
    ell = GumbelStdf(0.5, 2)
    c = axc_density(IndependenceExp(), ell, [0.5, 0.5])
    assert_allclose(c, mixed_fd(lambda v: evc_cdf(ell, v), [0.5, 0.5], 1e-4), rtol=1e-4)


@pytest.mark.parametrize("psi", [Clayton(1.0), Gumbel(0.7)])
@pytest.mark.parametrize("u", [[0.3, 0.7], [0.5, 0.5], [0.1, 0.85]])
def test_axc_density_fd_d2(psi, u):
    ell = GumbelStdf(0.5, 2)
    ref = mixed_fd(lambda v: cdf_axc(psi, ell, v), u, 1e-4)
    assert_allclose(axc_density(psi, ell, u), ref, rtol=1e-4)


@pytest.mark.parametrize("psi", [Clayton(2.0), Gumbel(0.8)])
def test_axc_density_fd_d3(psi):
    ell = GumbelStdf(0.4, 3)
    u = [0.3, 0.6, 0.45]
    ref = mixed_fd(lambda v: cdf_axc(psi, ell, v), u, 1e-3, richardson=True)
    assert_allclose(axc_density(psi, ell, u), ref, rtol=1e-3)


def test_nested_stdf_density_fd():
    tree = HierarchyTree.two_level([1, 2], {"alpha": 0.8}, [{"alpha": 0.8}, {"alpha": 0.4}])
    ell = NestedGumbelStdf(tree)
    u = [0.4, 0.55, 0.7]
    ref = mixed_fd(lambda v: cdf_axc(Clayton(1.0), ell, v), u, 1e-3, richardson=True)
    assert_allclose(axc_density(Clayton(1.0), ell, u), ref, rtol=1e-3)


def test_negative_logistic_density_fd():
    ell = NegativeLogisticStdf(1.5, 2)
    u = [0.35, 0.6]
    ref = mixed_fd(lambda v: cdf_axc(Clayton(0.8), ell, v), u, 1e-4)
    assert_allclose(axc_density(Clayton(0.8), ell, u), ref, rtol=1e-4)


def test_husler_reiss_density_fd():
    """Finite-difference partials: about 1e-2 relative."""
    ell = HuslerReissStdf(gamma=[[0, 0.8], [0.8, 0]])
    u = [0.4, 0.6]
    ref = mixed_fd(lambda v: cdf_axc(Clayton(1.0), ell, v), u, 1e-3)
    assert_allclose(axc_density(Clayton(1.0), ell, u), ref, rtol=1e-2)


def test_integrates_to_one():
    m = 200
    g = (np.arange(m) + 0.5) / m
    u = np.array(np.meshgrid(g, g)).reshape(2, -1).T
    mass = axc_density(Clayton(1.0), GumbelStdf(0.5, 2), u).mean()
    assert 0.99 <= mass <= 1.01


def test_symmetry():
    psi, ell = Clayton(4 / 3), GumbelStdf(0.5, 2)
    a = axc_log_density(psi, ell, [0.2, 0.65])
    b = axc_log_density(psi, ell, [0.65, 0.2])
    assert_allclose(a, b, rtol=1e-12)


# -- Gumbel stdf fast path -------------------------------------------------
def test_partition_coefficients_d2():
    a = 0.3
    assert_allclose(gumbel_partition_coefficients(a, 2), [abs(a * (a - 1)), a * a], rtol=1e-15)


@pytest.mark.parametrize("d", [3, 4, 6])
def test_partition_coefficients_enumeration(d):
    a = 0.35
    ref = np.zeros(d)
    for k, blocks in enumerate_partitions(d):
        ref[k - 1] += np.prod([falling_factorial(a, len(b)) for b in blocks])
    assert_allclose(gumbel_partition_coefficients(a, d), np.abs(ref), rtol=1e-13)


@pytest.mark.parametrize("psi", [Gumbel(0.6), Clayton(4 / 3), IndependenceExp()])
def test_fastpath_matches_generic(psi):
    u = np.random.default_rng(11).uniform(0.02, 0.98, size=(20, 3))
    assert_allclose(np.exp(gumbel_stdf_density_fastpath(psi, 0.45, u)),
                    axc_density(psi, GumbelStdf(0.45, 3), u), rtol=1e-10)


def test_fastpath_center():
    psi = Gumbel(0.6)
    u = [0.5, 0.5, 0.5]
    assert_allclose(gumbel_stdf_density_fastpath(psi, 0.5, u),
                    axc_log_density(psi, GumbelStdf(0.5, 3), u), rtol=1e-10)


def test_fastpath_alpha_one_is_ac():
    u = np.array([0.3, 0.5, 0.8])
    psi = Clayton(2.0)
    assert_allclose(gumbel_stdf_density_fastpath(psi, 1.0, u),
                    axc_log_density(psi, SumStdf(3), u), rtol=1e-12)
    assert_allclose(axc_log_density(psi, GumbelStdf(1.0, 3), u),
                    axc_log_density(psi, SumStdf(3), u), rtol=1e-12)


# -- stability -------------------------------------------------------------
@pytest.mark.parametrize("u", [[1e-6, 1e-6], [1 - 1e-6, 1 - 1e-6], [1e-6, 1 - 1e-6],
                               [1e-6, 0.5]])
def test_log_density_tails(u):
    psi, ell = Clayton(4 / 3), GumbelStdf(0.5, 2)
    val = axc_log_density(psi, ell, u)
    assert np.isfinite(val)
    direct = axc_density(psi, ell, u, method="direct")
    if np.isfinite(direct) and direct > 0:
        assert_allclose(np.exp(val), direct, rtol=1e-12)


def test_log_density_where_direct_fails():
    psi, ell = Clayton(4 / 3), GumbelStdf(0.5, 2)
    for u in ([1e-200, 1e-200], [1e-200, 0.5]):
        assert np.isfinite(axc_log_density(psi, ell, u))
        assert not np.isfinite(axc_density(psi, ell, u, method="direct"))


def test_exp_log_equals_direct():
    psi, ell = Clayton(4 / 3), GumbelStdf(0.5, 3)
    u = np.random.default_rng(5).uniform(0.01, 0.99, size=(25, 3))
    assert_allclose(np.exp(axc_log_density(psi, ell, u)),
                    axc_density(psi, ell, u, method="direct"), rtol=1e-12)


def test_errors():
    with pytest.raises(CapabilityError):
        axc_log_density(Clayton(1), MaxStdf(2), [0.5, 0.5])
    with pytest.raises(DomainError):
        axc_log_density(Clayton(1), GumbelStdf(0.5, 2), [0.0, 0.5])
    with pytest.raises(DomainError):
        axc_log_density(Clayton(1), GumbelStdf(0.5, 2), [0.5, 1.0])
    with pytest.raises(DomainError):
        axc_log_density(Clayton(1), GumbelStdf(0.5, 3), [0.5, 0.5])
    with pytest.raises(CapabilityError):
        axc_log_density(Clayton(1), GumbelStdf(0.5, 13), np.full(13, 0.5))
    with pytest.raises(DomainError):
        axc_density(Clayton(1), GumbelStdf(0.5, 2), [0.5, 0.5], method="exact")
