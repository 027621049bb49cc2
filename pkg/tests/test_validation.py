import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import stats

from haxc.archimax import sample_axc
from haxc.errors import DomainError
from haxc.evc import IndependenceEvc, NestedGumbelEvc, SpectralEvc
from haxc.dnorm import Comonotone, ExtremalT
from haxc.generators import Clayton
from haxc.hierarchy import HierarchyTree
from haxc.validation import (empirical_cdf, kendall_tau, ks_critical, ks_uniform,
                             tau_matrix)


def test_tau_concordant():
    x = np.arange(10.0)
    assert kendall_tau(x, x) == 1.0
    assert kendall_tau(x, -x) == -1.0


@pytest.mark.parametrize("n", [2, 3, 10, 101, 1000])
def test_tau_matches_scipy_with_ties(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        x = rng.integers(0, 5, n).astype(float)
        y = rng.integers(0, 7, n).astype(float)
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        assert_allclose(kendall_tau(x, y), stats.kendalltau(x, y)[0], rtol=1e-12, atol=1e-15)


def test_tau_continuous(rng):
    x = rng.normal(size=5000)
    y = x + rng.normal(size=5000)
    assert_allclose(kendall_tau(x, y), stats.kendalltau(x, y)[0], rtol=1e-12)


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=2, max_size=60))
@settings(max_examples=100, deadline=None)
def test_tau_property(pairs):
    x, y = np.array(pairs, dtype=float).T
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        with pytest.raises(DomainError):
            kendall_tau(x, y)
        return
    assert_allclose(kendall_tau(x, y), stats.kendalltau(x, y)[0], rtol=1e-12, atol=1e-14)


def test_tau_invariant_under_monotone_maps(rng):
    x, y = rng.uniform(size=(2, 2000))
    y = 0.5 * x + y
    t = kendall_tau(x, y)
    assert kendall_tau(np.exp(3 * x), np.log(y)) == t
    assert kendall_tau(x ** 5, y) == t


def test_tau_independent(rng):
    x, y = rng.uniform(size=(2, 10000))
    assert abs(kendall_tau(x, y)) <= 0.03


def test_tau_clayton(rng):
    u = sample_axc(Clayton(4 / 3), IndependenceEvc(2), 10000, rng)
    assert abs(kendall_tau(u[:, 0], u[:, 1]) - 0.4) <= 0.03


def test_tau_errors():
    with pytest.raises(DomainError):
        kendall_tau([1.0], [2.0])
    with pytest.raises(DomainError):
        kendall_tau([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        kendall_tau([1.0, 2.0], [1.0, 2.0, 3.0])


def test_ks_grid():
    n = 500
    assert ks_uniform(np.arange(1, n + 1) / n) <= 1 / n + 1e-15


def test_ks_matches_scipy(rng):
    u = rng.uniform(size=1000)
    assert_allclose(ks_uniform(u), stats.kstest(u, "uniform").statistic, rtol=1e-12)


def test_ks_uniform_sample(rng):
    assert ks_uniform(rng.uniform(size=10000)) <= ks_critical(10000)


def test_ks_constant():
    assert_allclose(ks_uniform(np.full(100, 0.5)), 0.5, atol=0.011)


def test_ks_errors():
    with pytest.raises(DomainError):
        ks_uniform(np.linspace(0, 1, 5))
    with pytest.raises(DomainError):
        ks_uniform(np.linspace(0, 1.5, 50))
    with pytest.raises(DomainError):
        ks_critical(100, level=0.5)


@pytest.mark.parametrize("level", [0.001, 0.01, 0.05, 0.1])
def test_ks_critical_matches_kolmogorov(level):
    assert_allclose(ks_critical(1, level), stats.kstwobign.isf(level), rtol=2e-3)


def test_empirical_cdf(rng):
    u = rng.uniform(size=(100000, 2))
    assert empirical_cdf(u, [1, 1]) == (1.0, 0.0)
    assert empirical_cdf(u, [0, 0]) == (0.0, 0.0)
    p, se = empirical_cdf(u, [0.5, 0.5])
    assert abs(p - 0.25) <= 3 * se


def test_tau_matrix_comonotone(rng):
    u = SpectralEvc(Comonotone(3)).sample(rng, 500)
    assert_allclose(tau_matrix(u), np.ones((3, 3)))


def test_tau_matrix_nested_gumbel(rng):
    tree = HierarchyTree.two_level([2, 3], {"tau": 0.2}, [{"tau": 0.5}, {"tau": 0.7}])
    t = tau_matrix(NestedGumbelEvc(tree).sample(rng, 10000))
    ref = np.full((5, 5), 0.2)
    ref[:2, :2] = 0.5
    ref[2:, 2:] = 0.7
    np.fill_diagonal(ref, 1.0)
    assert np.max(np.abs(t - ref)) <= 0.03
    assert_allclose(t, t.T)
    assert np.all(np.abs(t) <= 1)


def test_tau_matrix_extremal_t_ordering(rng):
    corr = np.full((5, 5), 0.2)
    corr[:2, :2] = 0.5
    corr[2:, 2:] = 0.7
    np.fill_diagonal(corr, 1.0)
    gen = ExtremalT(3.5, corr)
    u = SpectralEvc(gen, n_points=300).sample(rng, 3000)
    t = tau_matrix(u)
    within = min(t[0, 1], t[2, 3], t[2, 4], t[3, 4])
    between = max(t[i, j] for i in (0, 1) for j in (2, 3, 4))
    assert within > between
