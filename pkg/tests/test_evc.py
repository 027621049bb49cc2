import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from haxc.dnorm import (BrownResnick, Comonotone, GumbelFrechet, IndependencePermutation,
                        NegativeLogisticWeibull)
from haxc.errors import ConfigError, DomainError, StructureError
from haxc.evc import (GumbelEvc, IndependenceEvc, NestedGumbelEvc, ProductEvc, SpectralEvc,
                      evc_cdf, evc_from_dict, sample_evc, sample_maxstable)
from haxc.hierarchy import HierarchyTree
from haxc.stdf import GumbelStdf, HuslerReissStdf, NestedGumbelStdf, SumStdf

GRID = [(a, b) for a in (0.25, 0.5, 0.75) for b in (0.25, 0.5, 0.75)]


def _check_grid(u, stdf, n_se=3.5):
    n = u.shape[0]
    for g in GRID:
        emp = np.mean(np.all(u <= g, axis=1))
        ref = evc_cdf(stdf, g)
        se = np.sqrt(ref * (1 - ref) / n)
        assert abs(emp - ref) <= n_se * se, (g, emp, ref)


def test_gumbel_cdf_value():
    # C(u, u) = u^(2^alpha) for the bivariate Gumbel copula
    assert_allclose(evc_cdf(GumbelStdf(0.5, 2), [0.5, 0.5]), 0.5 ** np.sqrt(2), rtol=1e-14)


def test_cdf_boundaries():
    ell = GumbelStdf(0.4, 3)
    assert evc_cdf(ell, [1, 1, 1]) == 1.0
    assert_allclose(evc_cdf(ell, [0.3, 1, 1]), 0.3, rtol=1e-14)
    for bad in ([0, 0.5, 0.5], [1.2, 0.5, 0.5], [np.nan, 0.5, 0.5]):
        with pytest.raises(DomainError):
            evc_cdf(ell, bad)


@pytest.mark.parametrize("m", [0.3, 2.0, 7.5])
def test_max_stability(m):
    ell = GumbelStdf(0.6, 3)
    u = np.array([[0.2, 0.7, 0.45], [0.9, 0.95, 0.6]])
    assert_allclose(evc_cdf(ell, u ** (1 / m)) ** m, evc_cdf(ell, u), rtol=1e-12)


@pytest.mark.parametrize("model", [
    GumbelEvc(0.5, 2),
    IndependenceEvc(2),
    SpectralEvc(IndependencePermutation(2)),
    SpectralEvc(GumbelFrechet(0.5, 2), n_points=300),
    SpectralEvc(NegativeLogisticWeibull(1.5, 2), n_points=300),
    SpectralEvc(BrownResnick(np.array([[1.0, 0.3], [0.3, 0.8]])), n_points=300),
], ids=["gumbel", "indep", "indep-spectral", "frechet", "weibull", "brown-resnick"])
def test_empirical_copula_matches_cdf(model, rng):
    u = sample_evc(model, 20000, rng)
    assert u.shape == (20000, 2)
    _check_grid(u, model.stdf())


def test_brown_resnick_stdf_is_husler_reiss():
    sig = np.array([[1.0, 0.3], [0.3, 0.8]])
    ell = SpectralEvc(BrownResnick(sig)).stdf()
    x = np.array([0.4, 1.3])
    assert_allclose(ell(x), HuslerReissStdf(sigma=sig)(x), rtol=1e-12)


@pytest.mark.parametrize("model", [
    GumbelEvc(0.3, 3),
    SpectralEvc(Comonotone(3)),
    SpectralEvc(IndependencePermutation(4)),
    SpectralEvc(GumbelFrechet(0.4, 3), n_points=200),
])
def test_uniform_margins(model, rng):
    u = sample_evc(model, 5000, rng)
    for j in range(model.d):
        assert stats.kstest(u[:, j], "uniform").pvalue > 1e-3


def test_frechet_margins(rng):
    z = sample_maxstable(SpectralEvc(IndependencePermutation(3)), rng, 5000)
    for j in range(3):
        assert stats.kstest(z[:, j], stats.invweibull(1).cdf).pvalue > 1e-3


def test_comonotone_stops_after_first_point(rng):
    z = sample_maxstable(SpectralEvc(Comonotone(4)), rng, 100)
    assert np.all(z == z[:, :1])


def test_independence_is_product(rng):
    u = sample_evc(SpectralEvc(IndependencePermutation(3)), 20000, rng)
    for g in [(0.3, 0.5, 0.8), (0.6, 0.6, 0.6)]:
        ref = np.prod(g)
        emp = np.mean(np.all(u <= g, axis=1))
        assert abs(emp - ref) <= 3.5 * np.sqrt(ref * (1 - ref) / u.shape[0])
    assert abs(stats.kendalltau(u[:, 0], u[:, 1])[0]) < 0.03


def test_nested_gumbel_grid(fig1_gumbel_tree, rng):
    model = NestedGumbelEvc(fig1_gumbel_tree)
    u = model.sample(rng, 20000)
    ell = NestedGumbelStdf(fig1_gumbel_tree)
    assert isinstance(model.stdf(), NestedGumbelStdf)
    for g in [np.full(7, 0.7), np.array([0.9, 0.5, 0.8, 0.95, 0.6, 0.85, 0.75])]:
        ref = evc_cdf(ell, g)
        emp = np.mean(np.all(u <= g, axis=1))
        assert abs(emp - ref) <= 3.5 * np.sqrt(ref * (1 - ref) / u.shape[0])


def test_nested_flat_matches_gumbel():
    tree = HierarchyTree.flat(3, {"alpha": 0.35})
    a = NestedGumbelEvc(tree).sample(np.random.default_rng(5), 50)
    b = GumbelEvc(0.35, 3).sample(np.random.default_rng(5), 50)
    assert_allclose(a, b, rtol=1e-14)


def test_product(rng):
    model = ProductEvc([GumbelEvc(0.5, 2), IndependenceEvc(1), GumbelEvc(0.3, 2)])
    assert model.d == 5
    ell = model.stdf()
    x = np.array([0.3, 0.7, 1.1, 0.2, 0.5])
    ref = GumbelStdf(0.5, 2)(x[:2]) + x[2] + GumbelStdf(0.3, 2)(x[3:])
    assert_allclose(ell(x), ref, rtol=1e-13)
    assert_allclose(ell.partial((3, 4), x), GumbelStdf(0.3, 2).partial((0, 1), x[3:]), rtol=1e-13)
    assert np.all(ell.partial((0, 3), x) == 0)
    u = model.sample(rng, 100)
    assert u.shape == (100, 5)


def test_exact_stopping_needs_bound():
    with pytest.raises(ConfigError):
        SpectralEvc(GumbelFrechet(0.5, 2), policy="exact")
    with pytest.raises(ConfigError):
        SpectralEvc(Comonotone(2), policy="never")
    with pytest.raises(ConfigError):
        SpectralEvc(GumbelFrechet(0.5, 2), n_points=0)
    assert SpectralEvc(GumbelFrechet(0.5, 2)).policy == "fixed"
    assert SpectralEvc(Comonotone(2)).policy == "exact"
    assert SpectralEvc(GumbelFrechet(0.5, 2), policy="exact", bound=1e6).policy == "exact"


def test_deterministic(rng):
    model = SpectralEvc(IndependencePermutation(3))
    a = model.sample(np.random.default_rng(11), 200)
    b = model.sample(np.random.default_rng(11), 200)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("model", [
    IndependenceEvc(3), GumbelEvc(0.4, 2),
    SpectralEvc(GumbelFrechet(0.5, 2), n_points=50), SpectralEvc(Comonotone(2)),
    ProductEvc([GumbelEvc(0.5, 2), IndependenceEvc(1)]),
])
def test_roundtrip(model):
    again = evc_from_dict(model.to_dict())
    assert again.to_dict() == model.to_dict()
    x = np.full(model.d, 0.6)
    assert_allclose(again.stdf()(x), model.stdf()(x), rtol=1e-14)


def test_from_dict_variants(fig1_gumbel_tree):
    assert isinstance(evc_from_dict({"type": "gumbel", "tau": 0.5, "d": 2}).stdf(), GumbelStdf)
    m = evc_from_dict({"type": "nested_gumbel", "tree": fig1_gumbel_tree.to_dict()})
    assert m.d == 7
    assert isinstance(evc_from_dict({"type": "independence", "d": 2}).stdf(), SumStdf)
    with pytest.raises(StructureError):
        evc_from_dict({"type": "gumbel", "d": 2})
