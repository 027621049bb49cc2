"""Generators of d-norms and the Monte Carlo stable tail dependence function.

A d-norm generator is a random vector ``W >= 0`` with ``E W_j = 1``.  It
defines the stable tail dependence function ``ell(x) = E max_j x_j W_j``.
Every generator samples ``(n, d)`` arrays through ``sample(rng, n)``, reports
an almost-sure upper bound ``bound`` (``inf`` when unbounded) and, where a
closed form is known, returns the matching :class:`~haxc.stdf.Stdf` from
``stdf()``.
"""
import math

import numpy as np
from scipy import special

from . import stdf as _stdf
from .errors import CapabilityError, DomainError, StructureError
from .frailty import sample_positive_stable
from .hierarchy import HierarchyTree
from .mvcdf import psd_factor


def log_c_nu(nu):
    """log E max(0, eps)^nu for eps ~ N(0, 1)."""
    return (nu / 2 - 1) * math.log(2) + special.gammaln((nu + 1) / 2) - 0.5 * math.log(math.pi)


def _corr_matrix(p, name="corr"):
    p = np.atleast_2d(np.asarray(p, dtype=float))
    if p.shape[0] != p.shape[1] or not np.allclose(p, p.T, atol=1e-12):
        raise DomainError(f"{name} must be a symmetric square matrix")
    return p


class DNormGenerator:
    """Base class for d-norm generators."""

    variant = None
    bound = math.inf

    def __init__(self, d):
        if int(d) != d or d < 1:
            raise DomainError("dimension must be a positive integer")
        self.d = int(d)

    def sample(self, rng, n):
        """``n`` independent draws of W, shape ``(n, d)``."""
        raise NotImplementedError

    def stdf(self):
        raise CapabilityError(f"no closed-form stdf for generator {self.variant!r}")

    def mc_terms(self, rng, n, x):
        """Per-draw terms whose mean is ell(x) (complement form, see :func:`mc_stdf`)."""
        v = self.sample(rng, n) * x
        m = v.max(axis=1)
        return x.sum() - (v.sum(axis=1) - m)

    def to_dict(self):
        raise CapabilityError(f"generator {self.variant!r} is not serialisable")

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d})"


class Comonotone(DNormGenerator):
    """W = (1, ..., 1); ell = max."""

    variant = "comonotone"
    bound = 1.0

    def sample(self, rng, n):
        return np.ones((n, self.d))

    def stdf(self):
        return _stdf.MaxStdf(self.d)

    def to_dict(self):
        return {"variant": self.variant, "d": self.d}


class IndependencePermutation(DNormGenerator):
    """W is a uniformly random permutation of (d, 0, ..., 0); ell = sum."""

    variant = "independence"

    def __init__(self, d):
        super().__init__(d)
        self.bound = float(self.d)

    def sample(self, rng, n):
        w = np.zeros((n, self.d))
        w[np.arange(n), rng.integers(self.d, size=n)] = self.d
        return w

    def stdf(self):
        return _stdf.SumStdf(self.d)

    def to_dict(self):
        return {"variant": self.variant, "d": self.d}


class GumbelFrechet(DNormGenerator):
    """W_j = F_j / Gamma(1 - alpha), F_j iid Frechet(1/alpha); Gumbel (logistic) ell."""

    variant = "gumbel"

    def __init__(self, alpha, d):
        super().__init__(d)
        if not 0 < alpha < 1:
            raise DomainError("Frechet generator needs alpha in (0, 1)")
        self.alpha = float(alpha)

    def sample(self, rng, n):
        e = rng.standard_exponential((n, self.d))
        return e ** -self.alpha / special.gamma(1 - self.alpha)

    def stdf(self):
        return _stdf.GumbelStdf(self.alpha, self.d)

    def to_dict(self):
        return {"variant": self.variant, "d": self.d, "alpha": self.alpha}


class NegativeLogisticWeibull(DNormGenerator):
    """W_j = E_j^(1/theta) / Gamma(1 + 1/theta), a mean-one Weibull(theta)."""

    variant = "negative_logistic"

    def __init__(self, theta, d):
        super().__init__(d)
        if not theta > 0:
            raise DomainError("negative logistic theta must be > 0")
        self.theta = float(theta)

    def sample(self, rng, n):
        e = rng.standard_exponential((n, self.d))
        return e ** (1 / self.theta) / special.gamma(1 + 1 / self.theta)

    def stdf(self):
        return _stdf.NegativeLogisticStdf(self.theta, self.d)

    def to_dict(self):
        return {"variant": self.variant, "d": self.d, "theta": self.theta}


class ExtremalT(DNormGenerator):
    """W_j = max(0, eps_j)^nu / c_nu with eps ~ N(0, P), P a correlation matrix."""

    variant = "extremal_t"

    def __init__(self, nu, corr):
        corr = _corr_matrix(corr)
        super().__init__(corr.shape[0])
        if not nu > 0:
            raise DomainError("degrees of freedom must be > 0")
        if np.any(np.abs(np.diag(corr) - 1) > 1e-12):
            raise DomainError("corr must have unit diagonal")
        self.nu = float(nu)
        self.corr = corr
        self._factor = psd_factor(corr)

    def sample(self, rng, n):
        eps = rng.standard_normal((n, self.d)) @ self._factor.T
        return np.maximum(eps, 0.0) ** self.nu * math.exp(-log_c_nu(self.nu))

    def stdf(self):
        return _stdf.ExtremalTStdf(self.nu, self.corr)

    def to_dict(self):
        return {"variant": self.variant, "nu": self.nu, "corr": self.corr.tolist()}


class Schlather(ExtremalT):
    """Extremal t with nu = 1: W_j = sqrt(2 pi) max(0, eps_j)."""

    variant = "schlather"

    def __init__(self, corr):
        super().__init__(1.0, corr)

    def to_dict(self):
        return {"variant": self.variant, "corr": self.corr.tolist()}


class BrownResnick(DNormGenerator):
    """W_j = exp(eps_j - Sigma_jj / 2) with eps ~ N(0, Sigma); Husler-Reiss ell."""

    variant = "brown_resnick"

    def __init__(self, sigma):
        sigma = _corr_matrix(sigma, "sigma")
        super().__init__(sigma.shape[0])
        self.sigma = sigma
        self._factor = psd_factor(sigma)

    def sample(self, rng, n):
        eps = rng.standard_normal((n, self.d)) @ self._factor.T
        return np.exp(eps - np.diag(self.sigma) / 2)

    def stdf(self):
        return _stdf.HuslerReissStdf(sigma=self.sigma)

    def to_dict(self):
        return {"variant": self.variant, "sigma": self.sigma.tolist()}


class GeneralCopulaMargins(DNormGenerator):
    """W_j = F_j^-(U_j) with U drawn from a copula and mean-one margins F_j.

    Parameters
    ----------
    copula_sampler : callable
        ``copula_sampler(rng, n)`` returns an ``(n, d)`` array of uniforms.
    margins : sequence of frozen scipy distributions
        Non-negative margins with mean one; only ``ppf`` is used for sampling.
    """

    variant = "general"

    def __init__(self, copula_sampler, margins, check_means=True):
        super().__init__(len(margins))
        self.copula_sampler = copula_sampler
        self.margins = list(margins)
        if check_means:
            for j, m in enumerate(self.margins):
                if not abs(m.mean() - 1) < 1e-8 or m.support()[0] < 0:
                    raise DomainError(f"margin {j} must be non-negative with mean one")
        sups = [m.support()[1] for m in self.margins]
        self.bound = float(max(sups))

    def sample(self, rng, n):
        u = np.asarray(self.copula_sampler(rng, n), dtype=float)
        if u.shape != (n, self.d):
            raise DomainError("copula sampler returned an array of the wrong shape")
        return np.column_stack([m.ppf(u[:, j]) for j, m in enumerate(self.margins)])


def independence_sampler(d):
    """Copula sampler for independent uniforms."""
    return lambda rng, n: rng.uniform(size=(n, d))


class NestedGumbelTree(DNormGenerator):
    """Nested Gumbel generator on a hierarchy tree.

    For leaf j with non-root internal ancestors a_1, ..., a_L (top down),
    W_j = prod_k S_{a_k}^{alpha_{a_k}} * F_j / Gamma(1 - alpha_root), with
    S_a ~ PS(alpha_a / alpha_parent(a)) shared by all leaves below a and
    F_j ~ Frechet(1 / alpha) for alpha of the leaf's parent.
    """

    variant = "nested_gumbel"

    def __init__(self, tree: HierarchyTree):
        super().__init__(tree.d)
        self.tree = tree
        self.alphas = _stdf.nested_alphas(tree)
        if not self.alphas[tree.root] < 1:
            raise DomainError("nested Gumbel generator needs root alpha < 1")

    def sample(self, rng, n):
        return self._sample_with_scales(rng, n)[0]

    def stdf(self):
        return _stdf.NestedGumbelStdf(self.tree)

    def _sample_with_scales(self, rng, n):
        tree = self.tree
        root = tree.root
        scale = {root: np.ones(n)}
        for nid in tree.internal_nodes()[1:]:
            parent = tree.parent(nid)
            a = self.alphas[nid]
            s = sample_positive_stable(a / self.alphas[parent], rng, n)
            scale[nid] = scale[parent] * s ** a
        e = rng.standard_exponential((n, self.d))
        out = np.empty((n, self.d))
        for j in range(self.d):
            p = tree.leaf_parent(j)
            out[:, j] = scale[p] * e[:, j] ** -self.alphas[p]
        return out / special.gamma(1 - self.alphas[root]), scale

    def mc_terms(self, rng, n, x):
        # ell(x) = sum(x) - sum_n E[R_n] E[D_n / R_n]: D_n is the children's
        # sum minus max below node n and R_n the scale shared by that subtree,
        # independent of it.  Every D_n / R_n has finite variance even when
        # the root alpha makes max_j x_j W_j heavy tailed.
        tree = self.tree
        w, scale = self._sample_with_scales(rng, n)
        v = w * x
        g0 = special.gammaln(1 - self.alphas[tree.root])
        node_max = {}
        out = np.full(n, x.sum())
        for nid in reversed(tree.internal_nodes()):
            kids = [v[:, tree.coordinate(c)] if tree.is_leaf(c) else node_max[c]
                    for c in tree.children(nid)]
            stack = np.column_stack(kids)
            node_max[nid] = stack.max(axis=1)
            mean_scale = math.exp(g0 - special.gammaln(1 - self.alphas[nid]))
            out -= mean_scale * (stack.sum(axis=1) - node_max[nid]) / scale[nid]
        return out

    def to_dict(self):
        return {"variant": self.variant, "tree": self.tree.to_dict()}


class _TwoLevelGaussian(DNormGenerator):
    """Shared set-up of the hierarchical Husler-Reiss and extremal t generators."""

    def __init__(self, sizes, sigma0, sigmas):
        sizes = tuple(int(s) for s in sizes)
        if not sizes or min(sizes) < 1:
            raise StructureError("sector sizes must be positive")
        sigma0 = _corr_matrix(sigma0, "sigma0")
        if sigma0.shape[0] != len(sizes):
            raise StructureError("sigma0 must have one row per sector")
        sigmas = [_corr_matrix(s, f"sigmas[{i}]") for i, s in enumerate(sigmas)]
        if len(sigmas) != len(sizes) or any(s.shape[0] != k for s, k in zip(sigmas, sizes)):
            raise StructureError("one within-sector matrix of matching size per sector is required")
        super().__init__(sum(sizes))
        self.sizes = sizes
        self.sigma0 = sigma0
        self.sigmas = sigmas
        self._f0 = psd_factor(sigma0)
        self._fs = [psd_factor(s) for s in sigmas]
        self.sector = np.repeat(np.arange(len(sizes)), sizes)

    def covariance(self):
        """Covariance of eps_sj = W*_s + W*_sj over all coordinates."""
        cov = self.sigma0[np.ix_(self.sector, self.sector)].copy()
        start = 0
        for s in self.sigmas:
            k = s.shape[0]
            cov[start:start + k, start:start + k] += s
            start += k
        return cov

    def _eps(self, rng, n):
        top = rng.standard_normal((n, len(self.sizes))) @ self._f0.T
        parts = [rng.standard_normal((n, f.shape[0])) @ f.T for f in self._fs]
        return top[:, self.sector] + np.hstack(parts)

    def _dict(self):
        return {"sizes": list(self.sizes), "sigma0": self.sigma0.tolist(),
                "sigmas": [s.tolist() for s in self.sigmas]}


class HierHuslerReiss(_TwoLevelGaussian):
    """W_sj = exp(W*_s + W*_sj - (sigma*_s^2 + sigma*_sj^2) / 2)."""

    variant = "hier_husler_reiss"

    def sample(self, rng, n):
        return np.exp(self._eps(rng, n) - np.diag(self.covariance()) / 2)

    def stdf(self):
        return _stdf.HuslerReissStdf(sigma=self.covariance())

    def to_dict(self):
        return {"variant": self.variant, **self._dict()}


class HierExtremalT(_TwoLevelGaussian):
    """W_sj = max(0, (W*_s + W*_sj) / (sigma*_s^2 + sigma*_sj^2)^(1/2))^nu / c_nu."""

    variant = "hier_extremal_t"

    def __init__(self, nu, sizes, sigma0, sigmas):
        super().__init__(sizes, sigma0, sigmas)
        if not nu > 0:
            raise DomainError("degrees of freedom must be > 0")
        self.nu = float(nu)

    def correlation(self):
        cov = self.covariance()
        sd = np.sqrt(np.diag(cov))
        return cov / np.outer(sd, sd)

    def sample(self, rng, n):
        z = self._eps(rng, n) / np.sqrt(np.diag(self.covariance()))
        return np.maximum(z, 0.0) ** self.nu * math.exp(-log_c_nu(self.nu))

    def stdf(self):
        return _stdf.ExtremalTStdf(self.nu, self.correlation())

    def to_dict(self):
        return {"variant": self.variant, "nu": self.nu, **self._dict()}


def sample_w(gen: DNormGenerator, rng):
    """One draw of W."""
    return gen.sample(rng, 1)[0]


def sample_nested_gumbel_w(tree: HierarchyTree, rng):
    return sample_w(NestedGumbelTree(tree), rng)


def mc_stdf(gen: DNormGenerator, x, n, rng, method="complement", chunk=1 << 16):
    """Monte Carlo estimate of ell(x) = E max_j x_j W_j and its standard error.

    Parameters
    ----------
    gen : DNormGenerator
    x : array_like, shape (d,)
        Non-negative point.
    n : int
        Number of generator draws.
    rng : numpy.random.Generator
    method : {"complement", "plain"}
        ``"plain"`` averages ``max_j x_j W_j``.  ``"complement"`` (default)
        averages ``sum_j x_j - (sum_j x_j W_j - max_j x_j W_j)``, which has
        the same mean because ``E W_j = 1``; generators may refine it (the
        nested Gumbel generator applies it node by node).  For Frechet-type
        generators with alpha >= 1/2 the plain terms have infinite variance,
        so their standard error is meaningless, while the complement terms
        keep a finite variance.

    Returns
    -------
    estimate, standard_error : float
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (gen.d,):
        raise DomainError(f"expected a point of dimension {gen.d}")
    if np.any(x < 0):
        raise DomainError("stdf arguments must be >= 0")
    if n < 1:
        raise DomainError("sample size must be >= 1")
    if method not in ("complement", "plain"):
        raise DomainError(f"unknown method {method!r}")
    total = total_sq = 0.0
    done = 0
    while done < n:
        m = min(chunk, n - done)
        if method == "plain":
            y = (gen.sample(rng, m) * x).max(axis=1)
        else:
            y = gen.mc_terms(rng, m, x)
        total += y.sum()
        total_sq += (y * y).sum()
        done += m
    mean = total / n
    if n == 1:
        return mean, math.inf
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return mean, math.sqrt(var / n)


def mc_stdf_independence_partials(margins, x, n, rng):
    """ell(x) via sum_j x_j E[Z_j prod_{i != j} F_i(Z_j x_j / x_i)], Z_j ~ F_j.

    This is the partial-derivative form of ell for a generator with
    independent margins (copula derivative D_j C(u) = prod_{i != j} u_i).
    Returns the estimate and its standard error.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("arguments must be > 0")
    d = len(margins)
    terms = np.zeros(n)
    for j in range(d):
        z = margins[j].rvs(size=n, random_state=rng)
        prod = np.ones(n)
        for i in range(d):
            if i != j:
                prod *= margins[i].cdf(z * x[j] / x[i])
        terms += x[j] * z * prod
    return terms.mean(), terms.std(ddof=1) / math.sqrt(n)


_VARIANTS = {
    "comonotone": lambda o: Comonotone(o["d"]),
    "independence": lambda o: IndependencePermutation(o["d"]),
    "gumbel": lambda o: GumbelFrechet(o["alpha"] if "alpha" in o else 1 - o["tau"], o["d"]),
    "negative_logistic": lambda o: NegativeLogisticWeibull(o["theta"], o["d"]),
    "schlather": lambda o: Schlather(o["corr"]),
    "extremal_t": lambda o: ExtremalT(o["nu"], o["corr"]),
    "brown_resnick": lambda o: BrownResnick(o["sigma"]),
    "nested_gumbel": lambda o: NestedGumbelTree(HierarchyTree.from_dict(o["tree"])),
    "hier_husler_reiss": lambda o: HierHuslerReiss(o["sizes"], o["sigma0"], o["sigmas"]),
    "hier_extremal_t": lambda o: HierExtremalT(o["nu"], o["sizes"], o["sigma0"], o["sigmas"]),
}


def dnorm_from_dict(obj, d=None) -> DNormGenerator:
    """Build a generator from ``{"variant": ..., parameters}``."""
    obj = dict(obj)
    if d is not None:
        obj.setdefault("d", d)
    v = obj.get("variant")
    if v not in _VARIANTS:
        raise CapabilityError(f"unknown d-norm generator variant {v!r}")
    try:
        return _VARIANTS[v](obj)
    except KeyError as exc:
        raise StructureError(f"generator block lacks field {exc}") from None
