"""Sampling and evaluating extreme-value copulas.

Two kinds of models are supported:

* exact models: independence, Gumbel and nested Gumbel, sampled through
  their (hierarchical) positive stable frailty representation;
* spectral models, built from a d-norm generator W and sampled with the
  Poisson point construction Z_j = max_i P_i W_ij, P_i = 1 / (E_1 + ... + E_i).
  With a declared almost-sure bound ``b`` on W the loop stops as soon as
  ``P_{i+1} b < min_j Z_j``, which gives exact draws; otherwise it runs a
  fixed number of points and is approximate.

Copula samples are ``U_j = exp(-1 / Z_j)``.
"""
import math

import numpy as np

from . import stdf as _stdf
from .dnorm import DNormGenerator, dnorm_from_dict
from .errors import CapabilityError, ConfigError, DomainError, StructureError
from .frailty import FrailtyTree, sample_positive_stable
from .hierarchy import HierarchyTree

#: default number of Poisson points for generators without a bound
DEFAULT_TRUNCATION = 1000


class EvcModel:
    d = None

    def sample(self, rng, n):
        """``n`` draws on the copula scale, shape ``(n, d)``."""
        raise NotImplementedError

    def stdf(self) -> _stdf.Stdf:
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d})"


class IndependenceEvc(EvcModel):
    def __init__(self, d):
        self.d = int(d)

    def sample(self, rng, n):
        return rng.uniform(size=(n, self.d))

    def stdf(self):
        return _stdf.SumStdf(self.d)

    def to_dict(self):
        return {"type": "independence", "d": self.d}


class GumbelEvc(EvcModel):
    """Gumbel copula, U_j = exp(-(E_j / V)^alpha) with V ~ PS(alpha)."""

    def __init__(self, alpha, d):
        if not 0 < alpha <= 1:
            raise DomainError("Gumbel alpha must lie in (0, 1]")
        self.alpha = float(alpha)
        self.d = int(d)

    def sample(self, rng, n):
        v = sample_positive_stable(self.alpha, rng, n)
        e = rng.standard_exponential((n, self.d))
        return np.exp(-(e / v[:, None]) ** self.alpha)

    def stdf(self):
        return _stdf.GumbelStdf(self.alpha, self.d)

    def to_dict(self):
        return {"type": "gumbel", "d": self.d, "alpha": self.alpha}


class NestedGumbelEvc(EvcModel):
    """Nested Gumbel copula via hierarchical positive stable frailties.

    ``tree`` carries ``alpha`` per internal node (inherited when absent).
    """

    def __init__(self, tree: HierarchyTree):
        self.tree = tree
        self.alphas = _stdf.nested_alphas(tree)
        self.d = tree.d
        nodes = [(nd.id, nd.parent,
                  {"family": "gumbel", "alpha": self.alphas[nd.id]} if nd.id in self.alphas else {})
                 for nd in tree.nodes]
        self.frailties = FrailtyTree(HierarchyTree(nodes, tree.leaf_order))

    def sample(self, rng, n):
        v = self.frailties.sample(rng, n)
        e = rng.standard_exponential((n, self.d))
        a = np.array([self.alphas[self.tree.leaf_parent(j)] for j in range(self.d)])
        return np.exp(-(e / v) ** a)

    def stdf(self):
        return _stdf.NestedGumbelStdf(self.tree)

    def to_dict(self):
        return {"type": "nested_gumbel", "tree": self.tree.to_dict()}


class SpectralEvc(EvcModel):
    """Max-stable construction from a d-norm generator.

    Parameters
    ----------
    generator : DNormGenerator
    policy : {"auto", "exact", "fixed"}
        ``"exact"`` needs a finite bound, ``"fixed"`` uses ``n_points`` points,
        ``"auto"`` picks exact stopping when the generator declares a bound.
    n_points : int
        Number of Poisson points under the fixed policy.
    bound : float, optional
        Almost-sure bound on the W_j; defaults to ``generator.bound``.
    """

    def __init__(self, generator: DNormGenerator, policy="auto", n_points=DEFAULT_TRUNCATION,
                 bound=None):
        self.generator = generator
        self.d = generator.d
        self.bound = float(generator.bound if bound is None else bound)
        if policy == "auto":
            policy = "exact" if math.isfinite(self.bound) else "fixed"
        if policy not in ("exact", "fixed"):
            raise ConfigError(f"unknown truncation policy {policy!r}")
        if policy == "exact" and not (math.isfinite(self.bound) and self.bound > 0):
            raise ConfigError("exact stopping needs a finite positive bound on W")
        if int(n_points) < 1:
            raise ConfigError("number of Poisson points must be >= 1")
        self.policy = policy
        self.n_points = int(n_points)

    def sample_maxstable(self, rng, n):
        """Max-stable vectors with unit Frechet margins, shape ``(n, d)``."""
        z = np.zeros((n, self.d))
        gam = np.zeros(n)
        active = np.arange(n)
        for i in range(self.n_points if self.policy == "fixed" else 2 ** 62):
            gam[active] += rng.standard_exponential(active.size)
            p = 1 / gam[active]
            if self.policy == "exact" and i > 0:
                go_on = p * self.bound >= z[active].min(axis=1)
                active, p = active[go_on], p[go_on]
                if active.size == 0:
                    break
            w = self.generator.sample(rng, active.size)
            z[active] = np.maximum(z[active], p[:, None] * w)
        return z

    def sample(self, rng, n):
        with np.errstate(divide="ignore"):
            return np.exp(-1 / self.sample_maxstable(rng, n))

    def stdf(self):
        return self.generator.stdf()

    def to_dict(self):
        out = {"type": "spectral", "generator": self.generator.to_dict(),
               "policy": self.policy}
        if self.policy == "fixed":
            out["n_points"] = self.n_points
        else:
            out["bound"] = self.bound
        return out


class ProductEvc(EvcModel):
    """Independent blocks of EVCs in consecutive coordinates."""

    def __init__(self, blocks):
        self.blocks = list(blocks)
        if not self.blocks:
            raise StructureError("product EVC needs at least one block")
        self.sizes = [b.d for b in self.blocks]
        self.d = sum(self.sizes)

    def sample(self, rng, n):
        return np.hstack([b.sample(rng, n) for b in self.blocks])

    def stdf(self):
        return BlockSumStdf([b.stdf() for b in self.blocks])

    def to_dict(self):
        return {"type": "product", "blocks": [b.to_dict() for b in self.blocks]}


class BlockSumStdf(_stdf.Stdf):
    """ell(x) = sum_s ell_s(x_s) for consecutive coordinate blocks."""

    variant = "block_sum"

    def __init__(self, parts):
        self.parts = list(parts)
        super().__init__(sum(p.d for p in self.parts))
        self.smooth = all(p.smooth for p in self.parts)
        self._starts = np.cumsum([0] + [p.d for p in self.parts])

    def _value(self, x):
        return sum(p._value(x[:, a:b]) for p, a, b in zip(self.parts, self._starts, self._starts[1:]))

    def _partial(self, B, x):
        for p, a, b in zip(self.parts, self._starts, self._starts[1:]):
            if all(a <= j < b for j in B):
                return p._partial(tuple(j - a for j in B), x[:, a:b])
        return np.zeros(x.shape[0])

    def to_dict(self):
        return {"variant": self.variant, "parts": [p.to_dict() for p in self.parts]}


def sample_maxstable(model: SpectralEvc, rng, n=1):
    return model.sample_maxstable(rng, n)


def sample_evc(model: EvcModel, n, rng):
    return model.sample(rng, n)


def evc_cdf(stdf: _stdf.Stdf, u):
    """C(u) = exp(-ell(-log u)) for u in (0, 1]^d (one point or rows)."""
    u = np.asarray(u, dtype=float)
    if np.any(np.isnan(u)) or np.any(u <= 0) or np.any(u > 1):
        raise DomainError("EVC arguments must lie in (0, 1]")
    val = np.exp(-stdf(-np.log(u)))
    return float(val) if np.ndim(val) == 0 else val


def evc_from_dict(obj, d=None) -> EvcModel:
    """Build an EVC model from its JSON block."""
    try:
        kind = obj["type"]
        if kind == "independence":
            return IndependenceEvc(obj.get("d", d))
        if kind == "gumbel":
            a = obj["alpha"] if "alpha" in obj else 1 - obj["tau"]
            return GumbelEvc(a, obj.get("d", d))
        if kind == "nested_gumbel":
            return NestedGumbelEvc(HierarchyTree.from_dict(obj["tree"]))
        if kind == "spectral":
            gen = dnorm_from_dict(obj["generator"], d)
            return SpectralEvc(gen, obj.get("policy", "auto"),
                               obj.get("n_points", DEFAULT_TRUNCATION), obj.get("bound"))
        if kind == "product":
            return ProductEvc([evc_from_dict(b) for b in obj["blocks"]])
    except KeyError as exc:
        raise StructureError(f"evc block lacks field {exc}") from None
    except TypeError as exc:
        raise StructureError(f"evc block is malformed: {exc}") from None
    raise CapabilityError(f"unknown evc type {kind!r}")
