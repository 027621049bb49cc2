"""Copula models assembled from a JSON model specification.

A specification is a JSON object with a ``kind`` and the blocks the kind
needs::

    {
      "kind": "AXC",                       # AC, EVC, AXC, HAXC or NAXC
      "dimension": 5,
      "seed": 42,                          # optional default seed
      "generator": {"family": "clayton", "tau": 0.4},
      "frailty_tree": {"nodes": [...], "leaf_order": [...]},
      "evc": {"type": "gumbel", "tau": 0.5},
      "stdf": {"variant": "gumbel", "alpha": 0.5}
    }

``AC`` needs ``generator``; ``EVC`` needs ``evc`` (or ``stdf``); ``AXC``
needs ``generator`` and ``evc`` or ``stdf``; ``HAXC`` needs ``frailty_tree``
and ``evc``.  ``NAXC`` is either a generator with a nested Gumbel EVC, or a
two-level ``frailty_tree`` whose ``evc`` is a product over the sectors.
When ``stdf`` is absent it is taken from the EVC, and vice versa where an
exact sampler exists.
"""
import json

import numpy as np

from .archimax import (NestedFrailtyArchimax, NestedStdfArchimax, cdf_axc, sample_axc,
                       sample_haxc)
from .density import axc_log_density
from .errors import CapabilityError, ConfigError, DomainError, StructureError
from .evc import (BlockSumStdf, EvcModel, GumbelEvc, IndependenceEvc, NestedGumbelEvc,
                  evc_cdf, evc_from_dict)
from .frailty import FrailtyTree
from .generators import Generator, IndependenceExp, generator_from_dict
from .hierarchy import HierarchyTree, path_to_leaf
from .stdf import GumbelStdf, MaxStdf, NestedGumbelStdf, Stdf, SumStdf, stdf_from_dict

KINDS = ("AC", "EVC", "AXC", "HAXC", "NAXC")


def _block(name, build, *args):
    """Run ``build`` and prefix any error with the block name."""
    try:
        return build(*args)
    except (DomainError, StructureError, ConfigError, CapabilityError) as exc:
        raise type(exc)(f"{name} block: {exc}") from None
    except (KeyError, TypeError, AttributeError) as exc:
        raise StructureError(f"{name} block is malformed: {exc!r}") from None


def _evc_for(stdf: Stdf) -> EvcModel:
    if isinstance(stdf, SumStdf):
        return IndependenceEvc(stdf.d)
    if isinstance(stdf, GumbelStdf):
        return GumbelEvc(stdf.alpha, stdf.d)
    if isinstance(stdf, NestedGumbelStdf):
        return NestedGumbelEvc(stdf.tree)
    raise CapabilityError(
        f"no sampler for a {stdf.variant} stdf; give an 'evc' block to sample")


def _pair_tau_stdf(stdf, i, j):
    """Kendall's tau of the bivariate EVC margin (i, j), or None if unknown."""
    if isinstance(stdf, SumStdf):
        return 0.0
    if isinstance(stdf, MaxStdf):
        return 1.0
    if isinstance(stdf, GumbelStdf):
        return 1 - stdf.alpha
    if isinstance(stdf, NestedGumbelStdf):
        pi, pj = path_to_leaf(stdf.tree, i), path_to_leaf(stdf.tree, j)
        lca = [a for a, b in zip(pi, pj) if a == b][-1]
        return 1 - stdf.alphas[lca]
    if isinstance(stdf, BlockSumStdf):
        for p, a, b in zip(stdf.parts, stdf._starts, stdf._starts[1:]):
            if a <= i < b and a <= j < b:
                return _pair_tau_stdf(p, i - a, j - a)
            if a <= i < b or a <= j < b:
                return 0.0
    return None


def archimax_tau(tau_psi, tau_evc):
    """Kendall's tau of a bivariate Archimax copula from its two ingredients."""
    return tau_evc + (1 - tau_evc) * tau_psi


class CopulaModel:
    """A copula of one of the kinds AC, EVC, AXC, HAXC or NAXC.

    Attributes
    ----------
    kind : str
    d : int
    generator : Generator or None
        Single generator (AC, EVC, AXC and nested-stdf NAXC).
    frailties : FrailtyTree or None
        Hierarchical frailties (HAXC and nested-frailty NAXC).
    evc : EvcModel or None
        Sampler of the extreme-value part.
    stdf : Stdf or None
        Stable tail dependence function used for CDF and density evaluation.
    """

    def __init__(self, kind, d, generator=None, frailties=None, evc=None, stdf=None, names=None):
        if kind not in KINDS:
            raise ConfigError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")
        self.kind = kind
        self.d = int(d)
        self.generator = generator
        self.frailties = frailties
        self.evc = evc
        self.stdf = stdf
        self.names = list(names) if names else [f"U{j + 1}" for j in range(self.d)]
        self.nested = None
        if kind == "NAXC":
            if frailties is not None:
                self.nested = NestedFrailtyArchimax(frailties, evc)
            else:
                self.nested = NestedStdfArchimax(generator, stdf)

    # -- sampling and evaluation -------------------------------------------
    def sample(self, n, rng):
        if self.kind in ("AC", "EVC", "AXC") or (self.kind == "NAXC" and self.frailties is None):
            if self.evc is None:
                raise CapabilityError(f"{self.kind} model has no EVC sampler")
            return sample_axc(self.generator, self.evc, n, rng)
        return sample_haxc(self.frailties, self.evc, n, rng)

    def cdf(self, u):
        if self.kind == "NAXC":
            return self.nested.cdf(u)
        if self.kind == "HAXC":
            raise CapabilityError("no closed-form CDF for hierarchical Archimax copulas")
        if self.kind == "EVC":
            return evc_cdf(self.stdf, u)
        return cdf_axc(self.generator, self.stdf, u)

    def conditional_cdf(self, u, rng, n_frailty=20000):
        """Monte Carlo CDF averaging the EVC CDF over frailty draws.

        Given the frailties, ``P(U <= u) = D(exp(-V_j psi_j^{-1}(u_j)))``; this
        works for every kind and needs only the stdf and a frailty sampler.
        Returns the estimate and its standard error.
        """
        u = np.asarray(u, dtype=float)
        if self.frailties is not None:
            v = self.frailties.sample(rng, n_frailty)
            gens = self.frailties.leaf_generators()
            t = np.array([g.psi_inv(uj) for g, uj in zip(gens, u)])
        else:
            v = np.repeat(self.generator.sample_frailty(rng, n_frailty)[:, None], self.d, axis=1)
            t = self.generator.psi_inv(u)
        stdf = self.stdf if self.stdf is not None else self.evc.stdf()
        vals = np.exp(-stdf(v * t))
        return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_frailty))

    def log_density(self, u):
        if self.kind in ("HAXC",) or (self.kind == "NAXC" and self.frailties is not None):
            raise CapabilityError(
                f"densities of {self.kind} models with hierarchical frailties are out of scope; "
                "only Archimax densities are available")
        return axc_log_density(self.generator, self.stdf, u)

    def pair_tau(self, i, j):
        """Model Kendall's tau of coordinates (i, j), or None when unknown."""
        stdf = self.stdf if self.stdf is not None else (self.evc.stdf() if self.evc else None)
        tau_d = _pair_tau_stdf(stdf, i, j) if stdf is not None else None
        if self.frailties is None:
            if tau_d is None:
                return None
            return archimax_tau(self.generator.kendall_tau(), tau_d)
        tree = self.frailties.tree
        pi, pj = path_to_leaf(tree, i), path_to_leaf(tree, j)
        lca = [a for a, b in zip(pi, pj) if a == b][-1]
        tau_psi = self.frailties.generators[lca].kendall_tau()
        if tree.leaf_parent(i) == tree.leaf_parent(j):
            return None if tau_d is None else archimax_tau(tau_psi, tau_d)
        # frailties from different nodes: only known when the EVC pair is independent
        return tau_psi if tau_d == 0.0 else None

    # -- construction ------------------------------------------------------
    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict):
            raise StructureError("model specification must be a JSON object")
        kind = obj.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"'kind' must be one of {', '.join(KINDS)}, got {kind!r}")
        dims = {}
        if "dimension" in obj:
            d0 = obj["dimension"]
            if not isinstance(d0, int) or isinstance(d0, bool) or d0 < 1:
                raise StructureError(f"dimension block must be a positive integer, got {d0!r}")
            dims["dimension"] = d0
        d = dims.get("dimension")

        generator = frailties = evc = stdf = None
        names = None
        if "generator" in obj:
            generator = _block("generator", generator_from_dict, obj["generator"])
        if "frailty_tree" in obj:
            tree = _block("frailty_tree", HierarchyTree.from_dict, obj["frailty_tree"])
            frailties = _block("frailty_tree", FrailtyTree, tree)
            dims["frailty_tree"] = tree.d
            names = [str(x) for x in tree.leaf_order]
            d = d or tree.d
        if "evc" in obj:
            evc = _block("evc", evc_from_dict, obj["evc"], d)
            dims["evc"] = evc.d
            d = d or evc.d
        if "stdf" in obj:
            stdf = _block("stdf", stdf_from_dict, obj["stdf"], d)
            dims["stdf"] = stdf.d
            d = d or stdf.d
        if len(set(dims.values())) > 1:
            desc = ", ".join(f"{k} block has d={v}" for k, v in dims.items())
            raise StructureError(f"dimension mismatch: {desc}")
        if d is None:
            raise StructureError("cannot determine the dimension; add a 'dimension' block")

        def need(*blocks):
            missing = [b for b in blocks if b not in obj]
            if missing:
                raise StructureError(f"{kind} model needs block(s) {', '.join(missing)}")

        if kind == "AC":
            need("generator")
            evc, stdf = IndependenceEvc(d), SumStdf(d)
        elif kind == "EVC":
            generator = IndependenceExp()
        elif kind == "AXC":
            need("generator")
        elif kind == "HAXC":
            need("frailty_tree", "evc")
        elif kind == "NAXC":
            if frailties is None:
                need("generator")
        if kind in ("EVC", "AXC", "NAXC", "HAXC"):
            if evc is None and stdf is None:
                raise StructureError(f"{kind} model needs an 'evc' or a 'stdf' block")
            if stdf is None:
                stdf = evc.stdf()
            if evc is None:
                evc = _block("stdf", _evc_for, stdf)
        if kind == "NAXC" and frailties is None and not isinstance(stdf, NestedGumbelStdf):
            raise StructureError("NAXC model without frailty_tree needs a nested Gumbel EVC or stdf")
        if kind == "NAXC" and frailties is not None:
            model = _block("evc", cls, kind, d, generator, frailties, evc, stdf, names)
        else:
            model = cls(kind, d, generator, frailties, evc, stdf, names)
        if generator is not None and not isinstance(generator, Generator):
            raise StructureError("generator block did not produce a generator")
        return model

    @classmethod
    def from_json(cls, text, source="<spec>"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(obj)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read(), source=str(path))

    def __repr__(self):
        return f"CopulaModel(kind={self.kind!r}, d={self.d})"


def read_seed(obj, default=0):
    """Seed from a specification, checked to be an unsigned 64-bit integer."""
    seed = obj.get("seed", default) if isinstance(obj, dict) else default
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed block must be an unsigned 64-bit integer, got {seed!r}")
    return seed
