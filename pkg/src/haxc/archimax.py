"""Archimax, hierarchical Archimax and nested Archimax copulas.

An Archimax copula (AXC) combines a completely monotone generator psi with an
extreme-value copula D.  With ``Y ~ D`` and an independent frailty ``V``
whose Laplace-Stieltjes transform is psi,

    U_j = psi(-log Y_j / V)

has distribution function ``psi(ell(psi^{-1}(u_1), ..., psi^{-1}(u_d)))``.
Replacing the single frailty by a tree of nested frailties gives the
hierarchical variant, where coordinate j uses the generator and frailty of
its deepest internal ancestor.  The hierarchy of the frailties need not agree
with any hierarchy built into D.

All samplers split ``rng`` into two child streams, the first one for the EVC
and the second one for the frailties, so models that share either ingredient
reuse the same realizations under the same seed.
"""
import numpy as np

from .errors import CapabilityError, DomainError, StructureError
from .evc import EvcModel, IndependenceEvc, ProductEvc
from .frailty import FrailtyTree
from .generators import Generator, IndependenceExp, _check_u
from .hierarchy import path_to_leaf, validate_two_level
from .stdf import GumbelStdf, NestedGumbelStdf, Stdf, SumStdf


def _streams(rng):
    r_evc, r_frailty = rng.spawn(2)
    return r_evc, r_frailty


def _exponentials(evc, n, rng):
    with np.errstate(divide="ignore"):
        return -np.log(evc.sample(rng, n))


def sample_axc(psi: Generator, evc: EvcModel, n, rng):
    """Draw ``n`` rows from the AXC with generator ``psi`` and EVC ``evc``.

    With ``psi = IndependenceExp()`` the EVC sample is returned unchanged.
    """
    if not isinstance(psi, Generator) or not hasattr(psi, "sample_frailty"):
        raise CapabilityError(f"no frailty sampler for generator {psi!r}")
    r_evc, r_frailty = _streams(rng)
    if isinstance(psi, IndependenceExp):
        return evc.sample(r_evc, n)
    e = _exponentials(evc, n, r_evc)
    v = psi.sample_frailty(r_frailty, n)
    return psi.psi(e / v[:, None])


def sample_haxc(frailties: FrailtyTree, evc: EvcModel, n, rng):
    """Draw ``n`` rows from a hierarchical AXC.

    Coordinate j is ``psi_s(E_j / V_s)`` where ``s`` is the deepest internal
    ancestor of leaf j in the frailty tree and ``E = -log Y`` with ``Y ~ evc``.
    """
    if frailties.d != evc.d:
        raise StructureError(
            f"frailty tree has {frailties.d} leaves but the EVC has dimension {evc.d}")
    r_evc, r_frailty = _streams(rng)
    e = _exponentials(evc, n, r_evc)
    v = frailties.sample(r_frailty, n)
    t = e / v
    out = np.empty_like(t)
    gens = frailties.leaf_generators()
    for g in {id(g): g for g in gens}.values():
        cols = [j for j, h in enumerate(gens) if h is g]
        out[:, cols] = g.psi(t[:, cols])
    return out


def cdf_axc(psi: Generator, stdf: Stdf, u):
    """psi(ell(psi^{-1}(u))) for one point or rows of points in (0, 1]^d."""
    u = _check_u(u)
    val = psi.psi(stdf(psi.psi_inv(u)))
    return float(val) if np.ndim(val) == 0 else val


class NestedStdfArchimax:
    """AXC whose stdf is a nested Gumbel stdf.

    It is itself nested: bivariate margins are AXCs with the Gumbel stdf of
    the two coordinates' lowest common ancestor.
    """

    def __init__(self, psi: Generator, stdf: NestedGumbelStdf):
        if not isinstance(stdf, NestedGumbelStdf):
            raise CapabilityError("nested stdf Archimax needs a nested Gumbel stdf")
        self.psi = psi
        self.stdf = stdf
        self.d = stdf.d

    def sample(self, n, rng, evc=None):
        from .evc import NestedGumbelEvc
        return sample_axc(self.psi, evc or NestedGumbelEvc(self.stdf.tree), n, rng)

    def cdf(self, u):
        return cdf_axc(self.psi, self.stdf, u)

    def pair(self, i, j):
        """Generator and bivariate stdf of the margin (i, j)."""
        tree = self.stdf.tree
        pi, pj = path_to_leaf(tree, i), path_to_leaf(tree, j)
        lca = [a for a, b in zip(pi, pj) if a == b][-1]
        return self.psi, GumbelStdf(self.stdf.alphas[lca], 2)


class NestedFrailtyArchimax:
    """Nested Archimax copula C_0(C_1(u_1), ..., C_S(u_S)).

    ``frailties`` is a two-level frailty tree, the root generator psi_0 forms
    the Archimedean outer copula and sector s is an AXC with generator psi_s
    and its own EVC.  Sector EVCs are independent of each other, which is the
    only cross-sector dependence for which the construction is known to hold.
    """

    def __init__(self, frailties: FrailtyTree, sector_evcs):
        self.frailties = frailties
        self.sizes = validate_two_level(frailties.tree)
        self._joint = None
        if isinstance(sector_evcs, EvcModel):
            # keep the joint sampler so its random stream layout is unchanged
            self._joint = sector_evcs
            sector_evcs = _split_product(sector_evcs, self.sizes)
        self.sector_evcs = list(sector_evcs)
        if [e.d for e in self.sector_evcs] != list(self.sizes):
            raise StructureError(
                f"sector EVC dimensions {[e.d for e in self.sector_evcs]} do not match "
                f"frailty sectors {list(self.sizes)}")
        tree = frailties.tree
        self.d = tree.d
        self.psi0 = frailties.generators[tree.root]
        self.sector_ids = tree.children(tree.root)
        self.sector_psis = [frailties.generators[s] for s in self.sector_ids]
        self.starts = np.cumsum([0, *self.sizes])

    @property
    def evc(self):
        return self._joint or ProductEvc(self.sector_evcs)

    def sample(self, n, rng):
        return sample_haxc(self.frailties, self.evc, n, rng)

    def sector_of(self, j):
        return int(np.searchsorted(self.starts, j, side="right") - 1)

    def cdf(self, u):
        u = np.atleast_2d(_check_u(u))
        if u.shape[1] != self.d:
            raise DomainError(f"expected points of dimension {self.d}")
        t0 = 0.0
        for s, (psi, evc) in enumerate(zip(self.sector_psis, self.sector_evcs)):
            us = u[:, self.starts[s]:self.starts[s + 1]]
            t0 = t0 + self.psi0.psi_inv(cdf_axc(psi, evc.stdf(), us))
        val = self.psi0.psi(t0)
        return float(val[0]) if np.ndim(val) == 1 and val.size == 1 else val

    def pair(self, i, j):
        s, t = self.sector_of(i), self.sector_of(j)
        if s != t:
            return self.psi0, SumStdf(2)
        a, b = i - self.starts[s], j - self.starts[s]
        return self.sector_psis[s], _PairStdf(self.sector_evcs[s].stdf(), a, b)


class _PairStdf(Stdf):
    """Bivariate margin (a, b) of a higher-dimensional stdf."""

    variant = "pair"

    def __init__(self, parent: Stdf, a, b):
        super().__init__(2)
        self.parent, self.a, self.b = parent, a, b
        self.smooth = parent.smooth

    def _value(self, x):
        full = np.zeros((x.shape[0], self.parent.d))
        full[:, self.a] = x[:, 0]
        full[:, self.b] = x[:, 1]
        return self.parent(full)


def _split_product(evc, sizes):
    if isinstance(evc, IndependenceEvc):
        return [IndependenceEvc(k) for k in sizes]
    if isinstance(evc, ProductEvc) and evc.sizes == list(sizes):
        return evc.blocks
    raise CapabilityError(
        "nested frailties are only supported with independent sector EVCs "
        "(a product over the frailty sectors); the required condition on a "
        "dependent cross-sector EVC cannot be verified")


def sample_naxc_nested_frailties(frailties: FrailtyTree, sector_evcs, n, rng):
    """Sample C_0(C_1, ..., C_S) from nested frailties and independent sector EVCs."""
    return NestedFrailtyArchimax(frailties, sector_evcs).sample(n, rng)


def pairwise_margin_cdf(model, i, j, u_i, u_j):
    """Bivariate margin (i, j) of a nested Archimax model.

    Within a sector this is the AXC of the sector, across sectors the AXC
    with the outer stdf.
    """
    if not isinstance(model, (NestedStdfArchimax, NestedFrailtyArchimax)):
        raise CapabilityError("pairwise margins are only available for nested Archimax models")
    for k in (i, j):
        if not 0 <= k < model.d:
            raise IndexError(f"coordinate {k} out of range for d={model.d}")
    if i == j:
        raise DomainError("pairwise margin needs two distinct coordinates")
    psi, ell = model.pair(i, j)
    return cdf_axc(psi, ell, np.column_stack(np.broadcast_arrays(u_i, u_j)).astype(float)
                   if np.ndim(u_i) or np.ndim(u_j) else [u_i, u_j])
