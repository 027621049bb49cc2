"""Frailty samplers: single frailties and hierarchical frailty trees.

A frailty tree is a :class:`~haxc.hierarchy.HierarchyTree` whose internal
nodes carry generator parameters.  The root frailty has Laplace-Stieltjes
transform psi_root; a child frailty given its parent value ``v`` has transform
``exp(-v * psi_parent^{-1}(psi_child(t)))``.  Leaves inherit the frailty of
their parent node.
"""
import math

import numpy as np

from .errors import CapabilityError, DomainError, StructureError
from .generators import Clayton, Gumbel, generator_from_dict
from .hierarchy import HierarchyTree

# above this parent frailty the plain rejection sampler for tilted stables
# accepts with probability < exp(-4) and the double-rejection sampler is used
TILTED_SWITCH = 4.0


def sample_positive_stable(alpha, rng, size=None):
    """Draw from PS(alpha), the positive stable law with LS transform exp(-t^alpha).

    Chambers-Mallows-Stuck with skewness 1, written in Kanter's product form
    and evaluated on the log scale.
    """
    if not 0 < alpha <= 1:
        raise DomainError("positive stable index alpha must lie in (0, 1]")
    if alpha == 1:
        return np.ones(size) if size is not None else 1.0
    u = rng.uniform(0.0, np.pi, size=size)
    e = rng.standard_exponential(size=size)
    b = (1 - alpha) / alpha
    logv = (np.log(np.sin(alpha * u)) + b * np.log(np.sin((1 - alpha) * u))
            - np.log(np.sin(u)) / alpha - b * np.log(e))
    return np.exp(logv)


def sample_gamma_frailty(theta, rng, size=None):
    """Gamma(1/theta, 1) frailty, the LS inverse of the Clayton generator."""
    if not theta > 0:
        raise DomainError("Clayton parameter theta must be > 0")
    return rng.gamma(1 / theta, size=size)


def sample_tilted_stable(alpha, v0, rng):
    """Draw S with LS transform exp(-v0 ((1 + t)^alpha - 1)), one per entry of v0.

    This is the law of ``v0^(1/alpha) PS(alpha)`` exponentially tilted by
    ``exp(-S)``: the inner frailty of nested Clayton copulas.
    """
    if not 0 < alpha <= 1:
        raise DomainError("tilted stable index alpha must lie in (0, 1]")
    v0 = np.asarray(v0, dtype=float)
    if np.any(v0 < 0):
        raise DomainError("tilted stable scale must be non-negative")
    if alpha == 1:
        return v0.copy()
    out = np.empty_like(v0)
    small = v0 <= TILTED_SWITCH
    out[small] = _tilted_stable_rejection(alpha, v0[small], rng)
    big = np.flatnonzero(~small)
    for i in big:
        lam = v0.flat[i] ** (1 / alpha)
        out.flat[i] = lam * _tilted_stable_double_rejection(alpha, lam, rng)
    return out


def _tilted_stable_rejection(alpha, v0, rng):
    out = np.empty_like(v0)
    todo = np.arange(v0.size)
    scale = v0.ravel() ** (1 / alpha)
    flat = out.ravel()
    while todo.size:
        s = scale[todo] * sample_positive_stable(alpha, rng, todo.size)
        ok = rng.uniform(size=todo.size) <= np.exp(-s)
        flat[todo[ok]] = s[ok]
        todo = todo[~ok]
    return flat.reshape(v0.shape)


def _sinc(x):
    return math.sin(x) / x if x != 0 else 1.0


def _zolotarev(x, alpha):
    # (1-a) sinc((1-a)x))^(1-a) (a sinc(a x))^a / sinc(x)
    return (((1 - alpha) * _sinc((1 - alpha) * x)) ** (1 - alpha)
            * (alpha * _sinc(alpha * x)) ** alpha / _sinc(x))


def _tilted_stable_double_rejection(alpha, lam, rng):
    """One draw from PS(alpha) tilted by exp(-lam x) (Devroye's double rejection)."""
    b = (1 - alpha) / alpha
    lam_a = lam ** alpha
    gam = lam_a * alpha * (1 - alpha)
    sgam = math.sqrt(gam)
    c1 = math.sqrt(math.pi / 2)
    c3 = (2 + c1) * sgam
    xi = (1 + math.sqrt(2) * c3) / math.pi
    psi = c3 * math.exp(-gam * math.pi ** 2 / 8) / math.sqrt(math.pi)
    w1 = c1 * xi / sgam
    w2 = 2 * math.sqrt(math.pi) * psi
    w3 = xi * math.pi

    while True:
        # outer proposal for the angle U
        while True:
            v = rng.uniform()
            w = rng.uniform()
            if gam >= 1:
                if v < w1 / (w1 + w2):
                    u = abs(rng.standard_normal()) / sgam
                else:
                    u = math.pi * (1 - w * w)
            else:
                if v < w3 / (w2 + w3):
                    u = math.pi * w
                else:
                    u = math.pi * (1 - w * w)
            if not 0 < u < math.pi:
                continue
            zeta = math.sqrt(_sinc(u) / (_sinc(alpha * u) ** alpha
                                         * _sinc((1 - alpha) * u) ** (1 - alpha)))
            z = 1 / (1 - (1 + alpha * zeta / sgam) ** (-1 / alpha))
            expo = -lam_a * (1 - zeta ** -2)
            if expo > 700:
                continue
            rho = (math.pi * math.exp(expo)
                   / ((1 + c1) * sgam / zeta + z))
            dens = 0.0
            if gam >= 1:
                dens += xi * math.exp(-gam * u * u / 2)
            else:
                dens += xi
            dens += psi / math.sqrt(math.pi - u)
            zz = rng.uniform() * rho * dens
            if zz <= 1:
                break

        a = _zolotarev(u, alpha) ** (1 / (1 - alpha))
        m = (b / a) ** alpha * lam_a
        delta = math.sqrt(m * alpha / a)
        a1 = delta * c1
        a3 = z / a
        s = a1 + delta + a3
        v2 = rng.uniform()
        nrm = e1 = 0.0
        if v2 < a1 / s:
            nrm = rng.standard_normal()
            x = m - delta * abs(nrm)
        elif v2 < (a1 + delta) / s:
            x = m + delta * rng.uniform()
        else:
            e1 = rng.standard_exponential()
            x = m + delta + e1 * a3
        if x < 0:
            continue
        e2 = -math.log(zz)
        c = a * (x - m) + math.exp(math.log(lam_a) / alpha - b * math.log(m)) * ((m / x) ** b - 1)
        if x < m:
            c -= nrm * nrm / 2
        elif x > m + delta:
            c -= e1
        if c <= e2:
            return x ** -b


class FrailtyTree:
    """Hierarchical frailties satisfying the sufficient nesting condition.

    Every internal node carries a generator record (``{"family": "clayton",
    "theta": ...}``, ``{"family": "gumbel", "alpha": ...}`` or the same with
    ``"tau"``).  A node without ``family`` inherits its parent's family.
    """

    def __init__(self, tree: HierarchyTree):
        self.tree = tree
        self.generators = {}
        for nid in tree.internal_nodes():
            par = dict(tree.params(nid))
            parent = tree.parent(nid)
            if "family" not in par:
                if parent is None:
                    raise StructureError("frailty tree root needs a generator family")
                par["family"] = self.generators[parent].family
            try:
                g = generator_from_dict(par)
            except KeyError as exc:
                raise StructureError(f"frailty node {nid!r} lacks parameter {exc}") from None
            if not isinstance(g, (Clayton, Gumbel)):
                raise CapabilityError(f"frailty node {nid!r}: family {g.family!r} cannot be nested")
            if parent is not None:
                gp = self.generators[parent]
                if type(gp) is not type(g):
                    raise CapabilityError(
                        f"mixed families along a path ({gp.family} -> {g.family}) are not supported")
                if isinstance(g, Gumbel) and not g.alpha <= gp.alpha:
                    raise DomainError(
                        f"nesting condition violated at {nid!r}: Gumbel alpha must not increase")
                if isinstance(g, Clayton) and not gp.theta <= g.theta:
                    raise DomainError(
                        f"nesting condition violated at {nid!r}: Clayton theta must not decrease")
            self.generators[nid] = g

    @property
    def d(self):
        return self.tree.d

    @property
    def family(self):
        return self.generators[self.tree.root].family

    def leaf_generators(self):
        """Generator applied to each coordinate (that of its parent node)."""
        return [self.generators[self.tree.leaf_parent(j)] for j in range(self.d)]

    def sample_nodes(self, rng, size):
        """Frailty values of every internal node, shape ``(size,)`` each."""
        root = self.tree.root
        vals = {root: self.generators[root].sample_frailty(rng, size)}
        for nid in self.tree.internal_nodes()[1:]:
            parent = self.tree.parent(nid)
            vals[nid] = _sample_child(self.generators[parent], self.generators[nid],
                                      vals[parent], rng)
        return vals

    def sample(self, rng, size):
        """Leaf frailties, shape ``(size, d)``."""
        vals = self.sample_nodes(rng, size)
        return np.column_stack([vals[self.tree.leaf_parent(j)] for j in range(self.d)])

    @classmethod
    def from_dict(cls, obj):
        return cls(HierarchyTree.from_dict(obj))

    def to_dict(self):
        return self.tree.to_dict()


def _sample_child(gp, gc, vparent, rng):
    if isinstance(gc, Gumbel):
        beta = gc.alpha / gp.alpha
        s = sample_positive_stable(beta, rng, vparent.shape)
        return vparent ** (1 / beta) * s
    return sample_tilted_stable(gp.theta / gc.theta, vparent, rng)


def sample_frailty_tree(tree: FrailtyTree, rng, size):
    """Leaf frailties of a frailty tree, shape ``(size, d)``."""
    return tree.sample(rng, size)


def clayton_two_level(sizes, tau0, taus):
    """Two-level nested Clayton frailty tree parameterised by Kendall's tau."""
    return FrailtyTree(HierarchyTree.two_level(
        sizes, {"family": "clayton", "tau": tau0},
        [{"family": "clayton", "tau": t} for t in taus]))


def gumbel_two_level(sizes, tau0, taus):
    """Two-level nested Gumbel frailty tree parameterised by Kendall's tau."""
    return FrailtyTree(HierarchyTree.two_level(
        sizes, {"family": "gumbel", "tau": tau0},
        [{"family": "gumbel", "tau": t} for t in taus]))
