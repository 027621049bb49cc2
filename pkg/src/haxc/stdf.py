"""Stable tail dependence functions and their mixed partial derivatives.

A stable tail dependence function ``ell`` determines the extreme-value copula
``C(u) = exp(-ell(-log u))``.  Every class here evaluates ``ell`` on one point
(shape ``(d,)``) or many (shape ``(n, d)``) and provides ``partial(B, x)``,
the mixed partial derivative with respect to the coordinates in ``B``
(0-based), whose sign is ``(-1)^(|B|-1)``.

Coordinates equal to zero are dropped before evaluation, so
``ell(x) = x_j`` whenever only ``x_j`` is non-zero.
"""
import itertools
import math

import numpy as np
from scipy import special

from .errors import CapabilityError, DomainError, StructureError
from .hierarchy import HierarchyTree
from .mvcdf import mvn_cdf, mvt_cdf

#: relative step of the finite-difference partial derivatives
FD_STEP = 2e-3


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != d:
        raise DomainError(f"expected points of dimension {d}, got shape {np.shape(x)}")
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise DomainError("stable tail dependence function arguments must be >= 0")
    return x, single


def _as_block(B, d):
    B = tuple(sorted({int(b) for b in B}))
    if not B:
        raise DomainError("derivative block must be non-empty")
    if B[0] < 0 or B[-1] >= d:
        raise DomainError(f"derivative block {B} out of range for d={d}")
    return B


def falling_factorial(a, m):
    """(a)_m = a (a - 1) ... (a - m + 1)."""
    out = 1.0
    for i in range(m):
        out *= a - i
    return out


class Stdf:
    """Base class.  Subclasses implement ``_value`` on an ``(n, d)`` array."""

    variant = None
    smooth = True

    def __init__(self, d):
        if int(d) != d or d < 1:
            raise DomainError("dimension must be a positive integer")
        self.d = int(d)

    def __call__(self, x):
        x, single = _as_points(x, self.d)
        out = self._value(x)
        return float(out[0]) if single else out

    evaluate = __call__

    def _value(self, x):
        raise NotImplementedError

    def partial(self, B, x):
        """Mixed partial derivative D_B ell at x > 0."""
        if not self.smooth:
            raise CapabilityError(f"{self.variant} stdf has no partial derivatives")
        B = _as_block(B, self.d)
        x, single = _as_points(x, self.d)
        if np.any(x <= 0):
            raise DomainError("partial derivatives need strictly positive arguments")
        out = self._partial(B, x)
        return float(out[0]) if single else out

    def log_abs_partial(self, B, x):
        """log |D_B ell(x)|; -inf where the derivative vanishes."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.partial(B, x)))

    def _partial(self, B, x):
        return fd_partial(self._value, B, x)

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d})"


class MaxStdf(Stdf):
    """ell(x) = max_j x_j (comonotone EVC)."""

    variant = "max"
    smooth = False

    def _value(self, x):
        return x.max(axis=1)

    def to_dict(self):
        return {"variant": self.variant, "d": self.d}


class SumStdf(Stdf):
    """ell(x) = sum_j x_j (independence)."""

    variant = "sum"

    def _value(self, x):
        return x.sum(axis=1)

    def _partial(self, B, x):
        return np.full(x.shape[0], 1.0 if len(B) == 1 else 0.0)

    def log_abs_partial(self, B, x):
        B = _as_block(B, self.d)
        x, single = _as_points(x, self.d)
        out = np.full(x.shape[0], 0.0 if len(B) == 1 else -np.inf)
        return float(out[0]) if single else out

    def to_dict(self):
        return {"variant": self.variant, "d": self.d}


class GumbelStdf(Stdf):
    """ell(x) = (sum_j x_j^(1/alpha))^alpha, alpha in (0, 1]."""

    variant = "gumbel"

    def __init__(self, alpha, d):
        super().__init__(d)
        if not 0 < alpha <= 1:
            raise DomainError("Gumbel alpha must lie in (0, 1]")
        self.alpha = float(alpha)

    def _value(self, x):
        a = self.alpha
        # scale by the row maximum so that x^(1/alpha) cannot overflow
        top = x.max(axis=1)
        safe = np.where(top > 0, top, 1.0)
        return top * np.sum((x / safe[:, None]) ** (1 / a), axis=1) ** a

    def _partial(self, B, x):
        m = len(B)
        coef = falling_factorial(self.alpha, m)
        if coef == 0:
            return np.zeros(x.shape[0])
        return np.sign(coef) * np.exp(self._log_abs(B, x, m, coef))

    def _log_abs(self, B, x, m, coef):
        a = self.alpha
        logx = np.log(x)
        logs = special.logsumexp(logx / a, axis=1)
        return (math.log(abs(coef)) + (a - m) * logs - m * math.log(a)
                + (1 / a - 1) * logx[:, list(B)].sum(axis=1))

    def log_abs_partial(self, B, x):
        B = _as_block(B, self.d)
        x, single = _as_points(x, self.d)
        if np.any(x <= 0):
            raise DomainError("partial derivatives need strictly positive arguments")
        m = len(B)
        coef = falling_factorial(self.alpha, m)
        if coef == 0:
            out = np.full(x.shape[0], -np.inf)
        else:
            out = self._log_abs(B, x, m, coef)
        return float(out[0]) if single else out

    def to_dict(self):
        return {"variant": self.variant, "d": self.d, "alpha": self.alpha}

    def __repr__(self):
        return f"GumbelStdf(alpha={self.alpha!r}, d={self.d})"


class NegativeLogisticStdf(Stdf):
    """Negative logistic: sum over non-empty J of (-1)^(|J|+1) (sum_J x_j^-theta)^(-1/theta)."""

    variant = "negative_logistic"

    def __init__(self, theta, d):
        super().__init__(d)
        if not theta > 0:
            raise DomainError("negative logistic theta must be > 0")
        if self.d > 16:
            raise CapabilityError("negative logistic stdf is limited to d <= 16")
        self.theta = float(theta)
        subsets = np.array(list(itertools.product([0, 1], repeat=self.d))[1:], dtype=bool)
        self._subsets = subsets
        self._signs = np.where(subsets.sum(axis=1) % 2 == 1, 1.0, -1.0)

    def _value(self, x):
        th = self.theta
        zero = x == 0
        p = np.where(zero, 1.0, x) ** -th
        p[zero] = 0.0
        s = p @ self._subsets.T
        # a subset touching a zero coordinate has s = inf, hence term 0
        touched = (zero.astype(float) @ self._subsets.T) > 0
        with np.errstate(divide="ignore"):
            terms = np.where(touched, 0.0, s ** (-1 / th))
        return terms @ self._signs

    def _partial(self, B, x):
        th = self.theta
        m = len(B)
        p = x ** -th
        keep = self._subsets[:, list(B)].all(axis=1)
        s = p @ self._subsets[keep].T
        fm = falling_factorial(-1 / th, m) * s ** (-1 / th - m)
        inner = np.prod(-th * x[:, list(B)] ** (-th - 1), axis=1)
        return (fm @ self._signs[keep]) * inner

    def to_dict(self):
        return {"variant": self.variant, "d": self.d, "theta": self.theta}

    def __repr__(self):
        return f"NegativeLogisticStdf(theta={self.theta!r}, d={self.d})"


class NestedGumbelStdf(Stdf):
    """Recursively nested Gumbel stdf on a hierarchy tree.

    Every internal node ``n`` with parameter ``alpha_n`` maps its children's
    values ``g_c`` to ``(sum_c g_c^(1/alpha_n))^alpha_n``; leaves carry the
    coordinates.  Internal nodes without ``"alpha"`` inherit their parent's.
    Along each root-to-leaf path alpha must not increase.
    """

    variant = "nested_gumbel"

    def __init__(self, tree: HierarchyTree):
        super().__init__(tree.d)
        self.tree = tree
        self.alphas = nested_alphas(tree)

    def _value(self, x):
        tree = self.tree

        def node_value(nid):
            if tree.is_leaf(nid):
                return x[:, tree.coordinate(nid)]
            a = self.alphas[nid]
            return sum(node_value(c) ** (1 / a) for c in tree.children(nid)) ** a

        return node_value(tree.root)

    def _partial(self, B, x):
        return _NestedPartials(self, x).derivative(self.tree.root, _mask(B))

    def to_dict(self):
        return {"variant": self.variant, "tree": self.tree.to_dict()}

    def __repr__(self):
        return f"NestedGumbelStdf(d={self.d})"


def nested_alphas(tree: HierarchyTree):
    """alpha per internal node, inherited when absent, checked for ordering."""
    alphas = {}
    for nid in tree.internal_nodes():
        par = tree.params(nid)
        parent = tree.parent(nid)
        if "alpha" in par:
            a = float(par["alpha"])
        elif "tau" in par:
            a = 1 - float(par["tau"])
        elif parent is not None:
            a = alphas[parent]
        else:
            raise StructureError("nested Gumbel root needs an 'alpha' parameter")
        if not 0 < a <= 1:
            raise DomainError(f"node {nid!r}: alpha must lie in (0, 1]")
        if parent is not None and a > alphas[parent]:
            raise DomainError(f"node {nid!r}: alpha must not exceed its parent's")
        alphas[nid] = a
    return alphas


def _mask(B):
    m = 0
    for b in B:
        m |= 1 << b
    return m


def _bits(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _partition_poly(mask, block_value):
    """Coefficients c[k] = sum over partitions of ``mask`` into k blocks of the
    product of ``block_value(block)``."""
    if mask == 0:
        return [1.0]
    low = mask & -mask
    rest = mask ^ low
    rest_bits = _bits(rest)
    out = []
    for r in range(len(rest_bits) + 1):
        for extra in itertools.combinations(rest_bits, r):
            block = low | _mask(extra)
            val = block_value(block)
            if np.isscalar(val) and val == 0:
                continue
            sub = _partition_poly(mask ^ block, block_value)
            for k, c in enumerate(sub):
                while len(out) <= k + 1:
                    out.append(0.0)
                out[k + 1] = out[k + 1] + val * c
    return out


class _NestedPartials:
    """Chain rule (Faa di Bruno over set partitions) through the nested tree."""

    def __init__(self, model, x):
        self.model = model
        self.tree = model.tree
        self.x = x
        self.cover = {nid: _mask(self.tree.leaves_under(nid)) for nid in self.tree.internal_nodes()}
        self.memo = {}

    def derivative(self, nid, mask):
        key = (nid, mask)
        if key in self.memo:
            return self.memo[key]
        tree = self.tree
        if tree.is_leaf(nid):
            j = tree.coordinate(nid)
            if mask == 0:
                val = self.x[:, j]
            else:
                val = 1.0 if mask == 1 << j else 0.0
            self.memo[key] = val
            return val
        if mask & ~self.cover[nid]:
            self.memo[key] = 0.0
            return 0.0
        a = self.model.alphas[nid]
        children = tree.children(nid)
        s = sum(self.derivative(c, 0) ** (1 / a) for c in children)
        if mask == 0:
            val = s ** a
            self.memo[key] = val
            return val
        # split the mask by child; blocks never straddle children
        polys = []
        for c in children:
            cm = mask & (_mask(tree.leaves_under(c)))
            if cm:
                polys.append(_partition_poly(cm, lambda blk, c=c: self._power_derivative(c, blk, a)))
        conv = [1.0]
        for p in polys:
            new = [0.0] * (len(conv) + len(p) - 1)
            for i, ci in enumerate(conv):
                for j, pj in enumerate(p):
                    new[i + j] = new[i + j] + ci * pj
            conv = new
        val = sum(conv[k] * falling_factorial(a, k) * s ** (a - k)
                  for k in range(1, len(conv)))
        self.memo[key] = val
        return val

    def _power_derivative(self, c, block, a):
        # D_block of g_c^(1/a)
        g = self.derivative(c, 0)
        poly = _partition_poly(block, lambda blk: self.derivative(c, blk))
        return sum(poly[k] * falling_factorial(1 / a, k) * g ** (1 / a - k)
                   for k in range(1, len(poly)))


class HuslerReissStdf(Stdf):
    """Husler-Reiss stdf, sum_j x_j Phi_{d-1}(0, Sigma_j)(eta_j).

    Parameterised by the covariance ``sigma`` of the Gaussian field of the
    matching Brown-Resnick generator or directly by ``gamma`` with
    ``gamma_ij = Var(eps_i - eps_j) / 2``.  Then ``eta_j`` has entries
    ``gamma_ij - log(x_i / x_j)`` and ``Sigma_j`` entries
    ``gamma_ij + gamma_kj - gamma_ik``.
    """

    variant = "husler_reiss"

    def __init__(self, sigma=None, gamma=None):
        if (sigma is None) == (gamma is None):
            raise DomainError("give exactly one of sigma or gamma")
        if sigma is not None:
            sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
            _check_symmetric(sigma, "sigma")
            v = np.diag(sigma)
            gamma = (v[:, None] + v[None, :]) / 2 - sigma
        gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
        _check_symmetric(gamma, "gamma")
        super().__init__(gamma.shape[0])
        off = ~np.eye(self.d, dtype=bool)
        if np.any(np.abs(np.diag(gamma)) > 1e-12) or np.any(gamma[off] <= 0):
            raise DomainError("gamma must have zero diagonal and positive off-diagonal entries")
        self.gamma = gamma
        self.sigma = sigma
        self._blocks = []
        for j in range(self.d):
            idx = [i for i in range(self.d) if i != j]
            g = gamma[idx, j]
            cov = g[:, None] + g[None, :] - gamma[np.ix_(idx, idx)]
            self._blocks.append((idx, cov))

    def _value(self, x):
        if self.d == 1:
            return x[:, 0].copy()
        if self.d == 2:
            g = self.gamma[0, 1]
            lam = math.sqrt(2 * g)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.log(x[:, 0] / x[:, 1])
                val = x[:, 0] * special.ndtr(lam / 2 + r / lam) + x[:, 1] * special.ndtr(lam / 2 - r / lam)
            # a zero coordinate leaves the other one
            return np.where((x == 0).any(axis=1), x.sum(axis=1), val)
        return _by_support(x, self._row,
                           lambda idx: HuslerReissStdf(gamma=self.gamma[np.ix_(idx, idx)]))

    def _row(self, x):
        total = 0.0
        for j, (idx, cov) in enumerate(self._blocks):
            eta = self.gamma[idx, j] - np.log(x[idx] / x[j])
            total += x[j] * mvn_cdf(eta, cov)
        return total

    def to_dict(self):
        if self.sigma is not None:
            return {"variant": self.variant, "sigma": self.sigma.tolist()}
        return {"variant": self.variant, "gamma": self.gamma.tolist()}


class ExtremalTStdf(Stdf):
    """Extremal t stdf with ``nu`` degrees of freedom and correlation matrix ``corr``.

    ell(x) = sum_j x_j T_j((x_{-j} / x_j)^(-1/nu)) where T_j is the (d-1)-variate
    t distribution function with nu + 1 degrees of freedom, location
    P_{-j,j} and dispersion (P_{-j,-j} - P_{-j,j} P_{j,-j}) / (nu + 1).
    """

    variant = "extremal_t"

    def __init__(self, nu, corr):
        corr = np.atleast_2d(np.asarray(corr, dtype=float))
        _check_symmetric(corr, "corr")
        super().__init__(corr.shape[0])
        if not nu > 0:
            raise DomainError("degrees of freedom must be > 0")
        if np.any(np.abs(np.diag(corr) - 1) > 1e-12):
            raise DomainError("corr must have unit diagonal")
        off = ~np.eye(self.d, dtype=bool)
        if np.any(np.abs(corr[off]) >= 1):
            raise DomainError("off-diagonal correlations must lie in (-1, 1)")
        self.nu = float(nu)
        self.corr = corr
        self._blocks = []
        for j in range(self.d):
            idx = [i for i in range(self.d) if i != j]
            loc = corr[idx, j]
            disp = (corr[np.ix_(idx, idx)] - np.outer(loc, loc)) / (self.nu + 1)
            self._blocks.append((idx, loc, disp))

    def _value(self, x):
        if self.d == 1:
            return x[:, 0].copy()
        if self.d == 2:
            nu, rho = self.nu, self.corr[0, 1]
            k = math.sqrt((nu + 1) / (1 - rho * rho))
            with np.errstate(divide="ignore", invalid="ignore"):
                q = (x[:, 1] / x[:, 0]) ** (1 / nu)
                val = (x[:, 0] * special.stdtr(nu + 1, (1 / q - rho) * k)
                       + x[:, 1] * special.stdtr(nu + 1, (q - rho) * k))
            return np.where((x == 0).any(axis=1), x.sum(axis=1), val)
        return _by_support(x, self._row,
                           lambda idx: ExtremalTStdf(self.nu, self.corr[np.ix_(idx, idx)]))

    def _row(self, x):
        total = 0.0
        for j, (idx, loc, disp) in enumerate(self._blocks):
            upper = (x[idx] / x[j]) ** (-1 / self.nu)
            total += x[j] * mvt_cdf(upper, self.nu + 1, disp, loc=loc)
        return total

    def to_dict(self):
        return {"variant": self.variant, "nu": self.nu, "corr": self.corr.tolist()}


def _by_support(x, full_row, restrict):
    """Evaluate row-wise stdfs one support pattern at a time.

    Rows with all coordinates positive go through ``full_row``; rows with the
    same zero pattern share the stdf ``restrict(idx)`` of their positive
    coordinates, which is vectorised in dimension 2.
    """
    pos = x > 0
    out = np.empty(x.shape[0])
    keys, inv = np.unique(pos, axis=0, return_inverse=True)
    inv = inv.ravel()
    for g, key in enumerate(keys):
        rows = inv == g
        idx = np.flatnonzero(key)
        if idx.size <= 1:
            out[rows] = x[rows].sum(axis=1)
        elif idx.size == x.shape[1]:
            out[rows] = [full_row(r) for r in x[rows]]
        else:
            out[rows] = restrict(idx)._value(x[np.ix_(rows, idx)])
    return out


def _check_symmetric(m, name):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"{name} must be a square matrix")
    if not np.allclose(m, m.T, atol=1e-12):
        raise DomainError(f"{name} must be symmetric")


def fd_partial(func, B, x, step=FD_STEP):
    """Central-difference mixed partial over ``B`` with one Richardson level.

    ``func`` maps ``(n, d)`` points to ``(n,)`` values; steps are relative to x.
    """
    B = list(B)
    h = step * x[:, B]

    def central(hh):
        total = np.zeros(x.shape[0])
        for signs in itertools.product((1.0, -1.0), repeat=len(B)):
            xs = x.copy()
            xs[:, B] += hh * np.array(signs)
            total += np.prod(signs) * func(xs)
        return total / np.prod(2 * hh, axis=1)

    return (4 * central(h / 2) - central(h)) / 3


def eval_stdf(stdf: Stdf, x):
    return stdf(x)


def partial_stdf(stdf: Stdf, B, x):
    return stdf.partial(B, x)


def log_abs_partial_stdf(stdf: Stdf, B, x):
    return stdf.log_abs_partial(B, x)


def stdf_from_dict(obj, d=None) -> Stdf:
    """Build an stdf from ``{"variant": ..., parameters}``; ``d`` fills in a missing dimension."""
    try:
        v = obj["variant"]
        if v in ("max", "sum", "gumbel", "negative_logistic"):
            dim = obj.get("d", d)
            if dim is None:
                raise StructureError(f"stdf variant {v!r} needs a dimension 'd'")
            if v == "max":
                return MaxStdf(dim)
            if v == "sum":
                return SumStdf(dim)
            if v == "gumbel":
                a = obj["alpha"] if "alpha" in obj else 1 - obj["tau"]
                return GumbelStdf(a, dim)
            return NegativeLogisticStdf(obj["theta"], dim)
        if v == "nested_gumbel":
            return NestedGumbelStdf(HierarchyTree.from_dict(obj["tree"]))
        if v == "husler_reiss":
            return HuslerReissStdf(sigma=obj.get("sigma"), gamma=obj.get("gamma"))
        if v == "extremal_t":
            return ExtremalTStdf(obj["nu"], obj["corr"])
    except KeyError as exc:
        raise StructureError(f"stdf block lacks field {exc}") from None
    raise CapabilityError(f"unknown stdf variant {v!r}")

