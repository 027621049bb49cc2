"""Completely monotone Archimedean generators.

Each generator provides psi, its inverse, the log of ``-(psi^{-1})'`` and
``log((-1)^k psi^{(k)})`` for the orders needed by the density, plus a
sampler for the frailty ``V`` whose Laplace-Stieltjes transform is psi.
"""
import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import CapabilityError, DomainError

#: highest derivative order (= largest density dimension) supported
MAX_DERIV_ORDER = 12


def _check_t(t, strict=False):
    t = np.asarray(t, dtype=float)
    bad = (t <= 0) if strict else (t < 0)
    if np.any(bad) or np.any(np.isnan(t)):
        raise DomainError("generator argument must be %s" % ("> 0" if strict else ">= 0"))
    return t


def _check_u(u, open_right=False):
    u = np.asarray(u, dtype=float)
    bad = (u <= 0) | ((u >= 1) if open_right else (u > 1)) | np.isnan(u)
    if np.any(bad):
        raise DomainError("copula argument must lie in (0, %s" % ("1)" if open_right else "1]"))
    return u


def _check_order(k):
    if int(k) != k or k < 1:
        raise DomainError("derivative order must be a positive integer")
    if k > MAX_DERIV_ORDER:
        raise CapabilityError(f"derivative order {k} exceeds the supported maximum {MAX_DERIV_ORDER}")
    return int(k)


class Generator:
    """Base class; subclasses implement the family-specific formulas."""

    family = None

    def psi(self, t):
        raise NotImplementedError

    def psi_inv(self, u):
        raise NotImplementedError

    def log_neg_dpsi_inv(self, u):
        """log(-(psi^{-1})'(u)) for u in (0, 1)."""
        raise NotImplementedError

    def log_abs_deriv(self, k, t):
        """log((-1)^k psi^{(k)}(t)) for k >= 1, t > 0."""
        raise NotImplementedError

    def sample_frailty(self, rng, size=None):
        raise NotImplementedError

    def kendall_tau(self):
        """Kendall's tau of the bivariate Archimedean copula generated by psi."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class Clayton(Generator):
    """psi(t) = (1 + t)^(-1/theta), theta > 0; frailty Gamma(1/theta, 1)."""

    family = "clayton"

    def __init__(self, theta):
        if not theta > 0:
            raise DomainError("Clayton parameter theta must be > 0")
        self.theta = float(theta)

    @classmethod
    def from_tau(cls, tau):
        if not 0 < tau < 1:
            raise DomainError("Clayton Kendall's tau must lie in (0, 1)")
        return cls(2 * tau / (1 - tau))

    def kendall_tau(self):
        return self.theta / (self.theta + 2)

    def psi(self, t):
        t = _check_t(t)
        return np.exp(-np.log1p(t) / self.theta)

    def psi_inv(self, u):
        u = _check_u(u)
        return np.expm1(-self.theta * np.log(u))

    def log_neg_dpsi_inv(self, u):
        u = _check_u(u, open_right=True)
        return np.log(self.theta) - (self.theta + 1) * np.log(u)

    def log_abs_deriv(self, k, t):
        k = _check_order(k)
        t = _check_t(t, strict=True)
        a = 1 / self.theta
        return gammaln(a + k) - gammaln(a) - (a + k) * np.log1p(t)

    def sample_frailty(self, rng, size=None):
        return rng.gamma(1 / self.theta, size=size)

    def to_dict(self):
        return {"family": self.family, "theta": self.theta}

    def __repr__(self):
        return f"Clayton(theta={self.theta!r})"


class Gumbel(Generator):
    """psi(t) = exp(-t^alpha), alpha in (0, 1]; frailty positive stable PS(alpha)."""

    family = "gumbel"

    def __init__(self, alpha):
        if not 0 < alpha <= 1:
            raise DomainError("Gumbel parameter alpha must lie in (0, 1]")
        self.alpha = float(alpha)
        self._log_coef = _gumbel_log_coefficients(self.alpha, MAX_DERIV_ORDER)

    @classmethod
    def from_tau(cls, tau):
        if not 0 <= tau < 1:
            raise DomainError("Gumbel Kendall's tau must lie in [0, 1)")
        return cls(1 - tau)

    def kendall_tau(self):
        return 1 - self.alpha

    def psi(self, t):
        t = _check_t(t)
        return np.exp(-t ** self.alpha)

    def psi_inv(self, u):
        u = _check_u(u)
        return (-np.log(u)) ** (1 / self.alpha)

    def log_neg_dpsi_inv(self, u):
        u = _check_u(u, open_right=True)
        a = self.alpha
        return -np.log(a) + (1 / a - 1) * np.log(-np.log(u)) - np.log(u)

    def log_abs_deriv(self, k, t):
        # (-1)^k psi^(k)(t) = psi(t) t^-k sum_j a_kj t^(alpha j), all a_kj >= 0
        k = _check_order(k)
        t = _check_t(t, strict=True)
        a = self.alpha
        logt = np.log(t)
        coef = self._log_coef[k][1:k + 1]
        j = np.arange(1, k + 1)
        terms = coef + a * j * logt[..., None]
        return -t ** a - k * logt + logsumexp(terms, axis=-1)

    def sample_frailty(self, rng, size=None):
        from .frailty import sample_positive_stable
        return sample_positive_stable(self.alpha, rng, size)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha}

    def __repr__(self):
        return f"Gumbel(alpha={self.alpha!r})"


class IndependenceExp(Generator):
    """psi(t) = exp(-t); frailty identically 1, so the AXC reduces to its EVC."""

    family = "indep_exp"

    def kendall_tau(self):
        return 0.0

    def psi(self, t):
        return np.exp(-_check_t(t))

    def psi_inv(self, u):
        return -np.log(_check_u(u))

    def log_neg_dpsi_inv(self, u):
        return -np.log(_check_u(u, open_right=True))

    def log_abs_deriv(self, k, t):
        _check_order(k)
        return -_check_t(t, strict=True)

    def sample_frailty(self, rng, size=None):
        return np.ones(size) if size is not None else 1.0

    def to_dict(self):
        return {"family": self.family}

    def __repr__(self):
        return "IndependenceExp()"


def _gumbel_log_coefficients(alpha, kmax):
    """log a_kj for the Gumbel derivative polynomials, k <= kmax.

    Uses a_{k+1,j} = alpha a_{k,j-1} + (k - alpha j) a_{k,j}; both weights are
    non-negative for alpha <= 1, so the recursion never cancels.
    """
    out = np.full((kmax + 1, kmax + 2), -np.inf)
    out[1, 1] = np.log(alpha)
    for k in range(1, kmax):
        for j in range(1, k + 2):
            left = np.log(alpha) + out[k, j - 1]
            w = k - alpha * j
            right = np.log(w) + out[k, j] if w > 0 else -np.inf
            out[k + 1, j] = np.logaddexp(left, right)
    return out


def psi(g: Generator, t):
    return g.psi(t)


def psi_inv(g: Generator, u):
    return g.psi_inv(u)


def log_neg_dpsi_inv(g: Generator, u):
    return g.log_neg_dpsi_inv(u)


def log_abs_psi_deriv(g: Generator, k, t):
    return g.log_abs_deriv(k, t)


def generator_from_dict(obj) -> Generator:
    """Build a generator from ``{"family": ..., parameter or "tau": ...}``."""
    fam = obj.get("family")
    if fam == "clayton":
        if "tau" in obj:
            return Clayton.from_tau(obj["tau"])
        return Clayton(obj["theta"])
    if fam == "gumbel":
        if "tau" in obj:
            return Gumbel.from_tau(obj["tau"])
        return Gumbel(obj["alpha"])
    if fam == "indep_exp":
        return IndependenceExp()
    raise CapabilityError(f"unknown generator family {fam!r}")
