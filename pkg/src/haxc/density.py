"""Densities of Archimax copulas.

With ``x = psi^{-1}(u)`` the density is

    c(u) = prod_j (-psi^{-1})'(u_j)
           * sum_k (-1)^k psi^{(k)}(ell(x)) sum_{|pi| = k} prod_{B in pi} (-1)^{|B|-1} D_B ell(x),

where pi runs over the set partitions of the coordinates.  Every factor is
non-negative, so the sum can be carried out in log space: for each block
count k the partition terms are combined by log-sum-exp, then the k terms.
``axc_log_density`` does this; ``axc_density`` can also evaluate the same
sum directly in floating point, which over- or underflows in the tails.

For the Gumbel stdf the partition sum only depends on block sizes and
collapses to a few coefficients, see ``gumbel_stdf_density_fastpath``.
"""
import math

import numpy as np
from scipy.special import comb, logsumexp

from .errors import CapabilityError, DomainError, NumericalError
from .generators import Generator, _check_u
from .stdf import GumbelStdf, Stdf, SumStdf, falling_factorial

#: largest dimension for which densities are evaluated
MAX_DENSITY_DIM = 12

#: partitions processed per vectorised batch
BATCH = 4096


def _check_dim(d):
    if int(d) != d or d < 1:
        raise DomainError("dimension must be a positive integer")
    if d > MAX_DENSITY_DIM:
        raise CapabilityError(
            f"density evaluation is limited to d <= {MAX_DENSITY_DIM}, got d={d}")
    return int(d)


def _rgs(d, k):
    """Restricted growth strings of length d using exactly k labels."""
    a = [0] * d

    def rec(i, m):
        # m = number of labels used by a[:i]
        if i == d:
            if m == k:
                yield a
            return
        if k - m > d - i:
            return
        for lab in range(min(m + 1, k)):
            a[i] = lab
            yield from rec(i + 1, max(m, lab + 1))

    yield from rec(1, 1)


def enumerate_partitions(d):
    """Yield ``(k, blocks)`` for every set partition of ``{0, ..., d-1}``.

    Partitions come grouped by the number of blocks k = 1, ..., d; blocks
    are tuples ordered by their smallest element.
    """
    d = _check_dim(d)
    for k in range(1, d + 1):
        for a in _rgs(d, k):
            blocks = [[] for _ in range(k)]
            for j, lab in enumerate(a):
                blocks[lab].append(j)
            yield k, tuple(tuple(b) for b in blocks)


def _partition_masks(d, k):
    """Batches of partitions with k blocks as int arrays of block bitmasks."""
    batch = []
    for a in _rgs(d, k):
        masks = [0] * k
        for j, lab in enumerate(a):
            masks[lab] |= 1 << j
        batch.append(masks)
        if len(batch) == BATCH:
            yield np.array(batch)
            batch = []
    if batch:
        yield np.array(batch)


def _block_log_partials(stdf, x):
    """log |D_B ell(x)| for every non-empty block, indexed by bitmask.

    The sign of each derivative must be (-1)^(|B|-1); a violation (which can
    only come from finite-difference noise) raises NumericalError.
    """
    d = x.shape[1]
    out = np.full((1 << d, x.shape[0]), -np.inf)
    exact_log = type(stdf).log_abs_partial is not Stdf.log_abs_partial
    for mask in range(1, 1 << d):
        B = tuple(j for j in range(d) if mask >> j & 1)
        if exact_log:
            out[mask] = stdf.log_abs_partial(B, x)
            continue
        p = np.atleast_1d(stdf.partial(B, x)) * (-1) ** (len(B) - 1)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise NumericalError(
                f"derivative of the stdf over block {B} has the wrong sign or is not finite")
        with np.errstate(divide="ignore"):
            out[mask] = np.log(p)
    return out


def _prepare(psi, stdf, u):
    if not isinstance(psi, Generator):
        raise DomainError(f"not a generator: {psi!r}")
    if not stdf.smooth:
        raise CapabilityError(f"{stdf.variant} stdf has no density")
    d = _check_dim(stdf.d)
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[1] != d:
        raise DomainError(f"expected points of dimension {d}, got shape {u.shape}")
    u = _check_u(u, open_right=True)
    x = psi.psi_inv(u)
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("points too close to the boundary of the unit cube")
    return d, u, x, single


def _log_partition_sums(L, d, k):
    """log sum_{|pi| = k} prod_B |D_B ell|, merged batch by batch."""
    acc = np.full(L.shape[1], -np.inf)
    for masks in _partition_masks(d, k):
        terms = L[masks].sum(axis=1)
        acc = np.logaddexp(acc, logsumexp(terms, axis=0))
    return acc


def axc_log_density(psi: Generator, stdf: Stdf, u):
    """Log density of the AXC with generator ``psi`` and stdf ``stdf``.

    Parameters
    ----------
    psi : Generator
    stdf : Stdf
        Must be differentiable; finite-difference partials (Husler-Reiss,
        extremal t) are accurate to about 1e-2 relative in the density.
    u : array_like
        One point or rows of points in the open unit cube.

    Returns
    -------
    float or ndarray
    """
    d, u, x, single = _prepare(psi, stdf, u)
    ell = stdf(x)
    L = _block_log_partials(stdf, x)
    b = np.full((d, u.shape[0]), -np.inf)
    for k in range(1, d + 1):
        a = _log_partition_sums(L, d, k)
        live = np.isfinite(a)
        if np.any(live):
            b[k - 1, live] = psi.log_abs_deriv(k, ell[live]) + a[live]
    with np.errstate(divide="ignore"):
        out = psi.log_neg_dpsi_inv(u).sum(axis=1) + logsumexp(b, axis=0)
    if not np.all(np.isfinite(out)):
        raise NumericalError("log density is not finite at some points")
    return float(out[0]) if single else out


def _direct_density(psi, stdf, d, u, x):
    ell = stdf(x)
    parts = {}
    for mask in range(1, 1 << d):
        B = tuple(j for j in range(d) if mask >> j & 1)
        parts[mask] = np.atleast_1d(stdf.partial(B, x))
    total = np.zeros(u.shape[0])
    for k, blocks in enumerate_partitions(d):
        term = (-1) ** k * np.exp(psi.log_abs_deriv(k, ell))
        for blk in blocks:
            term = term * parts[sum(1 << j for j in blk)]
        total += term
    return np.prod(np.exp(psi.log_neg_dpsi_inv(u)), axis=1) * (-1) ** d * total


def axc_density(psi: Generator, stdf: Stdf, u, method="log"):
    """AXC density.

    ``method="log"`` exponentiates ``axc_log_density`` and may underflow to 0
    deep in the tails; ``method="direct"`` sums the signed terms in floating
    point, which is a second, independent evaluation route.
    """
    if method == "log":
        return np.exp(axc_log_density(psi, stdf, u))
    if method != "direct":
        raise DomainError(f"unknown method {method!r}")
    d, u, x, single = _prepare(psi, stdf, u)
    with np.errstate(over="ignore", invalid="ignore"):
        out = _direct_density(psi, stdf, d, u, x)
    return float(out[0]) if single else out


def gumbel_partition_coefficients(alpha, d):
    """|sum_{|pi| = k} prod_B (alpha)_{|B|}| for k = 1..d.

    Uses the recursion over the block containing the first element,
    c(n, k) = sum_m binom(n - 1, m - 1) |(alpha)_m| c(n - m, k - 1).
    """
    c = np.zeros((d + 1, d + 1))
    c[0, 0] = 1.0
    ff = [abs(falling_factorial(alpha, m)) for m in range(d + 1)]
    for n in range(1, d + 1):
        for k in range(1, n + 1):
            c[n, k] = sum(comb(n - 1, m - 1, exact=True) * ff[m] * c[n - m, k - 1]
                          for m in range(1, n - k + 2))
    return c[d, 1:]


def gumbel_stdf_density_fastpath(psi: Generator, alpha, u):
    """Log density of the AXC with Gumbel stdf, via block-size coefficients.

    With ``s = sum_j x_j^(1/alpha)`` and ``ell = s^alpha``, every partition
    with k blocks contributes ``prod_B (alpha)_{|B|} s^(k alpha - d)``
    times ``alpha^-d prod_j x_j^(1/alpha - 1)``.
    """
    if not 0 < alpha <= 1:
        raise DomainError("Gumbel alpha must lie in (0, 1]")
    d, u, x, single = _prepare(psi, GumbelStdf(alpha, np.shape(u)[-1]), u)
    logx = np.log(x)
    log_s = logsumexp(logx / alpha, axis=1)
    coef = gumbel_partition_coefficients(alpha, d)
    with np.errstate(divide="ignore"):
        log_coef = np.log(coef)
    b = np.full((d, u.shape[0]), -np.inf)
    for k in range(1, d + 1):
        if np.isfinite(log_coef[k - 1]):
            b[k - 1] = (psi.log_abs_deriv(k, np.exp(alpha * log_s)) + k * alpha * log_s
                        + log_coef[k - 1])
    out = (psi.log_neg_dpsi_inv(u).sum(axis=1) - d * math.log(alpha)
           + (1 / alpha - 1) * logx.sum(axis=1) - d * log_s + logsumexp(b, axis=0))
    return float(out[0]) if single else out


def ac_log_density(psi: Generator, u):
    """Archimedean log density, the AXC with the sum stdf."""
    return axc_log_density(psi, SumStdf(np.shape(u)[-1]), u)
