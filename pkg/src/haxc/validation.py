"""Rank statistics and Monte Carlo oracles for checking copula samples."""
import numpy as np

from .errors import DomainError

#: asymptotic 1% critical value of sqrt(n) * KS statistic
KS_CRIT_01 = 1.628


def _dense_rank(a):
    return np.unique(a, return_inverse=True)[1].astype(np.int64)


def _pair_ties(ranks):
    counts = np.bincount(ranks).astype(float)
    return float(np.sum(counts * (counts - 1) / 2))


def _count_inversions(v):
    """Number of pairs i < j with v[i] > v[j], for integer ranks 0 <= v < n.

    Bottom-up merge sort where every level is handled for all blocks at once:
    keys ``block * n + value`` keep blocks apart inside one global sort.
    """
    n = v.size
    v = v.copy()
    total = 0
    width = 1
    idx = np.arange(n)
    while width < n:
        pair = idx // (2 * width)
        left = (idx % (2 * width)) < width
        key = pair * n + v
        lkeys = key[left]
        # left keys are sorted: every block is sorted and blocks are offset
        ends = np.searchsorted(lkeys, (pair[~left] + 1) * n, side="left")
        total += int(np.sum(ends - np.searchsorted(lkeys, key[~left], side="right")))
        v = np.sort(key) - pair * n
        width *= 2
    return total


def kendall_tau(x, y):
    """Sample Kendall's tau-b of two columns in O(n log n).

    Parameters
    ----------
    x, y : array_like
        Paired observations, at least two.

    Returns
    -------
    float
        Tie-corrected tau-b in [-1, 1].
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise DomainError("columns must have equal length")
    n = x.size
    if n < 2:
        raise DomainError("Kendall's tau needs at least two observations")
    if np.any(np.isnan(x)) or np.any(np.isnan(y)):
        raise DomainError("columns must not contain NaN")
    rx, ry = _dense_rank(x), _dense_rank(y)
    order = np.lexsort((ry, rx))
    rx, ry = rx[order], ry[order]
    n0 = n * (n - 1) / 2
    n1 = _pair_ties(rx)
    n2 = _pair_ties(ry)
    joint = _dense_rank(rx * (ry.max() + 1) + ry)
    n3 = _pair_ties(joint)
    if n1 == n0 or n2 == n0:
        raise DomainError("Kendall's tau is undefined for a constant column")
    # ties in x are sorted by y, so they contribute no inversions
    swaps = _count_inversions(ry)
    return float((n0 - n1 - n2 + n3 - 2 * swaps) / np.sqrt((n0 - n1) * (n0 - n2)))


def ks_uniform(column):
    """Kolmogorov-Smirnov distance sup |F_n(u) - u| to the uniform law."""
    u = np.sort(np.asarray(column, dtype=float).ravel())
    n = u.size
    if n < 10:
        raise DomainError("KS statistic needs at least 10 observations")
    if np.any(np.isnan(u)) or u[0] < 0 or u[-1] > 1:
        raise DomainError("values must lie in [0, 1]")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def ks_critical(n, level=0.01):
    """Asymptotic KS critical value at ``level``.

    Uses the leading term of the Kolmogorov tail, 2 exp(-2 t^2), which is
    accurate to three digits for levels up to 0.2; at 1% it gives 1.628.
    """
    if not 0 < level <= 0.2:
        raise DomainError("level must lie in (0, 0.2]")
    if level == 0.01:
        return KS_CRIT_01 / np.sqrt(n)
    return np.sqrt(-np.log(level / 2) / 2) / np.sqrt(n)


def empirical_cdf(sample, u):
    """Fraction of rows componentwise <= ``u`` and its binomial standard error."""
    sample = np.asarray(sample, dtype=float)
    u = np.asarray(u, dtype=float)
    p = float(np.mean(np.all(sample <= u, axis=1)))
    return p, float(np.sqrt(p * (1 - p) / sample.shape[0]))


def tau_matrix(sample):
    """Pairwise Kendall's tau-b, symmetric with unit diagonal."""
    sample = np.asarray(sample, dtype=float)
    d = sample.shape[1]
    out = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            out[i, j] = out[j, i] = kendall_tau(sample[:, i], sample[:, j])
    return out
