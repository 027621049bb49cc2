"""Low-dimensional multivariate normal and Student t distribution functions.

Only lower-orthant probabilities ``P(X <= b)`` are needed.  Dimension one is
exact, dimension two uses single-integral methods (Drezner-Wesolowsky for the
normal, the Dunnett-Sobel series for the t with integer degrees of freedom and
a one-dimensional mixing integral otherwise), dimensions three to six use
randomly shifted lattice rules over Genz's separation-of-variables transform.
The lattice shifts come from a fixed seed, so results are deterministic.
"""
import math

import numpy as np
from scipy import integrate, special, stats

from .errors import CapabilityError, DomainError

MAX_DIM = 6
_QMC_SEED = 0x5EED
_PRIMES = np.array([2, 3, 5, 7, 11, 13, 17], dtype=float)
_GL = {n: np.polynomial.legendre.leggauss(n) for n in (6, 12, 20)}


def default_tolerance(m):
    return 1e-6 if m <= 3 else 1e-4


def _phi(x):
    return special.ndtr(x)


def bvn_upper(h, k, r):
    """P(X > h, Y > k) for a standard bivariate normal with correlation r."""
    if abs(r) < 0.3:
        x, w = _GL[6]
    elif abs(r) < 0.75:
        x, w = _GL[12]
    else:
        x, w = _GL[20]
    hk = h * k
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2
        asr = math.asin(r)
        sn = np.sin(asr * (x + 1) / 2)
        bvn = np.sum(w * np.exp((sn * hk - hs) / (1 - sn * sn)))
        return bvn * asr / (4 * math.pi) + _phi(-h) * _phi(-k)
    if r < 0:
        k, hk = -k, -hk
    bvn = 0.0
    if abs(r) < 1:
        a_s = (1 - r) * (1 + r)
        a = math.sqrt(a_s)
        bs = (h - k) ** 2
        c = (4 - hk) / 8
        d = (12 - hk) / 16
        bvn = a * math.exp(-(bs / a_s + hk) / 2) * (
            1 - c * (bs - a_s) * (1 - d * bs / 5) / 3 + c * d * a_s * a_s / 5)
        if hk > -160:
            b = math.sqrt(bs)
            bvn -= (math.exp(-hk / 2) * math.sqrt(2 * math.pi) * _phi(-b / a) * b
                    * (1 - c * bs * (1 - d * bs / 5) / 3))
        a /= 2
        xs = (a * (x + 1)) ** 2
        rs = np.sqrt(1 - xs)
        terms = (np.exp(-bs / (2 * xs) - hk / (1 + rs)) / rs
                 - np.exp(-(bs / xs + hk) / 2) * (1 + c * xs * (1 + d * xs)))
        bvn = -(bvn + a * np.sum(w * terms)) / (2 * math.pi)
    if r > 0:
        return bvn + _phi(-max(h, k))
    bvn = -bvn
    if k > h:
        bvn += _phi(k) - _phi(h) if h < 0 else _phi(-h) - _phi(-k)
    return bvn


def bvn_cdf(h, k, r):
    """P(X <= h, Y <= k), standard margins, correlation r."""
    if h == -np.inf or k == -np.inf:
        return 0.0
    if h == np.inf:
        return float(_phi(k))
    if k == np.inf:
        return float(_phi(h))
    return float(min(max(bvn_upper(-h, -k, r), 0.0), 1.0))


def bvt_cdf(h, k, r, df):
    """P(X <= h, Y <= k) for a standard bivariate t with correlation r."""
    if h == -np.inf or k == -np.inf:
        return 0.0
    if h == np.inf:
        return float(special.stdtr(df, k))
    if k == np.inf:
        return float(special.stdtr(df, h))
    if df == int(df) and df <= 1000:
        val = _bvt_dunnett_sobel(int(df), h, k, r)
    else:
        val = _bvt_mixture(h, k, r, df)
    return float(min(max(val, 0.0), 1.0))


def _bvt_dunnett_sobel(nu, dh, dk, r):
    eps = 1e-15
    if 1 - r <= eps:
        return special.stdtr(nu, min(dh, dk))
    if r + 1 <= eps:
        return special.stdtr(nu, dh) - special.stdtr(nu, -dk) if dh > -dk else 0.0
    snu = math.sqrt(nu)
    ors = 1 - r * r
    hrk = dh - r * dk
    krh = dk - r * dh
    if abs(hrk) + ors > 0:
        xnhk = hrk ** 2 / (hrk ** 2 + ors * (nu + dk ** 2))
        xnkh = krh ** 2 / (krh ** 2 + ors * (nu + dh ** 2))
    else:
        xnhk = xnkh = 0.0
    hs = math.copysign(1.0, hrk) if hrk != 0 else 0.0
    ks = math.copysign(1.0, krh) if krh != 0 else 0.0
    if nu % 2 == 0:
        bvt = math.atan2(math.sqrt(ors), -r) / (2 * math.pi)
        gmph = dh / math.sqrt(16 * (nu + dh ** 2))
        gmpk = dk / math.sqrt(16 * (nu + dk ** 2))
        btnckh = 2 * math.atan2(math.sqrt(xnkh), math.sqrt(1 - xnkh)) / math.pi
        btpdkh = 2 * math.sqrt(xnkh * (1 - xnkh)) / math.pi
        btnchk = 2 * math.atan2(math.sqrt(xnhk), math.sqrt(1 - xnhk)) / math.pi
        btpdhk = 2 * math.sqrt(xnhk * (1 - xnhk)) / math.pi
        for j in range(1, nu // 2 + 1):
            bvt += gmph * (1 + ks * btnckh)
            bvt += gmpk * (1 + hs * btnchk)
            btnckh += btpdkh
            btpdkh = 2 * j * btpdkh * (1 - xnkh) / (2 * j + 1)
            btnchk += btpdhk
            btpdhk = 2 * j * btpdhk * (1 - xnhk) / (2 * j + 1)
            gmph = gmph * (2 * j - 1) / (2 * j * (1 + dh ** 2 / nu))
            gmpk = gmpk * (2 * j - 1) / (2 * j * (1 + dk ** 2 / nu))
    else:
        qhrk = math.sqrt(dh ** 2 + dk ** 2 - 2 * r * dh * dk + nu * ors)
        hkrn = dh * dk + r * nu
        hkn = dh * dk - nu
        hpk = dh + dk
        bvt = math.atan2(-snu * (hkn * qhrk + hpk * hkrn),
                         hkn * hkrn - nu * hpk * qhrk) / (2 * math.pi)
        if bvt < -eps:
            bvt += 1
        gmph = dh / (2 * math.pi * snu * (1 + dh ** 2 / nu))
        gmpk = dk / (2 * math.pi * snu * (1 + dk ** 2 / nu))
        btnckh = btpdkh = math.sqrt(xnkh)
        btnchk = btpdhk = math.sqrt(xnhk)
        for j in range(1, (nu - 1) // 2 + 1):
            bvt += gmph * (1 + ks * btnckh)
            bvt += gmpk * (1 + hs * btnchk)
            btpdkh = (2 * j - 1) * btpdkh * (1 - xnkh) / (2 * j)
            btnckh += btpdkh
            btpdhk = (2 * j - 1) * btpdhk * (1 - xnhk) / (2 * j)
            btnchk += btpdhk
            gmph = 2 * j * gmph / ((2 * j + 1) * (1 + dh ** 2 / nu))
            gmpk = 2 * j * gmpk / ((2 * j + 1) * (1 + dk ** 2 / nu))
    return bvt


def _bvt_mixture(h, k, r, df):
    # T = Z / sqrt(chi2_df / df): condition on the chi variable
    log_norm = (df / 2 - 1) * math.log(2) + special.gammaln(df / 2)
    root = math.sqrt(df)

    def f(s):
        c = s / root
        return bvn_cdf(h * c, k * c, r) * math.exp((df - 1) * math.log(s) - s * s / 2 - log_norm)

    lo = math.sqrt(special.chdtri(df, 1 - 1e-15))
    hi = math.sqrt(special.chdtri(df, 1e-15))
    mode = math.sqrt(max(df - 1, 0.0))
    val = 0.0
    for a, b in ((lo, mode), (mode, hi)):
        if b > a:
            val += integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
    return val


def psd_factor(cov):
    """Lower-triangular factor of a PSD matrix; tiny negative eigenvalues clamped."""
    cov = np.asarray(cov, dtype=float)
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise DomainError("covariance matrix must be symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() < -1e-10:
        raise DomainError(f"matrix is not positive semi-definite (eigenvalue {vals.min():.3g})")
    vals = np.clip(vals, 0.0, None)
    # QR of the symmetric square root gives a triangular factor with L L^T = cov
    root = vecs * np.sqrt(vals)
    _, rr = np.linalg.qr(root.T)
    lower = rr.T
    signs = np.where(np.diag(lower) < 0, -1.0, 1.0)
    return lower * signs


def _standardise(upper, cov, loc):
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    m = upper.size
    if cov.shape != (m, m):
        raise DomainError("dimension mismatch between limits and matrix")
    if m < 1:
        raise DomainError("dimension must be at least 1")
    if loc is not None:
        upper = upper - np.asarray(loc, dtype=float)
    sd = np.sqrt(np.diag(cov))
    if np.any(sd <= 0):
        raise DomainError("variances must be positive")
    corr = cov / np.outer(sd, sd)
    if np.any(np.abs(corr) > 1 + 1e-12):
        raise DomainError("matrix is not a valid covariance (|correlation| > 1)")
    return upper / sd, corr


def _reduce(b, corr):
    """Drop +inf limits (marginalise); report certain zero."""
    if np.any(b == -np.inf):
        return None, None
    keep = b != np.inf
    return b[keep], corr[np.ix_(keep, keep)]


def mvn_cdf(upper, cov, mean=None, tol=None):
    """P(X <= upper) for X ~ N(mean, cov), dimension <= 6."""
    b, corr = _standardise(upper, cov, mean)
    if b.size > MAX_DIM:
        raise CapabilityError(f"dimension {b.size} exceeds {MAX_DIM}")
    b, corr = _reduce(b, corr)
    if b is None:
        return 0.0
    m = b.size
    if m == 0:
        return 1.0
    if m == 1:
        return float(_phi(b[0]))
    if m == 2:
        return bvn_cdf(b[0], b[1], float(np.clip(corr[0, 1], -1, 1)))
    if m == 3:
        val = _trivariate(b, corr, None)
        if val is not None:
            return val
    return _sov_qmc(b, corr, None, tol or default_tolerance(m))


def mvt_cdf(upper, df, scale, loc=None, tol=None):
    """P(T <= upper) for a multivariate t with ``df`` degrees of freedom,
    location ``loc`` and dispersion matrix ``scale``; dimension <= 6."""
    if not df > 0:
        raise DomainError("degrees of freedom must be > 0")
    b, corr = _standardise(upper, scale, loc)
    if b.size > MAX_DIM:
        raise CapabilityError(f"dimension {b.size} exceeds {MAX_DIM}")
    b, corr = _reduce(b, corr)
    if b is None:
        return 0.0
    m = b.size
    if m == 0:
        return 1.0
    if m == 1:
        return float(special.stdtr(df, b[0]))
    if m == 2:
        return bvt_cdf(b[0], b[1], float(np.clip(corr[0, 1], -1, 1)), df)
    if m == 3:
        val = _trivariate(b, corr, df)
        if val is not None:
            return val
    return _sov_qmc(b, corr, df, tol or default_tolerance(m))


def _trivariate(b, corr, df):
    """Condition on the first coordinate and integrate the bivariate cdf.

    For the t, (T2, T3) given T1 = x is bivariate t with df + 1 degrees of
    freedom, location c x and dispersion (df + x^2) / (df + 1) * C.
    Returns None when the conditional law is degenerate.
    """
    c = corr[1:, 0]
    cond = corr[1:, 1:] - np.outer(c, c)
    var = np.diag(cond)
    if np.any(var < 1e-10):
        return None
    sd = np.sqrt(var)
    r = float(np.clip(cond[0, 1] / (sd[0] * sd[1]), -1, 1))
    rest = b[1:]

    if df is None:
        def f(x):
            h, k = (rest - c * x) / sd
            return _phi_pdf(x) * bvn_cdf(h, k, r)
        lo = -38.5
    else:
        dens = stats.t(df)

        def f(x):
            h, k = (rest - c * x) / (sd * math.sqrt((df + x * x) / (df + 1)))
            return dens.pdf(x) * bvt_cdf(h, k, r, df + 1)
        lo = -np.inf
    if b[0] <= lo:
        return 0.0
    pts = [p for p in (-2.0, 0.0, 2.0) if lo < p < b[0]] if np.isfinite(lo) else None
    val = integrate.quad(f, lo, b[0], epsabs=1e-10, epsrel=1e-9, limit=200,
                         points=pts or None)[0]
    return float(min(max(val, 0.0), 1.0))


def _phi_pdf(x):
    return math.exp(-x * x / 2) / math.sqrt(2 * math.pi)


def _sov_qmc(b, corr, df, tol, n_shifts=12, n_min=2 ** 10, n_max=2 ** 19):
    lower = psd_factor(corr)
    m = b.size
    dim = m - 1 + (df is not None)
    gen = np.sqrt(_PRIMES[:dim]) % 1.0
    shifts = np.random.default_rng(_QMC_SEED).uniform(size=(n_shifts, dim))
    n = n_min
    while True:
        k = np.arange(1, n + 1)[:, None]
        est = np.empty(n_shifts)
        for s in range(n_shifts):
            w = np.abs(2 * ((k * gen + shifts[s]) % 1.0) - 1)    # baker's transform
            est[s] = _sov_integrand(w, b, lower, df).mean()
        err = 3 * est.std(ddof=1) / math.sqrt(n_shifts)
        if err <= tol or n >= n_max:
            return float(np.clip(est.mean(), 0.0, 1.0))
        n *= 2


def _sov_integrand(w, b, lower, df):
    n = w.shape[0]
    m = b.size
    if df is not None:
        scale = np.sqrt(special.chdtri(df, 1 - np.clip(w[:, -1], 1e-300, 1 - 1e-16)) / df)
        bb = b[None, :] * scale[:, None]
    else:
        bb = np.broadcast_to(b, (n, m))
    y = np.zeros((n, m))
    f = np.ones(n)
    for i in range(m):
        shift = y[:, :i] @ lower[i, :i]
        lii = lower[i, i]
        if lii > 1e-12:
            e = _phi((bb[:, i] - shift) / lii)
        else:
            e = (bb[:, i] - shift >= 0).astype(float)
        f *= e
        if i < m - 1:
            y[:, i] = special.ndtri(np.clip(w[:, i] * e, 1e-300, 1 - 1e-16))
    return f
