"""Compiled scalar kernels: regularized incomplete beta, central and noncentral t.

The noncentral t CDF is the Poisson mixture of incomplete beta functions,
summed outward from the modal term so that large noncentralities neither
underflow nor need a normal approximation.
"""
import math

import numpy as np
from numba import njit

_EPS = 1e-16
_FPMIN = 1e-300
_CF_MAXIT = 20000
_SERIES_MAXIT = 100000
_SERIES_TOL = 1e-14
_SQRT2 = math.sqrt(2.0)


@njit(cache=True, nogil=True)
def _betacf(a, b, x):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _EPS:
            return h
    return np.nan


@njit(cache=True, nogil=True)
def betainc(a, b, x, y):
    """Regularized incomplete beta I_x(a, b); ``y`` must equal ``1 - x``.

    Passing ``y`` separately keeps full precision when x is close to 1.
    """
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log(y))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _betacf(b, a, y) / b


@njit(cache=True, nogil=True)
def t_cdf(t, df):
    """Central Student t CDF."""
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tt = t * t
    # tail probability 0.5 * I_{df/(df+t^2)}(df/2, 1/2)
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + tt), tt / (df + tt))
    if t >= 0.0:
        return 1.0 - tail
    return tail


@njit(cache=True, nogil=True)
def t_pdf(t, df):
    lc = (math.lgamma(0.5 * (df + 1.0)) - math.lgamma(0.5 * df)
          - 0.5 * math.log(df * math.pi))
    return math.exp(lc - 0.5 * (df + 1.0) * math.log1p(t * t / df))


@njit(cache=True, nogil=True)
def t_isf(p, df):
    """Upper-tail quantile: the c with P(T > c) = p, for 0 < p < 1."""
    if p > 0.5:
        return -t_isf(1.0 - p, df)
    if p == 0.5:
        return 0.0
    target = 1.0 - p
    lo = 0.0
    hi = 1.0
    while t_cdf(hi, df) < target:
        lo = hi
        hi *= 2.0
    x = 0.5 * (lo + hi)
    for _ in range(200):
        # solve on the tail probability to avoid cancellation near 1
        f = (1.0 - t_cdf(x, df)) - p
        if f > 0.0:
            lo = x
        else:
            hi = x
        dens = t_pdf(x, df)
        nx = x + f / dens if dens > 0.0 else 0.5 * (lo + hi)
        if not (lo < nx < hi):
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= 1e-15 * max(1.0, abs(x)):
            return nx
        x = nx
    return x


@njit(cache=True, nogil=True)
def _nct_cdf_nonneg_t(t, df, delta):
    # t >= 0; delta of either sign
    phi = 0.5 * math.erfc(delta / _SQRT2)
    tt = t * t
    x = tt / (tt + df)
    y = df / (tt + df)
    if x <= 0.0:
        return phi
    b = 0.5 * df
    lam = 0.5 * delta * delta
    if lam == 0.0:
        return phi + 0.5 * betainc(0.5, b, x, y)
    sgn = 1.0 if delta > 0.0 else -1.0
    k = math.floor(lam)
    loglam = math.log(lam)
    logx = math.log(x)
    logy = math.log(y)
    lgb = math.lgamma(b)

    p0 = math.exp(-lam + k * loglam - math.lgamma(k + 1.0))
    q0 = sgn * math.exp(-lam + (k + 0.5) * loglam - math.lgamma(k + 1.5))
    ap0 = k + 0.5
    aq0 = k + 1.0
    ip0 = betainc(ap0, b, x, y)
    iq0 = betainc(aq0, b, x, y)
    # G(a) = I_x(a, b) - I_x(a + 1, b)
    gp0 = math.exp(math.lgamma(ap0 + b) - math.lgamma(ap0 + 1.0) - lgb
                   + ap0 * logx + b * logy)
    gq0 = math.exp(math.lgamma(aq0 + b) - math.lgamma(aq0 + 1.0) - lgb
                   + aq0 * logx + b * logy)

    total = p0 * ip0 + q0 * iq0
    sum_p = p0
    sum_q = abs(q0)

    # backward towards index 0
    p = p0
    q = q0
    ip = ip0
    iq = iq0
    gp = gp0
    gq = gq0
    ap = ap0
    aq = aq0
    j = k
    while j > 0:
        gp = gp * ap / (x * (ap - 1.0 + b))
        ap -= 1.0
        ip += gp
        gq = gq * aq / (x * (aq - 1.0 + b))
        aq -= 1.0
        iq += gq
        p *= j / lam
        q *= (j + 0.5) / lam
        total += p * ip + q * iq
        sum_p += p
        sum_q += abs(q)
        j -= 1.0
        if p + abs(q) < 1e-20:
            break

    # forward with a remainder bound; total Q mass is erf(sqrt(lam))
    q_mass = math.erf(math.sqrt(lam))
    p = p0
    q = q0
    ip = ip0
    iq = iq0
    gp = gp0
    gq = gq0
    ap = ap0
    aq = aq0
    j = k
    converged = False
    for _ in range(_SERIES_MAXIT):
        ip -= gp
        gp *= x * (ap + b) / (ap + 1.0)
        ap += 1.0
        iq -= gq
        gq *= x * (aq + b) / (aq + 1.0)
        aq += 1.0
        j += 1.0
        p *= lam / j
        q *= lam / (j + 0.5)
        total += p * ip + q * iq
        sum_p += p
        sum_q += abs(q)
        if ip < 0.0:
            ip = 0.0
        if iq < 0.0:
            iq = 0.0
        rem = max(0.0, 1.0 - sum_p) * ip + max(0.0, q_mass - sum_q) * iq
        if 0.5 * rem < _SERIES_TOL or (ip == 0.0 and iq == 0.0):
            converged = True
            break
    if not converged:
        return np.nan
    out = phi + 0.5 * total
    if out < 0.0:
        return 0.0
    if out > 1.0:
        return 1.0
    return out


@njit(cache=True, nogil=True)
def nct_cdf(t, df, delta):
    """P(T <= t) for a noncentral t variate; NaN signals non-convergence."""
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    if t >= 0.0:
        return _nct_cdf_nonneg_t(t, df, delta)
    return 1.0 - _nct_cdf_nonneg_t(-t, df, -delta)


@njit(cache=True, nogil=True)
def nct_interval(lo, hi, df, delta):
    """P(lo < T < hi); the lower-tail term is dropped when it is provably < 1e-17."""
    if hi <= lo:
        return 0.0
    upper = nct_cdf(hi, df, delta)
    # for lo <= 0: F(lo) <= F(0) = Phi(-delta)
    if lo <= 0.0 and 0.5 * math.erfc(delta / _SQRT2) < 1e-17:
        return upper
    return upper - nct_cdf(lo, df, delta)


@njit(cache=True, nogil=True)
def two_sided_power(df, ncp, crit):
    """P(|T| > crit) for T ~ nct(df, ncp), ncp >= 0."""
    upper = 1.0 - nct_cdf(crit, df, ncp)
    if 0.5 * math.erfc(ncp / _SQRT2) < 1e-17:
        return upper
    return upper + nct_cdf(-crit, df, ncp)


@njit(cache=True, nogil=True)
def power_curve_kernel(d, dfs, ncp_scale, crits, out):
    for i in range(dfs.shape[0]):
        out[i] = two_sided_power(dfs[i], d * ncp_scale[i], crits[i])


@njit(cache=True, nogil=True)
def t_isf_array(p, dfs, out):
    for i in range(dfs.shape[0]):
        out[i] = t_isf(p, dfs[i])


@njit(cache=True, nogil=True)
def tost_curve_kernel(bounds, dfs, out):
    # P(|T| < bound) for central T; zero when the bound is not positive
    for i in range(dfs.shape[0]):
        if bounds[i] > 0.0:
            out[i] = 2.0 * t_cdf(bounds[i], dfs[i]) - 1.0
        else:
            out[i] = 0.0
