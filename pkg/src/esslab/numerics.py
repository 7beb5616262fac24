"""Power of the two-sided t-test and of the TOST equivalence procedure.

Everything here is computed from the noncentral t distribution directly;
no statistics package is involved.  Scalar entry points validate their
arguments and raise :class:`DomainError`; the ``*_curve`` functions are the
vectorized paths used by the economic model.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _special

__all__ = [
    "DomainError",
    "NumericalError",
    "Design",
    "PowerQuery",
    "TostQuery",
    "noncentral_t_cdf",
    "t_cdf",
    "t_isf",
    "compute_power",
    "compute_tost_power",
    "ttest_power",
    "tost_power",
    "power_curve",
    "tost_power_curve",
    "equivalence_probability",
    "design_dof",
]


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class NumericalError(ArithmeticError):
    """A series or iteration failed to converge."""


class Design(str, enum.Enum):
    TWO_SAMPLE = "two_sample_unpaired"
    ONE_SAMPLE = "one_sample"


def _finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite (got {value!r})")


def _check_alpha(name, alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"{name} must satisfy 0 < {name} < 1 (got {alpha!r})")


def _check_s(s):
    if int(s) != s or s < 2:
        raise DomainError(f"s must be an integer >= 2 (got {s!r})")


@dataclass(frozen=True)
class PowerQuery:
    """Inputs of a two-sided t-test power calculation.

    ``s`` is the per-group size for the unpaired design and the total size
    for the one-sample design.
    """

    d: float
    s: int
    alpha: float = 0.05
    design: Design = Design.TWO_SAMPLE

    def __post_init__(self):
        object.__setattr__(self, "design", Design(self.design))
        _finite("d", self.d)
        if self.d < 0:
            raise DomainError(f"d must satisfy d >= 0 (got {self.d!r})")
        _check_s(self.s)
        _check_alpha("alpha", self.alpha)


@dataclass(frozen=True)
class TostQuery:
    """Inputs of an equivalence-test power calculation (true effect zero)."""

    delta: float
    s: int
    alpha_cet: float = 0.05

    def __post_init__(self):
        _finite("delta", self.delta)
        if not self.delta > 0:
            raise DomainError(f"delta must satisfy delta > 0 (got {self.delta!r})")
        _check_s(self.s)
        _check_alpha("alpha_cet", self.alpha_cet)


def design_dof(s, design=Design.TWO_SAMPLE):
    """Degrees of freedom and noncentrality-per-unit-d for sample size(s) ``s``.

    Returns ``(df, scale)`` such that the t statistic under effect ``d`` is
    noncentral t with ``df`` degrees of freedom and noncentrality ``d * scale``.
    """
    s = np.asarray(s, dtype=float)
    if Design(design) is Design.TWO_SAMPLE:
        return 2.0 * s - 2.0, np.sqrt(s / 2.0)
    return s - 1.0, np.sqrt(s)


def noncentral_t_cdf(t: float, df: float, ncp: float) -> float:
    """P(T <= t) for T noncentral t with ``df`` degrees of freedom.

    Absolute error is below 1e-8 (in practice ~1e-13) for any finite
    noncentrality.  ``t`` may be ``+/-inf``.
    """
    if math.isnan(t):
        raise DomainError("t must not be NaN")
    _finite("df", df)
    _finite("ncp", ncp)
    if not df > 0:
        raise DomainError(f"df must satisfy df > 0 (got {df!r})")
    out = _special.nct_cdf(float(t), float(df), float(ncp))
    if math.isnan(out):
        raise NumericalError(f"noncentral t series did not converge (t={t}, df={df}, ncp={ncp})")
    return out


def t_cdf(t: float, df: float) -> float:
    """Central t CDF."""
    if math.isnan(t):
        raise DomainError("t must not be NaN")
    _finite("df", df)
    if not df > 0:
        raise DomainError(f"df must satisfy df > 0 (got {df!r})")
    return _special.t_cdf(float(t), float(df))


@lru_cache(maxsize=8192)
def t_isf(p: float, df: float) -> float:
    """Critical value c with P(T > c) = p for the central t distribution."""
    _check_alpha("p", p)
    if not df > 0:
        raise DomainError(f"df must satisfy df > 0 (got {df!r})")
    return _special.t_isf(float(p), float(df))


@lru_cache(maxsize=256)
def _crit_table(p, dfs_key):
    dfs = np.asarray(dfs_key, dtype=float)
    out = np.empty_like(dfs)
    _special.t_isf_array(float(p), dfs, out)
    out.setflags(write=False)
    return out


def _criticals(p, dfs):
    return _crit_table(float(p), tuple(np.asarray(dfs, dtype=float).tolist()))


def ttest_power(d, s, alpha=0.05, design=Design.TWO_SAMPLE):
    """Power of the two-sided t-test; see :func:`compute_power`."""
    return compute_power(PowerQuery(d, s, alpha, design))


def compute_power(q: PowerQuery) -> float:
    """Probability that a two-sided level-``alpha`` t-test rejects under effect ``d``.

    Clamped to ``[alpha, 1]``, which only absorbs last-digit rounding.
    """
    df, scale = design_dof(q.s, q.design)
    crit = t_isf(q.alpha / 2.0, float(df))
    p = _special.two_sided_power(float(df), q.d * float(scale), crit)
    if math.isnan(p):
        raise NumericalError(f"power evaluation failed for {q}")
    return min(1.0, max(q.alpha, p))


def power_curve(d, s_grid, alpha=0.05, design=Design.TWO_SAMPLE):
    """Vector of two-sided t-test powers over the sample sizes ``s_grid``."""
    d = float(d)
    _finite("d", d)
    if d < 0:
        raise DomainError(f"d must satisfy d >= 0 (got {d!r})")
    _check_alpha("alpha", alpha)
    s_grid = np.asarray(s_grid)
    if s_grid.size and (s_grid.min() < 2 or np.any(s_grid != np.round(s_grid))):
        raise DomainError("s_grid must hold integers >= 2")
    df, scale = design_dof(s_grid, design)
    crits = _criticals(alpha / 2.0, df)
    out = np.empty(df.shape, dtype=float)
    _special.power_curve_kernel(d, df, scale, crits, out)
    if np.isnan(out).any():
        raise NumericalError(f"power evaluation failed for d={d}")
    return np.clip(out, alpha, 1.0)


def _tost_bound(delta, s, alpha_cet):
    # both one-sided tests reject iff |t| < delta * sqrt(s/2) - c(alpha_cet)
    df, scale = design_dof(s, Design.TWO_SAMPLE)
    crit = _criticals(alpha_cet, np.atleast_1d(df))
    return np.atleast_1d(df), delta * np.atleast_1d(scale) - crit


def compute_tost_power(q: TostQuery) -> float:
    """Probability that TOST declares equivalence within ``+/-delta`` when the true effect is 0.

    Bounds are in units of the pooled sample standard deviation, so each
    one-sided statistic is the ordinary t statistic shifted by
    ``delta * sqrt(s/2)``; both clear their critical values exactly when
    ``|t| < delta * sqrt(s/2) - c``, and ``t`` is central t under the null.
    """
    return float(tost_power_curve(q.delta, [q.s], q.alpha_cet)[0])


def tost_power(delta, s, alpha_cet=0.05):
    return compute_tost_power(TostQuery(delta, s, alpha_cet))


def tost_power_curve(delta, s_grid, alpha_cet=0.05):
    """Vector of TOST powers (true effect zero) over ``s_grid``."""
    _finite("delta", delta)
    if not delta > 0:
        raise DomainError(f"delta must satisfy delta > 0 (got {delta!r})")
    _check_alpha("alpha_cet", alpha_cet)
    df, bound = _tost_bound(float(delta), np.asarray(s_grid, dtype=float), alpha_cet)
    out = np.empty(df.shape)
    _special.tost_curve_kernel(np.ascontiguousarray(bound), np.ascontiguousarray(df), out)
    return np.clip(out, 0.0, 1.0)


def equivalence_probability(delta, s, alpha_cet=0.05, effect=0.0, upper=None):
    """P(TOST declares equivalence [and |t| <= upper]) under a true effect.

    ``upper`` optionally intersects the equivalence region with the
    non-significance region ``|t| <= upper`` of a preceding two-sided test.
    Used for the exact probabilities of the two-stage publication procedure.
    """
    df, bound = _tost_bound(float(delta), np.asarray([s], dtype=float), alpha_cet)
    df = float(df[0])
    limit = float(bound[0])
    if upper is not None:
        limit = min(limit, float(upper))
    if limit <= 0:
        return 0.0
    _, scale = design_dof(s, Design.TWO_SAMPLE)
    ncp = float(effect) * float(scale)
    p = _special.nct_interval(-limit, limit, df, ncp)
    if math.isnan(p):
        raise NumericalError("equivalence probability failed to converge")
    return min(1.0, max(0.0, p))
