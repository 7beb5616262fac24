"""Economic model of sample-size choice.

A scientist earns ``IF`` monetary units (MU) per publishable result and
pays 1 MU per sample pair, so over a grid of per-group sample sizes ``s``::

    profit(s) = IF * TPR(s) - s

where TPR is the total publishable rate.  The equilibrium sample size (ESS)
is the first maximizer of profit on the grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import numerics
from .numerics import Design

__all__ = [
    "S_MIN",
    "S_MAX",
    "S_STEP",
    "CetParams",
    "ModelParams",
    "ProfitCurve",
    "EquilibriumResult",
    "s_grid",
    "total_publishable_rate",
    "total_publishable_rate_cet",
    "exact_publishable_rates",
    "profit_curve",
    "equilibrium",
    "sweep",
    "sweep_b",
]

S_MIN = 4
S_MAX = 998
S_STEP = 2


@dataclass(frozen=True)
class CetParams:
    """Conditional equivalence testing: bound ``delta_frac * d`` at level ``alpha_cet``."""

    delta_frac: float = 1.0
    alpha_cet: float = 0.05

    def __post_init__(self):
        if not (math.isfinite(self.delta_frac) and self.delta_frac > 0):
            raise ValueError(f"delta_frac must satisfy delta_frac > 0 (got {self.delta_frac!r})")
        if not 0 < self.alpha_cet < 1:
            raise ValueError(f"alpha_cet must satisfy 0 < alpha_cet < 1 (got {self.alpha_cet!r})")


@dataclass(frozen=True)
class ModelParams:
    """One scientific niche.

    Parameters
    ----------
    b : float
        Base probability that a probed hypothesis is true, in [0, 1].
    d : float
        True effect size (Cohen's d), > 0.
    IF : float
        Income factor: sample pairs purchasable per publication, > 0.
    alpha : float
        Type-1 error of the significance test.
    cet : CetParams, optional
        Enables conditional equivalence testing of non-significant results.
    design : Design
        Test design used for power; two-sample unpaired by default.
    """

    b: float
    d: float
    IF: float
    alpha: float = 0.05
    cet: Optional[CetParams] = None
    design: Design = Design.TWO_SAMPLE

    def __post_init__(self):
        object.__setattr__(self, "design", Design(self.design))
        if not (math.isfinite(self.b) and 0 <= self.b <= 1):
            raise ValueError(f"b must satisfy 0 <= b <= 1 (got {self.b!r})")
        if not (math.isfinite(self.d) and self.d > 0):
            raise ValueError(f"d must satisfy d > 0 (got {self.d!r})")
        if not (math.isfinite(self.IF) and self.IF > 0):
            raise ValueError(f"IF must satisfy IF > 0 (got {self.IF!r})")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must satisfy 0 < alpha < 1 (got {self.alpha!r})")
        if self.cet is not None and self.design is not Design.TWO_SAMPLE:
            raise ValueError("CET is only defined for the two-sample unpaired design")

    @property
    def delta(self) -> Optional[float]:
        """Equivalence bound in Cohen's d units, or None without CET."""
        return None if self.cet is None else self.cet.delta_frac * self.d


@dataclass(frozen=True)
class ProfitCurve:
    s_grid: np.ndarray
    power: np.ndarray
    tpr: np.ndarray
    income: np.ndarray
    profit: np.ndarray
    power_cet: Optional[np.ndarray] = None
    true_rate: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class EquilibriumResult:
    ess: int
    sss: int
    power_at_ess: float
    tpr_at_ess: float
    ppv_at_ess: float
    profit_at_ess: float
    power_cet_at_ess: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "ess": self.ess,
            "sss": self.sss,
            "power": self.power_at_ess,
            "power_cet": self.power_cet_at_ess,
            "tpr": self.tpr_at_ess,
            "ppv": self.ppv_at_ess,
            "profit": self.profit_at_ess,
        }


def s_grid(s_min: int = S_MIN, s_max: int = S_MAX, step: int = S_STEP) -> np.ndarray:
    """Per-group sample sizes ``s_min, s_min + step, ..., <= s_max``."""
    if int(s_min) != s_min or s_min < 2:
        raise ValueError(f"s_min must be an integer >= 2 (got {s_min!r})")
    if int(step) != step or step < 1:
        raise ValueError(f"step must be a positive integer (got {step!r})")
    if s_max < s_min:
        raise ValueError(f"s_max must satisfy s_max >= s_min (got {s_max!r} < {s_min!r})")
    return np.arange(int(s_min), int(s_max) + 1, int(step))


def _tpr(b, power, alpha):
    return alpha * (1.0 - b) + power * b


def _tpr_cet(b, power, power_cet, alpha, alpha_cet):
    false_neg = alpha_cet * b * (1.0 - power)
    true_neg = power_cet * (1.0 - b) * (1.0 - alpha)
    return _tpr(b, power, alpha) + false_neg + true_neg, true_neg


def total_publishable_rate(b, d, s, alpha=0.05, design=Design.TWO_SAMPLE):
    """False-positive plus true-positive rate of the significance test at size ``s``."""
    ModelParams(b, d, 1.0, alpha, design=design)
    return float(_tpr(b, numerics.ttest_power(d, s, alpha, design), alpha))


def total_publishable_rate_cet(b, d, s, alpha=0.05, cet: CetParams = CetParams()):
    """Publishable rate when non-significant results go on to an equivalence test.

    Adds the false-negative rate ``alpha_cet * b * beta`` and the true-negative
    rate ``power_cet * (1 - b) * (1 - alpha)`` to the significance-only rate;
    the ``beta`` and ``1 - alpha`` factors condition on a non-significant
    first test, treating the two tests as independent.
    """
    ModelParams(b, d, 1.0, alpha, cet)
    power = numerics.ttest_power(d, s, alpha)
    power_cet = numerics.tost_power(cet.delta_frac * d, s, cet.alpha_cet)
    tpr, _ = _tpr_cet(b, power, power_cet, alpha, cet.alpha_cet)
    return float(tpr)


def exact_publishable_rates(b, d, s, alpha=0.05, cet: Optional[CetParams] = None) -> dict:
    """Exact outcome probabilities of the two-stage publication procedure.

    Unlike :func:`total_publishable_rate_cet`, the equivalence test here is
    evaluated on the same data as the significance test: it can only count
    when the significance test failed, i.e. ``|t| <= c``.  Returns the keys
    ``tpr``, ``ppv`` and, with CET, ``tpr_cet`` and ``ppv_cet``.
    """
    ModelParams(b, d, 1.0, alpha, cet)
    power = numerics.ttest_power(d, s, alpha)
    tpr = float(_tpr(b, power, alpha))
    out = {"tpr": tpr, "ppv": power * b / tpr}
    if cet is not None:
        df, _ = numerics.design_dof(s)
        c = numerics.t_isf(alpha / 2.0, float(df))
        delta = cet.delta_frac * d
        true_neg = (1 - b) * numerics.equivalence_probability(delta, s, cet.alpha_cet, 0.0, upper=c)
        false_neg = b * numerics.equivalence_probability(delta, s, cet.alpha_cet, d, upper=c)
        total = tpr + true_neg + false_neg
        out["tpr_cet"] = total
        out["ppv_cet"] = (power * b + true_neg) / total
    return out


def profit_curve(p: ModelParams, s_min: int = S_MIN, s_max: int = S_MAX) -> ProfitCurve:
    """Power, TPR, income and profit over the sample-size grid."""
    grid = s_grid(s_min, s_max)
    power = numerics.power_curve(p.d, grid, p.alpha, p.design)
    power_cet = None
    true_rate = power * p.b
    if p.cet is None:
        tpr = _tpr(p.b, power, p.alpha)
    else:
        power_cet = numerics.tost_power_curve(p.delta, grid, p.cet.alpha_cet)
        tpr, true_neg = _tpr_cet(p.b, power, power_cet, p.alpha, p.cet.alpha_cet)
        true_rate = true_rate + true_neg
    income = p.IF * tpr
    profit = income - grid
    return ProfitCurve(grid, power, tpr, income, profit, power_cet, true_rate)


def equilibrium(
    p: ModelParams,
    s_min: int = S_MIN,
    s_max: int = S_MAX,
    overhead: float = 0.0,
    curve: Optional[ProfitCurve] = None,
) -> EquilibriumResult:
    """Equilibrium sample size and the statistics it implies.

    ``overhead`` is a constant added to profit at every ``s`` (fixed income
    per study if positive, fixed cost if negative); it cannot move the ESS.
    Ties go to the smallest ``s``, for both ESS and SSS.
    """
    if curve is None:
        curve = profit_curve(p, s_min, s_max)
    profit = curve.profit + overhead
    i = int(np.argmax(profit))
    j = int(np.argmin(np.abs(curve.power - 0.8)))
    tpr = float(curve.tpr[i])
    return EquilibriumResult(
        ess=int(curve.s_grid[i]),
        sss=int(curve.s_grid[j]),
        power_at_ess=float(curve.power[i]),
        tpr_at_ess=tpr,
        ppv_at_ess=float(curve.true_rate[i] / tpr),
        profit_at_ess=float(profit[i]),
        power_cet_at_ess=None if curve.power_cet is None else float(curve.power_cet[i]),
    )


_VARY = {"b": "b", "d": "d", "if": "IF", "IF": "IF"}


def sweep(vary: str, values: Sequence[float], base: ModelParams,
          s_min: int = S_MIN, s_max: int = S_MAX, map_fn=map):
    """Equilibria for ``base`` with one of ``b``, ``d``, ``IF`` replaced by each value.

    Output is ordered by the varied value.  ``map_fn`` may be a parallel
    order-preserving map (e.g. ``Executor.map``).
    """
    try:
        attr = _VARY[vary]
    except KeyError:
        raise ValueError(f"vary must be one of b, d, if (got {vary!r})") from None
    values = sorted(float(v) for v in values)
    params = [replace(base, **{attr: v}) for v in values]
    results = list(map_fn(lambda q: equilibrium(q, s_min, s_max), params))
    return list(zip(values, results))


def sweep_b(d, IF, alpha=0.05, cet=None, b_grid=None, **kw):
    """ESS and friends as a function of the base rate ``b``."""
    if b_grid is None:
        b_grid = np.round(np.linspace(0, 1, 11), 10)
    return sweep("b", b_grid, ModelParams(0.0, d, IF, alpha, cet), **kw)
