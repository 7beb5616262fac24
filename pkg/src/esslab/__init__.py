"""Economically rational sample sizes: equilibrium sample size (ESS), power,
publishable rates and positive predictive value under positive publication
bias, with optional conditional equivalence testing."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    CetParams,
    EquilibriumResult,
    ModelParams,
    ProfitCurve,
    equilibrium,
    profit_curve,
    sweep,
    sweep_b,
    total_publishable_rate,
    total_publishable_rate_cet,
)
from .numerics import compute_power, compute_tost_power, noncentral_t_cdf  # noqa: E402

__all__ = [
    "CetParams",
    "EquilibriumResult",
    "ModelParams",
    "ProfitCurve",
    "equilibrium",
    "profit_curve",
    "sweep",
    "sweep_b",
    "total_publishable_rate",
    "total_publishable_rate_cet",
    "compute_power",
    "compute_tost_power",
    "noncentral_t_cdf",
]
