"""Monte Carlo oracle: simulated studies on normal data.

Replicates are processed in fixed-size blocks.  Each block draws from its
own Philox stream keyed by ``(seed, stream tag, s, block index)``, so results do
not depend on how blocks are spread over workers.  Normal variates come from
the Box-Muller transform of Philox uniforms; critical values come from
scipy, keeping this module independent of :mod:`esslab.numerics`.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .model import ModelParams, equilibrium
from .numerics import Design

__all__ = [
    "SimSpec",
    "SimEstimate",
    "PipelineEstimate",
    "simulate_power",
    "simulate_power_lattice",
    "simulate_pipeline",
    "MIN_ACCEPTANCE_REPLICATES",
]

MIN_ACCEPTANCE_REPLICATES = 10_000
_BLOCK_CELLS = 1 << 21  # replicates * s per block, bounds memory

_TAG_POWER = 0
_TAG_PIPELINE = 1


def max_workers() -> int:
    env = os.environ.get("ESSLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class SimSpec:
    params: ModelParams
    replicates: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1 (got {self.replicates})")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimEstimate:
    rate: float
    stderr: float
    replicates: int

    @classmethod
    def from_counts(cls, hits: int, n: int) -> "SimEstimate":
        if n == 0:
            return cls(float("nan"), float("nan"), 0)
        rate = hits / n
        return cls(rate, math.sqrt(rate * (1 - rate) / n), n)

    def agrees(self, expected: float, k: float = 3.0) -> bool:
        """``|rate - expected| <= k * se`` with se the larger of the empirical
        and the expected-rate standard errors (the empirical one is 0 at
        rates of exactly 0 or 1)."""
        se_expected = math.sqrt(max(expected * (1 - expected), 0.0) / self.replicates)
        return abs(self.rate - expected) <= k * max(self.stderr, se_expected) + 1e-12


@dataclass(frozen=True)
class PipelineEstimate:
    tpr: SimEstimate
    ppv: SimEstimate
    tpr_cet: Optional[SimEstimate]
    ppv_cet: Optional[SimEstimate]
    s: int
    counts: dict


def _block_sizes(replicates, s):
    size = max(1, _BLOCK_CELLS // max(1, s))
    n_blocks = -(-replicates // size)
    return [min(size, replicates - i * size) for i in range(n_blocks)], size


def _generator(seed, tag, s, block):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag, s, block))
    return np.random.Generator(np.random.Philox(ss))


def _box_muller(rng, shape):
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    r = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


def _group_stats(rng, n, s, design):
    """Sufficient summaries of ``n`` simulated studies with zero true effect."""
    x, y = _box_muller(rng, (n, s))
    if design is Design.ONE_SAMPLE:
        return x.mean(axis=1), None, x.var(axis=1, ddof=1), None
    return x.mean(axis=1), y.mean(axis=1), x.var(axis=1, ddof=1), y.var(axis=1, ddof=1)


def _t_stat(mx, my, vx, vy, s, d, design):
    if design is Design.ONE_SAMPLE:
        return (mx + d) / np.sqrt(vx / s)
    # equal group sizes: pooled variance (vx+vy)/2, se^2 = pooled * 2/s
    return (my + d - mx) / np.sqrt((vx + vy) / s)


def _run_blocks(fn, n_blocks):
    workers = min(max_workers(), n_blocks)
    if workers <= 1:
        return [fn(i) for i in range(n_blocks)]
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(fn, range(n_blocks)))


def simulate_power_lattice(
    d_values: Sequence[float],
    s: int,
    alpha: float = 0.05,
    design=Design.TWO_SAMPLE,
    replicates: int = 1_000_000,
    seed: int = 0,
) -> list:
    """Rejection rates for several effect sizes sharing the same simulated noise.

    Entry ``i`` is bit-identical to ``simulate_power(d_values[i], s, ...)``.
    """
    design = Design(design)
    df = s - 1 if design is Design.ONE_SAMPLE else 2 * s - 2
    crit = stats.t.isf(alpha / 2.0, df)
    sizes, _ = _block_sizes(replicates, s)

    def block(i):
        rng = _generator(seed, _TAG_POWER, s, i)
        mx, my, vx, vy = _group_stats(rng, sizes[i], s, design)
        return [int(np.count_nonzero(np.abs(_t_stat(mx, my, vx, vy, s, d, design)) > crit))
                for d in d_values]

    hits = np.sum(np.array(_run_blocks(block, len(sizes)), dtype=np.int64), axis=0)
    return [SimEstimate.from_counts(int(h), replicates) for h in hits]


def simulate_power(d, s, alpha=0.05, design=Design.TWO_SAMPLE, replicates=1_000_000, seed=0):
    """Fraction of simulated studies in which the two-sided t-test rejects.

    Group means differ by ``d`` standard deviations (one-sample design: the
    mean is ``d``).
    """
    return simulate_power_lattice([d], s, alpha, design, replicates, seed)[0]


def simulate_pipeline(spec: SimSpec, s: Optional[int] = None) -> PipelineEstimate:
    """Simulate the publication procedure, optionally with equivalence testing.

    Each replicate draws whether the effect is real (probability ``b``),
    simulates two groups of size ``s`` (the model's ESS unless given), and
    runs the two-sided t-test.  With CET enabled, non-significant replicates
    run TOST with bounds ``+/- delta`` pooled standard deviations.  A
    replicate is publishable if significant, or (CET) if equivalent; it is
    *true* if significant with a real effect or equivalent with a null one.
    """
    p = spec.params
    if p.design is not Design.TWO_SAMPLE:
        raise ValueError("pipeline simulation supports the two-sample design only")
    if s is None:
        s = equilibrium(p).ess
    s = int(s)
    df = 2 * s - 2
    crit = stats.t.isf(p.alpha / 2.0, df)
    cet = p.cet
    if cet is not None:
        crit_eq = stats.t.isf(cet.alpha_cet, df)
        delta = cet.delta_frac * p.d
    scale = math.sqrt(2.0 / s)
    sizes, _ = _block_sizes(spec.replicates, s)

    def block(i):
        rng = _generator(spec.seed, _TAG_PIPELINE, s, i)
        n = sizes[i]
        real = rng.random(n) < p.b
        mx, my, vx, vy = _group_stats(rng, n, s, Design.TWO_SAMPLE)
        diff = my + np.where(real, p.d, 0.0) - mx
        sp = np.sqrt((vx + vy) / 2.0)
        t = diff / (sp * scale)
        sig = np.abs(t) > crit
        c = {
            "significant": int(sig.sum()),
            "true_positive": int((sig & real).sum()),
            "equivalent": 0,
            "true_negative": 0,
            "tost_among_significant": 0,
        }
        if cet is not None:
            t_lower = (diff + delta * sp) / (sp * scale)
            t_upper = (diff - delta * sp) / (sp * scale)
            tost = (t_lower > crit_eq) & (t_upper < -crit_eq)
            # only non-significant replicates proceed to the equivalence test
            eq = tost & ~sig
            c["equivalent"] = int(eq.sum())
            c["true_negative"] = int((eq & ~real).sum())
            c["tost_among_significant"] = int((tost & sig).sum())
        c["real"] = int(real.sum())
        return c

    counts = {}
    for c in _run_blocks(block, len(sizes)):
        for k, v in c.items():
            counts[k] = counts.get(k, 0) + v

    n = spec.replicates
    tpr = SimEstimate.from_counts(counts["significant"], n)
    ppv = SimEstimate.from_counts(counts["true_positive"], counts["significant"])
    tpr_cet = ppv_cet = None
    if cet is not None:
        published = counts["significant"] + counts["equivalent"]
        tpr_cet = SimEstimate.from_counts(published, n)
        ppv_cet = SimEstimate.from_counts(counts["true_positive"] + counts["true_negative"], published)
    return PipelineEstimate(tpr, ppv, tpr_cet, ppv_cet, s, counts)
