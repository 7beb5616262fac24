"""Populations of niches: sampled (b, d, IF), their equilibria, and the
emergent power distribution of the published literature.

Each draw is weighted by ``TPR / ESS``: a niche with half the ESS runs twice
as many studies, of which a fraction TPR gets published.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import __version__
from ._io import csv_text, dumps
from .model import S_MAX, S_MIN, S_STEP, CetParams, ModelParams, equilibrium
from .montecarlo import max_workers

__all__ = [
    "Uniform",
    "Beta",
    "Gamma",
    "Mixture",
    "PointMass",
    "DistributionSpec",
    "B_RECIPES",
    "IF_RECIPES",
    "D_EMPIRICAL",
    "ScenarioSpec",
    "ScenarioResult",
    "Draw",
    "sample",
    "run_scenario",
    "distribution_from_dict",
    "load_scenario_spec",
    "SCHEMA",
]

SCHEMA = "esslab.scenario/1"
CSV_HEADER = ["b", "d", "IF", "ess", "power", "power_cet", "tpr", "ppv", "weight"]


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"uniform requires lo < hi (got lo={self.lo}, hi={self.hi})")

    def draw(self, rng, n):
        return rng.uniform(self.lo, self.hi, n)

    def to_dict(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Beta:
    a: float
    b: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"beta requires a > 0 and b > 0 (got a={self.a}, b={self.b})")
        if not self.scale > 0:
            raise ValueError(f"beta requires scale > 0 (got {self.scale})")

    def draw(self, rng, n):
        return self.scale * rng.beta(self.a, self.b, n)

    def to_dict(self):
        return {"kind": "beta", "a": self.a, "b": self.b, "scale": self.scale}


@dataclass(frozen=True)
class Gamma:
    """Gamma(shape ``k``, scale ``theta``), restricted to ``[clip_lo, clip_hi]``
    by redrawing out-of-range values."""

    k: float
    theta: float
    clip_lo: float = 0.0
    clip_hi: float = math.inf

    def __post_init__(self):
        if not (self.k > 0 and self.theta > 0):
            raise ValueError(f"gamma requires k > 0 and theta > 0 (got k={self.k}, theta={self.theta})")
        if not self.clip_lo < self.clip_hi:
            raise ValueError("gamma requires clip_lo < clip_hi")

    def draw(self, rng, n):
        out = rng.gamma(self.k, self.theta, n)
        bad = (out < self.clip_lo) | (out > self.clip_hi)
        for _ in range(10_000):
            m = int(bad.sum())
            if m == 0:
                return out
            out[bad] = rng.gamma(self.k, self.theta, m)
            bad = (out < self.clip_lo) | (out > self.clip_hi)
        raise ValueError("gamma clipping window has negligible mass")

    def to_dict(self):
        d = {"kind": "gamma", "k": self.k, "theta": self.theta, "clip_lo": self.clip_lo}
        if math.isfinite(self.clip_hi):
            d["clip_hi"] = self.clip_hi
        return d


@dataclass(frozen=True)
class PointMass:
    value: float

    def draw(self, rng, n):
        return np.full(n, float(self.value))

    def to_dict(self):
        return {"kind": "point", "value": self.value}


@dataclass(frozen=True)
class Mixture:
    components: tuple  # of (weight, distribution)

    def __post_init__(self):
        comps = tuple((float(w), dist) for w, dist in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights <= 0):
            raise ValueError("mixture weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1 (got {weights.sum()!r})")

    def draw(self, rng, n):
        weights = np.array([w for w, _ in self.components])
        which = rng.choice(len(weights), size=n, p=weights)
        out = np.empty(n)
        for i, (_, dist) in enumerate(self.components):
            mask = which == i
            out[mask] = dist.draw(rng, int(mask.sum()))
        return out

    def to_dict(self):
        return {"kind": "mixture",
                "components": [{"weight": w, "dist": d.to_dict()} for w, d in self.components]}


DistributionSpec = Union[Uniform, Beta, Gamma, Mixture, PointMass]

_LOW = Beta(1.1, 10.0)
_HIGH = Beta(10.0, 1.1)

B_RECIPES = {
    "uniform": Uniform(0.0, 1.0),
    "bimodal": Mixture(((0.5, _LOW), (0.5, _HIGH))),
    "low": _LOW,
    "low_bimodal": Mixture(((0.9, _LOW), (0.1, _HIGH))),
}

# "medium" uses beta(10, 10): the symmetric member of the a, b in {1.1, 10} family
IF_RECIPES = {
    "uniform": Uniform(100.0, 1000.0),
    "low": Beta(1.1, 10.0, 1000.0),
    "medium": Beta(10.0, 10.0, 1000.0),
    "high": Beta(10.0, 1.1, 1000.0),
}

D_EMPIRICAL = Gamma(3.5, 0.2, 0.1, 1.5)

_KEYS = {
    "uniform": {"lo", "hi"},
    "beta": {"a", "b", "scale"},
    "gamma": {"k", "theta", "clip_lo", "clip_hi"},
    "point": {"value"},
    "mixture": {"components"},
}


def distribution_from_dict(obj, recipes=None) -> DistributionSpec:
    """Parse a distribution from JSON-like data.

    A bare string names a recipe from ``recipes``; ``"empirical"`` always
    names the effect-size gamma.  Unknown keys are errors.
    """
    if isinstance(obj, str):
        if obj == "empirical":
            return D_EMPIRICAL
        if recipes and obj in recipes:
            return recipes[obj]
        raise ValueError(f"unknown distribution recipe {obj!r}")
    if isinstance(obj, (int, float)):
        return PointMass(float(obj))
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"distribution must be a recipe name or an object with 'kind' (got {obj!r})")
    kind = obj["kind"]
    if kind not in _KEYS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    extra = set(obj) - _KEYS[kind] - {"kind"}
    if extra:
        raise ValueError(f"unknown keys for {kind} distribution: {sorted(extra)}")
    args = {k: v for k, v in obj.items() if k != "kind"}
    if kind == "uniform":
        return Uniform(float(args["lo"]), float(args["hi"]))
    if kind == "beta":
        return Beta(float(args["a"]), float(args["b"]), float(args.get("scale", 1.0)))
    if kind == "gamma":
        return Gamma(float(args["k"]), float(args["theta"]),
                     float(args.get("clip_lo", 0.0)), float(args.get("clip_hi", math.inf)))
    if kind == "point":
        return PointMass(float(args["value"]))
    comps = []
    for c in args["components"]:
        if set(c) != {"weight", "dist"}:
            raise ValueError("mixture components need exactly 'weight' and 'dist'")
        comps.append((float(c["weight"]), distribution_from_dict(c["dist"], recipes)))
    return Mixture(tuple(comps))


def sample(dist: DistributionSpec, n: int, seed=None) -> np.ndarray:
    """``n`` draws from ``dist``; deterministic for a fixed integer seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return np.asarray(dist.draw(_as_rng(seed), int(n)), dtype=float)


@dataclass(frozen=True)
class ScenarioSpec:
    dist_b: DistributionSpec
    dist_d: DistributionSpec = D_EMPIRICAL
    dist_if: DistributionSpec = IF_RECIPES["uniform"]
    draws: int = 1000
    seed: int = 0
    alpha: float = 0.05
    cet: Optional[CetParams] = None
    histogram_bins: int = 20
    s_min: int = S_MIN
    s_max: int = S_MAX

    def __post_init__(self):
        if self.draws < 1:
            raise ValueError(f"draws must be >= 1 (got {self.draws})")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must satisfy 0 < alpha < 1 (got {self.alpha})")
        if self.histogram_bins < 1:
            raise ValueError("histogram_bins must be >= 1")

    @classmethod
    def from_dict(cls, obj: dict) -> "ScenarioSpec":
        obj = dict(obj)
        schema = obj.pop("schema", SCHEMA)
        if schema != SCHEMA:
            raise ValueError(f"unsupported schema {schema!r} (expected {SCHEMA!r})")
        allowed = {"dist_b", "dist_d", "dist_if", "draws", "seed", "alpha", "cet",
                   "histogram_bins", "s_min", "s_max"}
        extra = set(obj) - allowed
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "dist_b" not in obj:
            raise ValueError("config requires 'dist_b'")
        kw = {
            "dist_b": distribution_from_dict(obj["dist_b"], B_RECIPES),
            "dist_d": distribution_from_dict(obj.get("dist_d", "empirical")),
            "dist_if": distribution_from_dict(obj.get("dist_if", "uniform"), IF_RECIPES),
        }
        for key in ("draws", "seed", "histogram_bins", "s_min", "s_max"):
            if key in obj:
                kw[key] = int(obj[key])
        if "alpha" in obj:
            kw["alpha"] = float(obj["alpha"])
        cet = obj.get("cet")
        if cet is not None:
            extra = set(cet) - {"delta_frac", "alpha_cet"}
            if extra:
                raise ValueError(f"unknown cet keys: {sorted(extra)}")
            kw["cet"] = CetParams(**{k: float(v) for k, v in cet.items()})
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "dist_b": self.dist_b.to_dict(),
            "dist_d": self.dist_d.to_dict(),
            "dist_if": self.dist_if.to_dict(),
            "draws": self.draws,
            "seed": self.seed,
            "alpha": self.alpha,
            "cet": None if self.cet is None else
            {"delta_frac": self.cet.delta_frac, "alpha_cet": self.cet.alpha_cet},
            "histogram_bins": self.histogram_bins,
            "s_min": self.s_min,
            "s_max": self.s_max,
        }


def load_scenario_spec(path) -> ScenarioSpec:
    with open(path) as fh:
        return ScenarioSpec.from_dict(json.load(fh))


@dataclass(frozen=True)
class Draw:
    b: float
    d: float
    IF: float
    ess: int
    power: float
    power_cet: Optional[float]
    tpr: float
    ppv: float
    weight: float

    def row(self):
        return [self.b, self.d, self.IF, self.ess, self.power, self.power_cet,
                self.tpr, self.ppv, self.weight]


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    draws: list
    power_histogram: np.ndarray
    unweighted_histogram: np.ndarray
    bin_edges: np.ndarray
    mean_ppv: float
    mean_power: float
    mean_power_cet: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        w = np.array([r.weight for r in self.draws])
        return w / w.sum()

    @property
    def powers(self) -> np.ndarray:
        return np.array([r.power for r in self.draws])

    def mass(self, lo: float, hi: float, weighted: bool = True) -> float:
        """Fraction of the (weighted) literature with ``lo <= power <= hi``."""
        p = self.powers
        w = self.weights if weighted else np.full(p.size, 1.0 / p.size)
        return float(w[(p >= lo) & (p <= hi)].sum())

    @property
    def weighting_tv_distance(self) -> float:
        """Total-variation distance between weighted and unweighted histograms."""
        return float(0.5 * np.abs(self.power_histogram - self.unweighted_histogram).sum())

    def to_csv(self) -> str:
        return csv_text(CSV_HEADER, (r.row() for r in self.draws))

    def summary(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "mean_ppv": self.mean_ppv,
            "mean_power": self.mean_power,
            "mean_power_cet": self.mean_power_cet,
            "histogram": {
                "edges": self.bin_edges.tolist(),
                "weighted": self.power_histogram.tolist(),
                "unweighted": self.unweighted_histogram.tolist(),
                "weighting_tv_distance": self.weighting_tv_distance,
            },
            "metadata": self.metadata,
        }

    def summary_json(self) -> str:
        return dumps(self.summary())


def _metadata(spec):
    meta = {
        "seed": spec.seed,
        "grid": {"s_min": spec.s_min, "s_max": spec.s_max, "step": S_STEP},
        "versions": {"esslab": __version__, "numpy": np.__version__},
        "weighting": "tpr/ess",
        "notes": [],
    }
    if spec.cet is not None:
        meta["tost"] = "exact; bounds in pooled sample-SD units; true effect 0"
    if _contains(spec.dist_if, IF_RECIPES["medium"]):
        meta["notes"].append("medium IF recipe interpreted as 1000 * beta(10, 10)")
    return meta


def _contains(dist, target):
    if dist == target:
        return True
    if isinstance(dist, Mixture):
        return any(_contains(d, target) for _, d in dist.components)
    return False


def run_scenario(spec: ScenarioSpec, workers: Optional[int] = None) -> ScenarioResult:
    """Sample ``spec.draws`` niches and aggregate their equilibria.

    b, d and IF come from three independent streams derived from
    ``spec.seed``; the per-draw equilibria are pure, so a parallel map gives
    the same result as a sequential one.
    """
    streams = np.random.SeedSequence(spec.seed).spawn(3)
    n = spec.draws
    b = np.clip(sample(spec.dist_b, n, streams[0]), 0.0, 1.0)
    d = sample(spec.dist_d, n, streams[1])
    IF = sample(spec.dist_if, n, streams[2])
    if np.any(d <= 0):
        raise ValueError("sampled d must be > 0; check dist_d")
    if np.any(IF <= 0):
        raise ValueError("sampled IF must be > 0; check dist_if")

    def one(i):
        p = ModelParams(float(b[i]), float(d[i]), float(IF[i]), spec.alpha, spec.cet)
        eq = equilibrium(p, spec.s_min, spec.s_max)
        return Draw(p.b, p.d, p.IF, eq.ess, eq.power_at_ess, eq.power_cet_at_ess,
                    eq.tpr_at_ess, eq.ppv_at_ess, eq.tpr_at_ess / eq.ess)

    workers = max_workers() if workers is None else workers
    if workers > 1 and n > 1:
        with ThreadPoolExecutor(workers) as ex:
            draws = list(ex.map(one, range(n)))
    else:
        draws = [one(i) for i in range(n)]

    w = np.array([r.weight for r in draws])
    w = w / w.sum()
    power = np.array([r.power for r in draws])
    ppv = np.array([r.ppv for r in draws])
    edges = np.linspace(0.0, 1.0, spec.histogram_bins + 1)
    hist_w, _ = np.histogram(power, bins=edges, weights=w)
    hist_u, _ = np.histogram(power, bins=edges)
    hist_u = hist_u / n
    mean_power_cet = None
    if spec.cet is not None:
        mean_power_cet = float(np.dot(w, [r.power_cet for r in draws]))
    return ScenarioResult(
        spec=spec,
        draws=draws,
        power_histogram=hist_w,
        unweighted_histogram=hist_u,
        bin_edges=edges,
        mean_ppv=float(np.dot(w, ppv)),
        mean_power=float(np.dot(w, power)),
        mean_power_cet=mean_power_cet,
        metadata=_metadata(spec),
    )
