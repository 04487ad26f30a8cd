"""Fixed-parameter kNN estimates, the weighted multi-source aggregate, and rate-optimal tuning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .geometry import SourceDataset, k_nearest
from .theory import RateParams


class SourceEstimate(NamedTuple):
    k: int
    estimate: float
    weight: float


@dataclass(frozen=True)
class WeightedEstimate:
    value: float
    per_source: tuple[SourceEstimate, ...]


@dataclass(frozen=True)
class TuningPlan:
    """Neighbor counts and weights per source; ``delta`` is the bandwidth-like scale they derive from."""

    delta: float
    weights: tuple[float, ...]
    ks: tuple[int, ...]

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if len(self.weights) != len(self.ks):
            raise ValueError("weights and ks must have equal length")
        if any(w <= 0 for w in self.weights) or any(k < 0 for k in self.ks):
            raise ValueError("weights must be positive and ks nonnegative")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def knn_regress(dataset: SourceDataset, query, k: int) -> float:
    """Fraction of 1-labels among the ``k`` nearest neighbors of ``query``."""
    nbrs = k_nearest(dataset, query, k)
    return int(dataset.y[nbrs.indices].sum()) / k


def weighted_posterior(per_source: Sequence[tuple[int, float, float]]) -> float:
    num = 0.0
    den = 0.0
    for k, est, w in per_source:
        if k < 0:
            raise ValueError(f"neighbor counts must be nonnegative, got {k}")
        if w <= 0:
            raise ValueError(f"weights must be positive, got {w}")
        if k == 0:
            continue
        num += w * k * est
        den += w * k
    if den == 0:
        raise ValueError("every source has k = 0; the weighted estimate is undefined")
    return num / den


def plug_in_classify(eta_hat: float) -> int:
    return 1 if eta_hat >= 0.5 else 0


def fixed_weighted_knn(
    sources: Sequence[SourceDataset], plan: TuningPlan, query
) -> tuple[int, WeightedEstimate]:
    if len(sources) != len(plan.ks):
        raise ValueError(f"{len(sources)} sources but the plan covers {len(plan.ks)}")
    parts = []
    for src, k, w in zip(sources, plan.ks, plan.weights):
        if k > src.n:
            raise ValueError(f"k = {k} exceeds the size {src.n} of source {src.tag!r}")
        est = knn_regress(src, query, k) if k > 0 else 0.5
        parts.append(SourceEstimate(k, est, w))
    value = weighted_posterior(parts)
    return plug_in_classify(value), WeightedEstimate(value, tuple(parts))


def _clamp_k(raw: float, n: int) -> int:
    if n == 0:
        return 0
    return min(max(round_half_up(raw), 1), n)


def rate_optimal_tuning(params: RateParams) -> TuningPlan:
    """Rate-optimal ``(delta, (w_P, w_Q), (k_P, k_Q))`` with every constant set to 1.

    Real-valued neighbor counts are rounded half up and clamped to
    ``[1, n]`` for each nonempty source; an empty source gets ``k = 0``.
    """
    n_P, n_Q = params.n_P, params.n_Q
    if n_P + n_Q < 1:
        raise ValueError("need n_P + n_Q >= 1")
    g, d = params.gamma, params.d
    beta = params._active_beta()
    if params.source_smooth:
        delta = (n_P ** ((2 * beta + g * d) / (g * (2 * beta + d))) + n_Q) ** (-beta / (2 * beta + g * d))
        shrink = delta ** (g * d / beta)
    else:
        delta = (n_P ** ((2 * beta + d) / (2 * g * beta + d)) + n_Q) ** (-beta / (2 * beta + d))
        shrink = delta ** (d / beta)
    k_P = _clamp_k(n_P * shrink, n_P)
    k_Q = _clamp_k(n_Q * shrink, n_Q)
    return TuningPlan(delta, (delta**g, delta), (k_P, k_Q))
