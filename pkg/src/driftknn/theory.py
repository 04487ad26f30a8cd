"""Minimax excess-risk exponents, rates and phase-transition regimes.

All rates are returned with their leading constant set to 1, so only the
dependence on the sample sizes is meaningful. Two smoothness branches recur
throughout: the *source-smooth* branch ``beta_P > gamma * beta_Q`` and the
*target-smooth* branch ``beta_P <= gamma * beta_Q``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence


class Regime(str, enum.Enum):
    NONPARAMETRIC = "Nonparametric"
    FAST = "Fast"
    SUPER_FAST = "SuperFast"


@dataclass(frozen=True)
class RateParams:
    """Noise exponent, smoothness orders, relative signal exponent, dimension and sizes."""

    alpha: float
    beta_P: float
    beta_Q: float
    gamma: float
    d: int
    n_P: int = 0
    n_Q: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        for name in ("beta_P", "beta_Q"):
            b = getattr(self, name)
            if not 0 <= b <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {b}")
        if max(self.beta_P, self.beta_Q) <= 0:
            raise ValueError("at least one of beta_P, beta_Q must be positive")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.n_P < 0 or self.n_Q < 0:
            raise ValueError("sample sizes must be nonnegative")

    @property
    def source_smooth(self) -> bool:
        """True in the branch ``beta_P > gamma * beta_Q``."""
        return self.beta_P > self.gamma * self.beta_Q

    def _active_beta(self) -> float:
        beta = self.beta_P if self.source_smooth else self.beta_Q
        if beta <= 0:
            name = "beta_P" if self.source_smooth else "beta_Q"
            raise ValueError(f"{name} = 0 in the active branch leaves the exponent undefined")
        return beta


@dataclass(frozen=True)
class MultiSourceParams:
    alpha: float
    d: int
    betas: Sequence[float]
    gammas: Sequence[float]
    sizes: Sequence[int]
    beta_Q: float

    def __post_init__(self):
        m = len(self.betas)
        if m < 1 or len(self.gammas) != m or len(self.sizes) != m:
            raise ValueError("betas, gammas and sizes must be nonempty and of equal length")
        if self.alpha < 0 or self.d < 1:
            raise ValueError("need alpha >= 0 and d >= 1")
        if any(not 0 <= b <= 1 for b in [*self.betas, self.beta_Q]):
            raise ValueError("smoothness orders must lie in [0, 1]")
        if any(g <= 0 for g in self.gammas):
            raise ValueError("relative signal exponents must be positive")
        if any(n < 0 for n in self.sizes):
            raise ValueError("sample sizes must be nonnegative")

    @property
    def beta_star(self) -> float:
        return min(min(b / g for b, g in zip(self.betas, self.gammas)), self.beta_Q)


@dataclass(frozen=True)
class Exponent:
    """Rate exponent ``e`` with risk of order ``n_P ** -e`` when ``n_Q = 0``.

    ``exact`` is True when the matching lower bound's side condition holds,
    otherwise ``value`` is only known to be an upper-bound exponent.
    """

    value: float
    exact: bool
    source_smooth: bool = field(default=False)


def minimax_exponent_single(params: RateParams) -> Exponent:
    a, g, d = params.alpha, params.gamma, params.d
    beta = params._active_beta()
    if params.source_smooth:
        e = (1 + a) * beta / (g * (2 * beta + d))
        exact = a * beta <= g * d
    else:
        e = (1 + a) * beta / (2 * g * beta + d)
        exact = a * beta <= d
    return Exponent(e, exact, params.source_smooth)


def _pow(n: float, power: float) -> float:
    try:
        return float(n) ** power
    except OverflowError:
        return math.inf


def _effective_size(params: RateParams, beta: float) -> float:
    """``n_P`` raised to its branch-specific power, plus ``n_Q``."""
    g, d = params.gamma, params.d
    if params.source_smooth:
        power = (2 * beta + g * d) / (g * (2 * beta + d))
    else:
        power = (2 * beta + d) / (2 * g * beta + d)
    return _pow(params.n_P, power) + params.n_Q


def minimax_rate_general(params: RateParams) -> float:
    if params.n_P + params.n_Q < 1:
        raise ValueError("need n_P + n_Q >= 1")
    beta = params._active_beta()
    a, g, d = params.alpha, params.gamma, params.d
    if params.source_smooth:
        rate_power = beta * (1 + a) / (2 * beta + g * d)
    else:
        rate_power = beta * (1 + a) / (2 * beta + d)
    return _effective_size(params, beta) ** -rate_power


def suboptimal_upper_bound(params: RateParams) -> float:
    """Rate attainable over the weaker class (one-sided signal condition).

    Only defined in the source-smooth branch; it reduces to the single-sample
    rate when ``n_Q = 0`` and is never tighter than :func:`minimax_rate_general`.
    """
    if not params.source_smooth:
        raise ValueError("suboptimal_upper_bound requires beta_P > gamma * beta_Q")
    if params.beta_Q <= 0:
        raise ValueError("suboptimal_upper_bound requires beta_Q > 0")
    if params.n_P + params.n_Q < 1:
        raise ValueError("need n_P + n_Q >= 1")
    a, bp, bq, g, d = params.alpha, params.beta_P, params.beta_Q, params.gamma, params.d
    power = (2 * bq + d) * bp / (g * (2 * bp + d) * bq)
    return (_pow(params.n_P, power) + params.n_Q) ** -(bq * (1 + a) / (2 * bq + d))


def multi_source_rate(params: MultiSourceParams) -> float:
    b = params.beta_star
    if b <= 0:
        raise ValueError("beta* = 0: every source needs beta_j > 0 and beta_Q > 0")
    if sum(params.sizes) < 1:
        raise ValueError("need at least one observation across sources")
    a, d = params.alpha, params.d
    total = sum(_pow(n, (2 * b + d) / (2 * g * b + d)) for n, g in zip(params.sizes, params.gammas))
    return total ** -(b * (1 + a) / (2 * b + d))


def classify_regime(params: RateParams) -> Regime:
    e = minimax_exponent_single(params).value
    if e >= 1:
        return Regime.SUPER_FAST
    if e >= 0.5:
        return Regime.FAST
    return Regime.NONPARAMETRIC


def attempt_ratio(sample_sizes: Sequence[int]) -> float:
    """Search-space ratio of a pooled scan over a lead-source scan: sum(n) / max(n)."""
    sizes = list(sample_sizes)
    if not sizes or any(n < 0 for n in sizes):
        raise ValueError("sample sizes must be a nonempty list of nonnegative counts")
    top = max(sizes)
    if top == 0:
        raise ValueError("at least one sample size must be positive")
    return sum(sizes) / top
