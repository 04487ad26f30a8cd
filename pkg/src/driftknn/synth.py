"""Synthetic posterior-drift data: two radial data-generating processes on the unit cube.

Both processes depend on ``x`` through ``t = ||x|| / sqrt(2)``. Whether the
target or source posterior is rough is controlled by the parity of the
decimal digit of ``t`` in the 1e-10 place, read as ``floor(t * 1e10) mod 10``
in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SourceDataset

ROLES = ("P", "Q")


@dataclass(frozen=True)
class DgpConfig:
    dgp_id: int = 1
    kappa: float = 0.5
    gamma: float = 0.6
    d: int = 2

    def __post_init__(self):
        if self.dgp_id not in (1, 2):
            raise ValueError(f"dgp_id must be 1 or 2, got {self.dgp_id}")
        if not 0 <= self.kappa <= 1:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")


def radial_coordinate(x) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    t = np.sqrt(np.sum(x * x, axis=-1)) / np.sqrt(2.0)
    return float(t) if t.ndim == 0 else t


def parity_digit(v):
    """True where the 1e-10 digit of ``v`` is odd."""
    digit = np.floor(np.asarray(v, dtype=np.float64) * 1e10) % 10
    odd = digit % 2 == 1
    return bool(odd) if odd.ndim == 0 else odd


def _power_signal(scale: float, s: np.ndarray, gamma: float) -> np.ndarray:
    return np.sign(s) * scale**gamma * np.abs(s) ** gamma


def eta_radial(dgp: DgpConfig, role: str, t, odd=None, clamp: bool = True):
    """Posterior as a function of the radial coordinate ``t`` and digit parity.

    ``odd`` defaults to the parity read off ``t`` itself; passing it explicitly
    lets callers evaluate either branch at the same radius.
    """
    if role not in ROLES:
        raise ValueError(f"role must be 'P' or 'Q', got {role!r}")
    t = np.asarray(t, dtype=np.float64)
    s = t - 0.5
    odd = np.asarray(parity_digit(t) if odd is None else odd)
    k, g = dgp.kappa, dgp.gamma
    if dgp.dgp_id == 1:
        if role == "Q":
            out = np.where(odd, k**g * s, k * s) + 0.5
        else:
            out = _power_signal(k, s, g) + 0.5
    else:
        if role == "Q":
            out = k * s + 0.5
        else:
            out = np.where(odd, _power_signal(1.2 * k, s, g), _power_signal(k, s, g)) + 0.5
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def eta(dgp: DgpConfig, role: str, x):
    """Posterior P(Y = 1 | x) under source ``P`` or target ``Q``, clipped to [0, 1]."""
    return eta_radial(dgp, role, radial_coordinate(x))


def bayes_label(dgp: DgpConfig, x):
    """Oracle target label ``1[eta_Q(x) >= 1/2]``.

    For ``kappa > 0`` the sign of ``eta_Q - 1/2`` is the sign of ``t - 1/2``
    in both processes, so the rule is evaluated on ``t`` directly; this keeps
    it exact in floating point and well defined for ``kappa = 0``.
    """
    lab = (np.asarray(radial_coordinate(x)) >= 0.5).astype(np.int64)
    return int(lab) if lab.ndim == 0 else lab


def make_rng(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.default_rng(seed)


def sample_covariates(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random((n, d))


def sample_dataset(dgp: DgpConfig, role: str, n: int, seed=None, rng: np.random.Generator | None = None) -> SourceDataset:
    """Uniform covariates on [0, 1]^d with Bernoulli(eta_role) labels.

    Pass either ``seed`` (any value accepted by ``numpy.random.SeedSequence``)
    or an existing generator.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if rng is None:
        rng = make_rng(seed)
    X = sample_covariates(dgp.d, n, rng)
    p = np.asarray(eta(dgp, role, X), dtype=np.float64).reshape(-1)
    y = (rng.random(n) < p).astype(np.int64)
    return SourceDataset(X, y, role)
