"""Bounded i.i.d. observation streams, running averages and the Δ-grid.

Every agent owns a counter-based stream: sample ``t`` of agent ``i`` is a
pure function of ``(seed, i, t)``, obtained by pushing the ``t``-th uniform
of the agent's PCG64 stream through the inverse CDF of its distribution.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "Uniform",
    "TruncatedGaussian",
    "Constant",
    "BeliefModel",
    "RunningAverage",
    "agent_uniforms",
    "sample_matrix",
    "draw_sample",
    "update_running_average",
    "grid_index",
    "round_to_grid",
    "quantized_running_average",
    "is_half_grid",
    "nearest_half_grid",
]

_SAMPLE_STREAM = 0x7361

# Relative slack (in units of Δ) under which a value counts as a half-point.
HALF_TOL = 1e-9


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def bound(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * u


@dataclass(frozen=True)
class TruncatedGaussian:
    """Normal law cut symmetrically at ``mean ± half_width``; the mean is preserved."""

    mean: float
    std: float
    half_width: float

    def __post_init__(self):
        if self.std <= 0 or self.half_width <= 0:
            raise ValueError("std and half_width must be positive")

    @classmethod
    def with_sigmas(cls, mean: float, std: float, sigmas: float = 5.0) -> "TruncatedGaussian":
        return cls(mean, std, sigmas * std)

    @property
    def bound(self) -> float:
        return abs(self.mean) + self.half_width

    def ppf(self, u: np.ndarray) -> np.ndarray:
        a = self.half_width / self.std
        lo = ndtr(-a)
        return self.mean + self.std * ndtri(lo + u * (1.0 - 2.0 * lo))


@dataclass(frozen=True)
class Constant:
    value: float

    @property
    def mean(self) -> float:
        return self.value

    @property
    def bound(self) -> float:
        return abs(self.value)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return np.full(np.shape(u), float(self.value))


Distribution = Uniform | TruncatedGaussian | Constant


@dataclass(frozen=True)
class BeliefModel:
    dists: tuple

    def __post_init__(self):
        object.__setattr__(self, "dists", tuple(self.dists))

    @classmethod
    def gaussian(cls, means: Sequence[float], variance: float, sigmas: float = 5.0) -> "BeliefModel":
        sd = float(np.sqrt(variance))
        return cls(tuple(TruncatedGaussian.with_sigmas(float(m), sd, sigmas) for m in means))

    @classmethod
    def constant(cls, values: Sequence[float]) -> "BeliefModel":
        return cls(tuple(Constant(float(v)) for v in values))

    @property
    def n(self) -> int:
        return len(self.dists)

    @property
    def means(self) -> np.ndarray:
        return np.array([d.mean for d in self.dists], dtype=float)

    @property
    def average(self) -> float:
        return float(self.means.mean())

    @property
    def K(self) -> float:
        return max(d.bound for d in self.dists)


def agent_uniforms(seed: int, i: int, T: int) -> np.ndarray:
    """First ``T`` uniforms of agent ``i``'s stream; prefixes are stable in ``T``."""
    rng = np.random.default_rng([_SAMPLE_STREAM, int(seed), int(i)])
    return rng.random(T)


def sample_matrix(model: BeliefModel, seed: int, T: int) -> np.ndarray:
    """Samples ``x_i(t)`` for ``t = 1..T`` as a ``(T, n)`` array."""
    out = np.empty((T, model.n))
    for i, d in enumerate(model.dists):
        out[:, i] = d.ppf(agent_uniforms(seed, i, T))
    return out


def draw_sample(model: BeliefModel, i: int, t: int, seed: int) -> float:
    if t < 1:
        raise ValueError("samples are numbered from t = 1")
    u = agent_uniforms(seed, i, t)[-1:]
    return float(model.dists[i].ppf(u)[0])


@dataclass(frozen=True)
class RunningAverage:
    s: float = 0.0
    t: int = 0
    z: float = 0.0

    def update(self, x: float) -> "RunningAverage":
        return update_running_average(self, x)


def update_running_average(ra: RunningAverage, x_new: float) -> RunningAverage:
    t = ra.t
    return RunningAverage(ra.s + x_new, t + 1, (t * ra.z + x_new) / (t + 1))


def grid_index(x, delta):
    """Integer ``k`` with ``k * delta`` nearest to ``x``; half-points go up."""
    k = np.floor(np.asarray(x, dtype=float) / delta + 0.5 + HALF_TOL)
    if np.ndim(k) == 0:
        return int(k)
    return k.astype(np.int64)


def round_to_grid(x, delta):
    if delta <= 0:
        raise ValueError("grid precision must be positive")
    return grid_index(x, delta) * delta


def quantized_running_average(s, t, delta):
    if t < 1:
        raise ValueError("need at least one sample")
    return round_to_grid(np.divide(s, t), delta)


def nearest_half_grid(x, delta):
    """Closest point of the half-grid ``k*delta + delta/2``."""
    k = np.floor(np.asarray(x, dtype=float) / delta)
    return (k + 0.5) * delta


def is_half_grid(x: float, delta: float, tol: float | None = None) -> bool:
    if delta <= 0:
        raise ValueError("grid precision must be positive")
    if tol is None:
        tol = HALF_TOL * delta
    return bool(abs(x - float(nearest_half_grid(x, delta))) <= tol)
