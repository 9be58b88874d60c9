"""Metrics, invariant verdicts and rate estimation over protocol traces."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .observations import round_to_grid

__all__ = [
    "CASE1",
    "CASE2",
    "NEITHER",
    "NONE",
    "RateFit",
    "MassReport",
    "QuantizedTarget",
    "FiniteTimeBound",
    "seminorm_inf",
    "average_error",
    "matrix_seminorm",
    "fit_rate",
    "detect_quantized_consensus",
    "classify_trace",
    "first_classified",
    "alpha_values",
    "quantized_target",
    "finite_time_bound",
    "mass_report",
    "time_to_threshold",
    "last_z_change",
    "check_trace",
]

CASE1, CASE2, NEITHER, NONE = "case1", "case2", "neither", "none"
SEMINORM_FLOOR = 1e-15
MIN_FIT_POINTS = 10


def seminorm_inf(x) -> float:
    """Half the spread ``(max - min) / 2``; zero exactly on consensus vectors."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("seminorm of an empty vector")
    return 0.5 * float(x.max() - x.min())


def average_error(y, xbar: float) -> float:
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("average error of an empty vector")
    return float(np.abs(y - xbar).mean())


def matrix_seminorm(A) -> float:
    """``½ max_{i,j} Σ_k |a_ik - a_jk|`` for a nonnegative matrix."""
    A = np.asarray(A, dtype=float)
    diff = np.abs(A[:, None, :] - A[None, :, :]).sum(axis=-1)
    return 0.5 * float(diff.max())


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual_rms: float
    t_lo: int
    t_hi: int
    points: int


def fit_rate(trace, t_lo: int | None = None, t_hi: int | None = None, values=None) -> RateFit:
    """Least-squares line through ``(log t, log seminorm)`` on ``[t_lo, t_hi]``.

    ``trace`` is a :class:`~beliefavg.protocols.Trace` or an array of step
    indices; in the latter case ``values`` supplies the series.  The
    default window is ``[T/10, T]``.
    """
    if values is None:
        t = np.asarray(trace.t)
        values = np.asarray(trace.seminorm)
    else:
        t = np.asarray(trace)
        values = np.asarray(values, dtype=float)
    if t_hi is None:
        t_hi = int(t[-1])
    if t_lo is None:
        t_lo = max(int(t[0]), t_hi // 10)
    if t_lo >= t_hi:
        raise ValueError(f"empty fit window [{t_lo}, {t_hi}]")
    sel = (t >= t_lo) & (t <= t_hi)
    if sel.sum() < MIN_FIT_POINTS:
        raise ValueError(f"fit window has {sel.sum()} points, need {MIN_FIT_POINTS}")
    lx = np.log(t[sel].astype(float))
    ly = np.log(np.maximum(values[sel], SEMINORM_FLOOR))
    slope, intercept = np.polyfit(lx, ly, 1)
    res = ly - (slope * lx + intercept)
    return RateFit(float(slope), float(intercept), float(np.sqrt(np.mean(res ** 2))),
                   int(t_lo), int(t_hi), int(sel.sum()))


def detect_quantized_consensus(y, alphas, target: float, tol: float = 1e-12) -> str:
    """Classify a state as quantized consensus (case1), α-neighborhood
    (case2) or neither.  Case 1 wins when both hold."""
    y = np.asarray(y, dtype=float)
    alphas = np.broadcast_to(np.asarray(alphas, dtype=float), y.shape)
    dev = np.abs(y - target)
    floors = np.floor(y)
    if (floors == floors[0]).all() and (dev < 1).all():
        return CASE1
    spread_ok = (np.abs(y[:, None] - y[None, :]) <= alphas[:, None] + alphas[None, :] + tol).all()
    if spread_ok and (dev <= 2 * alphas.max() + tol).all():
        return CASE2
    return NEITHER


def classify_trace(states, alphas, target: float) -> list[str]:
    """Verdict for every row of a ``(T, n)`` array of estimates."""
    return [detect_quantized_consensus(row, alphas, target) for row in np.asarray(states)]


def first_classified(verdicts, t=None) -> int | None:
    """First step whose verdict is case1 or case2."""
    for k, v in enumerate(verdicts):
        if v in (CASE1, CASE2):
            return k + 1 if t is None else int(t[k])
    return None


def alpha_values(W, gamma: float = 1e-3) -> np.ndarray:
    """``α_i = 1 - w_ii + γ``; every α_i must stay below 1/2."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    diag = np.array([float(W.entry(i, i)) for i in range(W.n)])
    alphas = 1.0 - diag + gamma
    if (alphas >= 0.5).any():
        raise ValueError(f"alpha = {alphas.max():.6g} >= 0.5; shrink gamma or raise the diagonal")
    return alphas


class QuantizedTarget(NamedTuple):
    value: float
    deviation: float


def quantized_target(beliefs, delta: float) -> QuantizedTarget:
    """Average of the grid-rounded beliefs and its distance to the true average."""
    b = np.asarray(beliefs, dtype=float)
    value = float(np.mean(round_to_grid(b, delta)))
    dev = abs(value - float(b.mean()))
    if dev > delta / 2 + 1e-9 * max(1.0, delta):
        raise ArithmeticError(f"rounded average off by {dev} > delta/2")
    return QuantizedTarget(value, dev)


class FiniteTimeBound(NamedTuple):
    bound: float
    t_min: float | None


def finite_time_bound(C1: float, C2: float, lam1: float, K: float, xbar_i: float, t: float,
                      delta: float | None = None) -> FiniteTimeBound:
    """``C1 λ1^t + (C2 + K + x̄_i)/t`` and, given ``delta``, the iteration
    count after which the bound holds with probability ``1 - delta``."""
    if not 0 <= lam1 < 1:
        raise ValueError("lambda1 must lie in [0, 1)")
    if C1 <= 0 or C2 <= 0:
        raise ValueError("C1 and C2 must be positive")
    if t < 1:
        raise ValueError("t must be >= 1")
    bound = C1 * lam1 ** t + (C2 + K + xbar_i) / t
    t_min = None
    if delta is not None:
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        tail = 1.0 - 2.0 * math.exp(-2.0 * C2)
        if tail <= 0:
            raise ValueError("threshold undefined for C2 <= ln(2)/2")
        t_min = math.log(2.0 / (delta * tail)) / (2.0 * C2)
    return FiniteTimeBound(bound, t_min)


class MassReport(NamedTuple):
    y: float
    z: float
    v: float | None


def mass_report(st) -> MassReport:
    if st.y_num is not None:
        y = float(Fraction(int(sum(st.y_num)), st.den))
        z = float(Fraction(int(sum(st.zk))) * st.quant.grid)
    else:
        y, z = float(np.sum(st.y)), float(np.sum(st.z))
    v = float(np.sum(st.v)) if st.v is not None else None
    return MassReport(y, z, v)


def time_to_threshold(trace, threshold: float) -> int | None:
    """First step whose consensus semi-norm drops below ``threshold``."""
    hit = np.flatnonzero(np.asarray(trace.seminorm) < threshold)
    return int(trace.t[hit[0]]) if hit.size else None


def last_z_change(trace) -> int:
    """Last step at which some grid-rounded running average moved (1 if never)."""
    moved = np.flatnonzero(np.asarray(trace.z_changes) > 0)
    return int(trace.t[moved[-1]]) if moved.size else 1


def check_trace(trace, mass_tol: float = 1e-9) -> list[str]:
    """Invariant breaches of a finished run; empty when everything holds."""
    problems = []
    n = trace.n
    scale = mass_tol * n * np.maximum(1.0, np.abs(trace.y).max(axis=1))
    gap = np.abs(trace.mass_y - trace.mass_z)
    bad = np.flatnonzero(gap > scale)
    if bad.size:
        k = bad[0]
        problems.append(f"mass conservation broken at t={trace.t[k]}: gap {gap[k]:.3e}")
    if trace.mode == "push-sum":
        vbad = np.flatnonzero(np.abs(trace.mass_v - n) > mass_tol)
        if vbad.size:
            problems.append(f"push-sum mass drifted at t={trace.t[vbad[0]]}: {trace.mass_v[vbad[0]]!r}")
        if not (trace.v_min > 0).all():
            problems.append("push-sum mass became nonpositive")
    if trace.mode == "quantized":
        k0 = last_z_change(trace) - 1
        if (np.diff(trace.floor_max[k0:]) > 0).any():
            problems.append(f"max floor increased after the last grid change (t >= {k0 + 1})")
        if (np.diff(trace.floor_min[k0:]) < 0).any():
            problems.append(f"min floor decreased after the last grid change (t >= {k0 + 1})")
    return problems
