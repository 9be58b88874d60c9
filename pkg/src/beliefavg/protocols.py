"""Update rules for distributed learning of the average belief.

All step functions are pure: they take a :class:`NetworkState` and return
a new one.  Three state flavours share the type:

* ``"exact"``     -- undirected averaging driven by running averages;
* ``"push-sum"``  -- directed push-sum with numerator ``mu`` and mass ``v``;
* ``"quantized"`` -- integer-quantized communication with Δ-grid running
  averages.  For Δ > 0 the estimate is kept exactly as integer numerators
  ``y_num`` over a common denominator ``den``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable

import numpy as np

from .observations import BeliefModel, grid_index, sample_matrix
from .topology import Graph, Static, sample_graph
from .weights import WeightMatrix

__all__ = [
    "EXACT",
    "PUSH_SUM",
    "QUANTIZED",
    "QUANTIZERS",
    "InvariantError",
    "QuantizationConfig",
    "NetworkState",
    "Trace",
    "TraceRecord",
    "init_state",
    "step_undirected",
    "step_push_sum",
    "step_quantized",
    "ratio_estimates",
    "estimates",
    "quantize",
    "run",
]

EXACT = "exact"
PUSH_SUM = "push-sum"
QUANTIZED = "quantized"
QUANTIZERS = ("truncation", "ceiling", "rounding")


class InvariantError(RuntimeError):
    """A protocol invariant that cannot fail in exact arithmetic was broken."""


@dataclass(frozen=True)
class QuantizationConfig:
    kind: str = "truncation"
    delta: float = 0.1

    def __post_init__(self):
        if self.kind not in QUANTIZERS:
            raise ValueError(f"unknown quantizer {self.kind!r}; expected one of {QUANTIZERS}")
        if self.delta < 0:
            raise ValueError("division precision must be nonnegative")

    @property
    def grid(self) -> Fraction | None:
        """Δ as an exact rational, or None when there is no division rounding."""
        if self.delta == 0:
            return None
        d = self.delta
        return Fraction(str(d)) if isinstance(d, float) else Fraction(d)


@dataclass(frozen=True, eq=False)
class NetworkState:
    mode: str
    t: int
    y: np.ndarray
    s: np.ndarray
    z: np.ndarray
    mu: np.ndarray | None = None
    v: np.ndarray | None = None
    quant: QuantizationConfig | None = None
    y_num: np.ndarray | None = None
    den: int | None = None
    zk: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.y)


def _as_floats(num: np.ndarray, den: int) -> np.ndarray:
    # int / int is correctly rounded for arbitrarily large Python ints
    return np.array([int(a) / den for a in num], dtype=float)


def _objects(a) -> np.ndarray:
    return np.array([int(v) for v in a], dtype=object)


def init_state(x1, mode: str = EXACT, quant: QuantizationConfig | None = None,
               n: int | None = None) -> NetworkState:
    x1 = np.asarray(x1, dtype=float)
    if x1.ndim != 1 or (n is not None and len(x1) != n):
        raise ValueError(f"expected one sample per agent (n={n}), got shape {x1.shape}")
    if mode == EXACT:
        return NetworkState(EXACT, 1, x1.copy(), x1.copy(), x1.copy())
    if mode == PUSH_SUM:
        return NetworkState(PUSH_SUM, 1, x1.copy(), x1.copy(), x1.copy(), v=np.ones(len(x1)))
    if mode != QUANTIZED:
        raise ValueError(f"unknown mode {mode!r}")
    quant = quant or QuantizationConfig()
    grid = quant.grid
    if grid is None:
        return NetworkState(QUANTIZED, 1, x1.copy(), x1.copy(), x1.copy(), quant=quant)
    zk = _objects(grid_index(x1, float(grid)))
    y_num = zk * grid.numerator
    zt = _as_floats(y_num, grid.denominator)
    return NetworkState(QUANTIZED, 1, zt, x1.copy(), zt.copy(), quant=quant,
                        y_num=y_num, den=grid.denominator, zk=zk)


def _check_samples(st: NetworkState, x_next) -> np.ndarray:
    x = np.asarray(x_next, dtype=float)
    if x.shape != (st.n,):
        raise ValueError(f"expected {st.n} samples, got shape {x.shape}")
    return x


def step_undirected(st: NetworkState, W: WeightMatrix, x_next) -> NetworkState:
    if st.mode != EXACT:
        raise ValueError("step_undirected needs an exact-mode state")
    if W.n != st.n:
        raise ValueError(f"weight matrix is {W.n}x{W.n}, state has {st.n} agents")
    x = _check_samples(st, x_next)
    t = st.t
    z_new = (t * st.z + x) / (t + 1)
    y_new = W.dense @ st.y + (z_new - st.z)
    return NetworkState(EXACT, t + 1, y_new, st.s + x, z_new)


def push_sum_matrix(g: Graph) -> np.ndarray:
    """Column-stochastic transfer: column ``j`` splits agent ``j``'s value
    evenly over itself and its out-neighbors."""
    a = g.adjacency
    share = 1.0 / (1.0 + a.sum(axis=1))
    return (a.T + np.eye(g.n)) * share[None, :]


def step_push_sum(st: NetworkState, g: Graph, x_next) -> NetworkState:
    if st.mode != PUSH_SUM:
        raise ValueError("step_push_sum needs a push-sum state")
    if g.n != st.n:
        raise ValueError(f"graph has {g.n} vertices, state has {st.n} agents")
    x = _check_samples(st, x_next)
    A = push_sum_matrix(g)
    t = st.t
    mu = A @ st.y
    v = A @ st.v
    if not (v > 0).all():
        raise InvariantError(f"push-sum mass vanished at t={t + 1}: min v = {v.min()}")
    z_new = (t * st.z + x) / (t + 1)
    return NetworkState(PUSH_SUM, t + 1, mu + (z_new - st.z), st.s + x, z_new, mu=mu, v=v)


def ratio_estimates(st: NetworkState) -> np.ndarray:
    if st.mode != PUSH_SUM:
        raise ValueError("ratio estimates exist only in push-sum mode")
    if st.mu is None:
        raise ValueError("numerators are defined from t = 2 on")
    if not (st.v > 0).all():
        raise InvariantError(f"nonpositive push-sum mass: {st.v}")
    return st.mu / st.v


def estimates(st: NetworkState) -> np.ndarray:
    """Each agent's current estimate of the average belief."""
    if st.mode != PUSH_SUM:
        return st.y
    if st.mu is None:
        return st.y / st.v
    return ratio_estimates(st)


def quantize(values, kind: str = "truncation") -> np.ndarray:
    """Element-wise integer quantizer (ties of ``rounding`` go up)."""
    v = np.asarray(values, dtype=float)
    if kind == "truncation":
        return np.floor(v)
    if kind == "ceiling":
        return -np.floor(-v)
    if kind == "rounding":
        return np.floor(v + 0.5)
    raise ValueError(f"unknown quantizer {kind!r}")


def _quantize_exact(num: np.ndarray, den: int, kind: str) -> np.ndarray:
    if kind == "truncation":
        return num // den
    if kind == "ceiling":
        return -((-num) // den)
    return (2 * num + den) // (2 * den)


def step_quantized(st: NetworkState, W: WeightMatrix, q: QuantizationConfig | None, x_next) -> NetworkState:
    """``y <- W Q(y) + y - Q(y) + (z~(t+1) - z~(t))`` with exact ``W Q(y)``."""
    if st.mode != QUANTIZED:
        raise ValueError("step_quantized needs a quantized-mode state")
    if not W.exact:
        raise TypeError("quantized update requires an exact rational weight matrix")
    if W.n != st.n:
        raise ValueError(f"weight matrix is {W.n}x{W.n}, state has {st.n} agents")
    q = q or st.quant
    x = _check_samples(st, x_next)
    t1 = st.t + 1
    s_new = st.s + x
    grid = q.grid

    if grid is None:
        z_new = (st.t * st.z + x) / t1
        qy = quantize(st.y, q.kind)
        mixed = _as_floats(W.values.dot(_objects(qy)), W.den)
        y_new = mixed + (st.y - qy) + (z_new - st.z)
        return NetworkState(QUANTIZED, t1, y_new, s_new, z_new, quant=q)

    den = lcm(st.den, W.den, grid.denominator)
    y_num = st.y_num * (den // st.den) if den != st.den else st.y_num
    zk_new = _objects(grid_index(s_new / t1, float(grid)))
    qy = _quantize_exact(y_num, den, q.kind)
    mixed = W.values.dot(qy) * (den // W.den)
    dz = (zk_new - st.zk) * (grid.numerator * (den // grid.denominator))
    y_num = mixed + y_num - qy * den + dz
    z_tilde = _as_floats(zk_new * grid.numerator, grid.denominator)
    return NetworkState(QUANTIZED, t1, _as_floats(y_num, den), s_new, z_tilde, quant=q,
                        y_num=y_num, den=den, zk=zk_new)


# --- driving a full run -----------------------------------------------------

@dataclass(frozen=True)
class TraceRecord:
    t: int
    e_t: float
    seminorm: float
    mass_y: float
    mass_z: float
    floor_min: int
    floor_max: int
    y: np.ndarray | None = None


@dataclass(eq=False)
class Trace:
    """Per-step metrics of one run, stored column-wise (index ``k`` is step ``k + 1``)."""

    mode: str
    target: float
    t: np.ndarray
    e_t: np.ndarray
    seminorm: np.ndarray
    mass_y: np.ndarray
    mass_z: np.ndarray
    mass_v: np.ndarray
    v_min: np.ndarray
    floor_min: np.ndarray
    floor_max: np.ndarray
    z_changes: np.ndarray
    est: np.ndarray
    y: np.ndarray
    final: NetworkState | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n(self) -> int:
        return self.est.shape[1]

    def record(self, k: int) -> TraceRecord:
        return TraceRecord(int(self.t[k]), float(self.e_t[k]), float(self.seminorm[k]),
                           float(self.mass_y[k]), float(self.mass_z[k]),
                           int(self.floor_min[k]), int(self.floor_max[k]), self.est[k].copy())


WeightPolicy = Callable[[Graph], WeightMatrix]


def _exact_mass(st: NetworkState) -> tuple[float, float]:
    if st.y_num is not None:
        my = Fraction(int(sum(st.y_num)), st.den)
        mz = Fraction(int(sum(st.zk))) * st.quant.grid
        if my != mz:
            raise InvariantError(f"quantized mass broken at t={st.t}: {my} != {mz}")
        return float(my), float(mz)
    return float(st.y.sum()), float(st.z.sum())


def _floors(st: NetworkState) -> np.ndarray:
    if st.y_num is not None:
        return np.array([int(a) for a in st.y_num // st.den])
    return np.floor(st.y)


def run(schedule, weights: WeightPolicy | WeightMatrix | None, beliefs: BeliefModel, mode: str,
        T: int, seed: int, quant: QuantizationConfig | None = None,
        samples: np.ndarray | None = None) -> Trace:
    """Initialise from ``x(1)`` and apply ``T - 1`` steps of the protocol.

    ``weights`` maps the step's graph to its mixing matrix (unused for
    push-sum).  ``samples`` overrides the belief model's stream.
    """
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    n = beliefs.n
    if schedule.n != n:
        raise ValueError(f"schedule has {schedule.n} agents, belief model {n}")
    if mode == PUSH_SUM and not schedule.directed:
        raise ValueError("push-sum runs over a directed schedule")
    if mode != PUSH_SUM and schedule.directed:
        raise ValueError(f"{mode} mode needs an undirected schedule")
    x = sample_matrix(beliefs, seed, T) if samples is None else np.asarray(samples, dtype=float)
    if x.shape != (T, n):
        raise ValueError(f"samples must have shape {(T, n)}, got {x.shape}")

    if isinstance(weights, WeightMatrix):
        fixed = weights
        policy = lambda g: fixed  # noqa: E731
    else:
        policy = weights
    static_W = None
    if mode != PUSH_SUM and isinstance(schedule, Static):
        static_W = policy(schedule.graph)

    target = beliefs.average
    cols = {k: np.empty(T) for k in ("e_t", "seminorm", "mass_y", "mass_z", "mass_v", "v_min")}
    fmin = np.empty(T, dtype=np.int64)
    fmax = np.empty(T, dtype=np.int64)
    zch = np.zeros(T, dtype=np.int64)
    est_all = np.empty((T, n))
    y_all = np.empty((T, n))

    st = init_state(x[0], mode, quant, n)
    for k in range(T):
        if k:
            g = sample_graph(schedule, k)
            if mode == PUSH_SUM:
                st_new = step_push_sum(st, g, x[k])
            else:
                W = static_W if static_W is not None else policy(g)
                if mode == EXACT:
                    st_new = step_undirected(st, W, x[k])
                else:
                    st_new = step_quantized(st, W, quant, x[k])
            if mode == QUANTIZED:
                zch[k] = int(np.count_nonzero(st_new.z != st.z))
            st = st_new
        e = estimates(st)
        est_all[k] = e
        y_all[k] = st.y
        cols["e_t"][k] = np.abs(e - target).mean()
        cols["seminorm"][k] = 0.5 * (e.max() - e.min())
        cols["mass_y"][k], cols["mass_z"][k] = _exact_mass(st)
        if st.v is not None:
            cols["mass_v"][k] = st.v.sum()
            cols["v_min"][k] = st.v.min()
        else:
            cols["mass_v"][k] = cols["v_min"][k] = np.nan
        fl = _floors(st)
        fmin[k], fmax[k] = fl.min(), fl.max()

    return Trace(mode, target, np.arange(1, T + 1), cols["e_t"], cols["seminorm"], cols["mass_y"],
                 cols["mass_z"], cols["mass_v"], cols["v_min"], fmin, fmax, zch, est_all, y_all, st)
