"""Experiment drivers: repetitions, figure presets and quantization sweeps."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import analysis
from ..observations import BeliefModel, is_half_grid, nearest_half_grid
from ..protocols import EXACT, PUSH_SUM, QUANTIZED, InvariantError, QuantizationConfig, Trace, run
from ..topology import (DynamicProbabilistic, Static, default_radius, make_connected_rgg,
                        make_directed_rgg)
from ..weights import mask_to_active, metropolis, modified_metropolis
from .config import ConfigError, ExperimentConfig
from .output import write_summary, write_trace_csv

log = logging.getLogger(__name__)

OUT_ENV = "BELIEFAVG_OUT"
_MASK64 = (1 << 64) - 1

# Window for comparing pre-convergence slopes across Δ: ends where the
# consensus semi-norm reaches the unit communication quantum.
SWEEP_FIT_WINDOW = (1, 10)


def mix_seed(seed: int, r: int) -> int:
    """SplitMix64 finalizer applied to ``seed * φ64 + r + 1``.

    Used to derive independent, reproducible streams for repetition ``r``
    (and for the sub-streams of one repetition).
    """
    x = (int(seed) * 0x9E3779B97F4A7C15 + int(r) + 1) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass
class Repetition:
    rep: int
    seed: int
    e_T: float
    seminorm_T: float
    slope: float | None
    verdict_T: str
    classified_at: int | None
    settled_at: int | None
    steady_error: float
    time_to_threshold: int | None
    v_min: float | None
    beliefs: np.ndarray
    target: float
    quantized_target: float | None = None
    alphas: np.ndarray | None = None
    verdicts: list[str] | None = None
    trace: Trace | None = None


@dataclass
class RunSummary:
    config: ExperimentConfig
    reps: list[Repetition] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.reps], dtype=float)

    @property
    def traces(self) -> list[Trace]:
        return [r.trace for r in self.reps]

    def aggregate(self) -> dict[str, float]:
        out = {}
        for name in ("e_T", "seminorm_T", "steady_error"):
            col = self.column(name)
            out[f"{name}_mean"] = float(col.mean())
            out[f"{name}_var"] = float(col.var())
        slopes = np.array([r.slope for r in self.reps if r.slope is not None], dtype=float)
        if slopes.size:
            out["slope_median"] = float(np.median(slopes))
        return out


def _nudge_off_half_grid(means: np.ndarray, delta: float) -> np.ndarray:
    """Move beliefs within delta/100 of the half-grid to exactly delta/100 away."""
    gap = delta / 100
    out = means.copy()
    for i, m in enumerate(means):
        if is_half_grid(m, delta, tol=gap):
            h = float(nearest_half_grid(m, delta))
            out[i] = h + gap if m >= h else h - gap
            log.info("belief %d nudged off the half-grid: %.12g -> %.12g", i, m, out[i])
    return out


def _belief_means(cfg: ExperimentConfig, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    means = rng.uniform(cfg.belief_low, cfg.belief_high, cfg.n)
    if cfg.scenario == "quantized-halfgrid":
        means = np.asarray(nearest_half_grid(means, cfg.delta), dtype=float)
    elif cfg.quantized and cfg.delta > 0:
        means = _nudge_off_half_grid(means, cfg.delta)
    return means


def build_beliefs(cfg: ExperimentConfig, seed: int) -> BeliefModel:
    means = _belief_means(cfg, seed)
    if cfg.constant_beliefs or cfg.sample_variance == 0:
        return BeliefModel.constant(means)
    return BeliefModel.gaussian(means, cfg.sample_variance, cfg.truncation_sigmas)


def _weight_fn(cfg: ExperimentConfig):
    if cfg.weight_rule == "metropolis":
        return metropolis
    C = Fraction(cfg.C)
    return lambda g: modified_metropolis(g, C)


def run_repetition(cfg: ExperimentConfig, rep: int, keep_trace: bool = True) -> Repetition:
    seed_r = mix_seed(cfg.seed, rep)
    radius = cfg.radius if cfg.radius is not None else default_radius(cfg.n)
    graph_seed, belief_seed, sample_seed, sched_seed = (mix_seed(seed_r, k) for k in range(1, 5))
    T = cfg.horizon

    if cfg.directed:
        union = make_directed_rgg(cfg.n, radius, graph_seed, cfg.delete_prob)
    else:
        union = make_connected_rgg(cfg.n, radius, graph_seed)
    schedule = DynamicProbabilistic(union, cfg.p, sched_seed) if cfg.dynamic else Static(union)
    beliefs = build_beliefs(cfg, belief_seed)

    quant = None
    alphas = xr = None
    if cfg.directed:
        mode, policy = PUSH_SUM, None
    elif cfg.quantized:
        mode = QUANTIZED
        quant = QuantizationConfig(cfg.quantizer, cfg.delta)
        W = _weight_fn(cfg)(union)
        policy = (lambda g: mask_to_active(W, g)) if cfg.dynamic else W
        alphas = analysis.alpha_values(W, cfg.gamma)
        xr = (analysis.quantized_target(beliefs.means, cfg.delta).value if cfg.delta > 0
              else beliefs.average)
    else:
        mode, policy = EXACT, _weight_fn(cfg)

    trace = run(schedule, policy, beliefs, mode, T, sample_seed, quant)
    problems = analysis.check_trace(trace)
    if problems:
        raise InvariantError(f"repetition {rep}: " + "; ".join(problems))

    verdicts = None
    verdict_T = analysis.NONE
    classified = settled = None
    if cfg.quantized:
        verdicts = analysis.classify_trace(trace.est, alphas, xr)
        verdict_T = verdicts[-1]
        classified = analysis.first_classified(verdicts)
        unsettled = [k for k, v in enumerate(verdicts) if v == analysis.NEITHER]
        settled = (unsettled[-1] + 2 if unsettled else 1) if verdict_T != analysis.NEITHER else None

    slope = None
    lo = cfg.fit_lo if cfg.fit_lo is not None else max(1, T // 10)
    hi = cfg.fit_hi if cfg.fit_hi is not None else T
    if hi - lo + 1 >= analysis.MIN_FIT_POINTS and hi <= T:
        slope = analysis.fit_rate(trace, lo, hi).slope

    w = min(cfg.steady_window, T)
    return Repetition(
        rep=rep, seed=seed_r, e_T=float(trace.e_t[-1]), seminorm_T=float(trace.seminorm[-1]),
        slope=slope, verdict_T=verdict_T, classified_at=classified, settled_at=settled,
        steady_error=float(trace.e_t[-w:].mean()),
        time_to_threshold=analysis.time_to_threshold(trace, cfg.threshold),
        v_min=float(np.nanmin(trace.v_min)) if mode == PUSH_SUM else None,
        beliefs=beliefs.means, target=beliefs.average, quantized_target=xr, alphas=alphas,
        verdicts=verdicts, trace=trace if keep_trace else None,
    )


def _run_one(args):
    cfg, rep = args
    return run_repetition(cfg, rep)


def resolve_out(out) -> Path | None:
    """Explicit ``out`` wins, then the BELIEFAVG_OUT environment variable."""
    if out is not None:
        return Path(out)
    env = os.environ.get(OUT_ENV)
    return Path(env) if env else None


def run_experiment(cfg: ExperimentConfig, out=None, keep_traces: bool = True) -> RunSummary:
    """Run every repetition of ``cfg``; write per-repetition CSVs and a summary
    under ``out`` when an output directory is given."""
    cfg.validate()
    if cfg.scenario == "quantization-sweep":
        raise ConfigError("use quantization_sweep for the sweep scenario")
    jobs = [(cfg, r) for r in range(cfg.repetitions)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            reps = list(pool.map(_run_one, jobs))
    else:
        reps = [_run_one(j) for j in jobs]
    summary = RunSummary(cfg, reps)
    out = resolve_out(out)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(cfg.to_text())
        for r in reps:
            write_trace_csv(out / f"rep_{r.rep:03d}.csv", r.trace, r.verdicts)
        write_summary(out / "summary.csv", summary)
    if not keep_traces:
        for r in reps:
            r.trace = None
    return summary


@dataclass
class SweepRow:
    delta: float
    summary: RunSummary
    steady_error: float
    slope: float


def quantization_sweep(cfg: ExperimentConfig, deltas=None, out=None,
                       fit_window: tuple[int, int] = SWEEP_FIT_WINDOW) -> list[SweepRow]:
    """One quantized-static run per Δ on shared seeds.

    ``Δ = 0`` keeps exact running averages (communication quantization only).
    Each row reports the repetition-mean steady-state error and the median
    pre-convergence slope of the consensus semi-norm.
    """
    deltas = tuple(cfg.deltas if deltas is None else deltas)
    if not deltas:
        raise ConfigError("empty precision list")
    if any(d < 0 for d in deltas):
        raise ConfigError("precision delta must be nonnegative")
    base = cfg.replace(scenario="quantized-static" if cfg.p == 1 else "quantized-dynamic", deltas=())
    out = resolve_out(out)
    rows = []
    for d in deltas:
        sub = base.replace(delta=float(d))
        summary = run_experiment(sub, None if out is None else out / f"delta_{d:g}")
        slopes = [analysis.fit_rate(r.trace, *fit_window).slope for r in summary.reps]
        rows.append(SweepRow(float(d), summary, float(summary.column("steady_error").mean()),
                             float(np.median(slopes))))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        lines = ["delta,steady_error,slope"]
        lines += [f"{r.delta:.17g},{r.steady_error:.17g},{r.slope:.17g}" for r in rows]
        (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return rows


PRESET_DEFAULTS = ExperimentConfig(n=10, repetitions=20, seed=2018)

FIGURES = {
    "static-undirected": [("static", dict(scenario="undirected-static"))],
    "dynamic-undirected": [("p0.85", dict(scenario="undirected-dynamic", p=0.85)),
                           ("p0.1", dict(scenario="undirected-dynamic", p=0.1))],
    "directed": [("static", dict(scenario="directed-static")),
                 ("p0.85", dict(scenario="directed-dynamic", p=0.85)),
                 ("p0.1", dict(scenario="directed-dynamic", p=0.1))],
    "quantized-static": [("static", dict(scenario="quantized-static", delta=0.1,
                                         quantizer="truncation", C="2"))],
    "quantized-dynamic": [("p0.85", dict(scenario="quantized-dynamic", p=0.85, delta=0.1)),
                          ("p0.1", dict(scenario="quantized-dynamic", p=0.1, delta=0.1))],
    "halfgrid": [("static", dict(scenario="quantized-halfgrid", delta=0.1))],
    "quantization-sweep": [("sweep", dict(scenario="quantization-sweep", deltas=(0.0, 0.1, 1.0)))],
}


def figure_presets(tag: str) -> list[tuple[str, ExperimentConfig]]:
    if tag not in FIGURES:
        raise ConfigError(f"unknown figure tag {tag!r}; expected one of {sorted(FIGURES)}")
    return [(label, PRESET_DEFAULTS.replace(**kw).validate()) for label, kw in FIGURES[tag]]


def reproduce_figure(tag: str, out=None, **overrides) -> dict:
    """Run the preset(s) behind one figure; each preset writes its config
    next to its outputs."""
    results = {}
    out = resolve_out(out)
    for label, cfg in figure_presets(tag):
        cfg = cfg.replace(**overrides).validate() if overrides else cfg
        dest = None if out is None else out / tag / label
        if cfg.scenario == "quantization-sweep":
            results[label] = quantization_sweep(cfg, out=dest)
            if dest is not None:
                (dest / "config.txt").write_text(cfg.to_text())
        else:
            results[label] = run_experiment(cfg, dest)
    return results
