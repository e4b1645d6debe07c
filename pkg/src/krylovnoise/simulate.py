"""Exact evaluation of traces under both execution semantics, synthetic
trace generation, and the Monte Carlo runtime predictor.

The predictor treats each iteration as ``Uniform(a_k, s_k)`` over the
processes, with ``a_k`` and ``s_k`` drawn from hyper-distributions. Every
replicate owns the random stream ``make_rng(seed, replicate)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import dist
from .dist import DistSpec, Uniform
from .errors import ConfigError, HyperModelDegenerate
from .model import uniform_expected_max
from .rng import as_rng, make_rng
from .trace import Method, TimingTrace, TraceMeta


@dataclass(frozen=True)
class PerIterationSpecs:
    specs: tuple

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))


@dataclass(frozen=True)
class HyperModel:
    """Distributions of the per-iteration uniform minimum and span."""

    a_dist: DistSpec
    s_dist: DistSpec


@dataclass(frozen=True)
class SimConfig:
    K: int
    P: int
    source: Union[PerIterationSpecs, HyperModel]
    mode: Method = Method.BARRIER
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Method(self.mode))
        if self.K < 1 or self.P < 1:
            raise ConfigError("K and P must be >= 1")
        if isinstance(self.source, PerIterationSpecs) and len(self.source.specs) != self.K:
            raise ConfigError(f"expected {self.K} iteration specs, got {len(self.source.specs)}")


@dataclass(frozen=True, eq=False)
class SimResult:
    total_seconds: float
    replicate_totals: np.ndarray
    clamped_spans: int = 0
    seed: int = 0

    @property
    def std(self) -> float:
        """Sample standard deviation across replicates (0 for one replicate)."""
        r = self.replicate_totals
        return float(np.std(r, ddof=1)) if r.size > 1 else 0.0


def _times(trace):
    return trace.times if isinstance(trace, TimingTrace) else np.asarray(trace, dtype=float)


def eval_barrier(trace) -> float:
    """Sum over iterations of the slowest process."""
    return float(np.sum(_times(trace).max(axis=1)))


def eval_pipeline(trace) -> float:
    """Slowest process's summed work."""
    return float(np.max(_times(trace).sum(axis=0)))


def synth_times(specs: Sequence[DistSpec], P: int, rng) -> np.ndarray:
    """K x P matrix with row ``k`` drawn i.i.d. from ``specs[k]``."""
    rng = as_rng(rng)
    K = len(specs)
    if K < 1 or P < 1:
        raise ConfigError("K and P must be >= 1")
    first = specs[0]
    if all(s == first for s in specs):
        return dist.sample(first, rng, K * P).reshape(K, P)
    if all(isinstance(s, Uniform) for s in specs):
        a = np.array([s.a for s in specs])[:, None]
        s = np.array([s.s for s in specs])[:, None]
        return a + s * rng.random((K, P))
    return np.vstack([dist.sample(spec, rng, P) for spec in specs])


def synth_trace(specs: Sequence[DistSpec], P: int, seed=0, meta: TraceMeta | None = None) -> TimingTrace:
    if meta is None:
        meta = TraceMeta(P=P)
    return TimingTrace(synth_times(specs, P, seed), meta)


def draw_iteration_params(hyper: HyperModel, K: int, rng) -> tuple[np.ndarray, np.ndarray, int]:
    """Draw ``(a_k, s_k)``; negative spans are clamped to zero and counted."""
    rng = as_rng(rng)
    a = dist.sample(hyper.a_dist, rng, K)
    s = dist.sample(hyper.s_dist, rng, K)
    negative = s < 0
    return a, np.where(negative, 0.0, s), int(negative.sum())


def _replicate(config: SimConfig, r: int) -> tuple[float, int]:
    rng = make_rng(config.seed, r)
    if isinstance(config.source, HyperModel):
        a, s, clamped = draw_iteration_params(config.source, config.K, rng)
        if config.mode is Method.BARRIER:
            per_iter = uniform_expected_max(a, s, config.P)
        else:
            per_iter = a + s / 2.0
        return float(np.sum(per_iter)), clamped
    times = synth_times(config.source.specs, config.P, rng)
    total = eval_barrier(times) if config.mode is Method.BARRIER else eval_pipeline(times)
    return total, 0


def mc_predict(config: SimConfig, replicates: int = 32) -> SimResult:
    """Run ``replicates`` independent predictions.

    With a :class:`HyperModel` source each replicate draws ``(a_k, s_k)`` for
    every iteration and sums the expected per-iteration maximum over ``P``
    processes (barrier) or the per-iteration mean (pipelined). With
    :class:`PerIterationSpecs` each replicate is a synthetic trace evaluated
    exactly.

    Raises
    ------
    HyperModelDegenerate
        More than half of all span draws were negative.
    """
    if replicates < 1:
        raise ConfigError("replicates must be >= 1")
    totals = np.empty(replicates)
    clamped = 0
    for r in range(replicates):
        totals[r], c = _replicate(config, r)
        clamped += c
    if isinstance(config.source, HyperModel) and clamped > 0.5 * replicates * config.K:
        raise HyperModelDegenerate(
            f"{clamped} of {replicates * config.K} span draws were negative"
        )
    return SimResult(float(np.mean(totals)), totals, clamped, config.seed)


def replicate_stats(config: SimConfig, replicates: int = 8) -> SimResult:
    """Like :func:`mc_predict` but insists on a spread (``replicates >= 2``)."""
    if replicates < 2:
        raise ConfigError("replicate statistics need at least 2 replicates")
    return mc_predict(config, replicates)
