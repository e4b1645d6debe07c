"""Two-sample Kolmogorov-Smirnov testing across ranks and per-node spread."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySample, IterationOutOfRange, RankOutOfRange, UnsupportedAlpha
from .trace import TimingTrace, iteration_slice, node_ranks

ALPHAS = (0.10, 0.05, 0.025, 0.01, 0.005, 0.001)


@dataclass(frozen=True)
class KsResult:
    d: float
    threshold: float
    reject: bool
    n: int
    m: int
    alpha: float


def ks_statistic(sample1, sample2) -> float:
    """Exact ``sup_x |F1(x) - F2(x)|`` of the two empirical CDFs.

    Both step functions are right-continuous and only jump at sample points,
    so evaluating them at every point of the merged sample finds the supremum.
    """
    x1 = np.sort(np.asarray(sample1, dtype=float))
    x2 = np.sort(np.asarray(sample2, dtype=float))
    if x1.size == 0 or x2.size == 0:
        raise EmptySample("KS statistic needs two non-empty samples")
    merged = np.concatenate([x1, x2])
    f1 = np.searchsorted(x1, merged, side="right") / x1.size
    f2 = np.searchsorted(x2, merged, side="right") / x2.size
    return float(np.max(np.abs(f1 - f2)))


def c_alpha(alpha: float) -> float:
    """Asymptotic critical coefficient ``sqrt(-ln(alpha/2) / 2)``."""
    if not any(math.isclose(alpha, a, rel_tol=1e-12) for a in ALPHAS):
        raise UnsupportedAlpha(f"alpha={alpha} not in {ALPHAS}")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


def ks_threshold(n: int, m: int, alpha: float = 0.05, c: float | None = None) -> float:
    """Rejection threshold ``c(alpha) * sqrt((n + m) / (n m))``.

    ``c`` overrides the tabulated coefficient (alpha is still validated).
    """
    if n < 1 or m < 1:
        raise EmptySample("sample sizes must be >= 1")
    tabulated = c_alpha(alpha)
    coef = tabulated if c is None else c
    return coef * math.sqrt((n + m) / (n * m))


def ks_test(sample1, sample2, alpha: float = 0.05, c: float | None = None) -> KsResult:
    d = ks_statistic(sample1, sample2)
    n, m = len(sample1), len(sample2)
    thr = ks_threshold(n, m, alpha, c)
    return KsResult(d=d, threshold=thr, reject=d > thr, n=n, m=m, alpha=alpha)


def rank_ks_tests(
    trace: TimingTrace, reference_rank: int = 0, alpha: float = 0.05, c: float | None = None
) -> dict[int, KsResult]:
    """KS test of every rank's iteration times against the reference rank's."""
    if trace.P < 2:
        raise RankOutOfRange("need at least two ranks")
    if not 0 <= reference_rank < trace.P:
        raise RankOutOfRange(f"rank {reference_rank} outside [0, {trace.P})")
    ref = trace.times[:, reference_rank]
    return {
        p: ks_test(trace.times[:, p], ref, alpha, c)
        for p in range(trace.P)
        if p != reference_rank
    }


def pairwise_rejection_rate(
    trace: TimingTrace, reference_rank: int = 0, alpha: float = 0.05, c: float | None = None
) -> float:
    results = rank_ks_tests(trace, reference_rank, alpha, c)
    return sum(r.reject for r in results.values()) / len(results)


def node_variance(trace: TimingTrace, node: int, k: int) -> float:
    """Population variance of iteration ``k`` over the ranks of ``node``."""
    if not 0 <= k < trace.K:
        raise IterationOutOfRange(f"iteration {k} outside [0, {trace.K})")
    return float(np.var(iteration_slice(trace, k)[node_ranks(trace.meta, node)]))


def node_means(trace: TimingTrace, k: int) -> np.ndarray:
    """Per-node mean time of iteration ``k``."""
    row = iteration_slice(trace, k)
    return row.reshape(trace.meta.n_nodes, trace.meta.cores_per_node).mean(axis=1)
