import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from krylovnoise import stats
from krylovnoise.errors import (
    EmptySample,
    IterationOutOfRange,
    NodeOutOfRange,
    RankOutOfRange,
    UnsupportedAlpha,
)
from krylovnoise.rng import make_rng
from krylovnoise.trace import TimingTrace, TraceMeta


def brute_ks(x1, x2):
    """Evaluate both step CDFs just left and right of every jump."""
    pts = sorted(set(x1) | set(x2))
    probes = []
    for p in pts:
        probes += [p, np.nextafter(p, -np.inf)]
    F1 = lambda t: sum(v <= t for v in x1) / len(x1)  # noqa: E731
    F2 = lambda t: sum(v <= t for v in x2) / len(x2)  # noqa: E731
    return max(abs(F1(t) - F2(t)) for t in probes)


def test_ks_examples():
    assert stats.ks_statistic([1, 2, 3], [1, 2, 3]) == 0.0
    assert stats.ks_statistic([1, 2], [3, 4]) == 1.0
    assert stats.ks_statistic([1, 2], [1.5, 2.5]) == 0.5


def test_ks_empty():
    with pytest.raises(EmptySample):
        stats.ks_statistic([], [1.0])


samples = st.lists(st.integers(0, 20).map(float), min_size=1, max_size=25)


@given(samples, samples)
def test_ks_matches_brute_force(x1, x2):
    assert stats.ks_statistic(x1, x2) == pytest.approx(brute_ks(x1, x2), abs=1e-15)


@pytest.mark.filterwarnings("ignore:ks_2samp")
@given(samples, samples)
def test_ks_matches_scipy(x1, x2):
    ref = sps.ks_2samp(x1, x2, method="exact").statistic
    assert stats.ks_statistic(x1, x2) == pytest.approx(ref, abs=1e-12)


@given(samples, samples)
def test_ks_symmetric_and_transform_invariant(x1, x2):
    d = stats.ks_statistic(x1, x2)
    assert stats.ks_statistic(x2, x1) == d
    assert stats.ks_statistic(np.exp(np.asarray(x1) / 5), np.exp(np.asarray(x2) / 5)) == d


@given(samples, samples, st.integers(0, 24))
def test_ks_duplicate_point_bounded_change(x1, x2, idx):
    v = (x1 + x2)[idx % len(x1 + x2)]
    d0 = stats.ks_statistic(x1, x2)
    d1 = stats.ks_statistic(x1 + [v], x2 + [v])
    assert d1 <= d0 + 1 / min(len(x1), len(x2)) + 1e-15
    assert stats.ks_statistic([v], [v]) == 0.0


def test_threshold_examples():
    assert stats.c_alpha(0.05) == pytest.approx(1.3581, abs=5e-5)
    assert stats.ks_threshold(5000, 5000, 0.05) == pytest.approx(0.027162, abs=5e-7)
    # exact formula; rounding c to 1.3581 gives 0.026303
    assert stats.ks_threshold(5334, 5334, 0.05) == pytest.approx(0.0262979, abs=5e-8)
    assert stats.ks_threshold(4, 4, 0.05) == pytest.approx(0.9603228, abs=5e-7)


def test_threshold_override_and_unsupported_alpha():
    assert stats.ks_threshold(5000, 5000, 0.05, c=1.2) == pytest.approx(0.024, abs=1e-12)
    with pytest.raises(UnsupportedAlpha):
        stats.ks_threshold(10, 10, 0.5)


def test_threshold_monotone():
    for alpha in stats.ALPHAS:
        vals = [stats.ks_threshold(n, 100, alpha) for n in (1, 10, 100, 1000)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
    by_alpha = [stats.ks_threshold(100, 100, a) for a in sorted(stats.ALPHAS, reverse=True)]
    assert all(b > a for a, b in zip(by_alpha, by_alpha[1:]))


def test_ks_test_decisions():
    x = make_rng(1).random(5000)
    assert not stats.ks_test(x, x, 0.05).reject
    r = stats.ks_test(x, x + 2.0, 0.05)
    assert r.reject and r.d == 1.0 and (r.n, r.m) == (5000, 5000)


def test_ks_null_calibration_at_5000():
    rejects = 0
    for t in range(1000):
        rng = make_rng(31, t)
        rejects += stats.ks_test(rng.random(5000), rng.random(5000), 0.05).reject
    assert 0.03 <= rejects / 1000 <= 0.07


def test_ks_null_calibration_band():
    alpha, trials = 0.05, 1000
    rejects = 0
    for t in range(trials):
        rng = make_rng(7, t)
        rejects += stats.ks_test(rng.random(500), rng.random(500), alpha).reject
    rate = rejects / trials
    assert abs(rate - alpha) <= 2 * math.sqrt(alpha * (1 - alpha) / trials)


# -- trace-level ------------------------------------------------------------------------


def make_trace(times, cores=1):
    times = np.asarray(times, dtype=float)
    return TimingTrace(times, TraceMeta(P=times.shape[1], cores_per_node=cores))


def test_rejection_rate_identical_ranks():
    col = make_rng(0).random(200) + 1
    tr = make_trace(np.repeat(col[:, None], 6, axis=1))
    assert stats.pairwise_rejection_rate(tr, 0) == 0.0


def test_rejection_rate_half_shifted():
    col = make_rng(3).random(500) + 1.0
    times = np.repeat(col[:, None], 8, axis=1)
    times[:, 4:] += 10.0
    assert stats.pairwise_rejection_rate(make_trace(times), 1) == pytest.approx(4 / 7)
    # 4 of the 8 non-reference ranks are shifted
    times2 = np.repeat(col[:, None], 9, axis=1)
    times2[:, 5:] += 10.0
    assert stats.pairwise_rejection_rate(make_trace(times2), 0) == 0.5


def test_rejection_rate_two_disjoint_ranks():
    times = np.column_stack([np.linspace(1, 2, 50), np.linspace(3, 4, 50)])
    assert stats.pairwise_rejection_rate(make_trace(times), 0) == 1.0


def test_rejection_rate_errors():
    with pytest.raises(RankOutOfRange):
        stats.pairwise_rejection_rate(make_trace([[1.0, 2.0]]), 2)
    with pytest.raises(RankOutOfRange):
        stats.pairwise_rejection_rate(make_trace([[1.0]]), 0)


def test_node_variance():
    assert stats.node_variance(make_trace(np.full((2, 4), 3.0), cores=2), 1, 0) == 0.0
    assert stats.node_variance(make_trace([[1.0, 3.0]], cores=2), 0, 0) == 1.0
    with pytest.raises(NodeOutOfRange):
        stats.node_variance(make_trace([[1.0, 3.0]], cores=2), 1, 0)
    with pytest.raises(IterationOutOfRange):
        stats.node_variance(make_trace([[1.0, 3.0]], cores=2), 0, 1)


def test_lockstep_nodes():
    rng = make_rng(4)
    K, nodes, cores = 20, 8, 4
    offsets = 1.0 + rng.random((K, nodes))
    times = np.repeat(offsets, cores, axis=1)
    tr = make_trace(times, cores=cores)
    for k in range(K):
        assert all(stats.node_variance(tr, n, k) == 0.0 for n in range(nodes))
        assert np.var(stats.node_means(tr, k)) > 0
