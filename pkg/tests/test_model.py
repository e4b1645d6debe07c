import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krylovnoise import dist, model
from krylovnoise.dist import Empirical, JohnsonSU, Uniform
from krylovnoise.errors import QuadratureFailure
from krylovnoise.model import (
    Model,
    bertsimas_bound,
    cramer_bound,
    expected_max,
    nonstationary_barrier_total,
    nonstationary_pipelined_total,
    stationary_barrier_total,
    stationary_pipelined_total,
)
from krylovnoise.rng import make_rng


def mc_max(spec, n, reps, seed):
    """Monte Carlo oracle: mean and standard error of the max of ``n`` draws."""
    draws = dist.sample(spec, make_rng(seed), reps * n).reshape(reps, n).max(axis=1)
    return draws.mean(), draws.std(ddof=1) / math.sqrt(reps)


# -- expected_max -----------------------------------------------------------------------


def test_expected_max_uniform_closed_form():
    assert expected_max(Uniform(0, 1), 64) == pytest.approx(0.9846154, abs=5e-8)


@pytest.mark.parametrize("n", [1, 2, 64, 128, 8192])
def test_uniform_quadrature_agrees_with_closed_form(n):
    spec = Uniform(0.3, 1.7)
    assert expected_max(spec, n, method="quad") == pytest.approx(expected_max(spec, n), abs=1e-8)


@pytest.mark.parametrize("spec", [Uniform(0.2, 0.5), JohnsonSU(-0.6, 3.3, 4e-4, 1e-5), JohnsonSU(1.1, 1.4, 2.0, 0.3),
                                  Empirical.from_sample([1, 2, 6])])
def test_expected_max_of_one_is_mean(spec):
    assert expected_max(spec, 1) == pytest.approx(dist.mean(spec), rel=1e-9)


def test_point_mass_expected_max():
    assert expected_max(Uniform(2, 0), 128) == 2.0


def test_empirical_expected_max_matches_enumeration():
    values = [1.0, 2.0, 6.0, 2.5]
    for n in (1, 2, 3, 4):
        brute = np.mean([max(t) for t in itertools.product(values, repeat=n)])
        assert expected_max(Empirical.from_sample(values), n) == pytest.approx(brute, rel=1e-13)


def test_expected_max_uniform_with_data_bounds_matches_support():
    spec = Uniform(1.0, 2.0)
    assert expected_max(spec, 16, bounds=(1.0, 3.0)) == pytest.approx(expected_max(spec, 16), rel=1e-10)


def test_johnson_data_bounds_truncate():
    spec = JohnsonSU(0.2, 2.0, 1.0, 0.1)
    lo, hi = model.support_bounds(spec)
    full = expected_max(spec, 8)
    assert expected_max(spec, 8, bounds=(lo, hi)) == pytest.approx(full, rel=1e-10)
    # dropping the top tail removes mass, the integral is not renormalized
    assert expected_max(spec, 8, bounds=(lo, dist.ppf(spec, 0.9))) < full


def random_specs(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        if i % 2:
            out.append(Uniform(rng.uniform(0, 1), rng.uniform(0.01, 2)))
        else:
            out.append(JohnsonSU(rng.uniform(-1.5, 1.5), rng.uniform(1.0, 4.0), rng.uniform(0, 1), rng.uniform(0.01, 0.5)))
    return out


@pytest.mark.parametrize("spec", random_specs(42, 20))
def test_expected_max_matches_monte_carlo(spec):
    for n, seed in zip((2, 16, 128), (1, 2, 3)):
        mean, se = mc_max(spec, n, 100_000, seed)
        assert abs(expected_max(spec, n) - mean) <= 4 * se


@pytest.mark.parametrize("spec", random_specs(5, 10))
def test_expected_max_monotone_in_n(spec):
    values = [expected_max(spec, n) for n in (1, 2, 3, 8, 64, 512, 4096)]
    assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))
    assert values[0] == pytest.approx(dist.mean(spec), rel=1e-9)


def test_quadrature_failure_is_reported():
    with pytest.raises(QuadratureFailure):
        model._quad(lambda x: 1.0 / x**2, 0.0, 1.0)


def test_quadrature_failure_names_the_iteration(monkeypatch):
    def broken(spec, n, **kw):
        if spec.a == 2.0:
            raise QuadratureFailure("no convergence")
        return 0.0

    monkeypatch.setattr(model, "expected_max", broken)
    specs = [JohnsonSU(0, 1, 0, 1), JohnsonSU(2.0, 1, 0, 1)]
    with pytest.raises(QuadratureFailure) as info:
        nonstationary_barrier_total(specs, 4)
    assert info.value.iteration == 1


# -- totals -----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "spec, K, n, expected",
    [
        (Uniform(0, 1), 5000, 1, 2500.0),
        (Uniform(0, 1), 100, 64, 98.46153846153847),
        (Uniform(3.97e-4, 0), 5000, 128, 1.985),
    ],
)
def test_stationary_barrier_total(spec, K, n, expected):
    est = stationary_barrier_total(spec, K, n)
    assert est.seconds == pytest.approx(expected, rel=1e-12)
    assert est.model is Model.STATIONARY_BARRIER
    assert (est.K, est.n_eff) == (K, n)


@pytest.mark.parametrize(
    "spec, K, expected",
    [
        (Uniform(0, 1), 100, 50.0),
        (JohnsonSU(0, 1, 5e-4, 1e-5), 1000, 0.5),
        (Uniform(1, 0), 7, 7.0),
    ],
)
def test_stationary_pipelined_total(spec, K, expected):
    assert stationary_pipelined_total(spec, K).seconds == pytest.approx(expected, rel=1e-12)


def test_nonstationary_barrier_examples():
    est = nonstationary_barrier_total([Uniform(0, 1), Uniform(10, 1)], 2)
    assert est.seconds == pytest.approx(2 / 3 + 10 + 2 / 3, rel=1e-14)
    assert est.seconds == pytest.approx(11.3333, abs=5e-5)
    assert nonstationary_barrier_total([Uniform(1, 0), Uniform(2, 0), Uniform(3, 0)], 999).seconds == 6.0


def test_nonstationary_pipelined_examples():
    assert nonstationary_pipelined_total([Uniform(1, 0), Uniform(2, 0), Uniform(3, 0)]).seconds == 6.0
    assert nonstationary_pipelined_total([Uniform(0.4e-3, 0.8e-3)] * 5000).seconds == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("spec", [Uniform(0.1, 0.3), JohnsonSU(-0.6, 3.3, 4e-4, 1e-5)])
def test_nonstationary_reduces_to_stationary(spec):
    K, n = 37, 16
    nb = nonstationary_barrier_total([spec] * K, n).seconds
    assert nb == pytest.approx(stationary_barrier_total(spec, K, n).seconds, rel=1e-12)
    assert nb == pytest.approx(K * expected_max(spec, n), rel=1e-12)
    np_ = nonstationary_pipelined_total([spec] * K).seconds
    assert np_ == pytest.approx(stationary_pipelined_total(spec, K).seconds, rel=1e-12)


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 5)), min_size=1, max_size=30), st.integers(1, 10_000))
def test_pipelined_never_exceeds_barrier(params, n):
    specs = [Uniform(a, s) for a, s in params]
    assert nonstationary_pipelined_total(specs).seconds <= nonstationary_barrier_total(specs, n).seconds * (1 + 1e-12)


# -- bounds -----------------------------------------------------------------------------


def test_bounds_collapse_at_n1():
    assert cramer_bound(2.5, 1.0, 1) == 2.5
    assert bertsimas_bound(2.5, 1.0, 1) == 2.5


def test_bound_values():
    assert cramer_bound(0, 1, 5) == pytest.approx(4 / 3, rel=1e-15)
    assert bertsimas_bound(0, 1, 5) == 2.0


def test_cramer_excess_scales_with_sigma():
    mu = 2.217 / 5000
    for n in (2, 128, 8192):
        e1 = cramer_bound(mu, 1e-5, n) - mu
        e2 = cramer_bound(mu, 2e-5, n) - mu
        assert e2 == pytest.approx(2 * e1, rel=1e-12)


@given(st.floats(-1e3, 1e3), st.floats(1e-6, 1e3), st.integers(2, 10**6))
def test_bertsimas_dominates_cramer(mu, sigma, n):
    assert bertsimas_bound(mu, sigma, n) > cramer_bound(mu, sigma, n)


def test_bounds_hold_for_sampled_maxima():
    for i, spec in enumerate(random_specs(9, 12)):
        n = 3 + 7 * i
        draws = dist.sample(spec, make_rng(100 + i), 20_000 * n).reshape(-1, n)
        flat = draws.ravel()
        mu, sigma = flat.mean(), flat.std(ddof=1)
        emp = draws.max(axis=1).mean()
        assert emp <= cramer_bound(mu, sigma, n)
        assert cramer_bound(mu, sigma, n) <= bertsimas_bound(mu, sigma, n) + 1e-12


def test_invalid_inputs():
    with pytest.raises(ValueError):
        expected_max(Uniform(0, 1), 0)
    with pytest.raises(ValueError):
        stationary_barrier_total(Uniform(0, 1), 0, 4)
    with pytest.raises(ValueError):
        cramer_bound(0, -1, 3)
    with pytest.raises(ValueError):
        nonstationary_pipelined_total([])
