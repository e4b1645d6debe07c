"""Expected-runtime models for barrier-synchronized and pipelined solvers.

Barrier semantics charge every iteration the expected maximum over the
participating processes; pipelined semantics charge the mean. Stationary
models repeat one iteration distribution ``K`` times, non-stationary models
sum over a per-iteration list of distributions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import integrate, special

from . import dist
from .dist import DistSpec, Empirical, JohnsonSU, Uniform
from .errors import QuadratureFailure, UnsupportedFamily

EPSABS = 1e-12
EPSREL = 1e-9
QUAD_LIMIT = 200
# JohnsonSU support truncated at +-8 standard deviations in normal space
NORMAL_SPAN = 8.0


class Model(str, Enum):
    STATIONARY_BARRIER = "stationary_barrier"
    STATIONARY_PIPELINED = "stationary_pipelined"
    NONSTATIONARY_BARRIER = "nonstationary_barrier"
    NONSTATIONARY_PIPELINED = "nonstationary_pipelined"
    CRAMER_BOUND = "cramer_bound"
    BERTSIMAS_BOUND = "bertsimas_bound"


@dataclass(frozen=True)
class RuntimeEstimate:
    seconds: float
    model: Model
    K: int
    n_eff: int


def _check_count(name, value):
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")


def _quad(func, lo, hi):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _err = integrate.quad(
                func, lo, hi, epsabs=EPSABS, epsrel=EPSREL, limit=QUAD_LIMIT
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc).splitlines()[0]) from exc
    if not math.isfinite(val):
        raise QuadratureFailure("non-finite integral")
    return val


# quantiles of the maximum used as breakpoints; for large n the integrand is a
# narrow spike that a single adaptive pass can step over entirely
_MAX_QUANTILES = (1e-10, 1e-3, 0.5, 0.999)


def _split_quad(func, lo, hi, cuts):
    pts = [lo] + sorted(c for c in cuts if lo < c < hi) + [hi]
    return math.fsum(_quad(func, p, q) for p, q in zip(pts[:-1], pts[1:]))


def _uniform_max_quad(spec: Uniform, n: int) -> float:
    # x = a + s*u on the unit interval: n * x * u^(n-1) du
    cuts = [q ** (1.0 / n) for q in _MAX_QUANTILES]
    return _split_quad(lambda u: (spec.a + spec.s * u) * n * u ** (n - 1), 0.0, 1.0, cuts)


def _johnson_max_quad(spec: JohnsonSU, n: int, zlo: float, zhi: float) -> float:
    # integrate in normal space; x(z) is monotone so F(x) = Phi(z), f dx = phi dz
    def integrand(z):
        return float(dist.johnson_transform(spec, z)) * n * special.ndtr(z) ** (n - 1) * math.exp(
            -0.5 * z * z
        ) / math.sqrt(2.0 * math.pi)

    cuts = [float(special.ndtri(q ** (1.0 / n))) for q in _MAX_QUANTILES]
    return _split_quad(integrand, zlo, zhi, cuts)


def support_bounds(spec: DistSpec) -> tuple[float, float]:
    """Integration bounds used for ``spec`` when no data bounds are given."""
    if isinstance(spec, Uniform):
        return spec.a, spec.b
    if isinstance(spec, JohnsonSU):
        return (
            float(dist.johnson_transform(spec, -NORMAL_SPAN)),
            float(dist.johnson_transform(spec, NORMAL_SPAN)),
        )
    if isinstance(spec, Empirical):
        return spec.sample[0], spec.sample[-1]
    raise UnsupportedFamily(type(spec).__name__)


def uniform_expected_max(a, s, n):
    """Closed form ``a + s*n/(n+1)``; vectorizes over ``a`` and ``s``."""
    return a + s * (n / (n + 1.0))


def expected_max(spec: DistSpec, n: int, *, method: str = "auto", bounds=None) -> float:
    """Expected maximum of ``n`` i.i.d. draws, ``n * int x F(x)^(n-1) f(x) dx``.

    Parameters
    ----------
    spec : DistSpec
    n : int
        Number of independent processes.
    method : {"auto", "quad"}
        ``"auto"`` uses the closed form for Uniform; ``"quad"`` forces
        adaptive quadrature (used to cross-check the closed form).
    bounds : (float, float), optional
        Integrate over ``[lo, hi]`` instead of the distribution support,
        e.g. the range of the data a distribution was fitted to. The
        integral is truncated, not renormalized.
    """
    _check_count("n", n)
    if isinstance(spec, Empirical):
        x = spec.values
        m = x.size
        i = np.arange(1, m + 1, dtype=float)
        weights = (i / m) ** n - ((i - 1) / m) ** n
        return float(np.dot(x, weights))
    if isinstance(spec, Uniform):
        if spec.s == 0:
            return spec.a
        if bounds is None and method == "auto":
            return uniform_expected_max(spec.a, spec.s, n)
        if bounds is None:
            return _uniform_max_quad(spec, n)
        lo, hi = max(bounds[0], spec.a), min(bounds[1], spec.b)
        if hi <= lo:
            return 0.0
        cuts = [spec.a + spec.s * q ** (1.0 / n) for q in _MAX_QUANTILES]
        return _split_quad(lambda x: x * n * ((x - spec.a) / spec.s) ** (n - 1) / spec.s, lo, hi, cuts)
    if isinstance(spec, JohnsonSU):
        if bounds is None:
            zlo, zhi = -NORMAL_SPAN, NORMAL_SPAN
        else:
            zlo, zhi = (spec.a + spec.b * np.arcsinh((np.asarray(bounds, float) - spec.loc) / spec.scale))
            zlo, zhi = float(zlo), float(zhi)
        return _johnson_max_quad(spec, n, zlo, zhi)
    raise UnsupportedFamily(type(spec).__name__)


def stationary_barrier_total(spec: DistSpec, K: int, n: int, *, bounds=None) -> RuntimeEstimate:
    _check_count("K", K)
    return RuntimeEstimate(K * expected_max(spec, n, bounds=bounds), Model.STATIONARY_BARRIER, K, n)


def stationary_pipelined_total(spec: DistSpec, K: int) -> RuntimeEstimate:
    _check_count("K", K)
    return RuntimeEstimate(K * dist.mean(spec), Model.STATIONARY_PIPELINED, K, 1)


def _pairwise_sum(values) -> float:
    # numpy's float64 reduction is pairwise and independent of thread count
    return float(np.sum(np.asarray(values, dtype=float)))


def nonstationary_barrier_total(specs: Sequence[DistSpec], n: int) -> RuntimeEstimate:
    if len(specs) == 0:
        raise ValueError("need at least one iteration distribution")
    _check_count("n", n)
    if all(isinstance(s, Uniform) for s in specs):
        a = np.array([s.a for s in specs])
        s = np.array([s.s for s in specs])
        per_iter = uniform_expected_max(a, s, n)
    else:
        per_iter = []
        for k, spec in enumerate(specs):
            try:
                per_iter.append(expected_max(spec, n))
            except QuadratureFailure as exc:
                raise QuadratureFailure(str(exc), iteration=k) from exc
    return RuntimeEstimate(_pairwise_sum(per_iter), Model.NONSTATIONARY_BARRIER, len(specs), n)


def nonstationary_pipelined_total(specs: Sequence[DistSpec]) -> RuntimeEstimate:
    if len(specs) == 0:
        raise ValueError("need at least one iteration distribution")
    return RuntimeEstimate(
        _pairwise_sum([dist.mean(s) for s in specs]), Model.NONSTATIONARY_PIPELINED, len(specs), 1
    )


def cramer_bound(mu: float, sigma: float, n: int) -> float:
    """Upper bound on the expected maximum of ``n`` i.i.d. variables."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    _check_count("n", n)
    return mu + sigma * (n - 1) / math.sqrt(2 * n - 1)


def bertsimas_bound(mu: float, sigma: float, n: int) -> float:
    """Upper bound on the expected maximum of ``n`` identically distributed, possibly dependent, variables."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    _check_count("n", n)
    return mu + sigma * math.sqrt(n - 1)
