"""Distribution kernel: Uniform, Johnson S_U and Empirical iteration-time models.

Specs are small frozen dataclasses; the operations are module-level functions
that dispatch on the distribution class, so each spec is a plain value that can be shared,
hashed and serialized to a one-line ``family;key=value;...`` record.

Johnson S_U is parameterized as

    x = loc + scale * sinh((z - a) / b),    z ~ N(0, 1)

which is the inverse of ``z = a + b * asinh((x - loc) / scale)``; the density
is ``b / (scale * sqrt(y**2 + 1)) * phi(a + b * asinh(y))`` with
``y = (x - loc) / scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy import optimize, special

from .errors import (
    DegenerateSample,
    EmptySample,
    FitDiverged,
    InvalidSpec,
    PointMassDensity,
    UnsupportedFamily,
)
from .rng import make_rng

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Uniform:
    """Uniform on ``[a, a + s]``; ``s == 0`` is a point mass at ``a``."""

    a: float
    s: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.s)):
            raise InvalidSpec("uniform parameters must be finite")
        if self.s < 0:
            raise InvalidSpec(f"uniform span must be >= 0, got {self.s}")

    @property
    def b(self) -> float:
        return self.a + self.s


@dataclass(frozen=True)
class JohnsonSU:
    a: float
    b: float
    loc: float
    scale: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a, self.b, self.loc, self.scale)):
            raise InvalidSpec("johnsonsu parameters must be finite")
        if self.b <= 0 or self.scale <= 0:
            raise InvalidSpec("johnsonsu requires b > 0 and scale > 0")


@dataclass(frozen=True)
class Empirical:
    sample: tuple

    def __post_init__(self):
        if len(self.sample) == 0:
            raise EmptySample("empirical distribution needs at least one point")
        arr = np.asarray(self.sample, dtype=float)
        if np.any(np.diff(arr) < 0):
            raise InvalidSpec("empirical sample must be sorted ascending")

    @classmethod
    def from_sample(cls, sample) -> "Empirical":
        return cls(tuple(float(v) for v in np.sort(np.asarray(sample, dtype=float))))

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.sample, dtype=float)


DistSpec = Union[Uniform, JohnsonSU, Empirical]


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def pdf(spec: DistSpec, x):
    """Density at ``x`` (scalar or array)."""
    xs = np.asarray(x, dtype=float)
    if isinstance(spec, Uniform):
        if spec.s == 0:
            if np.any(xs == spec.a):
                raise PointMassDensity(f"density undefined at point mass a={spec.a}")
            return _scalar_or_array(x, np.zeros_like(xs))
        inside = (xs >= spec.a) & (xs <= spec.b)
        return _scalar_or_array(x, np.where(inside, 1.0 / spec.s, 0.0))
    if isinstance(spec, JohnsonSU):
        return _scalar_or_array(x, np.exp(_johnson_logpdf(xs, spec.a, spec.b, spec.loc, spec.scale)))
    raise UnsupportedFamily(f"no density defined for {type(spec).__name__}")


def cdf(spec: DistSpec, x):
    xs = np.asarray(x, dtype=float)
    if isinstance(spec, Uniform):
        if spec.s == 0:
            out = np.where(xs >= spec.a, 1.0, 0.0)
        else:
            out = np.clip((xs - spec.a) / spec.s, 0.0, 1.0)
    elif isinstance(spec, JohnsonSU):
        out = special.ndtr(spec.a + spec.b * np.arcsinh((xs - spec.loc) / spec.scale))
    elif isinstance(spec, Empirical):
        vals = spec.values
        out = np.searchsorted(vals, xs, side="right") / vals.size
    else:
        raise UnsupportedFamily(type(spec).__name__)
    return _scalar_or_array(x, out)


def ppf(spec: DistSpec, q):
    """Quantile function (left-continuous inverse of the CDF)."""
    qs = np.asarray(q, dtype=float)
    if isinstance(spec, Uniform):
        out = spec.a + spec.s * qs
    elif isinstance(spec, JohnsonSU):
        out = johnson_transform(spec, special.ndtri(qs))
    elif isinstance(spec, Empirical):
        vals = spec.values
        idx = np.clip(np.ceil(qs * vals.size).astype(int) - 1, 0, vals.size - 1)
        out = vals[idx]
    else:
        raise UnsupportedFamily(type(spec).__name__)
    return _scalar_or_array(q, out)


def johnson_transform(spec: JohnsonSU, z):
    """Map standard-normal values to the Johnson S_U variable."""
    return spec.loc + spec.scale * np.sinh((np.asarray(z, dtype=float) - spec.a) / spec.b)


def mean(spec: DistSpec) -> float:
    if isinstance(spec, Uniform):
        return spec.a + spec.s / 2.0
    if isinstance(spec, JohnsonSU):
        return spec.loc - spec.scale * math.exp(0.5 / spec.b**2) * math.sinh(spec.a / spec.b)
    if isinstance(spec, Empirical):
        return float(np.mean(spec.values))
    raise UnsupportedFamily(type(spec).__name__)


def var(spec: DistSpec) -> float:
    """Population variance."""
    if isinstance(spec, Uniform):
        return spec.s**2 / 12.0
    if isinstance(spec, JohnsonSU):
        w = math.exp(1.0 / spec.b**2)
        return 0.5 * spec.scale**2 * (w - 1.0) * (w * math.cosh(2.0 * spec.a / spec.b) + 1.0)
    if isinstance(spec, Empirical):
        return float(np.var(spec.values))
    raise UnsupportedFamily(type(spec).__name__)


def sample(spec: DistSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. values; deterministic for a given generator state."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(spec, Uniform):
        return spec.a + spec.s * rng.random(n)
    if isinstance(spec, JohnsonSU):
        return johnson_transform(spec, rng.standard_normal(n))
    if isinstance(spec, Empirical):
        return rng.choice(spec.values, size=n, replace=True)
    raise UnsupportedFamily(type(spec).__name__)


# -- fitting -----------------------------------------------------------------


def fit_uniform(sample) -> Uniform:
    """Maximum-likelihood uniform: minimum and span of the data."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise EmptySample("cannot fit a uniform to an empty sample")
    lo = float(x.min())
    return Uniform(lo, float(x.max()) - lo)


def _johnson_logpdf(x, a, b, loc, scale):
    y = (x - loc) / scale
    z = a + b * np.arcsinh(y)
    return np.log(b) - np.log(scale) - _LOG_SQRT_2PI - 0.5 * np.log1p(y * y) - 0.5 * z * z


def loglik(spec: DistSpec, sample) -> float:
    """Sum of log densities of ``sample`` under ``spec``."""
    x = np.asarray(sample, dtype=float)
    if isinstance(spec, JohnsonSU):
        return float(np.sum(_johnson_logpdf(x, spec.a, spec.b, spec.loc, spec.scale)))
    if isinstance(spec, Uniform):
        if spec.s == 0:
            raise PointMassDensity("log-likelihood undefined for a point mass")
        if np.any((x < spec.a) | (x > spec.b)):
            return -math.inf
        return -x.size * math.log(spec.s)
    raise UnsupportedFamily(type(spec).__name__)


class JohnsonSUFit(NamedTuple):
    spec: JohnsonSU
    loglik: float
    evaluations: int


_NM_OPTIONS = {"xatol": 1e-8, "fatol": 1e-10, "maxiter": 20000, "maxfev": 40000}
# scale of N(0,1) interquartile range mapped through sinh with a=0, b=1
_IQR_SINH = 2.0 * math.sinh(special.ndtri(0.75))


def fit_johnson_su(sample, seed: int = 0, restarts: int = 3) -> JohnsonSUFit:
    """Maximum-likelihood Johnson S_U fit by Nelder-Mead.

    The search runs on data standardized by median and IQR, over
    ``(a, log b, loc, log scale)`` so both positive parameters stay positive.
    One start comes from quantile matching; ``restarts`` more are seeded
    perturbations of it. The best converged optimum wins.

    Raises
    ------
    DegenerateSample
        Fewer than 8 points or fewer than 4 distinct values.
    FitDiverged
        No start met the tolerance within the evaluation budget.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 8 or np.unique(x).size < 4:
        raise DegenerateSample(
            f"johnsonsu fit needs >= 8 points with >= 4 distinct values "
            f"(got {x.size} points, {np.unique(x).size} distinct)"
        )
    center = float(np.median(x))
    q25, q75 = np.percentile(x, [25, 75])
    spread = float(q75 - q25)
    if spread <= 0:
        spread = float(np.std(x))
    y = (x - center) / spread

    def objective(theta):
        a, logb, loc, logscale = theta
        if abs(logb) > 30 or abs(logscale) > 60:
            return math.inf
        val = -np.mean(_johnson_logpdf(y, a, math.exp(logb), loc, math.exp(logscale)))
        return val if math.isfinite(val) else math.inf

    start = np.array([0.0, 0.0, 0.0, math.log(1.0 / _IQR_SINH)])
    rng = make_rng(seed)
    starts = [start] + [start + rng.normal(0.0, 0.5, size=4) for _ in range(restarts)]

    best = None
    nfev = 0
    for x0 in starts:
        res = optimize.minimize(objective, x0, method="Nelder-Mead", options=_NM_OPTIONS)
        nfev += res.nfev
        if res.success and math.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise FitDiverged(f"Nelder-Mead exhausted its budget from all {len(starts)} starts")

    # restart from the optimum once; a simplex can stall on a ridge
    res = optimize.minimize(objective, best.x, method="Nelder-Mead", options=_NM_OPTIONS)
    nfev += res.nfev
    if res.success and res.fun <= best.fun:
        best = res

    a, logb, loc, logscale = best.x
    spec = JohnsonSU(
        a=float(a),
        b=float(math.exp(logb)),
        loc=center + spread * float(loc),
        scale=spread * float(math.exp(logscale)),
    )
    return JohnsonSUFit(spec, loglik(spec, x), nfev)


def _histogram(sample, bins):
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise EmptySample("empty sample")
    density, edges = np.histogram(x, bins=bins, range=(x.min(), x.max()), density=True)
    return density, edges


def histogram(sample, bins=None):
    """Density-normalized equal-width histogram over ``[min, max]``.

    ``bins=None`` picks the Freedman-Diaconis count.
    """
    x = np.asarray(sample, dtype=float)
    if bins is None:
        bins = fd_bins(x)
    return _histogram(x, bins)


def fd_bins(sample) -> int:
    x = np.asarray(sample, dtype=float)
    if x.size < 2 or x.max() == x.min():
        return 2
    return max(2, len(np.histogram_bin_edges(x, bins="fd")) - 1)


def goodness_sse(spec: DistSpec, sample, bins: int) -> float:
    """Sum of squared differences between histogram density and ``pdf`` at bin centers."""
    if isinstance(spec, Empirical):
        raise UnsupportedFamily("goodness of fit needs a density")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    density, edges = _histogram(sample, bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return float(np.sum((density - pdf(spec, centers)) ** 2))


# -- serialization -------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def format_spec(spec: DistSpec) -> str:
    """One-line ``family;key=value;...`` record with round-trip precision."""
    if isinstance(spec, Uniform):
        return f"uniform;a={_fmt(spec.a)};s={_fmt(spec.s)}"
    if isinstance(spec, JohnsonSU):
        return (
            f"johnsonsu;a={_fmt(spec.a)};b={_fmt(spec.b)};"
            f"loc={_fmt(spec.loc)};scale={_fmt(spec.scale)}"
        )
    if isinstance(spec, Empirical):
        return "empirical;sample=" + ",".join(_fmt(v) for v in spec.sample)
    raise UnsupportedFamily(type(spec).__name__)


_FIELDS = {"uniform": ("a", "s"), "johnsonsu": ("a", "b", "loc", "scale")}


def parse_spec(text: str) -> DistSpec:
    parts = [p.strip() for p in text.strip().split(";") if p.strip()]
    if not parts:
        raise InvalidSpec("empty distribution record")
    family = parts[0].lower()
    kv = {}
    for p in parts[1:]:
        key, sep, value = p.partition("=")
        if not sep:
            raise InvalidSpec(f"expected key=value, got {p!r}")
        kv[key.strip()] = value.strip()
    if family == "empirical":
        try:
            vals = [float(v) for v in kv["sample"].split(",")]
        except (KeyError, ValueError) as exc:
            raise InvalidSpec(f"bad empirical record: {text!r}") from exc
        return Empirical.from_sample(vals)
    if family not in _FIELDS:
        raise UnsupportedFamily(f"unknown family {parts[0]!r}")
    fields = _FIELDS[family]
    if set(kv) != set(fields):
        raise InvalidSpec(f"{family} needs exactly {', '.join(fields)}; got {', '.join(sorted(kv))}")
    try:
        values = {k: float(kv[k]) for k in fields}
    except ValueError as exc:
        raise InvalidSpec(f"non-numeric parameter in {text!r}") from exc
    return Uniform(**values) if family == "uniform" else JohnsonSU(**values)
