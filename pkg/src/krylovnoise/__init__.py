"""Stochastic runtime models for barrier-synchronized and pipelined Krylov solvers."""

from .dist import Empirical, JohnsonSU, Uniform
from .model import (
    RuntimeEstimate,
    bertsimas_bound,
    cramer_bound,
    expected_max,
    nonstationary_barrier_total,
    nonstationary_pipelined_total,
    stationary_barrier_total,
    stationary_pipelined_total,
)
from .rng import make_rng
from .simulate import HyperModel, PerIterationSpecs, SimConfig, eval_barrier, eval_pipeline, mc_predict
from .trace import CycleLayout, Method, TimingTrace, TraceMeta, read_trace, write_trace

__version__ = "0.1.0"
