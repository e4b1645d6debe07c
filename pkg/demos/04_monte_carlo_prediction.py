"""
Monte Carlo runtime prediction
==============================

Predict solver runtime from hyper-distributions of the per-iteration
uniform parameters, and check the predictor against exact evaluation of
synthetic traces.
"""

import numpy as np

from krylovnoise import model, simulate
from krylovnoise.dist import JohnsonSU, Uniform
from krylovnoise.simulate import HyperModel, PerIterationSpecs, SimConfig
from krylovnoise.trace import Method

hyper = HyperModel(
    a_dist=JohnsonSU(a=0.0, b=2.0, loc=4e-4, scale=2e-5),
    s_dist=JohnsonSU(a=0.0, b=2.0, loc=1.5e-4, scale=2e-5),
)
K, pe = 5000, 128
for mode in Method:
    res = simulate.mc_predict(SimConfig(K, pe, hyper, mode=mode, seed=0), replicates=32)
    print(f"{mode.value:<9} {res.total_seconds:.4f} s  (std over replicates {res.std:.2e})")

# Replicate spread shrinks like 1/sqrt(K).
for k in (100, 400, 1600):
    res = simulate.replicate_stats(SimConfig(k, pe, hyper, seed=1), replicates=64)
    print(f"K={k:5d}  relative spread {res.std / res.total_seconds:.2e}")

# Point-mass hyper-distributions reduce to the closed form.
point = HyperModel(Uniform(4e-4, 0.0), Uniform(1.5e-4, 0.0))
mc = simulate.mc_predict(SimConfig(K, pe, point), replicates=4).total_seconds
exact = K * (4e-4 + 1.5e-4 * pe / (pe + 1))
print(f"\npoint mass: mc {mc:.10f}  exact {exact:.10f}")

# Per-iteration specs: synthetic traces evaluated exactly vs the analytic model.
rng = np.random.default_rng(2)
specs = [Uniform(a, s) for a, s in zip(rng.uniform(4e-4, 6e-4, 500), rng.uniform(1e-4, 2e-4, 500))]
mc = simulate.mc_predict(SimConfig(500, 64, PerIterationSpecs(specs), seed=2), replicates=50)
print(f"synthetic traces {mc.total_seconds:.5f} s, model {model.nonstationary_barrier_total(specs, 64).seconds:.5f} s")
