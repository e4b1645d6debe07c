"""
Expected maxima, runtime models and bounds
==========================================

How the expected slowest process grows with the process count, and how
barrier and pipelined totals compare for stationary and drifting
iteration times.
"""

import numpy as np

from krylovnoise import dist, model
from krylovnoise.dist import JohnsonSU, Uniform

u = Uniform(a=4e-4, s=8e-4)
j = JohnsonSU(a=-0.6, b=3.3, loc=4e-4, scale=1e-5)

# E[max of n] as n grows: the uniform saturates at a + s, Johnson S_U keeps creeping.
print("    n   E[max] uniform   E[max] johnsonsu")
for n in (1, 2, 16, 128, 1024, 8192):
    print(f"{n:5d}   {model.expected_max(u, n):.6e}     {model.expected_max(j, n):.6e}")

# Totals over K iterations on 128 effectively independent nodes.
K, pe = 5000, 128
print()
print(f"stationary barrier   {model.stationary_barrier_total(u, K, pe).seconds:.4f} s")
print(f"stationary pipelined {model.stationary_pipelined_total(u, K).seconds:.4f} s")

# a_k drifts upward threefold over the run.
drift = [Uniform(a, 8e-4) for a in np.linspace(4e-4, 1.2e-3, K)]
print(f"drifting barrier     {model.nonstationary_barrier_total(drift, pe).seconds:.4f} s")
print(f"drifting pipelined   {model.nonstationary_pipelined_total(drift).seconds:.4f} s")

# Distribution-free bounds need only the mean and std of one iteration.
mu, sigma = dist.mean(j), np.sqrt(dist.var(j))
print()
for n in (2, 128, 8192):
    print(f"n={n:5d}  E[max]={model.expected_max(j, n):.5e}  "
          f"cramer={model.cramer_bound(mu, sigma, n):.5e}  "
          f"bertsimas={model.bertsimas_bound(mu, sigma, n):.5e}")
