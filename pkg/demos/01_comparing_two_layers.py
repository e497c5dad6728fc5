"""Comparing two layers that share a few directions buried in noise.

Two 30-neuron "layers" see the same 500 inputs. Five directions are shared
(up to an arbitrary linear map); everything else is independent noise.
Plain mean CCA averages over all 30 coefficients, so the noise dilutes it.
Projection weighting looks at how much of each layer the correlated
directions actually account for.
"""
import numpy as np

from repsim import compute_cca
from repsim.similarity import bartlett_cca_distance, mean_cca_distance, pwcca_distance, svcca_distance

rng = np.random.default_rng(0)
n, shared = 500, 5

signal = rng.standard_normal((shared, n))
# 30 neurons each: strong mixed copies of the signal plus weak private noise
layer_a = rng.standard_normal((30, shared)) @ signal + 0.3 * rng.standard_normal((30, n))
layer_b = rng.standard_normal((30, shared)) @ signal + 0.3 * rng.standard_normal((30, n))

r = compute_cca(layer_a, layer_b)
print("top canonical correlations:", np.round(r.rho[:8], 3))
print("tail canonical correlations:", np.round(r.rho[-3:], 3))

print(f"mean CCA distance      {mean_cca_distance(r).distance:.3f}")
print(f"SVCCA distance         {svcca_distance(layer_a, layer_b).distance:.3f}")
pw = pwcca_distance(layer_a, layer_b)
print(f"projection-weighted    {pw.distance:.3f}")
print("weight on the first five directions:", round(float(pw.weights[:shared].sum()), 3))

# Bartlett's sequential test estimates how many coefficients are real.
b = bartlett_cca_distance(layer_a, layer_b)
print(f"significant coefficients: {b.k_significant}  (distance over those: {b.distance:.3f})")

# The weighted distance is a pseudo-distance: swapping arguments can change it.
print("A->B vs B->A:", round(pw.distance, 4), round(pwcca_distance(layer_b, layer_a).distance, 4))
