"""A rotation RNN changes every neuron's output yet keeps the same representation.

The hidden state is multiplied by a random rotation each step. Cosine
distance to the final state stays large throughout, while CCA-based
distance is zero: a rotation is an invertible linear map. Adding a
sigmoid term (alpha > 0) breaks that, and the weighted distance then
decays smoothly toward the final state.
"""
import numpy as np

from repsim.synthetic import ToyRnnSpec, simulate_blended_rnn, simulate_rotation_rnn, timestep_distance_profile

spec = ToyRnnSpec(hidden_dim=32, steps=20, runs=400, seed=3)
states = simulate_rotation_rnn(spec)
print("rotation, pwcca :", np.round(timestep_distance_profile(states, "pwcca")[::4], 4))
print("rotation, cosine:", np.round(timestep_distance_profile(states, "cosine")[::4], 3))

blended = simulate_blended_rnn(ToyRnnSpec(hidden_dim=32, steps=20, runs=400, blend_alpha=100.0, seed=3))
print("alpha=100, pwcca :", np.round(timestep_distance_profile(blended, "pwcca")[::4], 3))
print("alpha=100, cosine:", np.round(timestep_distance_profile(blended, "cosine")[::4], 3))
