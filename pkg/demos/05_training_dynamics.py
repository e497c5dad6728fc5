"""Watching layers settle during training.

Train one tanh MLP and record every hidden layer on a probe set at
log-spaced steps. The distance from each checkpoint to the final one
shows lower layers converging first. Then, for the top layer, split the
CCA directions found between an early and the midpoint checkpoint into
a stable set and an unstable set and follow both through training.
"""
import numpy as np

from repsim.dynamics import CheckpointSeries, convergence_curve, first_crossing, split_stable_unstable, stability_curves
from repsim.toy_nets import MlpSpec, TrainConfig, class_centers, make_dataset, train_mlp

centers = class_centers(20, 4, seed=0)
data = make_dataset(20, 4, 50, 2.5, seed=0)
probe = make_dataset(20, 4, 100, 2.5, seed=1, centers=centers)
checkpoints = train_mlp(MlpSpec((20, 32, 32, 32, 4), "tanh", seed=0), data,
                        TrainConfig(learning_rate=0.1, epochs=300), probe.inputs)
steps = tuple(c.step for c in checkpoints)

for layer in range(3):
    series = CheckpointSeries(steps, tuple(c.per_layer_activations[layer] for c in checkpoints))
    curve = convergence_curve(series)
    print(f"hidden layer {layer + 1}: stays below 0.2 from step {first_crossing(curve, steps, 0.2)}")

top = CheckpointSeries(steps, tuple(c.per_layer_activations[2] for c in checkpoints))
split = split_stable_unstable(top, t_early=steps[2], m=5)
curves = stability_curves(top, split)
print(f"split at steps {split.t_early} vs {split.t_mid}")
print("stable   :", np.round(curves["stable"][::3], 3))
print("unstable :", np.round(curves["unstable"][::3], 3))
