"""Grouping representations by hierarchical clustering of a distance matrix.

Twelve layers come from three underlying "networks" (random invertible
maps of three base representations plus a little noise). Pairwise
weighted CCA distances are clustered with average linkage, and the number
of clusters is picked at the largest jump in merge height.
"""
import numpy as np

from repsim.analysis import agglomerative_cluster, pairwise_distance_matrix

rng = np.random.default_rng(4)
bases = [rng.standard_normal((6, 300)) for _ in range(3)]
layers, labels = [], []
for g, base in enumerate(bases):
    for i in range(4):
        mix = rng.standard_normal((10, 6))
        layers.append(mix @ base + 0.2 * rng.standard_normal((10, 300)))
        labels.append(f"net{g}_{i}")

dm = pairwise_distance_matrix(layers, "pwcca", labels=labels)
print("largest asymmetry |d(a,b) - d(b,a)|:", round(dm.asymmetry, 4))
clusters = agglomerative_cluster(dm)
print("chosen number of clusters:", clusters.chosen_k)
for label in labels:
    print(f"  {label} -> cluster {clusters.assignments[label]}")
