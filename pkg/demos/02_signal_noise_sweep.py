"""How the three CCA summaries react as the shared signal grows.

Each pair of 200-dimensional layers shares ``k`` signal dimensions (one is
an orthonormal rotation of the other) and pads the rest with small noise.
The true distance should fall as ``k`` approaches 200. This runs a reduced
sweep (2 seeds, 1000 points); ``repsim snr-sweep`` runs the full one.
"""
from repsim.synthetic import SnrSpec, run_snr_sweep, summarize_sweep

records = run_snr_sweep([20, 50, 100, 150, 199], SnrSpec(datapoints=1000), seeds=[0, 1])
table = {}
for row in summarize_sweep(records):
    table.setdefault(row["k"], {})[row["metric"]] = row["mean"]

print(f"{'k':>4}  {'mean':>6}  {'svcca':>6}  {'pwcca':>6}")
for k, vals in table.items():
    print(f"{k:>4}  {vals['mean_cca']:6.3f}  {vals['svcca']:6.3f}  {vals['pwcca']:6.3f}")

# With noise std 0.1 the 0.99-variance cut discards the noise rows entirely once
# the signal dominates, so SVCCA drops to ~0 for large k.
