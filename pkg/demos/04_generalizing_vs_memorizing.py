"""Networks that generalize end up more alike than networks that memorize.

Two groups of small MLPs fit the same inputs. One group sees the true
labels, the other a fixed shuffled labeling. Both drive training loss
close to zero, but pairwise distances within the first group are lower
at the hidden layers. The recipe below is a smaller version of
``repsim train-group --kind gen_mem``.
"""
import tempfile

from repsim.recipes import ExperimentSpec, run_recipe

params = {"group_size": 3, "epochs": 1500}
with tempfile.TemporaryDirectory() as out:
    result = run_recipe(ExperimentSpec("gen_mem", params, seeds=[0], output_dir=out)).result

series = result["series"]
for layer in range(series["gen"].shape[1]):
    print(f"layer {layer}: within-gen {series['gen'][0, layer]:.3f}   "
          f"within-mem {series['mem'][0, layer]:.3f}   between {series['inter'][0, layer]:.3f}")
