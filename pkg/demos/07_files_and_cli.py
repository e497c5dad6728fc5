"""Working with activation files and the ``repsim`` command.

Activations are stored as NPY (version 1.0, float32/64, 2-D) or CSV, with
neurons as rows. Every command writes JSON/CSV artifacts carrying the
resolved configuration, so a run can be repeated exactly.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from repsim import fileio

tmp = Path(tempfile.mkdtemp())
rng = np.random.default_rng(0)
x = rng.standard_normal((8, 200))
fileio.save_activations(tmp / "a.npy", x)
fileio.save_activations(tmp / "b.npy", rng.standard_normal((8, 8)) @ x)
np.savetxt(tmp / "c.csv", rng.standard_normal((8, 200)), delimiter=",")

cmd = [sys.executable, "-m", "repsim.cli"]
out = subprocess.run(cmd + ["compare", str(tmp / "a.npy"), str(tmp / "b.npy"), "--output-dir", str(tmp / "cmp")],
                     capture_output=True, text=True, check=True)
print("compare a b ->", out.stdout.strip())

subprocess.run(cmd + ["pairwise", str(tmp / "a.npy"), str(tmp / "b.npy"), str(tmp / "c.csv"),
                      "--cluster", "--output-dir", str(tmp / "pw")], check=True, capture_output=True)
print(json.loads((tmp / "pw" / "clusters.json").read_text())["assignments"])

# a bad file gives exit code 1 and a JSON error record
bad = subprocess.run(cmd + ["compare", str(tmp / "missing.npy"), str(tmp / "a.npy"), "--output-dir", str(tmp / "e")],
                     capture_output=True, text=True)
print("exit", bad.returncode, bad.stderr.strip())
