"""Model and dataset files, and the command-line equivalents.

Fits a small model, round-trips it through the binary model format and
the text entry format, and shows the matching ``dptensor`` invocations.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from dptensor.datasets import SyntheticSpec, gen_synthetic
from dptensor.modelio import load_entries, load_model, save_entries, save_model
from dptensor.pipelines import DpConfig, predict, run_pipeline
from dptensor.solvers import FitConfig

workdir = Path(tempfile.mkdtemp(prefix="dptensor_files_"))
data = gen_synthetic(SyntheticSpec(dims=(8, 9, 10), rank=2, missing_ratio=0.3, seed=5))

# Observed entries serialize as "i j k value" lines with a shape header;
# .npy arrays with NaN holes load through the same function.
train_path = workdir / "train.txt"
save_entries(data.train, train_path)
back = load_entries(train_path)
print(f"round-tripped {back.n_obs} entries, shape {back.shape}")
print("values preserved exactly:", np.array_equal(back.values, data.train.values))

# Models carry their backbone tag and factor shapes in a small binary
# header, so loading needs no side information.
fit = FitConfig(rank=2, lr=0.01, epochs=50, reg_factors=0.01, seed=5)
result = run_pipeline(back, "cp", fit, DpConfig(mechanism="output", epsilon=2.0, lipschitz=1.0))
model_path = workdir / "model.bin"
save_model(result.model, model_path)
loaded = load_model(model_path)
print(f"model file is {model_path.stat().st_size} bytes")
print(f"prediction at (1, 2, 3): {predict(loaded, 1, 2, 3):.4f}")

# The same flow from the shell.  fit trains and saves, predict evaluates
# single entries, and the sweep subcommands drive the harness; run
# ``dptensor --help`` for everything.
cli_model = workdir / "cli_model.bin"
for cmd in (
    f"fit --dataset {train_path} --backbone cp --rank 2 --lr 0.01 --epochs 50"
    f" --reg-factors 0.01 --seed 5 --mechanism output --epsilon 2.0"
    f" --lipschitz 1.0 --out {cli_model}",
    f"predict --model {cli_model} --index 1,2,3",
):
    print(f"\n$ dptensor {cmd}")
    out = subprocess.run(
        [sys.executable, "-m", "dptensor", *cmd.split()],
        capture_output=True, text=True, check=True,
    )
    print(out.stdout.strip())
