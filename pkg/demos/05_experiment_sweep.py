"""A small privacy-accuracy sweep with the experiment harness.

The harness crosses mechanisms and budgets with repetitions, derives a
fresh seed per run from the root seed and grid position, and writes CSV
artifacts plus a standalone plotting script.  This is a scaled-down
version of the benchmark; the full one lives behind
``dptensor.evaluate.benchmark_config`` (50 repetitions, both backbones).
"""

import tempfile
from pathlib import Path

from dptensor.datasets import SyntheticSpec
from dptensor.evaluate import (
    ExperimentConfig,
    emit_report,
    run_experiment,
    summarize,
)
from dptensor.pipelines import DpConfig
from dptensor.solvers import FitConfig

points = tuple(
    DpConfig(mechanism="input", epsilon=e, clamp_after_input="observed")
    for e in (0.2, 0.5, 1.0)
) + tuple(DpConfig(mechanism="gradient", epsilon=e, clip_m=0.1) for e in (0.1, 1.0))

cfg = ExperimentConfig(
    backbone="cp",
    fit=FitConfig(rank=3, lr=0.005, epochs=60, reg_factors=0.01),
    points=points,
    repetitions=5,
    synthetic=SyntheticSpec(dims=(15, 15, 15), rank=3, missing_ratio=0.5),
    seed=42,
)

rows = run_experiment(cfg, progress=lambda r: print(
    f"  {r.mechanism:>8} eps={r.epsilon} rep={r.repetition} "
    f"rmse={'-' if r.rmse is None else round(r.rmse, 4)}"))

print("\nper-point summary (n, mean, population std):")
for backbone, mech, eps, mr, n, mean, std in summarize(rows):
    print(f"  {mech:>8} eps={'-' if eps is None else eps:<5} "
          f"n={n:2d} mean={mean:.4f} std={std:.4f}")

# The report directory is self-contained: results.csv has one row per
# run, summary.csv the aggregates, plot_results.py renders the curves.
outdir = Path(tempfile.mkdtemp(prefix="dptensor_sweep_"))
paths = emit_report(rows, outdir)
for name, p in paths.items():
    print(f"{name}: {p}")
