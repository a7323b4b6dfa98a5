"""Running the three private completion pipelines on one problem.

Same data, same backbone, same budget: the only difference is where the
noise enters (before training, inside every update, or on the released
factors).  Prints the accuracy each choice costs.
"""

from dptensor.datasets import SyntheticSpec, gen_synthetic
from dptensor.evaluate import rmse
from dptensor.pipelines import DpConfig, run_pipeline
from dptensor.solvers import FitConfig

spec = SyntheticSpec(dims=(20, 20, 20), rank=3, snr=1.0, missing_ratio=0.5, seed=3)
data = gen_synthetic(spec)
fit = FitConfig(rank=3, lr=0.005, epochs=100, reg_factors=0.01, seed=3)


def held_out(result):
    idx = data.test.indices
    ref = data.truth[idx[:, 0], idx[:, 1], idx[:, 2]]
    return rmse(ref, result.model.entry_values(idx))


# The non-private fit anchors the comparison.
base = run_pipeline(data.train, "cp", fit, DpConfig())
print(f"baseline rmse {held_out(base):.4f}")

configs = {
    # noisy copy of the data, clamped back to the observed range so the
    # optimizer never sees wild values
    "input": DpConfig(mechanism="input", epsilon=1.0, clamp_after_input="observed"),
    # clip each visited gradient row to norm 0.1, add vector noise per visit
    "gradient": DpConfig(mechanism="gradient", epsilon=1.0, clip_m=0.1),
    # train in the clear, then release noisy factor rows
    "output": DpConfig(mechanism="output", epsilon=1.0, lipschitz=1.0),
}
for name, dp in configs.items():
    res = run_pipeline(data.train, "cp", fit, dp)
    info = res.info
    print(f"{name:>8}: rmse {held_out(res):.4f}  "
          f"(sensitivity {info.sensitivity.value:.3f} [{info.sensitivity.kind}], "
          f"noise scale {info.noise_scale:.3f})")

# Shrink the budget and the input pipeline degrades visibly; the clipped
# gradient pipeline is the most graceful of the three at small epsilon.
for eps in (1.0, 0.5, 0.1):
    dp = DpConfig(mechanism="gradient", epsilon=eps, clip_m=0.1)
    res = run_pipeline(data.train, "cp", fit, dp)
    print(f"gradient at eps={eps}: rmse {held_out(res):.4f}")
