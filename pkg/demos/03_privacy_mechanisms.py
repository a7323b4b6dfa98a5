"""The noise samplers and sensitivity bookkeeping behind every pipeline.

Shows what epsilon buys you: sample spread for the Laplace and vector
exponential mechanisms, the clipping that certifies a sensitivity, and
how the three perturbation points calibrate their scales.
"""

import numpy as np

from dptensor.mechanisms import (
    clip_l2,
    exp_mech_rows,
    exp_mech_vector,
    gradient_sensitivity,
    input_sensitivity,
    laplace_sample,
    output_sensitivity,
)
from dptensor.tensor_ops import ObservedTensor

rng = np.random.default_rng(11)

# Laplace noise with scale sensitivity/epsilon: tighter budgets mean wider
# noise.  Expected |draw| equals the scale.
for eps in (0.1, 1.0, 10.0):
    draws = laplace_sample(1.0 / eps, rng, 20_000)
    print(f"eps={eps:>4}: laplace mean|x| = {np.mean(np.abs(draws)):.3f} "
          f"(scale {1.0 / eps:.1f})")

# The vector exponential mechanism has density proportional to
# exp(-eps * ||v|| / sensitivity): a uniformly random direction with a
# Gamma(d, sensitivity/eps) radius.  In one dimension it IS Laplace.
v = exp_mech_rows(50_000, 3, 1.0, 1.0, rng)
radii = np.linalg.norm(v, axis=1)
print(f"d=3 radii: mean {radii.mean():.3f} (Gamma mean d*scale = 3.0)")

one = exp_mech_vector(1, 1.0, 1.0, rng)
print("d=1 draw is a plain scalar sample:", one.shape)

# Clipping certifies the norm bound the gradient mechanism needs; inside
# the ball vectors pass through untouched.
g = np.array([3.0, 4.0])
print("clip to 1:", clip_l2(g, 1.0), "clip to 10:", clip_l2(g, 10.0))

# Each perturbation point calibrates noise from its own sensitivity:
#  - input: the observed value range (one entry changes by at most that),
#  - gradient: 2m after clipping to norm m,
#  - output: 2 * epochs * lipschitz * lr accumulated over a training run.
idx = np.stack(np.unravel_index(np.arange(1000), (10, 10, 10)), axis=1)
ratings = ObservedTensor((10, 10, 10), idx, rng.uniform(1.0, 5.0, 1000))
s_in = input_sensitivity(ratings)
s_gr = gradient_sensitivity(0.1)
s_out = output_sensitivity(epochs=100, lipschitz=1.0, lr=0.005)
for s in (s_in, s_gr, s_out):
    print(f"{s.kind:>12} sensitivity: {s.value:.4f}")

# At equal epsilon the output mechanism is the loudest here: its bound
# grows with every SGD pass while the others are fixed per-run.
eps = 1.0
for s in (s_in, s_gr, s_out):
    print(f"{s.kind:>12}: noise scale at eps=1 is {s.value / eps:.4f}")
