"""Tour of the core tensor objects: models, products, and observations.

Everything downstream (training, privacy, experiments) is built from the
pieces shown here, so this is the place to start reading.
"""

import numpy as np

from dptensor.solvers import CpModel, TuckerModel
from dptensor.tensor_ops import (
    ObservedTensor,
    all_indices,
    cp_reconstruct,
    frobenius_sq,
    khatri_rao,
    mode_n_product,
    project,
    superdiagonal,
    tucker_reconstruct,
)

rng = np.random.default_rng(7)

# A rank-2 CP model of a 4 x 5 x 6 tensor: three factor matrices, one
# column per component.  The reconstruction sums rank-one outer products.
a = rng.random((4, 2))
b = rng.random((5, 2))
c = rng.random((6, 2))
x = cp_reconstruct(a, b, c)
print("cp reconstruction shape:", x.shape)

# The same thing entry by entry: x[i,j,k] = sum_r a[i,r] b[j,r] c[k,r].
i, j, k = 1, 3, 2
by_hand = float(np.sum(a[i] * b[j] * c[k]))
print(f"x[{i},{j},{k}] = {x[i, j, k]:.6f}, by hand {by_hand:.6f}")

# Tucker generalizes CP with a dense core that mixes all column triples.
core = rng.random((2, 2, 2))
y = tucker_reconstruct(core, a, b, c)
print("tucker reconstruction shape:", y.shape)

# With a superdiagonal core of ones, Tucker collapses back to CP exactly.
collapsed = tucker_reconstruct(superdiagonal(2), a, b, c)
print("superdiagonal core reproduces cp:", np.allclose(collapsed, x))

# The Khatri-Rao product is the workhorse identity behind unfolded views:
# flattening the last two modes of a CP tensor gives A (B kr C)^T.
unfolded = x.reshape(4, 30)
kr = a @ khatri_rao(b, c).T
print("mode-1 unfolding identity holds:", np.allclose(unfolded, kr))

# Mode-n products contract one axis against a matrix; applying the three
# factors to the core is yet another route to the same reconstruction.
z = mode_n_product(mode_n_product(mode_n_product(core, a, 1), b, 2), c, 3)
print("chained mode products match:", np.allclose(z, y))

# Completion never sees the whole tensor.  ObservedTensor keeps only index
# triples and values; project masks a dense array down to a sparse view.
keep = np.argwhere(rng.random(x.shape) < 0.3)
obs = ObservedTensor.from_dense(x, keep)
print(f"observed {obs.n_obs} of {x.size} entries")
masked = project(x, obs.indices)
print("projection keeps Frobenius energy of the kept entries:",
      np.isclose(frobenius_sq(masked), float(np.sum(obs.values ** 2))))

# Models carry the same entry evaluation used during training, so held-out
# predictions never densify anything.
model = CpModel(a=a, b=b, c=c)
idx = all_indices((4, 5, 6))[:5]
print("first five model entries:", np.round(model.entry_values(idx), 4))
tm = TuckerModel(a=a, b=b, c=c, core=core)
print("tucker entry matches dense:",
      np.isclose(tm.entry_values(idx[:1])[0], y[0, 0, 0]))
