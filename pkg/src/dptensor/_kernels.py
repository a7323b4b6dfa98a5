"""JIT-compiled per-entry SGD epoch kernels.

These loops visit one observed entry at a time, which cannot be vectorized,
so they are compiled with numba (plain-Python fallback keeps the package
importable without it, just slow). Both kernels compute the gradients of all
parameter blocks from a snapshot of the model at the start of the visit and
then apply the row updates together.

The c-row gradient is optionally clipped to ``clip_c`` (pass ``inf`` to
disable; dividing by max(1, norm/inf) == 1 is exact) and a caller-supplied
noise row is added after clipping (pass zeros for no noise; adding 0.0 is
exact). This lets the private and non-private training paths share one code
path bit for bit.
"""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def cp_epoch(a, b, c, idx, vals, order, lr, reg, clip_c, noise):
    d = a.shape[1]
    ga = np.empty(d)
    gb = np.empty(d)
    gc = np.empty(d)
    for t in range(order.shape[0]):
        e = order[t]
        i = idx[e, 0]
        j = idx[e, 1]
        k = idx[e, 2]
        xhat = 0.0
        for r in range(d):
            xhat += a[i, r] * b[j, r] * c[k, r]
        res = vals[e] - xhat
        for r in range(d):
            ga[r] = -2.0 * res * (b[j, r] * c[k, r]) + 2.0 * reg * a[i, r]
            gb[r] = -2.0 * res * (a[i, r] * c[k, r]) + 2.0 * reg * b[j, r]
            gc[r] = -2.0 * res * (a[i, r] * b[j, r]) + 2.0 * reg * c[k, r]
        nrm = 0.0
        for r in range(d):
            nrm += gc[r] * gc[r]
        denom = max(1.0, np.sqrt(nrm) / clip_c)
        for r in range(d):
            a[i, r] -= lr * ga[r]
            b[j, r] -= lr * gb[r]
            c[k, r] -= lr * (gc[r] / denom + noise[t, r])


@njit(cache=True)
def tucker_epoch(a, b, c, g, idx, vals, order, lr, reg_factors, reg_core, clip_c, noise, update_core):
    d = a.shape[1]
    ga = np.empty(d)
    gb = np.empty(d)
    gc = np.empty(d)
    gg = np.empty((d, d, d))
    for t in range(order.shape[0]):
        e = order[t]
        i = idx[e, 0]
        j = idx[e, 1]
        k = idx[e, 2]
        xhat = 0.0
        for p in range(d):
            for q in range(d):
                for s in range(d):
                    xhat += g[p, q, s] * a[i, p] * b[j, q] * c[k, s]
        res = vals[e] - xhat
        for p in range(d):
            acc = 0.0
            for q in range(d):
                for s in range(d):
                    acc += g[p, q, s] * b[j, q] * c[k, s]
            ga[p] = -2.0 * res * acc + 2.0 * reg_factors * a[i, p]
        for q in range(d):
            acc = 0.0
            for p in range(d):
                for s in range(d):
                    acc += g[p, q, s] * a[i, p] * c[k, s]
            gb[q] = -2.0 * res * acc + 2.0 * reg_factors * b[j, q]
        for s in range(d):
            acc = 0.0
            for p in range(d):
                for q in range(d):
                    acc += g[p, q, s] * a[i, p] * b[j, q]
            gc[s] = -2.0 * res * acc + 2.0 * reg_factors * c[k, s]
        if update_core:
            for p in range(d):
                for q in range(d):
                    for s in range(d):
                        gg[p, q, s] = (
                            -2.0 * res * (a[i, p] * b[j, q] * c[k, s])
                            + 2.0 * reg_core * g[p, q, s]
                        )
        nrm = 0.0
        for r in range(d):
            nrm += gc[r] * gc[r]
        denom = max(1.0, np.sqrt(nrm) / clip_c)
        for r in range(d):
            a[i, r] -= lr * ga[r]
            b[j, r] -= lr * gb[r]
            c[k, r] -= lr * (gc[r] / denom + noise[t, r])
        if update_core:
            for p in range(d):
                for q in range(d):
                    for s in range(d):
                        g[p, q, s] -= lr * gg[p, q, s]
