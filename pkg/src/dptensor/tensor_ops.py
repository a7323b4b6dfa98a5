"""Dense third-order tensor arithmetic and observation bookkeeping.

Tensors are plain ``numpy.ndarray`` objects: third-order tensors have shape
``(n1, n2, n3)``, matrices shape ``(rows, cols)``, everything float64 and
C-ordered (row-major). Observation sets are integer arrays of shape
``(n_obs, 3)`` holding zero-based ``(i, j, k)`` triples. All functions are
pure; nothing here mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError

__all__ = [
    "hadamard",
    "khatri_rao",
    "mode_n_product",
    "cp_reconstruct",
    "tucker_reconstruct",
    "superdiagonal",
    "project",
    "frobenius_sq",
    "check_observations",
    "all_indices",
    "ObservedTensor",
]


def _as_tensor3(x, name="tensor"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError(f"{name} must be third-order, got ndim={x.ndim}")
    return x


def _as_matrix(m, name="matrix"):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-d, got ndim={m.ndim}")
    return m


def hadamard(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise product of two same-shape third-order tensors."""
    x = _as_tensor3(x, "x")
    y = _as_tensor3(y, "y")
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x * y


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Columnwise Kronecker product.

    Column ``l`` of the result is ``kron(a[:, l], b[:, l])``; for inputs of
    shape ``(I, L)`` and ``(K, L)`` the result has shape ``(I*K, L)``.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    out = a[:, None, :] * b[None, :, :]
    return out.reshape(a.shape[0] * b.shape[0], a.shape[1])


def mode_n_product(x: np.ndarray, u: np.ndarray, mode: int) -> np.ndarray:
    """Contract dimension ``mode`` of ``x`` against the columns of ``u``.

    ``mode`` is 1-based (1, 2, or 3), matching the usual x-times-n notation:
    the result replaces dimension ``mode`` of ``x`` by ``u.shape[0]``, with
    entries ``sum_s x[.., s, ..] * u[j, s]``.
    """
    x = _as_tensor3(x, "x")
    u = _as_matrix(u, "u")
    if mode not in (1, 2, 3):
        raise ShapeError(f"mode must be 1, 2, or 3, got {mode}")
    axis = mode - 1
    if u.shape[1] != x.shape[axis]:
        raise ShapeError(
            f"mode-{mode} size {x.shape[axis]} incompatible with matrix cols {u.shape[1]}"
        )
    moved = np.moveaxis(x, axis, 0)
    flat = moved.reshape(x.shape[axis], -1)
    out = u @ flat
    out = out.reshape((u.shape[0],) + moved.shape[1:])
    return np.moveaxis(out, 0, axis)


def cp_reconstruct(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Assemble the rank-d tensor ``sum_r a[:,r] o b[:,r] o c[:,r]``."""
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    c = _as_matrix(c, "c")
    if not (a.shape[1] == b.shape[1] == c.shape[1]):
        raise ShapeError(
            f"factor ranks differ: {a.shape[1]}, {b.shape[1]}, {c.shape[1]}"
        )
    return np.einsum("ir,jr,kr->ijk", a, b, c)


def tucker_reconstruct(
    g: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> np.ndarray:
    """Assemble ``g x1 a x2 b x3 c`` from a core tensor and three factors."""
    g = _as_tensor3(g, "g")
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    c = _as_matrix(c, "c")
    if g.shape != (a.shape[1], b.shape[1], c.shape[1]):
        raise ShapeError(
            f"core shape {g.shape} does not match factor column counts "
            f"({a.shape[1]}, {b.shape[1]}, {c.shape[1]})"
        )
    return np.einsum("pqt,ip,jq,kt->ijk", g, a, b, c)


def superdiagonal(d: int, value: float = 1.0) -> np.ndarray:
    """A ``(d, d, d)`` tensor with ``value`` on the superdiagonal, zero elsewhere."""
    g = np.zeros((d, d, d))
    rng = np.arange(d)
    g[rng, rng, rng] = value
    return g


def check_observations(indices: np.ndarray, shape, allow_duplicates: bool = False) -> np.ndarray:
    """Validate an ``(n_obs, 3)`` index array against a tensor shape.

    Raises IndexError for out-of-bounds triples (negative included) and
    ValueError for duplicates unless ``allow_duplicates``. Returns the
    indices as a contiguous int64 array.
    """
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if indices.ndim != 2 or indices.shape[1] != 3:
        raise ShapeError(f"observation set must have shape (n, 3), got {indices.shape}")
    dims = np.asarray(shape, dtype=np.int64)
    if indices.size:
        if indices.min() < 0 or (indices >= dims[None, :]).any():
            bad = np.argwhere((indices < 0) | (indices >= dims[None, :]))[0, 0]
            raise IndexError(
                f"observation {tuple(indices[bad])} out of bounds for shape {tuple(shape)}"
            )
        if not allow_duplicates:
            lin = np.ravel_multi_index((indices[:, 0], indices[:, 1], indices[:, 2]), tuple(shape))
            if np.unique(lin).size != lin.size:
                raise ValueError("observation set contains duplicate triples")
    return indices


def all_indices(shape) -> np.ndarray:
    """Every ``(i, j, k)`` triple for a tensor shape, in row-major order."""
    n1, n2, n3 = shape
    grid = np.indices((n1, n2, n3)).reshape(3, -1).T
    return np.ascontiguousarray(grid, dtype=np.int64)


def project(x: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Sampling operator: keep the observed entries of ``x``, zero the rest."""
    x = _as_tensor3(x, "x")
    indices = check_observations(indices, x.shape, allow_duplicates=True)
    out = np.zeros_like(x)
    if indices.size:
        i, j, k = indices[:, 0], indices[:, 1], indices[:, 2]
        out[i, j, k] = x[i, j, k]
    return out


def frobenius_sq(arr: np.ndarray) -> float:
    """Sum of squared entries (any array shape)."""
    arr = np.asarray(arr, dtype=np.float64)
    return float(np.sum(arr * arr))


@dataclass(frozen=True)
class ObservedTensor:
    """Observed entries of a (possibly huge) third-order tensor.

    Stores only the observation triples and their values, so tensors like a
    943 x 1682 x 212 ratings cube never need densifying. Arrays are frozen
    (non-writeable) after construction and safe to share between threads.
    """

    shape: tuple[int, int, int]
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != 3 or any(n <= 0 for n in shape):
            raise ShapeError(f"shape must be three positive dims, got {self.shape}")
        indices = check_observations(self.indices, shape)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != indices.shape[0]:
            raise ShapeError(
                f"values length {values.shape} does not match {indices.shape[0]} observations"
            )
        if values.size and not np.isfinite(values).all():
            raise ValueError("observed values must be finite")
        indices.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dense(cls, x: np.ndarray, indices: np.ndarray) -> "ObservedTensor":
        """Gather the entries of a dense tensor at the given triples."""
        x = _as_tensor3(x, "x")
        indices = check_observations(indices, x.shape)
        vals = x[indices[:, 0], indices[:, 1], indices[:, 2]] if indices.size else np.zeros(0)
        return cls(x.shape, indices, vals)

    @property
    def n_obs(self) -> int:
        return self.indices.shape[0]

    def to_dense(self) -> np.ndarray:
        """Dense tensor with observed values in place and zeros elsewhere."""
        out = np.zeros(self.shape)
        if self.n_obs:
            out[self.indices[:, 0], self.indices[:, 1], self.indices[:, 2]] = self.values
        return out

    def with_values(self, values: np.ndarray) -> "ObservedTensor":
        """Same observation pattern, new values."""
        return ObservedTensor(self.shape, self.indices, values)
