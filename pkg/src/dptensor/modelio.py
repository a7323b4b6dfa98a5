"""Model and dataset file formats.

Model binary layout, all integers and floats little-endian:

    bytes 0-7    magic b"DPTNSR01"
    byte  8      backbone tag: b"C" (CP) or b"T" (Tucker)
    bytes 9-20   dims n1, n2, n3 as three uint32
    bytes 21-24  rank d as uint32
    then         A (n1 x d), B (n2 x d), C (n3 x d) as float64, row-major
    then         Tucker only: core (d x d x d) as float64, row-major

Dataset files for one-off fits are either a dense .npy tensor with NaN
marking missing entries, or plain text with one "i j k value" record per
line (0-based indices, whitespace-separated, # comments allowed).  Text
files may carry an optional "# shape: n1 n2 n3" header; without it the
shape is inferred as max index + 1 per mode.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .exceptions import DataError
from .solvers import CpModel, TuckerModel
from .tensor_ops import ObservedTensor

__all__ = ["MAGIC", "save_model", "load_model", "load_entries", "save_entries"]

MAGIC = b"DPTNSR01"
_TAG_CP = b"C"
_TAG_TUCKER = b"T"


def save_model(model, path) -> Path:
    """Write a model to the flat binary format; returns the path."""
    path = Path(path)
    if isinstance(model, CpModel):
        tag, extra = _TAG_CP, ()
    elif isinstance(model, TuckerModel):
        tag, extra = _TAG_TUCKER, (model.core,)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    n1, n2, n3 = model.dims
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(tag)
        fh.write(np.array([n1, n2, n3, model.rank], dtype="<u4").tobytes())
        for block in (model.a, model.b, model.c, *extra):
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
    return path


def _read_exact(fh, n: int, path, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise DataError(f"{path}: truncated model file while reading {what}")
    return buf


def load_model(path):
    """Read a model written by :func:`save_model`."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(MAGIC), path, "magic")
        if magic != MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}; not a model file")
        tag = _read_exact(fh, 1, path, "backbone tag")
        if tag not in (_TAG_CP, _TAG_TUCKER):
            raise DataError(f"{path}: unknown backbone tag {tag!r}")
        header = np.frombuffer(_read_exact(fh, 16, path, "header"), dtype="<u4")
        n1, n2, n3, rank = (int(v) for v in header)
        if min(n1, n2, n3, rank) < 1:
            raise DataError(f"{path}: non-positive dims/rank {tuple(header)}")
        shapes = [(n1, rank), (n2, rank), (n3, rank)]
        if tag == _TAG_TUCKER:
            shapes.append((rank, rank, rank))
        blocks = []
        for shape in shapes:
            count = int(np.prod(shape))
            raw = _read_exact(fh, 8 * count, path, f"block {shape}")
            blocks.append(np.frombuffer(raw, dtype="<f8").reshape(shape).copy())
        if fh.read(1):
            raise DataError(f"{path}: trailing bytes after model data")
    if tag == _TAG_CP:
        return CpModel(*blocks)
    return TuckerModel(*blocks)


def _entries_from_dense(x: np.ndarray) -> ObservedTensor:
    if x.ndim != 3:
        raise DataError(f"dense dataset must be a third-order tensor, got shape {x.shape}")
    mask = ~np.isnan(x)
    indices = np.argwhere(mask)
    if indices.shape[0] == 0:
        raise DataError("dense dataset has no non-NaN entries")
    return ObservedTensor(x.shape, indices, x[mask])


def _parse_shape_header(line: str, path, lineno: int):
    parts = line.split(":", 1)[1].split()
    if len(parts) != 3:
        raise DataError(f"{path}:{lineno}: shape header needs three dims")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-integer dim in shape header") from None


def load_entries(path, shape: tuple[int, int, int] | None = None) -> ObservedTensor:
    """Load an observation set from a .npy tensor or an "i j k value" file."""
    path = Path(path)
    if path.suffix == ".npy":
        return _entries_from_dense(np.load(path))
    triples, values = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line.startswith("#"):
                if shape is None and line[1:].lstrip().startswith("shape"):
                    shape = _parse_shape_header(line, path, lineno)
                continue
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise DataError(
                    f"{path}:{lineno}: expected 'i j k value', got {len(parts)} fields"
                )
            try:
                triples.append([int(parts[0]), int(parts[1]), int(parts[2])])
                values.append(float(parts[3]))
            except ValueError:
                raise DataError(f"{path}:{lineno}: malformed record {line!r}") from None
    if not triples:
        raise DataError(f"{path}: no observations found")
    indices = np.array(triples, dtype=np.int64)
    if shape is None:
        shape = tuple(int(m) + 1 for m in indices.max(axis=0))
    try:
        return ObservedTensor(shape, indices, np.array(values))
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: {exc}") from None


def save_entries(data: ObservedTensor, path) -> Path:
    """Write an observation set in the text format load_entries reads."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# shape: {data.shape[0]} {data.shape[1]} {data.shape[2]}\n")
        for (i, j, k), v in zip(data.indices, data.values):
            fh.write(f"{i} {j} {k} {float(v)!r}\n")
    return path
