"""Synthetic low-rank data and the MovieLens-100K ratings cube.

Synthetic tensors follow a fixed recipe: draw a random low-rank truth,
min-max scale it to [0, 1], add Gaussian noise at a prescribed
signal-to-noise ratio, hide a fraction of entries, and split the rest into
train and test observation sets.  SNR here is the power ratio
|scaled truth|_F^2 / E|noise|_F^2, so snr=1 means the noise carries as much
energy as the signal.

MovieLens-100K is loaded straight from its tab-separated rating files into
a (users, items, days) observation cube; the cube is never densified.
Ratings can be standardized by bi-scaling: each day-slice matrix gets
per-row and per-column shift/scale parameters fitted by alternating
updates, driving observed row and column means to zero and variances to
one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, DataError
from .mechanisms import spawn_rngs
from .tensor_ops import (
    ObservedTensor,
    all_indices,
    cp_reconstruct,
    frobenius_sq,
    tucker_reconstruct,
)

__all__ = [
    "SyntheticSpec",
    "SyntheticData",
    "gen_synthetic",
    "min_max_scale",
    "invert_min_max",
    "ML100K_SHAPE",
    "SECONDS_PER_DAY",
    "RatingDataset",
    "read_ml100k_file",
    "load_ml100k",
    "write_ml100k_standin",
    "BiscaleParams",
    "biscale_matrix",
    "biscale",
    "apply_biscale",
    "invert_biscale",
]

# users x items x day bins of the 100K release
ML100K_SHAPE = (943, 1682, 212)
SECONDS_PER_DAY = 86400


# ---------------------------------------------------------------------------
# synthetic generator


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic completion problem."""

    dims: tuple[int, int, int] = (20, 20, 20)
    rank: int = 3
    snr: float = 1.0
    missing_ratio: float = 0.5
    test_fraction: float = 0.2
    backbone: str = "cp"
    seed: int = 0

    def __post_init__(self):
        if len(self.dims) != 3 or any(n < 1 for n in self.dims):
            raise ConfigError(f"dims must be three positive ints, got {self.dims}")
        if not 1 <= self.rank <= min(self.dims):
            # orthonormal truth factors need at least rank rows per mode
            raise ConfigError(
                f"rank must lie in [1, min(dims)] = [1, {min(self.dims)}], got {self.rank}"
            )
        if not self.snr > 0:
            raise ConfigError(f"snr must be > 0, got {self.snr}")
        if not 0.0 <= self.missing_ratio < 1.0:
            raise ConfigError(
                f"missing_ratio must lie in [0, 1), got {self.missing_ratio}"
            )
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(
                f"test_fraction must lie in (0, 1), got {self.test_fraction}"
            )
        if self.backbone not in ("cp", "tucker"):
            raise ConfigError(f"backbone must be 'cp' or 'tucker', got {self.backbone!r}")


@dataclass(frozen=True)
class SyntheticData:
    """Ground truth plus the derived train/test observation sets.

    ``truth`` is the scaled clean tensor, ``noisy`` the same tensor after
    additive Gaussian noise; train and test values come from ``noisy``.
    RMSE for synthetic studies is conventionally measured against ``truth``
    at the test indices.
    """

    truth: np.ndarray
    noisy: np.ndarray
    train: ObservedTensor
    test: ObservedTensor
    scale: tuple[float, float]


def min_max_scale(
    x: np.ndarray, indices: np.ndarray | None = None
) -> tuple[np.ndarray, tuple[float, float]]:
    """Affinely map x onto [0, 1]; returns (scaled, (lo, hi)).

    With ``indices`` given, lo and hi come from those observed entries only
    (the map is still applied to the whole array).  Constant data has no
    usable scale and raises DataError.
    """
    if indices is None:
        lo = float(x.min())
        hi = float(x.max())
    else:
        obs = x[indices[:, 0], indices[:, 1], indices[:, 2]]
        lo = float(obs.min())
        hi = float(obs.max())
    if hi == lo:
        raise DataError("cannot min-max scale constant data (max == min)")
    return (x - lo) / (hi - lo), (lo, hi)


def invert_min_max(x: np.ndarray, scale: tuple[float, float]) -> np.ndarray:
    lo, hi = scale
    return x * (hi - lo) + lo


def _cp_truth(rng, dims, rank):
    factors = []
    for n in dims:
        f = rng.standard_normal((n, rank))
        f /= np.linalg.norm(f, axis=0, keepdims=True)
        factors.append(f)
    return cp_reconstruct(*factors)


def _tucker_truth(rng, dims, rank):
    factors = []
    for n in dims:
        q, _ = np.linalg.qr(rng.standard_normal((n, rank)))
        factors.append(q)
    core = rng.standard_normal((rank, rank, rank))
    return tucker_reconstruct(core, *factors)


def gen_synthetic(spec: SyntheticSpec) -> SyntheticData:
    """Generate truth, noise, mask, and split from a spec, deterministically.

    The seed feeds four independent streams (truth, noise, mask, split), so
    e.g. two specs differing only in snr share the same mask and split.
    """
    truth_rng, noise_rng, mask_rng, split_rng = spawn_rngs(spec.seed, 4)
    dims = spec.dims
    if spec.backbone == "cp":
        raw = _cp_truth(truth_rng, dims, spec.rank)
    else:
        raw = _tucker_truth(truth_rng, dims, spec.rank)
    truth, scale = min_max_scale(raw)

    n_total = truth.size
    sigma = math.sqrt(frobenius_sq(truth) / (spec.snr * n_total))
    noisy = truth + noise_rng.normal(0.0, sigma, size=dims)

    n_obs = n_total - int(round(spec.missing_ratio * n_total))
    perm = mask_rng.permutation(n_total)
    obs_idx = all_indices(dims)[perm[:n_obs]]

    n_test = int(round(spec.test_fraction * n_obs))
    if n_test < 1 or n_obs - n_test < 1:
        raise ConfigError(
            f"split leaves train={n_obs - n_test} test={n_test} observations"
        )
    split = split_rng.permutation(n_obs)
    test_sel = np.sort(split[:n_test])
    train_sel = np.sort(split[n_test:])
    vals = noisy[obs_idx[:, 0], obs_idx[:, 1], obs_idx[:, 2]]
    train = ObservedTensor(dims, obs_idx[train_sel], vals[train_sel])
    test = ObservedTensor(dims, obs_idx[test_sel], vals[test_sel])
    return SyntheticData(truth=truth, noisy=noisy, train=train, test=test, scale=scale)


# ---------------------------------------------------------------------------
# MovieLens-100K


@dataclass(frozen=True)
class RatingDataset:
    """One canonical train/test partition of the ratings cube.

    Values are raw ratings in {1..5}; ``t_origin`` is the earliest unix
    timestamp over base and test, the zero point of the day binning.
    """

    train: ObservedTensor
    test: ObservedTensor
    split: str
    t_origin: int


def _parse_ml100k_line(line: str, lineno: int, path):
    parts = line.split("\t")
    if len(parts) != 4:
        raise DataError(
            f"{path}:{lineno}: expected 4 tab-separated fields, got {len(parts)}"
        )
    try:
        user, item, rating, ts = (int(p) for p in parts)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-integer field in {line!r}") from None
    if user < 1 or item < 1:
        raise DataError(f"{path}:{lineno}: user/item ids are 1-based, got {user}, {item}")
    if not 1 <= rating <= 5:
        raise DataError(f"{path}:{lineno}: rating {rating} outside [1, 5]")
    return user, item, rating, ts


def read_ml100k_file(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse one rating file into (user-item pairs, ratings, timestamps).

    Pairs keep their 1-based ids; lines must be "user \\t item \\t rating
    \\t timestamp".  Malformed lines raise DataError naming file and line.
    """
    path = Path(path)
    users, items, ratings, stamps = [], [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            u, i, r, t = _parse_ml100k_line(line, lineno, path)
            users.append(u)
            items.append(i)
            ratings.append(r)
            stamps.append(t)
    if not users:
        raise DataError(f"{path}: no rating records found")
    pairs = np.array([users, items], dtype=np.int64).T
    return pairs, np.array(ratings, dtype=np.float64), np.array(stamps, dtype=np.int64)


def _build_cube(pairs, ratings, stamps, shape, t_origin, path) -> ObservedTensor:
    n_users, n_items, n_days = shape
    out_of_range = (pairs[:, 0] > n_users) | (pairs[:, 1] > n_items)
    if out_of_range.any():
        bad = int(np.argmax(out_of_range))
        raise DataError(
            f"{path}: record {bad + 1} has user/item {tuple(pairs[bad])} "
            f"outside shape {shape[:2]}"
        )
    days = np.clip((stamps - t_origin) // SECONDS_PER_DAY, 0, n_days - 1)
    indices = np.column_stack([pairs[:, 0] - 1, pairs[:, 1] - 1, days])
    try:
        return ObservedTensor(shape, indices, ratings)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def load_ml100k(
    root, split: str = "ua", *, shape: tuple[int, int, int] = ML100K_SHAPE
) -> RatingDataset:
    """Load the ua or ub partition from a MovieLens-100K directory.

    Reads ``<root>/<split>.base`` and ``<root>/<split>.test``.  Timestamps
    map to day bins floor((t - t_min) / 86400) clamped to the last bin,
    with t_min taken over base and test together so the two sides share a
    time axis.
    """
    if split not in ("ua", "ub"):
        raise ConfigError(f"split must be 'ua' or 'ub', got {split!r}")
    root = Path(root)
    base_path = root / f"{split}.base"
    test_path = root / f"{split}.test"
    for p in (base_path, test_path):
        if not p.is_file():
            raise DataError(f"missing rating file {p}")
    base = read_ml100k_file(base_path)
    test = read_ml100k_file(test_path)
    t_origin = int(min(base[2].min(), test[2].min()))
    return RatingDataset(
        train=_build_cube(*base, shape, t_origin, base_path),
        test=_build_cube(*test, shape, t_origin, test_path),
        split=split,
        t_origin=t_origin,
    )


def write_ml100k_standin(
    root,
    *,
    n_users: int = ML100K_SHAPE[0],
    n_items: int = ML100K_SHAPE[1],
    n_records: int = 100_000,
    n_test_per_user: int = 10,
    n_days: int = ML100K_SHAPE[2],
    seed: int = 0,
) -> Path:
    """Write a synthetic ratings corpus in the MovieLens-100K file layout.

    Produces ``ua.base``/``ua.test`` and ``ub.base``/``ub.test`` under
    ``root`` with the usual tab-separated ``user item rating timestamp``
    records.  Every user gets at least ``n_test_per_user + 10`` ratings and
    each split holds out ``n_test_per_user`` per user, so the record counts
    match the real corpus layout.  Ratings are integers in 1..5 with a mild
    user bias; timestamps spread uniformly over ``n_days`` days.  Intended
    for offline pipeline tests and demos, not for accuracy claims.
    """
    root = Path(root)
    min_per = n_test_per_user + 10
    if n_records < n_users * min_per:
        raise ConfigError(
            f"n_records={n_records} too small for {n_users} users at "
            f"{min_per} ratings each"
        )
    if min_per > n_items:
        raise ConfigError("n_items too small for the per-user minimum")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x4D4C]))

    # skewed per-user counts, floor min_per, capped by the item catalogue
    counts = np.full(n_users, min_per, dtype=np.int64)
    counts += rng.multinomial(
        n_records - min_per * n_users, rng.dirichlet(np.full(n_users, 0.3))
    )
    while True:
        excess = int(np.maximum(counts - n_items, 0).sum())
        if excess == 0:
            break
        counts = np.minimum(counts, n_items)
        spare = np.flatnonzero(counts < n_items)
        counts[spare] += rng.multinomial(
            excess, np.full(len(spare), 1.0 / len(spare))
        )

    t0 = 874_000_000  # arbitrary epoch offset, only day differences matter
    span = n_days * SECONDS_PER_DAY
    users, items, ratings, stamps = [], [], [], []
    for u in range(n_users):
        k = int(counts[u])
        its = rng.choice(n_items, size=k, replace=False) + 1
        its.sort()
        bias = rng.normal(3.5, 0.5)
        vals = np.clip(np.rint(rng.normal(bias, 1.1, size=k)), 1, 5)
        users.append(np.full(k, u + 1, dtype=np.int64))
        items.append(its.astype(np.int64))
        ratings.append(vals.astype(np.int64))
        stamps.append(t0 + rng.integers(0, span, size=k))
    users = np.concatenate(users)
    items = np.concatenate(items)
    ratings = np.concatenate(ratings)
    stamps = np.concatenate(stamps)

    root.mkdir(parents=True, exist_ok=True)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    for split in ("ua", "ub"):
        in_test = np.zeros(len(users), dtype=bool)
        for u in range(n_users):
            lo, hi = offsets[u], offsets[u + 1]
            pick = rng.choice(hi - lo, size=n_test_per_user, replace=False)
            in_test[lo + np.sort(pick)] = True
        for name, mask in ((f"{split}.base", ~in_test), (f"{split}.test", in_test)):
            with open(root / name, "w") as fh:
                for u, i, r, t in zip(
                    users[mask], items[mask], ratings[mask], stamps[mask]
                ):
                    fh.write(f"{u}\t{i}\t{r}\t{t}\n")
    return root


# ---------------------------------------------------------------------------
# bi-scaling


@dataclass(frozen=True)
class BiscaleParams:
    """Per-slice row/column standardization: y = (x - a[k,i] - b[k,j]) / (s[k,i] g[k,j]).

    Index k is the slice (day), i the row (user), j the column (item).
    Unfitted rows, columns, and whole slices keep identity parameters.
    """

    row_shift: np.ndarray
    col_shift: np.ndarray
    row_scale: np.ndarray
    col_scale: np.ndarray


# residual rms below this is treated as constant: the scale stays 1 so
# unseen entries of the row/column are not divided by a vanishing number
_DEGENERATE_SCALE = 1e-3


def biscale_matrix(
    rows: np.ndarray,
    cols: np.ndarray,
    values: np.ndarray,
    n_rows: int,
    n_cols: int,
    *,
    tol: float = 1e-4,
    max_sweeps: int = 50,
):
    """Fit shift/scale pairs so observed rows and columns are standardized.

    Alternates closed-form updates: the row shift is the 1/scale-weighted
    mean of the column-adjusted values (zeroing the transformed row mean),
    the row scale the rms of the shifted column-scaled residuals (making
    the transformed row variance one); then the same for columns.  Rows or
    columns with fewer than two observations, or with near-constant
    residuals, keep identity parameters.  Stops when no parameter moves by
    more than tol, or after max_sweeps.

    Returns (scaled values, row_shift, col_shift, row_scale, col_scale).
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    row_n = np.bincount(rows, minlength=n_rows)
    col_n = np.bincount(cols, minlength=n_cols)
    row_ok = row_n >= 2
    col_ok = col_n >= 2

    a = np.zeros(n_rows)
    b = np.zeros(n_cols)
    s = np.ones(n_rows)
    g = np.ones(n_cols)
    for _ in range(max_sweeps):
        a_old, b_old, s_old, g_old = a, b, s, g

        gj = g[cols]
        num = np.bincount(rows, weights=(values - b[cols]) / gj, minlength=n_rows)
        den = np.bincount(rows, weights=1.0 / gj, minlength=n_rows)
        a = np.where(row_ok, num / np.maximum(den, 1e-300), 0.0)
        resid = (values - a[rows] - b[cols]) / gj
        var = np.bincount(rows, weights=resid * resid, minlength=n_rows)
        rms = np.sqrt(var / np.maximum(row_n, 1))
        s = np.where(row_ok & (rms >= _DEGENERATE_SCALE), rms, 1.0)

        si = s[rows]
        num = np.bincount(cols, weights=(values - a[rows]) / si, minlength=n_cols)
        den = np.bincount(cols, weights=1.0 / si, minlength=n_cols)
        b = np.where(col_ok, num / np.maximum(den, 1e-300), 0.0)
        resid = (values - a[rows] - b[cols]) / si
        var = np.bincount(cols, weights=resid * resid, minlength=n_cols)
        rms = np.sqrt(var / np.maximum(col_n, 1))
        g = np.where(col_ok & (rms >= _DEGENERATE_SCALE), rms, 1.0)

        delta = max(
            np.abs(a - a_old).max(),
            np.abs(b - b_old).max(),
            np.abs(s - s_old).max(),
            np.abs(g - g_old).max(),
        )
        if delta < tol:
            break
    scaled = (values - a[rows] - b[cols]) / (s[rows] * g[cols])
    return scaled, a, b, s, g


def biscale(
    train: ObservedTensor, *, tol: float = 1e-4, max_sweeps: int = 50
) -> tuple[ObservedTensor, BiscaleParams]:
    """Standardize each day-slice of a ratings cube on its observed entries.

    Slices run along the third mode; within slice k the (user, item)
    matrix of that day's observations is bi-scaled independently.  The
    fitted parameters transform unseen entries of the same cube (see
    :func:`apply_biscale`), e.g. a held-out test set.
    """
    n_rows, n_cols, n_slices = train.shape
    a = np.zeros((n_slices, n_rows))
    b = np.zeros((n_slices, n_cols))
    s = np.ones((n_slices, n_rows))
    g = np.ones((n_slices, n_cols))
    scaled = np.empty(train.n_obs)
    slice_of = train.indices[:, 2]
    for k in np.unique(slice_of):
        sel = slice_of == k
        scaled[sel], a[k], b[k], s[k], g[k] = biscale_matrix(
            train.indices[sel, 0],
            train.indices[sel, 1],
            train.values[sel],
            n_rows,
            n_cols,
            tol=tol,
            max_sweeps=max_sweeps,
        )
    params = BiscaleParams(a, b, s, g)
    return train.with_values(scaled), params


def _biscale_terms(indices: np.ndarray, params: BiscaleParams):
    i, j, k = indices[:, 0], indices[:, 1], indices[:, 2]
    shift = params.row_shift[k, i] + params.col_shift[k, j]
    scale = params.row_scale[k, i] * params.col_scale[k, j]
    return shift, scale


def apply_biscale(data: ObservedTensor, params: BiscaleParams) -> ObservedTensor:
    """Transform a cube's values with previously fitted parameters."""
    shift, scale = _biscale_terms(data.indices, params)
    return data.with_values((data.values - shift) / scale)


def invert_biscale(
    values: np.ndarray, indices: np.ndarray, params: BiscaleParams
) -> np.ndarray:
    """Map bi-scaled values (e.g. predictions) back to rating units."""
    shift, scale = _biscale_terms(np.asarray(indices, dtype=np.int64), params)
    return np.asarray(values, dtype=np.float64) * scale + shift
