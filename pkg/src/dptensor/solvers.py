"""Per-entry SGD solvers for regularized CP and Tucker completion.

The training objective is the squared residual on the observed entries plus
Frobenius penalties on the factor matrices (and, for Tucker, on the core):

    sum_obs (x_ijk - xhat_ijk)^2 + reg_factors * (|A|_F^2 + |B|_F^2 + |C|_F^2)
                                 [+ reg_core * |G|_F^2]

Each epoch visits every observed entry once, in shuffled order, and updates
the three touched factor rows (and the core) with a constant learning rate.
Fits are deterministic: the config seed spawns one child generator for
initialization and one for shuffling, so identical inputs give bit-identical
models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exceptions import ConfigError, DivergenceError, ShapeError
from .mechanisms import spawn_rngs
from .tensor_ops import ObservedTensor, cp_reconstruct, frobenius_sq, tucker_reconstruct

__all__ = [
    "FitConfig",
    "CpModel",
    "TuckerModel",
    "cp_objective",
    "tucker_objective",
    "cp_entry_gradients",
    "tucker_entry_gradients",
    "fit_cp",
    "fit_tucker",
]

# Training aborts once the objective exceeds this or stops being finite.
DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameters for one SGD fit.

    ``reg_factors`` is the factor-matrix penalty (the single regularizer for
    CP); ``reg_core`` is the core penalty and must stay 0 for CP fits.
    """

    rank: int
    lr: float
    epochs: int
    reg_factors: float = 0.0
    reg_core: float = 0.0
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.rank < 1:
            raise ConfigError(f"rank must be >= 1, got {self.rank}")
        if not (self.lr > 0 and math.isfinite(self.lr)):
            raise ConfigError(f"learning rate must be finite and > 0, got {self.lr}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.reg_factors < 0 or self.reg_core < 0:
            raise ConfigError("regularization weights must be >= 0")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class CpModel:
    """Three factor matrices of shared rank d."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if not (self.a.shape[1] == self.b.shape[1] == self.c.shape[1]):
            raise ShapeError("factor matrices must share a column count")

    @property
    def rank(self) -> int:
        return self.a.shape[1]

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.a.shape[0], self.b.shape[0], self.c.shape[0])

    def entry_values(self, indices: np.ndarray) -> np.ndarray:
        """Reconstruction values at the given (i, j, k) triples."""
        rows = self.a[indices[:, 0]] * self.b[indices[:, 1]] * self.c[indices[:, 2]]
        return rows.sum(axis=1)

    def reconstruct(self) -> np.ndarray:
        return cp_reconstruct(self.a, self.b, self.c)


@dataclass(frozen=True)
class TuckerModel:
    """Three factor matrices plus a cubic core tensor."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    core: np.ndarray

    def __post_init__(self):
        d = self.a.shape[1]
        if not (self.b.shape[1] == self.c.shape[1] == d):
            raise ShapeError("factor matrices must share a column count")
        if self.core.shape != (d, d, d):
            raise ShapeError(
                f"core shape {self.core.shape} does not match rank {d}"
            )

    @property
    def rank(self) -> int:
        return self.a.shape[1]

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.a.shape[0], self.b.shape[0], self.c.shape[0])

    def entry_values(self, indices: np.ndarray) -> np.ndarray:
        return np.einsum(
            "pqt,ep,eq,et->e",
            self.core,
            self.a[indices[:, 0]],
            self.b[indices[:, 1]],
            self.c[indices[:, 2]],
        )

    def reconstruct(self) -> np.ndarray:
        return tucker_reconstruct(self.core, self.a, self.b, self.c)


def cp_objective(data: ObservedTensor, model: CpModel, reg_factors: float) -> float:
    """Regularized squared error of a CP model on the observed entries."""
    resid = data.values - model.entry_values(data.indices)
    penalty = frobenius_sq(model.a) + frobenius_sq(model.b) + frobenius_sq(model.c)
    return float(resid @ resid + reg_factors * penalty)


def tucker_objective(
    data: ObservedTensor, model: TuckerModel, reg_factors: float, reg_core: float
) -> float:
    """Regularized squared error of a Tucker model on the observed entries."""
    resid = data.values - model.entry_values(data.indices)
    penalty = frobenius_sq(model.a) + frobenius_sq(model.b) + frobenius_sq(model.c)
    return float(resid @ resid + reg_factors * penalty + reg_core * frobenius_sq(model.core))


def cp_entry_gradients(value, i, j, k, model: CpModel, reg_factors):
    """Gradients of the single-entry loss w.r.t. the three touched rows.

    The loss for one observed entry is the squared residual plus the factor
    penalty restricted to the visited rows; with residual e the a-row
    gradient is ``-2 e * (b_j * c_k) + 2 reg * a_i`` and symmetrically for
    b and c.
    """
    ar, br, cr = model.a[i], model.b[j], model.c[k]
    res = value - float(np.sum(ar * br * cr))
    ga = -2.0 * res * (br * cr) + 2.0 * reg_factors * ar
    gb = -2.0 * res * (ar * cr) + 2.0 * reg_factors * br
    gc = -2.0 * res * (ar * br) + 2.0 * reg_factors * cr
    return ga, gb, gc


def tucker_entry_gradients(value, i, j, k, model: TuckerModel, reg_factors, reg_core):
    """Gradients of the single-entry Tucker loss for rows and core."""
    g = model.core
    ar, br, cr = model.a[i], model.b[j], model.c[k]
    contract_a = np.einsum("pqt,q,t->p", g, br, cr)
    contract_b = np.einsum("pqt,p,t->q", g, ar, cr)
    contract_c = np.einsum("pqt,p,q->t", g, ar, br)
    res = value - float(ar @ contract_a)
    ga = -2.0 * res * contract_a + 2.0 * reg_factors * ar
    gb = -2.0 * res * contract_b + 2.0 * reg_factors * br
    gc = -2.0 * res * contract_c + 2.0 * reg_factors * cr
    gcore = -2.0 * res * np.einsum("p,q,t->pqt", ar, br, cr) + 2.0 * reg_core * g
    return ga, gb, gc, gcore


def _init_factors(rng, dims, rank):
    # entries uniform on [0, 1/sqrt(d)] keep initial reconstructions O(1)
    hi = 1.0 / math.sqrt(rank)
    return [rng.uniform(0.0, hi, size=(n, rank)) for n in dims]


def _check_data(data: ObservedTensor):
    if data.n_obs == 0:
        raise ConfigError("cannot fit an empty observation set")


def _epoch_order(shuffle_rng, n_obs, shuffle):
    if shuffle:
        return shuffle_rng.permutation(n_obs)
    return np.arange(n_obs, dtype=np.int64)


def _guard_objective(obj, epoch):
    if not math.isfinite(obj) or obj > DIVERGENCE_LIMIT:
        raise DivergenceError(
            f"objective {obj!r} diverged at epoch {epoch + 1}", epoch=epoch + 1
        )


def fit_cp(
    data: ObservedTensor,
    cfg: FitConfig,
    *,
    clip_c: float = math.inf,
    noise_fn=None,
) -> tuple[CpModel, np.ndarray]:
    """Fit a CP model by per-entry SGD; returns (model, per-epoch objectives).

    ``clip_c`` bounds the l2 norm of the c-row gradient before the update and
    ``noise_fn(epoch, n_obs, rank)`` supplies a per-visit noise matrix added
    to the clipped c-row gradient; both default to no-ops and exist so the
    private training pipelines can share this exact code path.
    """
    if cfg.reg_core != 0.0:
        raise ConfigError("reg_core must be 0 for CP fits")
    _check_data(data)
    init_rng, shuffle_rng = spawn_rngs(cfg.seed, 2)
    a, b, c = _init_factors(init_rng, data.shape, cfg.rank)
    idx = data.indices
    vals = data.values
    zero_noise = np.zeros((data.n_obs, cfg.rank))
    objectives = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = _epoch_order(shuffle_rng, data.n_obs, cfg.shuffle)
        noise = zero_noise if noise_fn is None else noise_fn(epoch, data.n_obs, cfg.rank)
        _kernels.cp_epoch(a, b, c, idx, vals, order, cfg.lr, cfg.reg_factors, clip_c, noise)
        model = CpModel(a, b, c)
        # overflow here is the divergence signal, not a numerical accident;
        # the guard turns the resulting inf/nan into DivergenceError
        with np.errstate(over="ignore", invalid="ignore"):
            objectives[epoch] = cp_objective(data, model, cfg.reg_factors)
        _guard_objective(objectives[epoch], epoch)
    return CpModel(a.copy(), b.copy(), c.copy()), objectives


def fit_tucker(
    data: ObservedTensor,
    cfg: FitConfig,
    *,
    clip_c: float = math.inf,
    noise_fn=None,
    core_init: np.ndarray | None = None,
    freeze_core: bool = False,
) -> tuple[TuckerModel, np.ndarray]:
    """Fit a Tucker model by per-entry SGD; returns (model, per-epoch objectives).

    ``core_init`` overrides the random core initialization and ``freeze_core``
    skips core updates; together they reduce a Tucker fit to a CP fit with a
    fixed superdiagonal core, which the test suite uses as a consistency
    check. ``clip_c`` and ``noise_fn`` behave as in :func:`fit_cp`.
    """
    _check_data(data)
    init_rng, shuffle_rng = spawn_rngs(cfg.seed, 2)
    a, b, c = _init_factors(init_rng, data.shape, cfg.rank)
    d = cfg.rank
    if core_init is None:
        # core entries uniform on [-1/d, 1/d]
        g = init_rng.uniform(-1.0 / d, 1.0 / d, size=(d, d, d))
    else:
        g = np.array(core_init, dtype=np.float64)
        if g.shape != (d, d, d):
            raise ShapeError(f"core_init shape {g.shape} does not match rank {d}")
    idx = data.indices
    vals = data.values
    zero_noise = np.zeros((data.n_obs, d))
    objectives = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = _epoch_order(shuffle_rng, data.n_obs, cfg.shuffle)
        noise = zero_noise if noise_fn is None else noise_fn(epoch, data.n_obs, d)
        _kernels.tucker_epoch(
            a, b, c, g, idx, vals, order,
            cfg.lr, cfg.reg_factors, cfg.reg_core, clip_c, noise,
            not freeze_core,
        )
        model = TuckerModel(a, b, c, g)
        with np.errstate(over="ignore", invalid="ignore"):
            objectives[epoch] = tucker_objective(data, model, cfg.reg_factors, cfg.reg_core)
        _guard_objective(objectives[epoch], epoch)
    return TuckerModel(a.copy(), b.copy(), c.copy(), g.copy()), objectives
