"""Private training pipelines: input, gradient, and output perturbation.

All three pipelines wrap the same SGD solvers and differ only in where the
privacy noise enters:

* input        -- Laplace noise on the observed values before training,
                  calibrated to the l1 sensitivity max - min of the values;
* gradient     -- the c-row gradient is l2-clipped to m at every entry visit
                  and a noise vector drawn from the vector exponential
                  mechanism (sensitivity 2m) is added before the update;
* output       -- a non-private fit, after which each row of the learned
                  third factor gets an exponential-mechanism noise vector
                  calibrated to 2 * epochs * lipschitz * lr.

Each pipeline consumes a single privacy budget epsilon; the per-visit noise
of the gradient pipeline is not divided across iterations.  Randomness is
tied to the fit seed: stream 0 initializes factors, stream 1 shuffles, and
stream 2 feeds the mechanism, so a pipeline run with mechanism "none" is
bit-identical to the bare solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import ConfigError
from .mechanisms import (
    NOISE_STREAM,
    Sensitivity,
    check_epsilon,
    exp_mech_rows,
    gradient_sensitivity,
    input_sensitivity,
    laplace_sample,
    output_sensitivity,
    spawn_rngs,
)
from .solvers import CpModel, FitConfig, TuckerModel, fit_cp, fit_tucker
from .tensor_ops import ObservedTensor, check_observations

__all__ = [
    "MECHANISMS",
    "BACKBONES",
    "DpConfig",
    "MechanismInfo",
    "CompletionResult",
    "perturb_input",
    "run_input_perturbation",
    "run_gradient_perturbation",
    "run_output_perturbation",
    "run_pipeline",
    "predict",
    "predict_entries",
    "complete",
]

MECHANISMS = ("none", "input", "gradient", "output")
BACKBONES = ("cp", "tucker")

# complete() refuses to densify anything bigger than this many entries
MAX_DENSE_ELEMENTS = 100_000_000

Model = Union[CpModel, TuckerModel]


@dataclass(frozen=True)
class DpConfig:
    """Mechanism selection and privacy parameters for one pipeline run.

    ``clip_m`` is the gradient clip bound m (required for the gradient
    mechanism).  ``lipschitz`` is the per-entry loss Lipschitz bound used by
    the output mechanism; when absent, ``clip_m`` stands in for it.
    ``clamp_after_input`` post-processes input-perturbed values: "observed"
    clips them back to the original observed range, a (lo, hi) pair clips to
    that interval, None leaves them alone.
    """

    mechanism: str = "none"
    epsilon: float | None = None
    clip_m: float | None = None
    lipschitz: float | None = None
    clamp_after_input: object = None

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ConfigError(
                f"unknown mechanism {self.mechanism!r}; expected one of {MECHANISMS}"
            )
        if self.mechanism != "none":
            if self.epsilon is None:
                raise ConfigError(f"mechanism {self.mechanism!r} requires epsilon")
            check_epsilon(self.epsilon)
        if self.mechanism == "gradient":
            if self.clip_m is None or not self.clip_m > 0:
                raise ConfigError("gradient mechanism requires clip_m > 0")
        if self.mechanism == "output":
            bound = self.lipschitz if self.lipschitz is not None else self.clip_m
            if bound is None or not bound > 0:
                raise ConfigError(
                    "output mechanism requires lipschitz > 0 (or clip_m as fallback)"
                )
        clamp = self.clamp_after_input
        if clamp is not None and clamp != "observed":
            try:
                lo, hi = clamp
            except (TypeError, ValueError):
                raise ConfigError(
                    "clamp_after_input must be None, 'observed', or a (lo, hi) pair"
                ) from None
            if not lo < hi:
                raise ConfigError(f"clamp range must satisfy lo < hi, got {clamp!r}")


@dataclass(frozen=True)
class MechanismInfo:
    """What noise a pipeline actually injected, and under which seed."""

    mechanism: str
    epsilon: float | None = None
    sensitivity: Sensitivity | None = None
    noise_scale: float | None = None
    seed: int | None = None


@dataclass(frozen=True)
class CompletionResult:
    backbone: str
    model: Model
    objectives: np.ndarray
    info: MechanismInfo


def _check_backbone(backbone: str):
    if backbone not in BACKBONES:
        raise ConfigError(
            f"unknown backbone {backbone!r}; expected one of {BACKBONES}"
        )


def _fit(backbone: str, data: ObservedTensor, cfg: FitConfig, **kwargs):
    if backbone == "cp":
        return fit_cp(data, cfg, **kwargs)
    return fit_tucker(data, cfg, **kwargs)


def _noise_rng(seed: int):
    return spawn_rngs(seed, NOISE_STREAM + 1)[NOISE_STREAM]


def perturb_input(
    data: ObservedTensor,
    epsilon: float,
    rng: np.random.Generator,
    clamp=None,
) -> tuple[ObservedTensor, Sensitivity]:
    """Add Laplace noise to the observed values, optionally clamping after.

    The scale is sensitivity / epsilon with sensitivity the spread
    max - min of the observed values, so neighboring datasets differing in
    one entry are epsilon-indistinguishable.
    """
    check_epsilon(epsilon)
    sens = input_sensitivity(data)
    if sens.value == 0.0:
        # constant data: zero sensitivity, nothing to hide, no noise
        noisy = data.values
    else:
        noisy = data.values + laplace_sample(sens.value / epsilon, rng, size=data.n_obs)
    if clamp is not None:
        if clamp == "observed":
            lo, hi = data.values.min(), data.values.max()
        else:
            lo, hi = clamp
        noisy = np.clip(noisy, lo, hi)
    return data.with_values(noisy), sens


def run_input_perturbation(
    data: ObservedTensor, backbone: str, fit_cfg: FitConfig, dp_cfg: DpConfig
) -> CompletionResult:
    rng = _noise_rng(fit_cfg.seed)
    noisy, sens = perturb_input(
        data, dp_cfg.epsilon, rng, clamp=dp_cfg.clamp_after_input
    )
    model, objectives = _fit(backbone, noisy, fit_cfg)
    info = MechanismInfo(
        "input", dp_cfg.epsilon, sens, sens.value / dp_cfg.epsilon, fit_cfg.seed
    )
    return CompletionResult(backbone, model, objectives, info)


def run_gradient_perturbation(
    data: ObservedTensor,
    backbone: str,
    fit_cfg: FitConfig,
    dp_cfg: DpConfig,
    *,
    zero_noise: bool = False,
) -> CompletionResult:
    """Clip the c-row gradient to clip_m and add exponential-mechanism noise.

    ``zero_noise`` keeps the clipping but suppresses the noise; the resulting
    trajectory is the exact reference point the noisy run perturbs, which the
    tests compare against.
    """
    m = dp_cfg.clip_m
    sens = gradient_sensitivity(m)
    rng = _noise_rng(fit_cfg.seed)
    if zero_noise:
        noise_fn = None
    else:
        def noise_fn(epoch, n_obs, rank):
            return exp_mech_rows(n_obs, rank, sens.value, dp_cfg.epsilon, rng)
    model, objectives = _fit(backbone, data, fit_cfg, clip_c=m, noise_fn=noise_fn)
    scale = None if dp_cfg.epsilon is None else sens.value / dp_cfg.epsilon
    info = MechanismInfo("gradient", dp_cfg.epsilon, sens, scale, fit_cfg.seed)
    return CompletionResult(backbone, model, objectives, info)


def run_output_perturbation(
    data: ObservedTensor, backbone: str, fit_cfg: FitConfig, dp_cfg: DpConfig
) -> CompletionResult:
    """Non-private fit followed by noise on the rows of the third factor."""
    model, objectives = _fit(backbone, data, fit_cfg)
    lipschitz = dp_cfg.lipschitz if dp_cfg.lipschitz is not None else dp_cfg.clip_m
    sens = output_sensitivity(fit_cfg.epochs, lipschitz, fit_cfg.lr)
    rng = _noise_rng(fit_cfg.seed)
    noise = exp_mech_rows(
        model.c.shape[0], model.c.shape[1], sens.value, dp_cfg.epsilon, rng
    )
    if isinstance(model, CpModel):
        noisy_model: Model = CpModel(model.a, model.b, model.c + noise)
    else:
        noisy_model = TuckerModel(model.a, model.b, model.c + noise, model.core)
    info = MechanismInfo(
        "output", dp_cfg.epsilon, sens, sens.value / dp_cfg.epsilon, fit_cfg.seed
    )
    return CompletionResult(backbone, noisy_model, objectives, info)


def run_pipeline(
    data: ObservedTensor,
    backbone: str,
    fit_cfg: FitConfig,
    dp_cfg: DpConfig | None = None,
) -> CompletionResult:
    """Dispatch on the configured mechanism; None means a plain fit."""
    _check_backbone(backbone)
    if dp_cfg is None:
        dp_cfg = DpConfig()
    if dp_cfg.mechanism == "none":
        model, objectives = _fit(backbone, data, fit_cfg)
        return CompletionResult(
            backbone, model, objectives, MechanismInfo("none", seed=fit_cfg.seed)
        )
    if dp_cfg.mechanism == "input":
        return run_input_perturbation(data, backbone, fit_cfg, dp_cfg)
    if dp_cfg.mechanism == "gradient":
        return run_gradient_perturbation(data, backbone, fit_cfg, dp_cfg)
    return run_output_perturbation(data, backbone, fit_cfg, dp_cfg)


def _check_entry(model: Model, i: int, j: int, k: int):
    dims = model.dims
    for axis, (pos, n) in enumerate(zip((i, j, k), dims)):
        if not 0 <= pos < n:
            raise IndexError(
                f"index {pos} out of range for axis {axis} with size {n}"
            )


def predict(model: Model, i: int, j: int, k: int) -> float:
    """Reconstruction value at a single (i, j, k) position."""
    _check_entry(model, i, j, k)
    idx = np.array([[i, j, k]], dtype=np.int64)
    return float(model.entry_values(idx)[0])


def predict_entries(model: Model, indices: np.ndarray) -> np.ndarray:
    """Reconstruction values at an (n, 3) array of positions."""
    indices = np.asarray(indices)
    check_observations(indices, model.dims, allow_duplicates=True)
    return model.entry_values(indices.astype(np.int64, copy=False))


def complete(model: Model, max_elements: int = MAX_DENSE_ELEMENTS) -> np.ndarray:
    """Densify the full reconstruction; refuses implausibly large tensors."""
    n1, n2, n3 = model.dims
    total = n1 * n2 * n3
    if total > max_elements:
        raise ConfigError(
            f"dense reconstruction would hold {total} entries "
            f"(limit {max_elements}); use predict_entries instead"
        )
    return model.reconstruct()
