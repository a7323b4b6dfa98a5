"""Noise samplers, sensitivity calculations, and gradient clipping.

Randomness discipline: every sampler takes an explicit ``numpy.random.Generator``
and there is no module-level RNG. A run derives all of its generators from one
root seed with :func:`spawn_rngs`; stream 0 is reserved for parameter
initialization, stream 1 for epoch shuffling, and stream 2 for mechanism noise,
so adding or removing noise never perturbs the training trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .tensor_ops import ObservedTensor

__all__ = [
    "Sensitivity",
    "spawn_rngs",
    "laplace_sample",
    "exp_mech_vector",
    "exp_mech_rows",
    "clip_l2",
    "input_sensitivity",
    "gradient_sensitivity",
    "output_sensitivity",
    "check_epsilon",
]

# Reserved child-stream indices under a single run seed.
INIT_STREAM = 0
SHUFFLE_STREAM = 1
NOISE_STREAM = 2


@dataclass(frozen=True)
class Sensitivity:
    """Worst-case change of a released quantity under a one-entry data change."""

    value: float
    kind: str  # one of {"input_L1", "gradient_L2", "output_L2"}

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise ConfigError(f"sensitivity must be finite and >= 0, got {self.value}")


def check_epsilon(epsilon: float) -> float:
    """Validate a privacy budget: finite and strictly positive."""
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise ConfigError(f"privacy budget epsilon must be finite and > 0, got {epsilon}")
    return epsilon


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Derive ``count`` independent generators from one seed.

    Children are produced by ``numpy.random.SeedSequence(seed).spawn`` and are
    stable by position, so stream ``i`` is the same generator no matter how
    many siblings are requested.
    """
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.default_rng(child) for child in children]


def seed_from(seq: np.random.SeedSequence) -> int:
    """Collapse a SeedSequence to a reproducible unsigned 64-bit seed."""
    return int(seq.generate_state(1, np.uint64)[0])


def laplace_sample(scale: float, rng: np.random.Generator, size=None):
    """Zero-mean Laplace draw(s) with the given scale.

    Uses the inverse-CDF construction: with u uniform on (-1/2, 1/2), the
    sample is ``-scale * sign(u) * log(1 - 2|u|)``.
    """
    scale = float(scale)
    if not np.isfinite(scale) or scale <= 0:
        raise ConfigError(f"laplace scale must be finite and > 0, got {scale}")
    u = rng.random(size) - 0.5
    arg = 1.0 - 2.0 * np.abs(u)
    # u == -0.5 occurs with probability 2**-53; clamp instead of resampling
    arg = np.maximum(arg, np.finfo(np.float64).tiny)
    return -scale * np.sign(u) * np.log(arg)


def exp_mech_rows(
    n_rows: int,
    dim: int,
    sensitivity: float,
    epsilon: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample ``n_rows`` i.i.d. vectors with density proportional to
    ``exp(-epsilon * ||v|| / sensitivity)`` in ``dim`` dimensions.

    Each row is a uniform direction on the unit sphere (normalized standard
    normals) scaled by a radius drawn from Gamma(shape=dim,
    scale=sensitivity/epsilon), which is the exact radial marginal of that
    density. Zero sensitivity yields zero rows (no noise needed).
    """
    epsilon = check_epsilon(epsilon)
    if dim < 1:
        raise ConfigError(f"dimension must be >= 1, got {dim}")
    sensitivity = float(sensitivity)
    if sensitivity < 0 or not np.isfinite(sensitivity):
        raise ConfigError(f"sensitivity must be finite and >= 0, got {sensitivity}")
    if sensitivity == 0.0:
        return np.zeros((n_rows, dim))
    z = rng.standard_normal((n_rows, dim))
    norms = np.sqrt(np.sum(z * z, axis=1))
    norms = np.maximum(norms, np.finfo(np.float64).tiny)
    radii = rng.gamma(shape=float(dim), scale=sensitivity / epsilon, size=n_rows)
    return z * (radii / norms)[:, None]


def exp_mech_vector(
    dim: int, sensitivity: float, epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """One draw from the vector-valued exponential mechanism (see exp_mech_rows)."""
    return exp_mech_rows(1, dim, sensitivity, epsilon, rng)[0]


def clip_l2(v: np.ndarray, max_norm: float) -> np.ndarray:
    """Rescale ``v`` to l2 norm at most ``max_norm``; direction is preserved.

    Vectors already inside the ball pass through unchanged. The zero vector
    is returned as-is (no division by zero).
    """
    max_norm = float(max_norm)
    if max_norm <= 0:
        raise ConfigError(f"clipping constant must be > 0, got {max_norm}")
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.sqrt(np.sum(v * v)))
    if norm <= max_norm:
        return v
    return v * (max_norm / norm)


def input_sensitivity(data: ObservedTensor) -> Sensitivity:
    """Range of the observed entries: max minus min.

    This is the per-entry L1 sensitivity used to calibrate input noise.
    """
    if data.n_obs == 0:
        raise ConfigError("input sensitivity needs at least one observation")
    value = float(data.values.max() - data.values.min())
    return Sensitivity(value, "input_L1")


def gradient_sensitivity(clip_m: float) -> Sensitivity:
    """L2 sensitivity of a clipped per-row gradient: twice the clipping constant."""
    clip_m = float(clip_m)
    if clip_m <= 0 or not np.isfinite(clip_m):
        raise ConfigError(f"clipping constant must be finite and > 0, got {clip_m}")
    return Sensitivity(2.0 * clip_m, "gradient_L2")


def output_sensitivity(epochs: int, lipschitz: float, lr: float) -> Sensitivity:
    """L2 sensitivity of the released factor rows after permutation SGD.

    For ``tau`` passes of SGD with constant learning rate ``eta`` on an
    L-Lipschitz objective the released rows move by at most
    ``2 * tau * L * eta`` under a one-entry data change.
    """
    epochs = int(epochs)
    lipschitz = float(lipschitz)
    lr = float(lr)
    if epochs <= 0 or lipschitz <= 0 or lr <= 0:
        raise ConfigError("epochs, lipschitz constant and learning rate must all be > 0")
    return Sensitivity(2.0 * epochs * lipschitz * lr, "output_L2")
