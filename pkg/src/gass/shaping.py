"""Objective shaping: quantile threshold, sigmoid level pruning, weights.

A shape transform S(h) = (h - h_lb) / (1 + exp(-s0 (h - gamma))) turns raw
objective values into strictly positive scores that suppress everything below
the batch quantile gamma; normalizing the scores yields the importance
weights used for the distribution update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Index arithmetic below works on the mathematical value of (1-rho)*N; this
# slack only absorbs float representation error, never a real off-by-one.
_INDEX_SLACK = 1e-9

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class FixedBound:
    """Use a known constant strictly below every observed objective value."""

    value: float


@dataclass(frozen=True)
class BatchMinBound:
    """Derive the bound from the batch: min(h) - delta * max(1, range(h))."""

    delta: float = 0.01

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")


LowerBoundPolicy = FixedBound | BatchMinBound


@dataclass(frozen=True)
class ShapeSpec:
    """Shape-function configuration.

    s0 is the sigmoid sharpness, rho in (0, 1) the elite quantile fraction,
    and lower_bound the policy producing h_lb for each batch.
    """

    s0: float = 1e5
    rho: float = 0.05
    lower_bound: LowerBoundPolicy = BatchMinBound(0.01)

    def __post_init__(self):
        if not (self.s0 > 0.0 and math.isfinite(self.s0)):
            raise ValueError("s0 must be positive and finite")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class WeightedValues:
    """Shape scores and the normalized weights derived from them."""

    raw_shape: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        raw_shape = np.asarray(self.raw_shape, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if raw_shape.shape != weights.shape or raw_shape.ndim != 1:
            raise ValueError("raw_shape and weights must be equal-length vectors")
        if np.any(raw_shape <= 0.0) or not np.all(np.isfinite(raw_shape)):
            raise ValueError("raw_shape entries must be finite and strictly positive")
        if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to one")
        object.__setattr__(self, "raw_shape", raw_shape)
        object.__setattr__(self, "weights", weights)


def sample_quantile(values, rho: float) -> float:
    """The ceil((1-rho)N)-th smallest of N values (no interpolation).

    Ties are resolved purely by position in sorted order; duplicates are
    permitted.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a non-empty 1-D array")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie strictly inside (0, 1), got {rho}")
    n = values.size
    k = math.ceil((1.0 - rho) * n - _INDEX_SLACK)
    k = min(max(k, 1), n)
    return float(np.partition(values, k - 1)[k - 1])


def resolve_lower_bound(h_values, policy: LowerBoundPolicy) -> float:
    """Concrete h_lb for a batch under the configured policy."""
    h_values = np.asarray(h_values, dtype=float)
    if h_values.size == 0:
        raise ValueError("h_values must be non-empty")
    h_min = float(np.min(h_values))
    if isinstance(policy, FixedBound):
        if policy.value >= h_min:
            raise ValueError(
                f"fixed lower bound {policy.value} is not strictly below the "
                f"batch minimum {h_min}"
            )
        return policy.value
    if isinstance(policy, BatchMinBound):
        spread = float(np.max(h_values)) - h_min
        return h_min - policy.delta * max(1.0, spread)
    raise TypeError(f"unknown lower-bound policy: {policy!r}")


def shape_values(h_values, gamma: float, spec: ShapeSpec, h_lb: float) -> np.ndarray:
    """Elementwise (h - h_lb) * sigmoid(s0 (h - gamma)), strictly positive.

    The sigmoid is evaluated branch-on-sign so no exp() overflows; results
    that would underflow are floored at the smallest positive normal float,
    keeping every output strictly positive as the weights require.
    """
    h_values = np.asarray(h_values, dtype=float)
    if np.any(h_values <= h_lb):
        raise ValueError(
            f"h_lb={h_lb} must be strictly below every objective value "
            f"(batch minimum {float(np.min(h_values))})"
        )
    z = spec.s0 * (h_values - gamma)
    sig = np.empty_like(z)
    pos = z >= 0.0
    sig[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    sig[~pos] = ez / (1.0 + ez)
    return np.maximum((h_values - h_lb) * sig, _TINY)


def normalize_weights(raw_shape) -> np.ndarray:
    """Self-normalized weights w_i = S_i / sum(S); sums to one."""
    raw_shape = np.asarray(raw_shape, dtype=float)
    if raw_shape.size == 0:
        raise ValueError("raw_shape must be non-empty")
    if not np.all(np.isfinite(raw_shape)) or np.any(raw_shape <= 0.0):
        raise ValueError("raw_shape entries must be finite and strictly positive")
    return raw_shape / raw_shape.sum()


def weigh_batch(h_values, spec: ShapeSpec) -> tuple[WeightedValues, float, float]:
    """Full shaping pipeline for one batch of objective values.

    Returns the weighted values together with the sample quantile gamma and
    the resolved lower bound used to produce them.
    """
    gamma = sample_quantile(h_values, spec.rho)
    h_lb = resolve_lower_bound(h_values, spec.lower_bound)
    raw = shape_values(h_values, gamma, spec, h_lb)
    return WeightedValues(raw_shape=raw, weights=normalize_weights(raw)), gamma, h_lb
