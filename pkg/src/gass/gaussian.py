"""Independent multivariate Gaussian as an exponential family.

Densities are written as f(x; theta) = exp{theta^T T(x) - phi(theta)} with
sufficient statistics T(x) = (x_1..x_n, x_1^2..x_n^2).  The natural parameter
vector theta is the canonical state everywhere in this package; mean/variance
form is derived on demand.  Covariance is diagonal (independent components).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class NaturalParam:
    """Natural parameters of an independent Gaussian.

    ``linear`` holds the coefficients of x_i, ``quadratic`` the coefficients
    of x_i^2.  Every quadratic component must be strictly negative so the
    density is integrable.
    """

    linear: np.ndarray
    quadratic: np.ndarray

    def __post_init__(self):
        linear = _as_vector(self.linear, "linear")
        quadratic = _as_vector(self.quadratic, "quadratic")
        if linear.shape != quadratic.shape:
            raise ValueError(
                f"linear and quadratic must have equal length, got "
                f"{linear.shape[0]} and {quadratic.shape[0]}"
            )
        if not np.all(np.isfinite(linear)) or not np.all(np.isfinite(quadratic)):
            raise ValueError("natural parameters must be finite")
        if np.any(quadratic >= 0.0):
            raise ValueError("every quadratic component must be strictly negative")
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "quadratic", quadratic)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def as_vector(self) -> np.ndarray:
        """Concatenated (linear, quadratic) vector of length 2n."""
        return np.concatenate([self.linear, self.quadratic])

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "NaturalParam":
        vec = _as_vector(vec, "vec")
        if vec.shape[0] % 2 != 0:
            raise ValueError("natural parameter vector must have even length")
        n = vec.shape[0] // 2
        return cls(linear=vec[:n], quadratic=vec[n:])


@dataclass(frozen=True)
class MeanMoments:
    """First and second moments E[X_i], E[X_i^2] of each coordinate."""

    first: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        first = _as_vector(self.first, "first")
        second = _as_vector(self.second, "second")
        if first.shape != second.shape:
            raise ValueError("first and second must have equal length")
        if np.any(second - first**2 <= 0.0):
            raise ValueError("moments imply non-positive variance")
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.first, self.second])


def to_moments(theta: NaturalParam) -> tuple[np.ndarray, np.ndarray]:
    """Map natural parameters to (mean, variance) per coordinate."""
    variance = -0.5 / theta.quadratic
    mean = theta.linear * variance
    return mean, variance


def from_moments(mean, variance) -> NaturalParam:
    """Map (mean, variance) to natural parameters; exact inverse of to_moments."""
    mean = _as_vector(mean, "mean")
    variance = _as_vector(variance, "variance")
    if mean.shape != variance.shape:
        raise ValueError("mean and variance must have equal length")
    if not np.all(np.isfinite(variance)) or np.any(variance <= 0.0):
        raise ValueError("variance components must be finite and strictly positive")
    return NaturalParam(linear=mean / variance, quadratic=-0.5 / variance)


def expected_T(theta: NaturalParam) -> MeanMoments:
    """Analytic E[T(X)] under f(.; theta): the mean and second moment."""
    mean, variance = to_moments(theta)
    return MeanMoments(first=mean, second=mean**2 + variance)


def analytic_var_T(theta: NaturalParam) -> np.ndarray:
    """Analytic covariance matrix of T(X) under f(.; theta).

    With T ordered (x_1..x_n, x_1^2..x_n^2) the matrix is zero across
    coordinates and, per coordinate i,

        Var(X_i)        = s2_i
        Cov(X_i, X_i^2) = 2 m_i s2_i
        Var(X_i^2)      = 2 s2_i^2 + 4 m_i^2 s2_i

    where m = mean and s2 = variance.
    """
    mean, variance = to_moments(theta)
    n = theta.dim
    out = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    out[idx, idx] = variance
    out[idx, idx + n] = 2.0 * mean * variance
    out[idx + n, idx] = 2.0 * mean * variance
    out[idx + n, idx + n] = 2.0 * variance**2 + 4.0 * mean**2 * variance
    return out


def sample(theta: NaturalParam, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. solutions from N(mean, diag(variance)).

    Returns an array of shape (count, n).  Deterministic given the state of
    ``rng``; the generator is the only thing mutated.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    mean, variance = to_moments(theta)
    return mean + np.sqrt(variance) * rng.standard_normal((count, theta.dim))


def log_density(theta: NaturalParam, x) -> float:
    """Log of the Gaussian density at a single point x."""
    x = _as_vector(x, "x")
    mean, variance = to_moments(theta)
    if x.shape != mean.shape:
        raise ValueError(f"x has dimension {x.shape[0]}, expected {mean.shape[0]}")
    return float(
        -0.5 * np.sum(np.log(2.0 * np.pi * variance))
        - 0.5 * np.sum((x - mean) ** 2 / variance)
    )


def sufficient_statistics(solutions: np.ndarray) -> np.ndarray:
    """T(x) = (x, x^2) rowwise for a batch of solutions, shape (N, 2n)."""
    solutions = np.asarray(solutions, dtype=float)
    if solutions.ndim != 2:
        raise ValueError("solutions must be a 2-D array of shape (N, n)")
    return np.concatenate([solutions, solutions**2], axis=1)
