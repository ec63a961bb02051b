"""Numerical self-checks for the estimator and gradient identities.

The two gradient checks compare Monte Carlo estimates of the analytic
gradient expressions against central finite differences of the simulated
objective, using common random numbers: one set of standard-normal draws is
reused for every perturbed parameter value (re-transformed through the
Gaussian map), so most of the Monte Carlo noise cancels in the comparison.
The shape transform here must not depend on the sampling parameters, which
is why these checks take a plain value transform such as exp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtri

from .gaussian import (
    NaturalParam,
    analytic_var_T,
    expected_T,
    sufficient_statistics,
    to_moments,
)
from .shaping import sample_quantile

ValueTransform = Callable[[np.ndarray], np.ndarray]
Objective = Callable[[np.ndarray], np.ndarray]


@dataclass
class GradCheckReport:
    analytic: np.ndarray
    numeric: np.ndarray
    relative_error: float
    samples_used: int
    seed: int
    inconclusive: bool = False


@dataclass
class VarianceCheckReport:
    analytic_diag: np.ndarray
    estimated_diag: np.ndarray
    max_diag_relative_error: float
    samples_used: int
    seed: int


@dataclass
class QuantileCheckReport:
    rho: float
    target: float
    sizes: list[int]
    mean_abs_errors: list[float]
    decreasing: bool
    seed: int


def _relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b)) / scale)


def _simulated_solutions(theta: NaturalParam, z: np.ndarray) -> np.ndarray:
    mean, variance = to_moments(theta)
    return mean + np.sqrt(variance) * z


def _shape_of(theta, z, shape, objective) -> np.ndarray:
    x = _simulated_solutions(theta, z)
    s = np.asarray(shape(np.asarray(objective(x), dtype=float)), dtype=float)
    if np.any(s <= 0.0) or not np.all(np.isfinite(s)):
        raise ValueError("shape transform must be positive and finite on samples")
    return s


def _fd_gradient(value_at: Callable[[NaturalParam], float],
                 theta: NaturalParam, fd_step: float) -> np.ndarray:
    base = theta.as_vector()
    grad = np.empty_like(base)
    for j in range(base.size):
        bump = np.zeros_like(base)
        bump[j] = fd_step
        up = value_at(NaturalParam.from_vector(base + bump))
        down = value_at(NaturalParam.from_vector(base - bump))
        grad[j] = (up - down) / (2.0 * fd_step)
    return grad


def check_gradient_l(
    theta: NaturalParam,
    shape: ValueTransform,
    objective: Objective,
    mc_samples: int = 100_000,
    fd_step: float = 1e-4,
    rng: np.random.Generator | int = 0,
) -> GradCheckReport:
    """Gradient of ln of the shaped expectation at theta.

    Analytic side: self-normalized weighted statistics minus the exact
    expectation, i.e. the same expression the optimizer steps along.
    Numeric side: central differences of ln of the simulated expectation.
    """
    seed = rng if isinstance(rng, int) else 0
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    if fd_step <= 0.0:
        raise ValueError("fd_step must be positive")
    z = rng.standard_normal((mc_samples, theta.dim))

    s = _shape_of(theta, z, shape, objective)
    weights = s / s.sum()
    T = sufficient_statistics(_simulated_solutions(theta, z))
    analytic = weights @ T - expected_T(theta).as_vector()

    spread = s.max() - s.min()
    inconclusive = bool(spread <= 1e3 * np.finfo(float).eps * max(s.max(), 1.0))

    def log_mean_shape(t: NaturalParam) -> float:
        return float(np.log(np.mean(_shape_of(t, z, shape, objective))))

    numeric = _fd_gradient(log_mean_shape, theta, fd_step)
    return GradCheckReport(
        analytic=analytic,
        numeric=numeric,
        relative_error=_relative_error(analytic, numeric),
        samples_used=mc_samples,
        seed=seed,
        inconclusive=inconclusive,
    )


def check_gradient_L(
    theta: NaturalParam,
    shape: ValueTransform,
    objective: Objective,
    mc_samples: int = 100_000,
    fd_step: float = 1e-4,
    rng: np.random.Generator | int = 0,
) -> GradCheckReport:
    """Gradient of the shaped expectation itself at theta.

    Analytic side: mean(S T) - mean(S) E[T]; numeric side: central
    differences of the simulated expectation.
    """
    seed = rng if isinstance(rng, int) else 0
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    if fd_step <= 0.0:
        raise ValueError("fd_step must be positive")
    z = rng.standard_normal((mc_samples, theta.dim))

    s = _shape_of(theta, z, shape, objective)
    T = sufficient_statistics(_simulated_solutions(theta, z))
    analytic = (s @ T) / mc_samples - s.mean() * expected_T(theta).as_vector()

    spread = s.max() - s.min()
    inconclusive = bool(spread <= 1e3 * np.finfo(float).eps * max(s.max(), 1.0))

    def mean_shape(t: NaturalParam) -> float:
        return float(np.mean(_shape_of(t, z, shape, objective)))

    numeric = _fd_gradient(mean_shape, theta, fd_step)
    return GradCheckReport(
        analytic=analytic,
        numeric=numeric,
        relative_error=_relative_error(analytic, numeric),
        samples_used=mc_samples,
        seed=seed,
        inconclusive=inconclusive,
    )


def check_hessian_second_term(
    theta: NaturalParam,
    mc_samples: int = 100_000,
    rng: np.random.Generator | int = 0,
) -> VarianceCheckReport:
    """Sample covariance of T against the analytic Var[T] (diagonal)."""
    seed = rng if isinstance(rng, int) else 0
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    z = rng.standard_normal((mc_samples, theta.dim))
    T = sufficient_statistics(_simulated_solutions(theta, z))
    estimated = np.cov(T, rowvar=False, ddof=1)
    analytic = analytic_var_T(theta)
    a_diag = np.diag(analytic)
    e_diag = np.atleast_1d(np.diag(np.atleast_2d(estimated)))
    rel = float(np.max(np.abs(e_diag - a_diag) / a_diag))
    return VarianceCheckReport(
        analytic_diag=a_diag,
        estimated_diag=e_diag,
        max_diag_relative_error=rel,
        samples_used=mc_samples,
        seed=seed,
    )


def check_quantile_consistency(
    rho: float = 0.1,
    sizes: tuple[int, ...] = (1_000, 10_000, 100_000),
    rng: np.random.Generator | int = 0,
    repeats: int = 20,
) -> QuantileCheckReport:
    """Sample quantile of standard normals against the exact inverse CDF.

    For each sample size, the absolute error |gamma_hat - ndtri(1-rho)| is
    averaged over ``repeats`` independent draws; the mean errors should
    shrink as the sample size grows.
    """
    if sorted(sizes) != list(sizes):
        raise ValueError("sizes must be increasing")
    seed = rng if isinstance(rng, int) else 0
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    target = float(ndtri(1.0 - rho))
    mean_errors = []
    for size in sizes:
        errs = [
            abs(sample_quantile(rng.standard_normal(size), rho) - target)
            for _ in range(repeats)
        ]
        mean_errors.append(float(np.mean(errs)))
    decreasing = all(a > b for a, b in zip(mean_errors, mean_errors[1:]))
    return QuantileCheckReport(
        rho=rho,
        target=target,
        sizes=list(sizes),
        mean_abs_errors=mean_errors,
        decreasing=decreasing,
        seed=seed,
    )


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_all_checks(seed: int = 0, mc_samples: int = 100_000) -> list[CheckResult]:
    """The standard self-check battery on the 1-D quadratic setting."""
    theta = NaturalParam(linear=np.array([0.3]), quadratic=np.array([-0.5]))
    objective = lambda x: -(x[:, 0] ** 2)
    shape = np.exp

    results = []
    rep_l = check_gradient_l(theta, shape, objective, mc_samples, 1e-4, seed)
    results.append(CheckResult(
        "gradient_log_expectation",
        rep_l.relative_error < 0.05 and not rep_l.inconclusive,
        f"rel_err={rep_l.relative_error:.4g} tol=0.05 samples={mc_samples}",
    ))
    rep_L = check_gradient_L(theta, shape, objective, mc_samples, 1e-4, seed)
    results.append(CheckResult(
        "gradient_expectation",
        rep_L.relative_error < 0.05 and not rep_L.inconclusive,
        f"rel_err={rep_L.relative_error:.4g} tol=0.05 samples={mc_samples}",
    ))
    rep_v = check_hessian_second_term(theta, max(mc_samples, 100_000), seed)
    results.append(CheckResult(
        "variance_of_statistics",
        rep_v.max_diag_relative_error < 0.05,
        f"rel_err={rep_v.max_diag_relative_error:.4g} tol=0.05",
    ))
    rep_q = check_quantile_consistency(0.1, (1_000, 10_000, 100_000), seed)
    final_err = rep_q.mean_abs_errors[-1]
    results.append(CheckResult(
        "quantile_consistency",
        rep_q.decreasing and final_err < 0.02,
        f"mean_abs_err={final_err:.4g} tol=0.02 "
        f"decreasing={rep_q.decreasing}",
    ))
    return results
