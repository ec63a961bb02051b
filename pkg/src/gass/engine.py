"""Stochastic search over natural parameters of the sampling distribution.

Each iteration draws a batch from the current Gaussian, scores it with the
quantile-pruning shape transform, and moves the natural parameters along
the preconditioned ascent direction

    theta <- project(theta + a_k * (VarT + eps I)^{-1} (Ep[T] - E_theta[T]))

where VarT is the (sample or analytic) covariance of the sufficient
statistics and Ep[T] the weight-averaged statistics of the batch.  Three
update rules share this skeleton: plain search (``gass``), the variant with
iterate averaging fed back into the step (``gass_avg``), and a baseline with
identity preconditioner and its own gain sequence (``modified_ce``).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .gaussian import (
    NaturalParam,
    expected_T,
    from_moments,
    analytic_var_T,
    sample,
    sufficient_statistics,
)
from .shaping import ShapeSpec, WeightedValues, weigh_batch

ALGORITHMS = ("gass", "gass_avg", "modified_ce")

Objective = Callable[[np.ndarray], np.ndarray]
"""Maps a batch of solutions (N, n) to objective values (N,)."""


@dataclass
class SampleBatch:
    """One iteration's candidate solutions and their objective values."""

    solutions: np.ndarray
    h_values: np.ndarray
    weighted: WeightedValues | None = None

    def __post_init__(self):
        self.solutions = np.asarray(self.solutions, dtype=float)
        self.h_values = np.asarray(self.h_values, dtype=float)
        if self.solutions.ndim != 2:
            raise ValueError("solutions must have shape (N, n)")
        if self.h_values.shape != (self.solutions.shape[0],):
            raise ValueError("h_values length must equal the number of solutions")
        if not np.all(np.isfinite(self.h_values)):
            raise ValueError("h_values must be finite")

    @property
    def size(self) -> int:
        return self.solutions.shape[0]


@dataclass(frozen=True)
class Schedules:
    """Step-size rule a_k = alpha0 / k^alpha_exp and sample-size rule
    N_k = ceil(n0 * k^zeta), with k starting at 1 (max(1, k) guards k=0)."""

    alpha0: float = 1.0
    alpha_exp: float = 0.05
    n0: int = 1000
    zeta: float = 0.0

    def __post_init__(self):
        if self.alpha0 <= 0.0:
            raise ValueError("alpha0 must be positive")
        if not 0.0 < self.alpha_exp <= 1.0:
            raise ValueError("alpha_exp must lie in (0, 1]")
        if self.n0 < 1:
            raise ValueError("n0 must be a positive integer")
        if self.zeta < 0.0:
            raise ValueError("zeta must be nonnegative")

    def step_size(self, k: int) -> float:
        return self.alpha0 / max(1, k) ** self.alpha_exp

    def sample_size(self, k: int) -> int:
        return math.ceil(self.n0 * max(1, k) ** self.zeta)


@dataclass(frozen=True)
class ProjectionBox:
    """Hyper-rectangle constraint on the natural parameters.

    Bounds follow the sufficient-statistic ordering (linear block first,
    quadratic block second); quadratic upper bounds must stay negative so
    variances remain positive and bounded.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be equal-length vectors")
        if lower.shape[0] % 2 != 0:
            raise ValueError("bounds must have even length 2n")
        if np.any(lower >= upper):
            raise ValueError("every lower bound must be strictly below its upper bound")
        n = lower.shape[0] // 2
        if np.any(upper[n:] >= 0.0):
            raise ValueError("quadratic upper bounds must be strictly negative")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0] // 2

    @classmethod
    def default(
        cls,
        dim: int,
        solution_radius: float,
        var_min: float = 1e-8,
        var_max: float = 1e6,
    ) -> "ProjectionBox":
        """Box derived from variance bounds [var_min, var_max] and a mean
        bound of 10x the solution-box radius, mapped into natural space."""
        if solution_radius <= 0.0 or var_min <= 0.0 or var_max <= var_min:
            raise ValueError("need solution_radius > 0 and 0 < var_min < var_max")
        mean_bound = 10.0 * solution_radius
        linear_bound = mean_bound / var_min
        lower = np.concatenate(
            [np.full(dim, -linear_bound), np.full(dim, -0.5 / var_min)]
        )
        upper = np.concatenate(
            [np.full(dim, linear_bound), np.full(dim, -0.5 / var_max)]
        )
        return cls(lower=lower, upper=upper)


@dataclass(frozen=True)
class EngineConfig:
    """Everything a run needs besides the objective and the initial point."""

    shape: ShapeSpec
    schedules: Schedules
    box: ProjectionBox
    budget: int
    algorithm: str = "gass"
    epsilon: float = 1e-8
    feedback_c: float = 0.0
    variance_mode: str = "sample_estimate"
    clamp_to_bounds: bool = False
    solution_bounds: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.feedback_c < 0.0:
            raise ValueError("feedback_c must be nonnegative")
        if self.variance_mode not in ("sample_estimate", "analytic"):
            raise ValueError("variance_mode must be 'sample_estimate' or 'analytic'")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        if self.clamp_to_bounds and self.solution_bounds is None:
            raise ValueError("clamp_to_bounds requires solution_bounds")


@dataclass
class EngineState:
    """Mutable-by-replacement state of one optimization run."""

    theta: NaturalParam
    theta_bar: NaturalParam
    k: int = 0
    evals_used: int = 0
    best_solution: np.ndarray | None = None
    best_value: float = -np.inf


@dataclass
class TrialReport:
    """Per-run trace: best-so-far curve plus final best and bookkeeping."""

    algorithm: str
    dimension: int
    seed: int
    best_value: float
    best_solution: np.ndarray
    evals_used: int
    iterations: int
    curve: list[tuple[int, float]]
    final_theta: NaturalParam | None = None
    problem: str = ""
    run_id: int = 0
    error: str | None = None


def estimate_Ep(batch: SampleBatch) -> np.ndarray:
    """Weighted average of the sufficient statistics, sum_i w_i T(x_i)."""
    if batch.weighted is None:
        raise ValueError("batch has no weights; run the shaping pipeline first")
    T = sufficient_statistics(batch.solutions)
    return batch.weighted.weights @ T


def estimate_var_T(batch: SampleBatch) -> np.ndarray:
    """Sample covariance of T over the batch,

        (1/(N-1)) sum T_i T_i^T - (1/(N^2-N)) (sum T_i)(sum T_i)^T,

    the unbiased estimator in the exact form the update rule calls for.
    """
    n_samples = batch.size
    if n_samples < 2:
        raise ValueError("variance estimation needs at least two samples")
    T = sufficient_statistics(batch.solutions)
    total = T.sum(axis=0)
    return (T.T @ T) / (n_samples - 1) - np.outer(total, total) / (
        n_samples**2 - n_samples
    )


def ascent_direction(
    var_T: np.ndarray, epsilon: float, e_p: np.ndarray, e_theta: np.ndarray
) -> np.ndarray:
    """Solve (var_T + eps I) d = e_p - e_theta by Cholesky factorization.

    If the first factorization fails, one retry is made with the ridge
    inflated tenfold; a second failure raises with diagnostics.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    var_T = np.asarray(var_T, dtype=float)
    rhs = np.asarray(e_p, dtype=float) - np.asarray(e_theta, dtype=float)
    sym = 0.5 * (var_T + var_T.T)
    eye = np.eye(sym.shape[0])
    for ridge in (epsilon, 10.0 * epsilon):
        try:
            factor = scipy.linalg.cho_factor(sym + ridge * eye, lower=True)
            return scipy.linalg.cho_solve(factor, rhs)
        except scipy.linalg.LinAlgError:
            continue
    diag = np.diag(sym)
    raise ArithmeticError(
        "preconditioner factorization failed even with 10x ridge: "
        f"epsilon={epsilon:g}, diag range [{diag.min():g}, {diag.max():g}]"
    )


def project(theta: NaturalParam, box: ProjectionBox) -> NaturalParam:
    """Componentwise clamp onto the box (closest point in Euclidean norm)."""
    clipped = np.clip(theta.as_vector(), box.lower, box.upper)
    return NaturalParam.from_vector(clipped)


def running_mean_update(
    theta_bar: NaturalParam, theta: NaturalParam, k: int
) -> NaturalParam:
    """bar_k = ((k-1)/k) bar_{k-1} + theta_k / k, the recursive average."""
    if k < 1:
        raise ValueError("k must be >= 1")
    w = 1.0 / k
    return NaturalParam.from_vector(
        (1.0 - w) * theta_bar.as_vector() + w * theta.as_vector()
    )


def modified_ce_gain(k: int) -> float:
    """Gain sequence 5 / (k + 100)^0.501 of the baseline, k starting at 0."""
    return 5.0 / (k + 100.0) ** 0.501


def _evaluate(objective: Objective, solutions: np.ndarray, config: EngineConfig):
    points = solutions
    if config.clamp_to_bounds:
        lo, hi = config.solution_bounds
        points = np.clip(solutions, lo, hi)
    h = np.asarray(objective(points), dtype=float)
    if h.shape != (solutions.shape[0],):
        raise ValueError(
            f"objective returned shape {h.shape}, expected ({solutions.shape[0]},)"
        )
    bad = ~np.isfinite(h)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(
            f"objective returned non-finite value {h[i]} at point {points[i]}"
        )
    return points, h


def _step(state: EngineState, objective: Objective, config: EngineConfig,
          rng: np.random.Generator, algorithm: str) -> EngineState:
    k = state.k + 1  # 1-based iteration number
    n_k = config.schedules.sample_size(k)

    solutions = sample(state.theta, n_k, rng)
    eval_points, h = _evaluate(objective, solutions, config)
    weighted, _, _ = weigh_batch(h, config.shape)
    batch = SampleBatch(solutions=solutions, h_values=h, weighted=weighted)

    e_p = estimate_Ep(batch)
    e_theta = expected_T(state.theta).as_vector()
    theta_vec = state.theta.as_vector()
    theta_bar = running_mean_update(state.theta_bar, state.theta, k)

    if algorithm == "modified_ce":
        increment = modified_ce_gain(state.k) * (e_p - e_theta)
    else:
        if config.variance_mode == "analytic":
            var_T = analytic_var_T(state.theta)
        else:
            var_T = estimate_var_T(batch)
        alpha = config.schedules.step_size(k)
        increment = alpha * ascent_direction(var_T, config.epsilon, e_p, e_theta)
        if algorithm == "gass_avg":
            increment = increment + alpha * config.feedback_c * (
                theta_bar.as_vector() - theta_vec
            )

    # Clamp the raw vector before constructing the parameter: the
    # unprojected iterate may be infeasible (e.g. nonnegative quadratic
    # part) and projection is what repairs it.
    new_vec = np.clip(theta_vec + increment, config.box.lower, config.box.upper)
    new_theta = NaturalParam.from_vector(new_vec)

    i_best = int(np.argmax(h))
    best_value = state.best_value
    best_solution = state.best_solution
    if h[i_best] > best_value:
        best_value = float(h[i_best])
        best_solution = eval_points[i_best].copy()

    return dataclasses.replace(
        state,
        theta=new_theta,
        theta_bar=theta_bar,
        k=k,
        evals_used=state.evals_used + n_k,
        best_solution=best_solution,
        best_value=best_value,
    )


def step_gass(state: EngineState, objective: Objective, config: EngineConfig,
              rng: np.random.Generator) -> EngineState:
    """One iteration of the preconditioned update."""
    return _step(state, objective, config, rng, "gass")


def step_gass_avg(state: EngineState, objective: Objective, config: EngineConfig,
                  rng: np.random.Generator) -> EngineState:
    """One iteration with the averaging feedback term a_k c (bar - theta)."""
    return _step(state, objective, config, rng, "gass_avg")


def step_modified_ce(state: EngineState, objective: Objective, config: EngineConfig,
                     rng: np.random.Generator) -> EngineState:
    """One iteration of the identity-preconditioner baseline."""
    return _step(state, objective, config, rng, "modified_ce")


def run(
    config: EngineConfig,
    objective: Objective,
    initial_mean,
    initial_variance,
    rng: np.random.Generator | int | np.random.SeedSequence,
    seed_label: int | None = None,
) -> TrialReport:
    """Iterate the configured update until the evaluation budget is exhausted.

    Args:
        config: engine configuration; config.budget caps total evaluations.
        objective: batch objective mapping (N, n) -> (N,).
        initial_mean, initial_variance: per-coordinate start distribution.
        rng: generator, seed, or seed sequence driving all sampling.
        seed_label: value recorded in the report's ``seed`` field; defaults
            to ``rng`` when that is an integer seed.

    Returns:
        TrialReport with the best solution/value, the per-iteration
        best-so-far curve, the final natural parameters, and counters.
    """
    if isinstance(rng, (int, np.integer)):
        if seed_label is None:
            seed_label = int(rng)
        rng = np.random.default_rng(int(rng))
    elif isinstance(rng, np.random.SeedSequence):
        rng = np.random.default_rng(rng)
    if seed_label is None:
        seed_label = 0

    theta0 = project(from_moments(initial_mean, initial_variance), config.box)
    first_batch = config.schedules.sample_size(1)
    if config.budget < first_batch:
        raise ValueError(
            f"budget {config.budget} is smaller than one batch of {first_batch}"
        )

    state = EngineState(theta=theta0, theta_bar=theta0)
    curve: list[tuple[int, float]] = []
    while state.evals_used + config.schedules.sample_size(state.k + 1) <= config.budget:
        state = _step(state, objective, config, rng, config.algorithm)
        curve.append((state.evals_used, state.best_value))

    return TrialReport(
        algorithm=config.algorithm,
        dimension=theta0.dim,
        seed=seed_label,
        best_value=state.best_value,
        best_solution=np.asarray(state.best_solution, dtype=float),
        evals_used=state.evals_used,
        iterations=state.k,
        curve=curve,
        final_theta=state.theta,
    )
