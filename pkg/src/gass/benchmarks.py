"""The ten benchmark problems, stated as maximizations.

Functions that are classically minimized appear here negated, so every
problem has a known finite maximum.  Each problem carries its search box,
optimum, and the per-problem algorithm defaults used by the harness and CLI.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

PROBLEM_NAMES = (
    "dejong5",
    "shekel",
    "powel",
    "rosenbrock",
    "griewank",
    "trigonometric",
    "rastrigin",
    "pinter",
    "levy",
    "sphere",
)

# Foxhole grid for dejong5: 25 columns, coordinates on {-32,-16,0,16,32}.
_DEJONG_A1 = np.tile(np.array([-32.0, -16.0, 0.0, 16.0, 32.0]), 5)
_DEJONG_A2 = np.repeat(np.array([-32.0, -16.0, 0.0, 16.0, 32.0]), 5)
DEJONG_A = np.vstack([_DEJONG_A1, _DEJONG_A2])

SHEKEL_A = np.array(
    [
        [4.0, 4.0, 4.0, 4.0],
        [1.0, 1.0, 1.0, 1.0],
        [8.0, 8.0, 8.0, 8.0],
        [6.0, 6.0, 6.0, 6.0],
        [3.0, 7.0, 3.0, 7.0],
    ]
)
SHEKEL_C = np.array([0.1, 0.2, 0.2, 0.4, 0.4])

# Exact stationary point of the shekel objective nearest (4,4,4,4), found by
# Newton refinement; the rounded point itself has gradient norm ~0.039 and
# would fail a local-maximality check.
SHEKEL_OPTIMIZER = np.array(
    [4.000037152814791, 4.0001332765943625, 4.000037152814791, 4.0001332765943625]
)
SHEKEL_OPTIMUM = 10.153199679058226


@dataclass(frozen=True)
class ProblemDefaults:
    """Per-problem algorithm settings: elite fraction, initial step size,
    averaging feedback weight, and the epsilon-optimality tolerance."""

    rho: float
    alpha0: float
    feedback_c: float
    eps_tol: float


@dataclass(frozen=True)
class Problem:
    name: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    batch_fn: Callable[[np.ndarray], np.ndarray]
    optimum_value: float
    optimizer: np.ndarray
    defaults: ProblemDefaults
    min_dimension: int | None = None  # None: dimension is fixed

    def evaluate(self, x) -> float:
        """Objective at a single point."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"{self.name} expects a point of dimension {self.dimension}, "
                f"got shape {x.shape}"
            )
        return float(self.batch_fn(x[None, :])[0])

    @property
    def solution_radius(self) -> float:
        return float(np.max((self.upper - self.lower) / 2.0))


def _defaults(name: str) -> ProblemDefaults:
    low_dim = name in ("dejong5", "shekel")
    return ProblemDefaults(
        rho=0.02 if low_dim else 0.05,
        alpha0=0.3 if name in ("dejong5", "shekel", "rosenbrock") else 1.0,
        feedback_c=0.002 if name in ("powel", "rosenbrock", "pinter") else 0.1,
        eps_tol=1e-2 if name in ("rosenbrock", "rastrigin", "pinter") else 1e-3,
    )


def _sixth(d: np.ndarray) -> np.ndarray:
    # d**6 via squaring; np.power is an order of magnitude slower here.
    sq = d * d
    return sq * sq * sq


def _dejong5(x: np.ndarray) -> np.ndarray:
    d1 = x[:, 0:1] - _DEJONG_A1[None, :]
    d2 = x[:, 1:2] - _DEJONG_A2[None, :]
    j = np.arange(1, 26, dtype=float)[None, :]
    inner = 0.002 + (1.0 / (j + _sixth(d1) + _sixth(d2))).sum(axis=1)
    return -1.0 / inner


def _shekel(x: np.ndarray) -> np.ndarray:
    d = ((x[:, None, :] - SHEKEL_A[None, :, :]) ** 2).sum(axis=2)
    return (1.0 / (d + SHEKEL_C[None, :])).sum(axis=1)


def _powel(x: np.ndarray) -> np.ndarray:
    # Printed sum runs i = 2 .. n-2 over x_{i-1}, x_i, x_{i+1}, x_{i+2}.
    a, b, c, d = x[:, :-3], x[:, 1:-2], x[:, 2:-1], x[:, 3:]
    quart1 = (b - 2.0 * c) ** 2
    quart2 = (a - d) ** 2
    terms = (a + 10.0 * b) ** 2 + 5.0 * (c - d) ** 2 + quart1 * quart1 \
        + 10.0 * quart2 * quart2
    return -terms.sum(axis=1) - 1.0


def _rosenbrock(x: np.ndarray) -> np.ndarray:
    head, tail = x[:, :-1], x[:, 1:]
    return -(100.0 * (tail - head**2) ** 2 + (head - 1.0) ** 2).sum(axis=1) - 1.0


def _griewank(x: np.ndarray) -> np.ndarray:
    i = np.arange(1, x.shape[1] + 1, dtype=float)
    return (
        -(x**2).sum(axis=1) / 4000.0 + np.cos(x / np.sqrt(i)).prod(axis=1) - 1.0
    )


def _trigonometric(x: np.ndarray) -> np.ndarray:
    s = (x - 0.9) ** 2
    terms = 8.0 * np.sin(7.0 * s) ** 2 + 6.0 * np.sin(14.0 * s) ** 2 + s
    return -terms.sum(axis=1) - 1.0


def _rastrigin(x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    return -(x**2 - 10.0 * np.cos(2.0 * np.pi * x)).sum(axis=1) - 10.0 * n - 1.0


def _pinter(x: np.ndarray) -> np.ndarray:
    # Cyclic boundary convention: x_0 := x_n and x_{n+1} := x_1.
    i = np.arange(1, x.shape[1] + 1, dtype=float)
    xm = np.roll(x, 1, axis=1)
    xp = np.roll(x, -1, axis=1)
    a = xm * np.sin(x) - x + np.sin(xp)
    b = xm**2 - 2.0 * x + 3.0 * xp - np.cos(x) + 1.0
    total = (
        (i * x**2).sum(axis=1)
        + (20.0 * i * np.sin(a) ** 2).sum(axis=1)
        + (i * np.log10(1.0 + i * b**2)).sum(axis=1)
    )
    return -total - 1.0


def _levy(x: np.ndarray) -> np.ndarray:
    y = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * y[:, 0]) ** 2
    mid = (
        (y[:, :-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * y[:, :-1] + 1.0) ** 2)
    ).sum(axis=1)
    tail = (y[:, -1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(2.0 * np.pi * y[:, -1]) ** 2)
    return -head - mid - tail - 1.0


def _sphere(x: np.ndarray) -> np.ndarray:
    i = np.arange(1, x.shape[1] + 1, dtype=float)
    return -(i * x**2).sum(axis=1) - 1.0


def _box(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    return np.full(n, lo), np.full(n, hi)


def _generic(name, batch_fn, n, lo, hi, optimum_value, pattern, min_dimension):
    lower, upper = _box(n, lo, hi)
    return Problem(
        name=name,
        dimension=n,
        lower=lower,
        upper=upper,
        batch_fn=batch_fn,
        optimum_value=optimum_value,
        optimizer=np.full(n, pattern),
        defaults=_defaults(name),
        min_dimension=min_dimension,
    )


def _build(name: str, n: int | None) -> Problem:
    if name == "dejong5":
        if n not in (None, 2):
            raise ValueError("dejong5 is fixed at dimension 2")
        lower, upper = _box(2, -50.0, 50.0)
        return Problem(
            name, 2, lower, upper, _dejong5,
            optimum_value=-0.998,
            optimizer=np.array([-32.0, -32.0]),
            defaults=_defaults(name),
        )
    if name == "shekel":
        if n not in (None, 4):
            raise ValueError("shekel is fixed at dimension 4")
        lower, upper = _box(4, 0.0, 10.0)
        return Problem(
            name, 4, lower, upper, _shekel,
            optimum_value=SHEKEL_OPTIMUM,
            optimizer=SHEKEL_OPTIMIZER.copy(),
            defaults=_defaults(name),
        )

    generic = {
        "powel": (_powel, 50, -50.0, 50.0, -1.0, 0.0, 4),
        "rosenbrock": (_rosenbrock, 10, -10.0, 10.0, -1.0, 1.0, 2),
        "griewank": (_griewank, 50, -50.0, 50.0, 0.0, 0.0, 1),
        "trigonometric": (_trigonometric, 50, -50.0, 50.0, -1.0, 0.9, 1),
        "rastrigin": (_rastrigin, 20, -5.12, 5.12, -1.0, 0.0, 1),
        "pinter": (_pinter, 50, -50.0, 50.0, -1.0, 0.0, 2),
        "levy": (_levy, 50, -50.0, 50.0, -1.0, 1.0, 1),
        "sphere": (_sphere, 50, -50.0, 50.0, -1.0, 0.0, 1),
    }
    if name not in generic:
        raise KeyError(
            f"unknown problem {name!r}; valid names: {', '.join(PROBLEM_NAMES)}"
        )
    batch_fn, full_n, lo, hi, h_star, pattern, min_n = generic[name]
    dim = full_n if n is None else n
    if dim < min_n:
        raise ValueError(f"{name} needs dimension >= {min_n}, got {dim}")
    return _generic(name, batch_fn, dim, lo, hi, h_star, pattern, min_n)


def get_problem(name: str) -> Problem:
    """Look up one of the ten problems by its stable identifier."""
    return _build(name, None)


def reduced_dimension(problem: Problem, new_dim: int) -> Problem:
    """Same formula at a different dimension, optimum recomputed.

    Only the dimension-generic problems support this; dejong5 and shekel
    have fixed constants.
    """
    if problem.min_dimension is None:
        raise ValueError(f"{problem.name} does not support dimension changes")
    if new_dim < problem.min_dimension:
        raise ValueError(
            f"{problem.name} needs dimension >= {problem.min_dimension}, "
            f"got {new_dim}"
        )
    return _build(problem.name, new_dim)


def evaluate_batch(problem: Problem, solutions: np.ndarray) -> np.ndarray:
    """Objective values for each row of solutions, order preserved."""
    solutions = np.asarray(solutions, dtype=float)
    if solutions.ndim != 2 or solutions.shape[1] != problem.dimension:
        raise ValueError(
            f"{problem.name} expects solutions of shape (N, {problem.dimension}), "
            f"got {solutions.shape}"
        )
    return problem.batch_fn(solutions)
