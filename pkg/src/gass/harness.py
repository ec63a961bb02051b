"""Replicated-experiment runner and CSV export.

Every (problem, algorithm, run) triple gets its own RNG stream derived from
the plan's base seed and stable labels, so adding problems or algorithms to
a plan never perturbs the streams of existing runs.  Runs draw the initial
mean uniformly from [-30, 30]^n with initial variance 1000 per coordinate.
"""

from __future__ import annotations

import csv
import hashlib
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import benchmarks
from .engine import (
    ALGORITHMS,
    EngineConfig,
    ProjectionBox,
    Schedules,
    TrialReport,
    run,
)
from .shaping import BatchMinBound, ShapeSpec

INITIAL_MEAN_RANGE = (-30.0, 30.0)
INITIAL_VARIANCE = 1000.0

RESULTS_COLUMNS = (
    "problem", "algorithm", "dimension", "runs", "budget",
    "H_star", "H_bar_star", "std_err", "eps", "M_eps",
)
CURVES_COLUMNS = (
    "problem", "algorithm", "run_id", "seed", "cum_evals", "best_so_far",
)

# Override keys accepted by plans and the CLI, applied on top of the
# per-problem defaults.
OVERRIDE_KEYS = ("rho", "alpha0", "alpha_exp", "epsilon", "c", "s0", "n_per_iter")


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run: problems (optionally at reduced dimension), algorithms,
    replication count, per-run evaluation budget, and the base seed."""

    problems: tuple[tuple[str, int | None], ...]
    algorithms: tuple[str, ...] = ("gass",)
    runs: int = 10
    budget: int = 1_000_000
    base_seed: int = 0
    overrides: dict[str, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        problems = tuple((name, dim) for name, dim in self.problems)
        for name, _ in problems:
            if name not in benchmarks.PROBLEM_NAMES:
                raise ValueError(
                    f"unknown problem {name!r}; valid names: "
                    + ", ".join(benchmarks.PROBLEM_NAMES)
                )
        algorithms = tuple(self.algorithms)
        for algorithm in algorithms:
            if algorithm not in ALGORITHMS:
                raise ValueError(
                    f"unknown algorithm {algorithm!r}; valid: {ALGORITHMS}"
                )
        object.__setattr__(self, "problems", problems)
        object.__setattr__(self, "algorithms", algorithms)


@dataclass(frozen=True)
class AggregateRow:
    """One line of the results table for a (problem, algorithm) group."""

    problem: str
    algorithm: str
    dimension: int
    runs: int
    budget: int
    h_star: float
    h_bar_star: float
    std_err: float
    eps: float
    m_eps: int


def _resolve_problem(name: str, dim: int | None) -> benchmarks.Problem:
    problem = benchmarks.get_problem(name)
    if dim is not None and dim != problem.dimension:
        problem = benchmarks.reduced_dimension(problem, dim)
    return problem


def _seed_sequence(base_seed: int, problem: str, dim: int, algorithm: str,
                   run_id: int) -> np.random.SeedSequence:
    # Stable digest (not Python hash(), which is salted per process).
    label = f"{problem}:{dim}:{algorithm}".encode()
    key = int.from_bytes(hashlib.blake2b(label, digest_size=8).digest(), "little")
    return np.random.SeedSequence(
        entropy=(base_seed & 0xFFFFFFFFFFFFFFFF, key, run_id)
    )


def build_engine_config(
    problem: benchmarks.Problem,
    algorithm: str,
    budget: int,
    overrides: dict[str, float] | None = None,
) -> EngineConfig:
    """Engine configuration from the problem's defaults plus overrides."""
    over = dict(overrides or {})
    unknown = set(over) - set(OVERRIDE_KEYS)
    if unknown:
        raise ValueError(f"unknown override keys: {sorted(unknown)}")
    d = problem.defaults
    shape = ShapeSpec(
        s0=over.get("s0", 1e5),
        rho=over.get("rho", d.rho),
        lower_bound=BatchMinBound(0.01),
    )
    schedules = Schedules(
        alpha0=over.get("alpha0", d.alpha0),
        alpha_exp=over.get("alpha_exp", 0.05),
        n0=int(over.get("n_per_iter", 1000)),
        zeta=0.0,
    )
    box = ProjectionBox.default(problem.dimension, problem.solution_radius)
    return EngineConfig(
        shape=shape,
        schedules=schedules,
        box=box,
        budget=budget,
        algorithm=algorithm,
        epsilon=over.get("epsilon", 1e-8),
        feedback_c=over.get("c", d.feedback_c),
    )


@dataclass(frozen=True)
class _Trial:
    problem: str
    dimension: int | None
    algorithm: str
    run_id: int
    base_seed: int
    budget: int
    overrides: dict[str, float] | None


def _execute_trial(trial: _Trial) -> TrialReport:
    problem = _resolve_problem(trial.problem, trial.dimension)
    config = build_engine_config(
        problem, trial.algorithm, trial.budget, trial.overrides
    )
    ss = _seed_sequence(
        trial.base_seed, problem.name, problem.dimension, trial.algorithm,
        trial.run_id,
    )
    display_seed = int(ss.generate_state(1, np.uint64)[0])
    rng = np.random.default_rng(ss)
    lo, hi = INITIAL_MEAN_RANGE
    mu0 = rng.uniform(lo, hi, problem.dimension)
    var0 = np.full(problem.dimension, INITIAL_VARIANCE)

    def objective(points: np.ndarray) -> np.ndarray:
        return benchmarks.evaluate_batch(problem, points)

    try:
        report = run(config, objective, mu0, var0, rng, seed_label=display_seed)
    except Exception as exc:  # recorded, not dropped
        return TrialReport(
            algorithm=trial.algorithm,
            dimension=problem.dimension,
            seed=display_seed,
            best_value=float("nan"),
            best_solution=np.full(problem.dimension, np.nan),
            evals_used=0,
            iterations=0,
            curve=[],
            problem=problem.name,
            run_id=trial.run_id,
            error=f"{type(exc).__name__}: {exc}",
        )
    return replace(report, problem=problem.name, run_id=trial.run_id)


def run_experiment(plan: ExperimentPlan, workers: int = 1) -> list[TrialReport]:
    """Execute every (problem, algorithm, run) of the plan.

    Runs are independent; with workers > 1 they execute in a process pool.
    Results are returned in plan order regardless of completion order, and a
    failed run is returned with its error recorded rather than dropped.
    """
    trials = [
        _Trial(name, dim, algorithm, run_id, plan.base_seed, plan.budget,
               plan.overrides.get(name))
        for name, dim in plan.problems
        for algorithm in plan.algorithms
        for run_id in range(plan.runs)
    ]
    if workers <= 1 or len(trials) <= 1:
        reports = [_execute_trial(t) for t in trials]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_execute_trial, trials))
    for report in reports:
        if report.error is not None:
            warnings.warn(
                f"run failed: {report.problem}/{report.algorithm}"
                f"#{report.run_id}: {report.error}",
                stacklevel=2,
            )
    return reports


def aggregate(
    reports: list[TrialReport],
    eps_by_problem: dict[str, float] | None = None,
    budget: int | None = None,
) -> list[AggregateRow]:
    """Per-(problem, algorithm) statistics of the final best values.

    h_bar_star is the mean, std_err the sample standard deviation over
    sqrt(R), and m_eps counts runs with H* - best <= eps.  eps defaults to
    the problem's own tolerance.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    groups: dict[tuple[str, str, int], list[TrialReport]] = {}
    for report in reports:
        groups.setdefault(
            (report.problem, report.algorithm, report.dimension), []
        ).append(report)

    rows = []
    for (problem_name, algorithm, dim), group in sorted(groups.items()):
        problem = _resolve_problem(problem_name, dim)
        eps = (eps_by_problem or {}).get(problem_name, problem.defaults.eps_tol)
        ok = [r for r in group if r.error is None]
        if not ok:
            raise ValueError(
                f"all runs failed for {problem_name}/{algorithm}; "
                f"first error: {group[0].error}"
            )
        bests = np.array([r.best_value for r in ok])
        std_err = float(bests.std(ddof=1) / np.sqrt(bests.size)) if bests.size > 1 else 0.0
        rows.append(
            AggregateRow(
                problem=problem_name,
                algorithm=algorithm,
                dimension=dim,
                runs=len(group),
                budget=budget if budget is not None else max(r.evals_used for r in ok),
                h_star=problem.optimum_value,
                h_bar_star=float(bests.mean()),
                std_err=std_err,
                eps=eps,
                m_eps=int(np.sum(problem.optimum_value - bests <= eps)),
            )
        )
    return rows


def _fmt(value) -> str:
    # repr of a Python float is the shortest round-trip representation.
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def export_results(
    rows: list[AggregateRow], reports: list[TrialReport], directory
) -> tuple[Path, Path]:
    """Write results.csv and curves.csv under ``directory``.

    Rows are ordered by (problem, algorithm, dimension, run_id); float cells
    use shortest round-trip formatting so parsing the file recovers the
    exact values.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    results_path = directory / "results.csv"
    curves_path = directory / "curves.csv"

    try:
        with results_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(RESULTS_COLUMNS)
            for row in sorted(
                rows, key=lambda r: (r.problem, r.algorithm, r.dimension)
            ):
                writer.writerow([
                    row.problem, row.algorithm, row.dimension, row.runs,
                    row.budget, _fmt(row.h_star), _fmt(row.h_bar_star),
                    _fmt(row.std_err), _fmt(row.eps), row.m_eps,
                ])

        with curves_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CURVES_COLUMNS)
            ordered = sorted(
                reports,
                key=lambda r: (r.problem, r.algorithm, r.dimension, r.run_id),
            )
            for report in ordered:
                for cum_evals, best in report.curve:
                    writer.writerow([
                        report.problem, report.algorithm, report.run_id,
                        report.seed, cum_evals, _fmt(best),
                    ])
    except OSError as exc:
        raise OSError(f"failed writing experiment CSVs under {directory}: {exc}")
    return results_path, curves_path


def load_results(path) -> list[AggregateRow]:
    """Parse a results.csv back into AggregateRow values (exact round trip)."""
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for record in csv.DictReader(fh):
            rows.append(
                AggregateRow(
                    problem=record["problem"],
                    algorithm=record["algorithm"],
                    dimension=int(record["dimension"]),
                    runs=int(record["runs"]),
                    budget=int(record["budget"]),
                    h_star=float(record["H_star"]),
                    h_bar_star=float(record["H_bar_star"]),
                    std_err=float(record["std_err"]),
                    eps=float(record["eps"]),
                    m_eps=int(record["M_eps"]),
                )
            )
    return rows
