"""Command-line front end.

Subcommands: ``run`` (single optimization), ``suite`` (replicated
experiments with CSV export), ``check`` (numerical self-checks), ``list``
(the benchmark registry).  Option precedence is command line > config file
> per-problem default > global default; the config file is a flat
``key = value`` text file whose keys mirror the flag names.

Exit codes: 0 success, 1 run failure, 2 usage error, 3 failed self-check.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import benchmarks, diagnostics, harness
from .engine import ALGORITHMS

OUTPUT_DIR_ENV = "GASS_OUTPUT_DIR"

_OVERRIDE_FLAGS = {
    "rho": float,
    "alpha0": float,
    "alpha_exp": float,
    "epsilon": float,
    "c": float,
    "s0": float,
    "n_per_iter": int,
}

_CONFIG_KEYS = {
    "problem": str,
    "problems": str,
    "algo": str,
    "algos": str,
    "dim": int,
    "runs": int,
    "budget": int,
    "seed": int,
    "out": str,
    "workers": int,
    "full_scale": lambda v: v.lower() in ("1", "true", "yes"),
    **_OVERRIDE_FLAGS,
}


def _normalize_algorithm(value: str) -> str:
    algo = value.strip().lower().replace("-", "_")
    if algo not in ALGORITHMS:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm {value!r}; choose from "
            + ", ".join(a.replace("_", "-") for a in ALGORITHMS)
        )
    return algo


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("parameter overrides")
    group.add_argument("--rho", type=float, help="elite quantile fraction in (0,1)")
    group.add_argument("--alpha0", type=float, help="initial step size")
    group.add_argument("--alpha-exp", dest="alpha_exp", type=float,
                       help="step-size decay exponent in (0,1]")
    group.add_argument("--epsilon", type=float, help="preconditioner ridge")
    group.add_argument("--c", type=float, help="averaging feedback weight")
    group.add_argument("--s0", type=float, help="shape sigmoid sharpness")
    group.add_argument("--n-per-iter", dest="n_per_iter", type=int,
                       help="samples per iteration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gass",
        description="Stochastic search optimizer, benchmark suite, and "
                    "experiment runner.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="optimize one problem once")
    p_run.add_argument("--problem", required=False, help="problem name")
    p_run.add_argument("--algo", type=_normalize_algorithm, default=None)
    p_run.add_argument("--dim", type=int, default=None)
    p_run.add_argument("--budget", type=int, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--config", type=Path, default=None)
    _add_override_flags(p_run)

    p_suite = sub.add_parser("suite", help="replicated experiments + CSVs")
    p_suite.add_argument("--problems", default=None,
                         help="comma-separated problem names (default: all)")
    p_suite.add_argument("--algos", default=None,
                         help="comma-separated algorithms (default: gass)")
    p_suite.add_argument("--dim", type=int, default=None,
                         help="reduced dimension for the dimension-generic "
                              "problems (dejong5 and shekel keep theirs)")
    p_suite.add_argument("--runs", type=int, default=None)
    p_suite.add_argument("--budget", type=int, default=None)
    p_suite.add_argument("--seed", type=int, default=None)
    p_suite.add_argument("--out", default=None, help="output directory")
    p_suite.add_argument("--workers", type=int, default=None,
                         help="parallel runs (default: CPU count)")
    p_suite.add_argument("--full-scale", action="store_true", default=None,
                         help="100 runs at full printed dimensions")
    p_suite.add_argument("--config", type=Path, default=None)
    _add_override_flags(p_suite)

    p_check = sub.add_parser("check", help="numerical self-checks")
    p_check.add_argument("--seed", type=int, default=None)
    p_check.add_argument("--samples", type=int, default=100_000)
    p_check.add_argument("--config", type=Path, default=None)

    sub.add_parser("list", help="list benchmark problems")
    return parser


def _read_config_file(path: Path) -> dict:
    values = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value.strip())
        except (TypeError, ValueError):
            raise ValueError(f"{path}:{lineno}: bad value for {key!r}")
    return values


def _setting(args, file_values: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in file_values:
        return file_values[key]
    return default


def _collect_overrides(args, file_values: dict) -> dict:
    overrides = {}
    for key in _OVERRIDE_FLAGS:
        value = _setting(args, file_values, key)
        if value is not None:
            overrides[key] = value
    return overrides


def _parse_problem_list(spec_text: str) -> list[str]:
    names = [token.strip() for token in spec_text.split(",") if token.strip()]
    for name in names:
        if name not in benchmarks.PROBLEM_NAMES:
            raise ValueError(
                f"unknown problem {name!r}; valid names: "
                + ", ".join(benchmarks.PROBLEM_NAMES)
            )
    return names


def _plan_problems(names: list[str], dim: int | None):
    selected = []
    for name in names:
        problem = benchmarks.get_problem(name)
        if dim is not None and problem.min_dimension is not None \
                and dim != problem.dimension:
            selected.append((name, dim))
        else:
            selected.append((name, None))
    return tuple(selected)


def _cmd_list() -> int:
    print(f"{'name':<15}{'dimension':>10}{'optimum':>16}")
    for name in benchmarks.PROBLEM_NAMES:
        problem = benchmarks.get_problem(name)
        print(f"{name:<15}{problem.dimension:>10}{problem.optimum_value:>16.6g}")
    return 0


def _cmd_run(args, file_values: dict) -> int:
    name = _setting(args, file_values, "problem")
    if name is None:
        print("error: run requires --problem", file=sys.stderr)
        return 2
    try:
        names = _parse_problem_list(name)
        if len(names) != 1:
            raise ValueError("run takes exactly one problem")
        problem = benchmarks.get_problem(names[0])
        dim = _setting(args, file_values, "dim")
        if dim is not None and dim != problem.dimension:
            problem = benchmarks.reduced_dimension(problem, dim)
        algorithm = _setting(args, file_values, "algo", "gass")
        algorithm = _normalize_algorithm(algorithm)
        budget = int(_setting(args, file_values, "budget", 1_000_000))
        seed = int(_setting(args, file_values, "seed", 0))
        overrides = _collect_overrides(args, file_values)

        plan = harness.ExperimentPlan(
            problems=((problem.name, problem.dimension),),
            algorithms=(algorithm,),
            runs=1,
            budget=budget,
            base_seed=seed,
            overrides={problem.name: overrides} if overrides else {},
        )
        report = harness.run_experiment(plan, workers=1)[0]
        if report.error is not None:
            print(f"run failed: {report.error}", file=sys.stderr)
            return 1
        print(f"problem:    {problem.name} (n={problem.dimension})")
        print(f"algorithm:  {algorithm}")
        print(f"iterations: {report.iterations}  evaluations: {report.evals_used}")
        print(f"best value: {report.best_value!r}")
        print("best solution: " + np.array2string(report.best_solution,
                                                  max_line_width=79))
        return 0
    except (ValueError, KeyError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_suite(args, file_values: dict) -> int:
    try:
        full_scale = bool(_setting(args, file_values, "full_scale", False))
        problems_text = _setting(args, file_values, "problems")
        names = (_parse_problem_list(problems_text) if problems_text
                 else list(benchmarks.PROBLEM_NAMES))
        algos_text = _setting(args, file_values, "algos")
        if algos_text:
            algorithms = tuple(
                _normalize_algorithm(a) for a in algos_text.split(",") if a.strip()
            )
        else:
            algorithms = ("gass",)
        dim = _setting(args, file_values, "dim")
        if full_scale and dim is not None:
            raise ValueError("--full-scale uses the printed dimensions; "
                             "drop --dim")
        runs = int(_setting(args, file_values, "runs",
                            100 if full_scale else 10))
        budget = int(_setting(args, file_values, "budget", 1_000_000))
        seed = int(_setting(args, file_values, "seed", 0))
        out_dir = _setting(args, file_values, "out",
                           os.environ.get(OUTPUT_DIR_ENV, "results"))
        workers = _setting(args, file_values, "workers", os.cpu_count() or 1)
        overrides = _collect_overrides(args, file_values)

        plan = harness.ExperimentPlan(
            problems=_plan_problems(names, dim),
            algorithms=algorithms,
            runs=runs,
            budget=budget,
            base_seed=seed,
            overrides={name: overrides for name in names} if overrides else {},
        )
        reports = harness.run_experiment(plan, workers=int(workers))
        rows = harness.aggregate(reports, budget=budget)
        results_path, curves_path = harness.export_results(rows, reports, out_dir)

        header = (f"{'problem':<15}{'algo':<13}{'dim':>4}{'runs':>5}"
                  f"{'H*':>12}{'H_bar*':>14}{'std_err':>12}{'eps':>9}{'M_eps':>6}")
        print(header)
        print("-" * len(header))
        for row in rows:
            print(
                f"{row.problem:<15}{row.algorithm:<13}{row.dimension:>4}"
                f"{row.runs:>5}{row.h_star:>12.5g}{row.h_bar_star:>14.6g}"
                f"{row.std_err:>12.3g}{row.eps:>9.0e}{row.m_eps:>6}"
            )
        print(f"\nwrote {results_path} and {curves_path}")
        failed = [r for r in reports if r.error is not None]
        if failed:
            print(f"warning: {len(failed)} run(s) failed", file=sys.stderr)
        return 0
    except (ValueError, KeyError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_check(args, file_values: dict) -> int:
    seed = int(_setting(args, file_values, "seed", 0))
    samples = int(getattr(args, "samples", 100_000))
    results = diagnostics.run_all_checks(seed=seed, mc_samples=samples)
    all_passed = True
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        all_passed &= result.passed
        print(f"{result.name}: {status} {result.detail}")
    print(f"overall: {'PASS' if all_passed else 'FAIL'} seed={seed}")
    return 0 if all_passed else 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    file_values = {}
    config_path = getattr(args, "config", None)
    if config_path is not None:
        try:
            file_values = _read_config_file(config_path)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2

    if args.subcommand == "list":
        return _cmd_list()
    if args.subcommand == "run":
        return _cmd_run(args, file_values)
    if args.subcommand == "suite":
        return _cmd_suite(args, file_values)
    if args.subcommand == "check":
        return _cmd_check(args, file_values)
    parser.error(f"unknown subcommand {args.subcommand!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
