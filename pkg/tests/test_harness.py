import numpy as np
import pytest

from gass.engine import TrialReport
from gass.harness import (
    ExperimentPlan,
    aggregate,
    build_engine_config,
    export_results,
    load_results,
    run_experiment,
)
from gass import benchmarks


def small_plan(**kw):
    defaults = dict(
        problems=(("sphere", 3),),
        algorithms=("gass",),
        runs=2,
        budget=4_000,
        base_seed=5,
    )
    defaults.update(kw)
    return ExperimentPlan(**defaults)


def synthetic_report(problem, best, run_id=0, algorithm="gass", dimension=None):
    dim = dimension or benchmarks.get_problem(problem).dimension
    return TrialReport(
        algorithm=algorithm,
        dimension=dim,
        seed=run_id,
        best_value=best,
        best_solution=np.zeros(dim),
        evals_used=1000,
        iterations=1,
        curve=[(1000, best)],
        problem=problem,
        run_id=run_id,
    )


class TestRunExperiment:
    def test_deterministic_across_invocations(self):
        plan = small_plan()
        a = run_experiment(plan)
        b = run_experiment(plan)
        assert [r.best_value for r in a] == [r.best_value for r in b]
        assert [r.curve for r in a] == [r.curve for r in b]
        assert [r.seed for r in a] == [r.seed for r in b]

    def test_distinct_runs_distinct_streams(self):
        reports = run_experiment(small_plan())
        assert reports[0].seed != reports[1].seed
        assert reports[0].curve != reports[1].curve

    def test_adding_problems_keeps_existing_streams(self):
        base = run_experiment(small_plan())
        extended = run_experiment(
            small_plan(problems=(("sphere", 3), ("griewank", 3)))
        )
        assert [r.curve for r in extended[:2]] == [r.curve for r in base]

    def test_parallel_matches_serial(self):
        plan = small_plan(runs=3)
        serial = run_experiment(plan, workers=1)
        parallel = run_experiment(plan, workers=3)
        assert [r.curve for r in serial] == [r.curve for r in parallel]
        assert [r.run_id for r in serial] == [r.run_id for r in parallel]

    def test_sphere_runs_reach_optimum(self):
        plan = small_plan(problems=(("sphere", 10),), runs=3, budget=300_000)
        reports = run_experiment(plan, workers=3)
        for report in reports:
            assert abs(report.best_value - (-1.0)) < 1e-3

    def test_overrides_applied(self):
        plan = small_plan(overrides={"sphere": {"n_per_iter": 500}})
        reports = run_experiment(plan)
        assert all(r.evals_used == 4_000 for r in reports)  # 8 batches of 500
        assert all(r.iterations == 8 for r in reports)

    def test_unknown_override_key_rejected(self):
        problem = benchmarks.get_problem("sphere")
        with pytest.raises(ValueError, match="override"):
            build_engine_config(problem, "gass", 10_000, {"momentum": 0.9})

    def test_failed_run_recorded_not_dropped(self):
        # budget below one batch fails inside the engine
        plan = small_plan(budget=10)
        with pytest.warns(UserWarning, match="run failed"):
            reports = run_experiment(plan)
        assert len(reports) == 2
        assert all(r.error is not None for r in reports)


class TestAggregate:
    def test_constant_bests(self):
        reports = [synthetic_report("sphere", -1.0, i) for i in range(3)]
        row = aggregate(reports, budget=1000)[0]
        assert row.h_bar_star == -1.0
        assert row.std_err == 0.0
        assert row.m_eps == 3
        assert row.h_star == -1.0

    def test_two_value_arithmetic(self):
        # oracle: mean -1, sample std sqrt(2), std err sqrt(2)/sqrt(2) = 1
        reports = [
            synthetic_report("griewank", 0.0, 0),
            synthetic_report("griewank", -2.0, 1),
        ]
        row = aggregate(reports, {"griewank": 1e-2}, budget=1000)[0]
        assert row.h_bar_star == pytest.approx(-1.0)
        assert row.std_err == pytest.approx(1.0)
        assert row.m_eps == 1
        assert row.h_star == 0.0

    def test_order_invariance(self):
        reports = [
            synthetic_report("sphere", v, i)
            for i, v in enumerate([-1.0, -1.5, -1.001, -3.0])
        ]
        row_a = aggregate(reports, budget=1)[0]
        row_b = aggregate(list(reversed(reports)), budget=1)[0]
        assert row_a.m_eps == row_b.m_eps
        assert row_a.h_bar_star == pytest.approx(row_b.h_bar_star, rel=1e-14)
        assert row_a.std_err == pytest.approx(row_b.std_err, rel=1e-12)

    def test_default_eps_from_problem(self):
        reports = [synthetic_report("rastrigin", -1.005, 0)]
        row = aggregate(reports, budget=1)[0]
        assert row.eps == 1e-2
        assert row.m_eps == 1

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_matches_single_pass_oracle(self):
        rng = np.random.default_rng(12)
        bests = rng.normal(-2.0, 0.5, size=50)
        reports = [synthetic_report("sphere", float(b), i) for i, b in enumerate(bests)]
        row = aggregate(reports, budget=1)[0]
        # independent single-pass mean/variance (Welford)
        mean, m2 = 0.0, 0.0
        for i, b in enumerate(bests, start=1):
            delta = b - mean
            mean += delta / i
            m2 += delta * (b - mean)
        std_err = np.sqrt(m2 / (len(bests) - 1)) / np.sqrt(len(bests))
        assert row.h_bar_star == pytest.approx(mean, abs=1e-12)
        assert row.std_err == pytest.approx(std_err, abs=1e-12)


class TestExport:
    def test_round_trip_exact(self, tmp_path):
        plan = small_plan()
        reports = run_experiment(plan)
        rows = aggregate(reports, budget=plan.budget)
        results_path, curves_path = export_results(rows, reports, tmp_path)
        assert load_results(results_path) == rows

    def test_empty_reports_header_only(self, tmp_path):
        results_path, curves_path = export_results([], [], tmp_path)
        assert results_path.read_text().strip() == (
            "problem,algorithm,dimension,runs,budget,"
            "H_star,H_bar_star,std_err,eps,M_eps"
        )
        assert curves_path.read_text().strip() == (
            "problem,algorithm,run_id,seed,cum_evals,best_so_far"
        )

    def test_curve_rows_match_curve_lengths(self, tmp_path):
        plan = small_plan()
        reports = run_experiment(plan)
        rows = aggregate(reports, budget=plan.budget)
        _, curves_path = export_results(rows, reports, tmp_path)
        lines = curves_path.read_text().strip().splitlines()
        assert len(lines) - 1 == sum(len(r.curve) for r in reports)

    def test_byte_identical_reruns(self, tmp_path):
        plan = small_plan(runs=2)
        for name in ("a", "b"):
            reports = run_experiment(plan)
            rows = aggregate(reports, budget=plan.budget)
            export_results(rows, reports, tmp_path / name)
        assert (tmp_path / "a" / "results.csv").read_bytes() == (
            tmp_path / "b" / "results.csv"
        ).read_bytes()
        assert (tmp_path / "a" / "curves.csv").read_bytes() == (
            tmp_path / "b" / "curves.csv"
        ).read_bytes()

    def test_deterministic_row_order(self, tmp_path):
        reports = [
            synthetic_report("sphere", -1.0, 1),
            synthetic_report("sphere", -1.0, 0),
            synthetic_report("griewank", 0.0, 0),
        ]
        rows = aggregate(reports, budget=1)
        _, curves_path = export_results(rows, reports, tmp_path)
        lines = curves_path.read_text().strip().splitlines()[1:]
        keys = [tuple(line.split(",")[:3]) for line in lines]
        assert keys == sorted(keys)

    def test_curves_monotone(self, tmp_path):
        plan = small_plan(budget=20_000)
        reports = run_experiment(plan)
        for report in reports:
            bests = [b for _, b in report.curve]
            assert all(x <= y for x, y in zip(bests, bests[1:]))


class TestPlanValidation:
    def test_runs_positive(self):
        with pytest.raises(ValueError):
            small_plan(runs=0)

    def test_budget_positive(self):
        with pytest.raises(ValueError):
            small_plan(budget=0)

    def test_unknown_problem_rejected_up_front(self):
        with pytest.raises(ValueError, match="valid names"):
            small_plan(problems=(("ackley", None),))

    def test_unknown_algorithm_rejected_up_front(self):
        with pytest.raises(ValueError, match="algorithm"):
            small_plan(algorithms=("newton",))
