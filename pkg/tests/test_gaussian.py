import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gass.gaussian import (
    MeanMoments,
    NaturalParam,
    analytic_var_T,
    expected_T,
    from_moments,
    log_density,
    sample,
    sufficient_statistics,
    to_moments,
)


def theta_of(mean, variance):
    return from_moments(np.asarray(mean, float), np.asarray(variance, float))


finite_means = st.floats(-50.0, 50.0, allow_nan=False)
positive_vars = st.floats(1e-4, 1e6, allow_nan=False)


class TestMomentMaps:
    def test_standard_normal(self):
        theta = NaturalParam(linear=[0.0], quadratic=[-0.5])
        mean, variance = to_moments(theta)
        assert mean[0] == 0.0
        assert variance[0] == 1.0

    def test_shifted(self):
        theta = NaturalParam(linear=[2.0], quadratic=[-0.5])
        mean, variance = to_moments(theta)
        assert mean[0] == pytest.approx(2.0)
        assert variance[0] == pytest.approx(1.0)

    def test_from_moments_standard(self):
        theta = from_moments([0.0], [1.0])
        assert theta.linear[0] == 0.0
        assert theta.quadratic[0] == -0.5

    def test_broad_initial_variance(self):
        theta = from_moments(np.zeros(6), np.full(6, 1000.0))
        assert np.allclose(theta.quadratic, -5e-4)

    @settings(max_examples=50, deadline=None)
    @given(
        mean=st.lists(finite_means, min_size=1, max_size=6),
        variance=st.lists(positive_vars, min_size=1, max_size=6),
    )
    def test_round_trip(self, mean, variance):
        k = min(len(mean), len(variance))
        mean, variance = np.array(mean[:k]), np.array(variance[:k])
        theta = from_moments(mean, variance)
        m2, v2 = to_moments(theta)
        assert np.allclose(m2, mean, rtol=1e-12, atol=1e-12)
        assert np.allclose(v2, variance, rtol=1e-12)
        theta2 = from_moments(m2, v2)
        assert np.allclose(theta2.linear, theta.linear, rtol=1e-12, atol=1e-15)
        assert np.allclose(theta2.quadratic, theta.quadratic, rtol=1e-12)

    def test_invalid_quadratic_rejected(self):
        with pytest.raises(ValueError):
            NaturalParam(linear=[0.0], quadratic=[0.5])
        with pytest.raises(ValueError):
            NaturalParam(linear=[0.0], quadratic=[0.0])
        with pytest.raises(ValueError):
            NaturalParam(linear=[np.inf], quadratic=[-0.5])

    def test_invalid_variance_rejected(self):
        with pytest.raises(ValueError):
            from_moments([0.0], [0.0])
        with pytest.raises(ValueError):
            from_moments([0.0], [-1.0])


class TestExpectedT:
    def test_standard(self):
        mm = expected_T(theta_of([0.0], [1.0]))
        assert mm.first[0] == pytest.approx(0.0)
        assert mm.second[0] == pytest.approx(1.0)

    def test_mean_plus_variance(self):
        mm = expected_T(theta_of([2.0], [3.0]))
        assert mm.first[0] == pytest.approx(2.0)
        assert mm.second[0] == pytest.approx(7.0)

    def test_matches_monte_carlo(self):
        theta = theta_of([1.5, -2.0], [4.0, 0.25])
        rng = np.random.default_rng(11)
        draws = sample(theta, 1_000_000, rng)
        T = sufficient_statistics(draws)
        emp_mean = T.mean(axis=0)
        emp_se = T.std(axis=0, ddof=1) / np.sqrt(T.shape[0])
        assert np.all(np.abs(emp_mean - expected_T(theta).as_vector()) < 3 * emp_se)

    @pytest.mark.parametrize("n_draws", [10_000, 1_000_000])
    def test_monte_carlo_across_sizes(self, n_draws):
        theta = theta_of([0.7], [2.0])
        rng = np.random.default_rng(5)
        T = sufficient_statistics(sample(theta, n_draws, rng))
        emp_se = T.std(axis=0, ddof=1) / np.sqrt(n_draws)
        diff = np.abs(T.mean(axis=0) - expected_T(theta).as_vector())
        assert np.all(diff < 4 * emp_se)

    def test_moment_invariant_enforced(self):
        with pytest.raises(ValueError):
            MeanMoments(first=[2.0], second=[4.0])  # zero variance


class TestAnalyticVarT:
    def test_standard_normal_block(self):
        V = analytic_var_T(theta_of([0.0], [1.0]))
        assert np.allclose(V, [[1.0, 0.0], [0.0, 2.0]], atol=1e-14)

    def test_shifted_block(self):
        V = analytic_var_T(theta_of([1.0], [1.0]))
        assert np.allclose(V, [[1.0, 2.0], [2.0, 6.0]], atol=1e-14)

    def test_cross_coordinate_zero(self):
        V = analytic_var_T(theta_of([1.0, -3.0], [2.0, 5.0]))
        assert V[0, 1] == 0.0
        assert V[0, 3] == 0.0
        assert V[1, 2] == 0.0

    def test_matches_sample_covariance(self):
        theta = theta_of([0.5, 2.0], [1.5, 3.0])
        rng = np.random.default_rng(7)
        T = sufficient_statistics(sample(theta, 1_000_000, rng))
        emp = np.cov(T, rowvar=False, ddof=1)
        V = analytic_var_T(theta)
        rel = np.abs(np.diag(emp) - np.diag(V)) / np.diag(V)
        assert np.max(rel) < 0.05

    @settings(max_examples=30, deadline=None)
    @given(
        mean=st.lists(finite_means, min_size=1, max_size=4),
        variance=st.lists(positive_vars, min_size=1, max_size=4),
    )
    def test_spd_after_ridge(self, mean, variance):
        k = min(len(mean), len(variance))
        V = analytic_var_T(theta_of(mean[:k], variance[:k]))
        assert np.allclose(V, V.T)
        np.linalg.cholesky(V + 1e-10 * np.eye(V.shape[0]) * max(1.0, V.max()))


class TestSampling:
    def test_seeded_determinism(self):
        theta = theta_of([3.0, -1.0], [2.0, 0.5])
        a = sample(theta, 100, np.random.default_rng(123))
        b = sample(theta, 100, np.random.default_rng(123))
        assert np.array_equal(a, b)

    def test_sample_mean_clt(self):
        theta = theta_of([4.0], [9.0])
        draws = sample(theta, 1_000_000, np.random.default_rng(2))
        se = 3.0 / np.sqrt(1_000_000)
        assert abs(draws.mean() - 4.0) < 3 * se

    def test_degenerate_variance_limit(self):
        theta = theta_of([5.0, -3.0], [1e-18, 1e-18])
        draws = sample(theta, 1000, np.random.default_rng(0))
        assert np.allclose(draws, [5.0, -3.0], atol=1e-7)

    def test_count_validation(self):
        with pytest.raises(ValueError):
            sample(theta_of([0.0], [1.0]), 0, np.random.default_rng(0))


class TestLogDensity:
    def test_standard_normal_mode(self):
        value = log_density(theta_of([0.0], [1.0]), [0.0])
        assert value == pytest.approx(-0.5 * np.log(2 * np.pi), rel=1e-14)

    def test_integrates_to_one(self):
        theta = theta_of([0.8], [1.7])
        sigma = np.sqrt(1.7)
        grid = np.linspace(0.8 - 12 * sigma, 0.8 + 12 * sigma, 2001)
        dens = np.exp([log_density(theta, [g]) for g in grid])
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-6)

    def test_translation_invariance(self):
        base = log_density(theta_of([1.0], [2.0]), [0.3])
        shifted = log_density(theta_of([1.0 + 5.5], [2.0]), [0.3 + 5.5])
        assert shifted == pytest.approx(base, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            log_density(theta_of([0.0, 0.0], [1.0, 1.0]), [0.0])


def test_sufficient_statistics_ordering():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    T = sufficient_statistics(x)
    assert np.array_equal(T, [[1.0, 2.0, 1.0, 4.0], [3.0, 4.0, 9.0, 16.0]])
