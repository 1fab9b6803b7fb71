import pytest
import os
import sys

import numpy as np
from scipy import stats

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from src.analysis.statistics import (
    balance_report,
    bonferroni_level,
    cell_keys,
    chi_square_uniformity,
    covariance_summary,
    coverage_probe,
    interior_cells,
    ks_uniformity,
    ks_uniformity_values,
    l_image_violations,
    variance_reduction_experiment,
)
from src.analysis.gerow_robson import gr_marginal_cdf
from src.exceptions import InvalidInputError
from src.services.densities import PowerDensity
from src.services.rng import SeededGenerator
from src.services.sampler_service import SampleBatch, SamplerConfig, draw_batch


class TestUniformity:
    """KS and chi-square checks against U[-1, 1]"""

    def test_uniform_values_pass(self):
        values = np.random.default_rng(1).uniform(-1.0, 1.0, 5_000)
        result = ks_uniformity_values(values)
        assert result.p_value > 1e-3
        assert result.count == 5_000

    def test_shifted_values_fail(self):
        values = np.random.default_rng(1).uniform(-0.8, 1.0, 5_000)
        assert ks_uniformity_values(values).p_value < 1e-6

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            ks_uniformity_values([])

    def test_batch_coordinate(self, symmetrized_batch_n4):
        result = ks_uniformity(symmetrized_batch_n4, 2)
        assert result.coordinate == 2
        assert result.test == "ks"
        assert result.to_dict()["count"] == 20_000

    def test_chi_square(self, symmetrized_batch_n4):
        result = chi_square_uniformity(symmetrized_batch_n4, 0)
        assert result.test == "chi2"
        assert result.p_value > 1e-4

    def test_bonferroni(self):
        assert bonferroni_level(0.01, 100) == pytest.approx(1e-4)
        assert bonferroni_level(0.05, 0) == 0.05

    @pytest.mark.slow
    def test_ks_calibration(self):
        """Test that rejections at the 1% level on i.i.d. uniforms happen at 1% +- 0.5%"""
        rng = np.random.default_rng(99)
        reps = 10_000
        rejections = sum(ks_uniformity_values(rng.uniform(-1, 1, 1_000)).p_value < 0.01 for _ in range(reps))
        assert 0.005 <= rejections / reps <= 0.015

    @pytest.mark.slow
    def test_gr_model_n5_marginal_rejected(self):
        """Test that g_5(s) = 5 s^4 on M(5) does not give uniform marginals"""
        config = SamplerConfig(n=5, method="gr_model", seed=1, g_density=PowerDensity(4))
        batch = draw_batch(config, 10**6)
        assert min(ks_uniformity(batch, k).p_value for k in range(5)) < 1e-4

        expected = gr_marginal_cdf(5, PowerDensity(4), 0.5)
        observed = float(np.mean(batch.values[:, 0] <= 0.5))
        se = np.sqrt(expected * (1 - expected) / batch.count)
        assert abs(observed - expected) <= 3 * se


class TestCovariance:
    """Pairwise covariance and the sum identity"""

    def test_n2_degenerate(self):
        summary = covariance_summary(draw_batch(SamplerConfig(n=2, method="degenerate", seed=2), 20_000))
        assert summary.alpha_target == pytest.approx(-1 / 3)
        assert summary.covariance[0, 1] == pytest.approx(-1 / 3, abs=0.01)

    def test_n4_symmetrized_pairs(self, symmetrized_batch_n4):
        """Test every pair against -1/9"""
        summary = covariance_summary(symmetrized_batch_n4)
        assert summary.alpha_target == pytest.approx(-1 / 9)
        assert summary.pairs_within(4.0)

    @pytest.mark.parametrize("n", range(4, 13))
    def test_symmetrized_pairs(self, n):
        """Test every pair and the pooled estimate against -1/(3(n-1))"""
        pairs = n * (n - 1) // 2
        z = max(3.0, stats.norm.isf(bonferroni_level(0.001, 2 * pairs)))
        summary = covariance_summary(draw_batch(SamplerConfig(n=n, method="symmetrized", seed=100 + n), 200_000))
        assert summary.alpha_target == pytest.approx(-1 / (3 * (n - 1)))
        assert summary.pairs_within(z)
        z_pooled = stats.norm.isf(bonferroni_level(0.001, 2 * 9))
        assert abs(summary.alpha_hat - summary.alpha_target) <= z_pooled * summary.alpha_standard_error

    def test_n7_sum_identity(self):
        summary = covariance_summary(draw_batch(SamplerConfig(n=7, seed=7), 50_000))
        assert summary.sum_identity_target == pytest.approx(-7 / 3)
        assert summary.sum_identity_within(3.0)

    def test_alpha_hat(self, symmetrized_batch_n4):
        summary = covariance_summary(symmetrized_batch_n4)
        assert abs(summary.alpha_hat - summary.alpha_target) <= 4 * summary.alpha_standard_error

    def test_too_few_samples(self):
        with pytest.raises(InvalidInputError):
            covariance_summary(draw_batch(SamplerConfig(n=4, seed=1), 999))

    def test_to_dict(self, symmetrized_batch_n4):
        data = covariance_summary(symmetrized_batch_n4).to_dict()
        assert len(data["covariance"]) == 4
        assert data["sum_identity_target"] == pytest.approx(-4 / 3)


class TestBalance:
    """Worst row sums"""

    def test_sampler_output_balanced(self):
        report = balance_report(draw_batch(SamplerConfig(n=9, method="degenerate", seed=3), 1_000))
        assert report.balanced
        assert report.max_abs_sum <= report.threshold

    def test_unbalanced_row_flagged(self, unbalanced_batch):
        report = balance_report(unbalanced_batch)
        assert not report.balanced
        assert report.worst_row == 1
        assert report.violations == 1
        assert report.max_abs_sum == pytest.approx(0.9)
        assert report.to_dict()["balanced"] is False

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            balance_report(SampleBatch(values=np.empty((0, 3))))


class TestVarianceReduction:
    """Means of f over i.i.d. and balanced samples"""

    def test_linear_cancels(self):
        """Test that f(x) = 7x has exactly zero mean on every balanced sample"""
        result = variance_reduction_experiment([0.0, 7.0], 6, 1_000, SeededGenerator(1))
        assert result.max_abs_mean_rbs < 1e-12
        assert result.var_rbs < 1e-24
        assert result.var_iid == pytest.approx(49 / 3 / 6, rel=0.15)
        assert result.ratio < 1e-20

    @pytest.mark.parametrize("method", ["degenerate", "redistributed", "symmetrized"])
    @pytest.mark.parametrize("n", [6, 7])
    @pytest.mark.parametrize("c", [-10.0, -2.5, 1.0, 10.0])
    def test_linear_cancels_every_method(self, method, n, c):
        result = variance_reduction_experiment([0.0, c], n, 10_000, SeededGenerator(n), method=method)
        assert result.method == method
        assert result.max_abs_mean_rbs < 1e-12
        assert result.var_rbs < 1e-24
        assert result.var_iid == pytest.approx(c * c / 3 / n, rel=0.1)

    def test_constant(self):
        result = variance_reduction_experiment([5.0], 4, 200, SeededGenerator(2))
        assert result.var_iid == 0
        assert result.ratio is None
        assert result.to_dict()["ratio"] is None

    def test_quadratic_reduced(self):
        result = variance_reduction_experiment([0.0, 1.0, 1.0], 8, 5_000, SeededGenerator(3), method="symmetrized")
        assert result.method == "symmetrized"
        assert result.ratio < 0.5

    def test_too_few_trials(self):
        with pytest.raises(InvalidInputError):
            variance_reduction_experiment([0.0, 1.0], 4, 99, SeededGenerator(4))

    def test_bad_polynomial(self):
        with pytest.raises(InvalidInputError):
            variance_reduction_experiment(["a"], 4, 100, SeededGenerator(4))


class TestCoverage:
    """Cell occupancy and the cyclic-difference image"""

    def test_cell_keys(self):
        keys = cell_keys(np.array([[0.3, -0.3, 0.0, 1.0]]), 4)
        assert keys.tolist() == [[2, -2, 0, 4]]

    def test_l_image_violations(self):
        values = np.array([[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0], [1.0, -1.0] * 4])
        assert l_image_violations(values) == 1

    def test_redistributed_m4_stays_in_image(self):
        report = coverage_probe(SamplerConfig(n=8, method="redistributed", seed=4), cells=2, samples=20_000)
        assert report.l_image_violations == 0

    def test_symmetrized_leaves_image(self):
        report = coverage_probe(SamplerConfig(n=8, method="symmetrized", seed=4), cells=2, samples=20_000)
        assert report.l_image_violation_fraction > 0

    def test_odd_has_no_image_count(self):
        report = coverage_probe(SamplerConfig(n=5, seed=5), cells=2, samples=1_000)
        assert report.l_image_violations is None
        assert report.to_dict()["n"] == 5

    def test_interior_cells_n3(self):
        cells = interior_cells(3, 2, 0.1)
        assert cells
        assert all(len(c) == 3 and 0 not in c for c in cells)
        assert (2, 2, 2) not in cells

    def test_interior_cells_too_many(self):
        with pytest.raises(InvalidInputError):
            interior_cells(8, 8, 0.1)

    def test_probe_limits(self):
        with pytest.raises(InvalidInputError):
            coverage_probe(SamplerConfig(n=9, seed=1), cells=2, samples=10)
        with pytest.raises(InvalidInputError):
            coverage_probe(SamplerConfig(n=4, seed=1), cells=0, samples=10)

    @pytest.mark.slow
    def test_symmetrized_n5_fills_interior(self):
        report = coverage_probe(SamplerConfig(n=5, method="symmetrized", seed=6), cells=4, samples=10**6)
        assert report.interior_cells > 0
        assert report.empty_interior_cells == 0
