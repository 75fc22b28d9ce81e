import math
import unittest

import numpy as np
from scipy.stats import norm

from pydlista.debias import DebiasedEstimate
from pydlista.datagen import SparseSignal
from pydlista.uq import ConfidenceIntervals, std_normal_cdf
from pydlista.uq import std_normal_quantile, confidence_intervals, hitrates
from pydlista.uq import standardize, qq_data, quantile_correlation
from pydlista.uq import estimate_sigma_plugin, top_k_by_truth
from pydlista.utilities import DegenerateSignalError, DimensionError
from pydlista.utilities import ParameterError


class TestNormal(unittest.TestCase):
    """
    Tests std_normal_cdf and std_normal_quantile

    """

    def test_values(self):

        self.assertEqual(0.0, std_normal_quantile(0.5))
        self.assertAlmostEqual(1.959964, std_normal_quantile(0.975),
                               delta=1e-5)
        self.assertAlmostEqual(-1.959964, std_normal_quantile(0.025),
                               delta=1e-5)
        self.assertAlmostEqual(0.5, std_normal_cdf(0.0))
        self.assertAlmostEqual(0.975, std_normal_cdf(1.959963984540054))

    def test_against_scipy(self):

        grid = np.linspace(1e-6, 1.0 - 1e-6, 2001)
        np.testing.assert_allclose(norm.ppf(grid), std_normal_quantile(grid),
                                   rtol=0.0, atol=1e-9)

    def test_round_trip(self):

        grid = np.linspace(1e-4, 1.0 - 1e-4, 10000)
        quantiles = std_normal_quantile(grid)
        for p, q in zip(grid, quantiles):
            self.assertLessEqual(
                abs(0.5 * math.erfc(-q / math.sqrt(2.0)) - p), 1e-9)

    def test_symmetry(self):

        rng = np.random.default_rng(11)
        for p in rng.uniform(0.001, 0.999, 1000):
            self.assertAlmostEqual(-std_normal_quantile(1.0 - p),
                                   std_normal_quantile(p), delta=1e-10)

        self.assertTrue(np.all(np.diff(std_normal_quantile(
            np.linspace(0.01, 0.99, 99))) > 0.0))

    def test_errors(self):

        for p in (0.0, 1.0, -0.1, 1.5, float('nan')):
            self.assertRaises(ParameterError, std_normal_quantile, p)
        self.assertRaises(ParameterError, std_normal_quantile,
                          np.array([0.5, 1.0]))


class TestConfidenceIntervals(unittest.TestCase):
    """
    Tests confidence_intervals, ConfidenceIntervals and hitrates

    """

    def setUp(self):

        self.est = DebiasedEstimate(np.zeros(4), 2, 1.0, np.ones(4), 100)

    def test_radius(self):

        ci = confidence_intervals(self.est, 0.05)
        np.testing.assert_allclose(0.1959964 * np.ones(4), ci.radius,
                                   rtol=0.0, atol=1e-6)
        np.testing.assert_array_equal(-ci.radius, ci.lo)
        np.testing.assert_array_equal(ci.radius, ci.hi)
        self.assertEqual(0.05, ci.alpha)
        self.assertEqual(4, ci.N)

        half = confidence_intervals(self.est, 0.05, sigma_hat=0.5)
        np.testing.assert_allclose(ci.radius / 2.0, half.radius)

        wider = DebiasedEstimate(np.zeros(4), 2, 1.0, np.ones(4), 200)
        np.testing.assert_allclose(ci.radius / math.sqrt(2.0),
                                   confidence_intervals(wider, 0.05).radius)

        zero_column = DebiasedEstimate(np.zeros(2), 0, 1.0,
                                       np.array([0.0, 1.0]), 100)
        self.assertEqual(0.0,
                         confidence_intervals(zero_column, 0.05).radius[0])

    def test_degenerate(self):

        noiseless = DebiasedEstimate(np.ones(3), 0, 0.0, np.ones(3), 10)
        self.assertRaises(ParameterError, confidence_intervals, noiseless,
                          0.05)
        ci = confidence_intervals(noiseless, 0.05, allow_degenerate=True)
        np.testing.assert_array_equal(np.zeros(3), ci.radius)
        np.testing.assert_array_equal([True, True, False],
                                      ci.contains([1.0, 1.0, 1.5]))

        self.assertRaises(ParameterError, confidence_intervals, self.est,
                          0.05, -1.0, True)
        self.assertRaises(ParameterError, confidence_intervals, self.est, 0.0)
        self.assertRaises(ParameterError, confidence_intervals, self.est, 1.0)

    def test_hitrates(self):

        ci = confidence_intervals(self.est, 0.05)
        x_star = np.array([0.0, 0.1, 0.5, -ci.radius[3]])
        report = hitrates(ci, x_star)

        np.testing.assert_array_equal([True, True, False, True], report.hits)
        self.assertEqual(0.75, report.h)
        self.assertAlmostEqual(2.0 / 3.0, report.h_S)
        self.assertEqual(3, report.support_size)

        report = hitrates(ci, SparseSignal(x_star))
        self.assertAlmostEqual(2.0 / 3.0, report.h_S)

        report = hitrates(ci, np.zeros(4))
        self.assertEqual(1.0, report.h)
        self.assertIsNone(report.h_S)
        self.assertEqual(0, report.support_size)

        self.assertRaises(DimensionError, hitrates, ci, np.zeros(5))

    def test_contains(self):

        ci = ConfidenceIntervals([0.0, 1.0], [0.5, 0.0], 0.1)
        np.testing.assert_array_equal([True, True],
                                      ci.contains([0.5, 1.0]))
        np.testing.assert_array_equal([False, False],
                                      ci.contains([-0.6, 1.0 + 1e-12]))


class TestStandardize(unittest.TestCase):
    """
    Tests standardize, qq_data and quantile_correlation

    """

    def test_standardize(self):

        rng = np.random.default_rng(12)
        x_star = rng.standard_normal(6)
        cov_diag = rng.uniform(0.5, 2.0, 6)
        z = rng.standard_normal(6)
        x_u = x_star + 0.3 * np.sqrt(cov_diag) / math.sqrt(50) * z
        est = DebiasedEstimate(x_u, 1, 0.3, cov_diag, 50)

        np.testing.assert_allclose(z, standardize(est, x_star, 0.3))
        np.testing.assert_allclose(2.0 * z,
                                   standardize(est, x_star, 0.3, scale=2.0))

        self.assertRaises(DegenerateSignalError, standardize, est, x_star,
                          0.0)
        zero_column = DebiasedEstimate(np.zeros(2), 0, 1.0,
                                       np.array([0.0, 1.0]), 100)
        self.assertRaises(DegenerateSignalError, standardize, zero_column,
                          np.zeros(2), 1.0)

    def test_qq_data(self):

        positions = (np.arange(1, 101) - 0.5) / 100
        identity = std_normal_quantile(positions)
        shuffled = np.random.default_rng(13).permutation(identity)

        pairs = qq_data(shuffled)
        self.assertEqual((100, 2), pairs.shape)
        np.testing.assert_array_equal(pairs[:, 0], pairs[:, 1])
        self.assertAlmostEqual(1.0, quantile_correlation(shuffled))

        self.assertEqual(0.0, quantile_correlation(np.ones(10)))
        self.assertRaises(DimensionError, qq_data, np.ones(1))

    def test_gaussian_sample(self):

        sample = np.random.default_rng(14).standard_normal(10000)
        self.assertGreaterEqual(quantile_correlation(sample), 0.999)


class TestPlugin(unittest.TestCase):
    """
    Tests estimate_sigma_plugin and top_k_by_truth

    """

    def test_estimate_sigma_plugin(self):

        entries = np.vstack([np.eye(3), np.zeros((1, 3))])
        b = np.array([1.0, 2.0, 2.0, 0.0])
        x_k = np.array([1.0, 0.0, 0.0])
        self.assertAlmostEqual(math.sqrt(8.0 / 3.0),
                               estimate_sigma_plugin(entries, b, x_k))

        self.assertRaises(DegenerateSignalError, estimate_sigma_plugin,
                          np.ones((2, 3)), np.ones(2), np.ones(3))

    def test_top_k_by_truth(self):

        x_star = np.random.default_rng(15).standard_normal(100)

        order = top_k_by_truth(x_star)
        self.assertEqual(50, len(order))
        magnitudes = np.abs(x_star[order])
        self.assertTrue(np.all(np.diff(magnitudes) <= 0.0))
        self.assertGreaterEqual(magnitudes[-1],
                                np.sort(np.abs(x_star))[-50])

        np.testing.assert_array_equal(
            [1, 0, 2], top_k_by_truth([1.0, -2.0, 1.0]))
        np.testing.assert_array_equal(
            [1], top_k_by_truth(SparseSignal(np.array([0.0, 3.0])), 1))

        self.assertRaises(ParameterError, top_k_by_truth, x_star, 0)
        self.assertRaises(DimensionError, top_k_by_truth, [])


if __name__ == '__main__':
    unittest.main()
