import unittest

import numpy as np

from pydlista.layers import ListaLayer, MIN_THRESHOLD
from pydlista.ista import soft_threshold
from pydlista.utilities import DimensionError, ParameterError


class TestListaLayer(unittest.TestCase):
    """
    Tests ListaLayer

    """

    def setUp(self):

        rng = np.random.default_rng(12)
        self.entries = rng.standard_normal((3, 5))
        self.layer = ListaLayer(1, rng.standard_normal((3, 5)), 0.2)
        self.b = rng.standard_normal(3)
        self.x = rng.standard_normal(5)

    def test__init__(self):

        self.assertEqual(1, self.layer.layer_no)
        self.assertEqual((3, 5), self.layer.shape)
        self.assertEqual(1.0, self.layer.weight_multiplier)
        self.assertEqual(1.0, self.layer.threshold_multiplier)

        self.assertRaises(ParameterError, ListaLayer, 0, np.ones((3, 5)), 0.2)
        self.assertRaises(ParameterError, ListaLayer, 1, np.ones((3, 5)), 0.0)
        self.assertRaises(DimensionError, ListaLayer, 1, np.ones(5), 0.2)

    def test_copy(self):

        copy = self.layer.copy()
        copy.weights[0, 0] += 1.0
        copy.set_threshold(0.7)
        copy.decay_multipliers(0.5)

        self.assertNotEqual(copy.weights[0, 0], self.layer.weights[0, 0])
        self.assertEqual(0.2, self.layer.threshold)
        self.assertEqual(1.0, self.layer.weight_multiplier)

    def test_set_threshold(self):

        self.layer.set_threshold(0.4)
        self.assertEqual(0.4, self.layer.threshold)
        self.layer.set_threshold(-1.0)
        self.assertEqual(MIN_THRESHOLD, self.layer.threshold)

    def test_decay_multipliers(self):

        self.layer.decay_multipliers(0.3)
        self.layer.decay_multipliers(0.3)
        self.assertAlmostEqual(0.09, self.layer.weight_multiplier)
        self.assertAlmostEqual(0.09, self.layer.threshold_multiplier)

    def test_feed_forward(self):

        residual, pre_activation, output = self.layer.feed_forward(
            self.entries, self.b, self.x)

        np.testing.assert_allclose(self.b - self.entries @ self.x, residual)
        np.testing.assert_allclose(
            self.x + self.layer.weights.T @ residual, pre_activation)
        np.testing.assert_array_equal(soft_threshold(pre_activation, 0.2),
                                      output)

    def test_feed_forward_batch(self):

        rng = np.random.default_rng(3)
        b = rng.standard_normal((3, 4))
        x = rng.standard_normal((5, 4))

        output = self.layer.feed_forward(self.entries, b, x)[2]
        for column in range(4):
            single = self.layer.feed_forward(self.entries, b[:, column],
                                             x[:, column])[2]
            np.testing.assert_allclose(single, output[:, column],
                                       rtol=0.0, atol=1e-12)

    def test_back_propagate(self):

        cache = self.layer.feed_forward(self.entries, self.b, self.x)
        residual, pre_activation, _ = cache
        grad_output = np.ones(5)

        grad_weights, grad_threshold, grad_input = \
            self.layer.back_propagate(self.entries, cache, grad_output)

        active = np.abs(pre_activation) > 0.2
        grad_pre = np.where(active, 1.0, 0.0)
        np.testing.assert_allclose(np.outer(residual, grad_pre), grad_weights)
        self.assertAlmostEqual(-float(np.sum(np.sign(pre_activation)[active])),
                               grad_threshold)
        np.testing.assert_allclose(
            grad_pre - self.entries.T @ (self.layer.weights @ grad_pre),
            grad_input)

    def test_back_propagate_batch(self):

        rng = np.random.default_rng(4)
        b = rng.standard_normal((3, 6))
        x = rng.standard_normal((5, 6))
        grad_output = rng.standard_normal((5, 6))

        cache = self.layer.feed_forward(self.entries, b, x)
        grad_weights, grad_threshold, grad_input = \
            self.layer.back_propagate(self.entries, cache, grad_output)

        total_weights = np.zeros((3, 5))
        total_threshold = 0.0
        for column in range(6):
            single = self.layer.feed_forward(self.entries, b[:, column],
                                             x[:, column])
            gw, gl, gi = self.layer.back_propagate(
                self.entries, single, grad_output[:, column])
            total_weights += gw
            total_threshold += gl
            np.testing.assert_allclose(gi, grad_input[:, column],
                                       rtol=0.0, atol=1e-12)

        np.testing.assert_allclose(total_weights, grad_weights,
                                   rtol=0.0, atol=1e-12)
        self.assertAlmostEqual(total_threshold, grad_threshold, places=12)


if __name__ == '__main__':
    unittest.main()
