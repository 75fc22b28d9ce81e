import unittest

import numpy as np

from pydlista.datagen import gen_dataset
from pydlista.ista import IstaConfig
from pydlista.lista import init_from_ista, forward, backward
from pydlista.measurement import gen_gaussian
from pydlista.training import TrainConfig, AdamState, adam_update
from pydlista.training import nmse, layer_nmse, split_dataset
from pydlista.training import train_stagewise, NMSE_FLOOR_DB
from pydlista.training import stage_best_nmse, TraceRecord
from pydlista.training import DEFAULT_ALPHA0, FULL_PATIENCE
from pydlista.training import FULL_MAX_STAGE_ITERS
from pydlista.utilities import DegenerateSignalError, ParameterError


def small_config(patience=20, max_stage_iters=60):

    cfg = TrainConfig()
    cfg.set_patience(patience)
    cfg.set_max_stage_iters(max_stage_iters)
    cfg.set_batch_size(16)
    cfg.set_eval_interval(5)
    cfg.set_alpha0(0.001)
    return cfg


class TestTrainConfig(unittest.TestCase):
    """
    Tests TrainConfig

    """

    def setUp(self):

        self.cfg = TrainConfig()

    def test_defaults(self):

        self.assertEqual(DEFAULT_ALPHA0, self.cfg.get_alpha0())
        self.assertEqual((0.2, 0.02), self.cfg.get_rate_decays())
        self.assertEqual(0.3, self.cfg.get_gamma())
        self.assertEqual(400, self.cfg.get_patience())
        self.assertEqual(5000, self.cfg.get_max_stage_iters())
        self.assertEqual(64, self.cfg.get_batch_size())
        self.assertEqual(0.1, self.cfg.get_validation_fraction())

        full = TrainConfig.full_scale_preset()
        self.assertEqual(FULL_PATIENCE, full.get_patience())
        self.assertEqual(FULL_MAX_STAGE_ITERS, full.get_max_stage_iters())

    def test_setters(self):

        self.assertRaises(ParameterError, self.cfg.set_alpha0, 0.0)
        self.assertRaises(ParameterError, self.cfg.set_rate_decays, [0.2])
        self.assertRaises(ParameterError, self.cfg.set_rate_decays,
                          [0.2, -0.1])
        self.assertRaises(ParameterError, self.cfg.set_gamma, 1.0)
        self.assertRaises(ParameterError, self.cfg.set_patience, 6000)
        self.assertRaises(ParameterError, self.cfg.set_max_stage_iters, 10)
        self.assertRaises(ParameterError, self.cfg.set_batch_size, 0)
        self.assertRaises(ParameterError, self.cfg.set_batch_size, 1.5)
        self.assertRaises(ParameterError, self.cfg.set_validation_fraction,
                          1.0)
        self.assertRaises(ParameterError, self.cfg.set_eval_interval, 0)

        self.cfg.set_patience(0)
        self.assertEqual(0, self.cfg.get_patience())

    def test_items(self):

        self.cfg.set_rate_decays([0.5, 0.05])
        self.cfg.set_seed(9)
        copy = TrainConfig()
        for key, value in self.cfg.items():
            copy.set_item(key, value)

        self.assertEqual(self.cfg.items(), copy.items())
        self.assertEqual((0.5, 0.05), copy.get_rate_decays())
        self.assertEqual(self.cfg.config_hash(), copy.config_hash())
        self.assertNotEqual(TrainConfig().config_hash(), copy.config_hash())

        copy.set_item('patience', '8000')
        self.assertEqual(8000, copy.get_patience())
        self.assertRaises(ParameterError, copy.set_item, 'learnrate', '1')
        self.assertRaises(ParameterError, copy.set_item, 'seed', 'x')


class TestAdam(unittest.TestCase):
    """
    Tests adam_update

    """

    def setUp(self):

        self.matrix = gen_gaussian(6, 12, 1)
        self.params = init_from_ista(self.matrix, 20.0, 0.05, 2)
        dataset = gen_dataset(self.matrix, 8, 0.3, 20.0, 1)
        self.batch = (dataset.signal_matrix(), dataset.observation_matrix())

    def test_adam_update(self):

        rate = 0.01
        beta1, beta2, epsilon = 0.9, 0.999, 1e-8
        self.params.layers[1].decay_multipliers(0.3)

        expected = [layer.copy() for layer in self.params.layers]
        first = [[np.zeros((6, 12)), 0.0] for _ in range(2)]
        second = [[np.zeros((6, 12)), 0.0] for _ in range(2)]

        state = AdamState()
        for step in range(1, 4):
            grads = backward(self.params, self.batch)
            for k, layer in enumerate(expected):
                for slot, grad, multiplier in (
                        (0, grads.weights[k], layer.weight_multiplier),
                        (1, grads.thresholds[k],
                         layer.threshold_multiplier)):
                    first[k][slot] = (beta1 * first[k][slot]
                                      + (1.0 - beta1) * grad)
                    second[k][slot] = (beta2 * second[k][slot]
                                       + (1.0 - beta2) * grad * grad)
                    first_hat = first[k][slot] / (1.0 - beta1 ** step)
                    second_hat = second[k][slot] / (1.0 - beta2 ** step)
                    update = (rate * multiplier * first_hat
                              / (np.sqrt(second_hat) + epsilon))
                    if slot == 0:
                        layer.weights = layer.weights - update
                    else:
                        layer.set_threshold(layer.threshold - float(update))

            adam_update(state, self.params, grads, rate)
            self.assertEqual(step, state.step_count)
            for layer, reference in zip(self.params.layers, expected):
                np.testing.assert_array_equal(reference.weights,
                                              layer.weights)
                self.assertEqual(reference.threshold, layer.threshold)

    def test_first_step(self):

        before = self.params.copy()
        grads = backward(self.params, self.batch)
        adam_update(AdamState(), self.params, grads, 0.01, layers=[2])

        np.testing.assert_array_equal(before.layers[0].weights,
                                      self.params.layers[0].weights)
        self.assertEqual(before.layers[0].threshold,
                         self.params.layers[0].threshold)

        change = np.abs(self.params.layers[1].weights
                        - before.layers[1].weights)
        moved = np.abs(grads.weights[1]) > 1e-6
        self.assertTrue(np.any(moved))
        np.testing.assert_allclose(0.01, change[moved], rtol=1e-2)

        self.assertRaises(ParameterError, adam_update, AdamState(),
                          self.params, grads, 0.0)


class TestNmse(unittest.TestCase):
    """
    Tests nmse and layer_nmse

    """

    def test_nmse(self):

        x_star = np.array([1.0, -2.0, 0.0])
        self.assertAlmostEqual(0.0, nmse(np.zeros(3), x_star))
        self.assertAlmostEqual(-20.0, nmse(0.9 * x_star, x_star))
        self.assertEqual(NMSE_FLOOR_DB, nmse(x_star, x_star))
        self.assertRaises(DegenerateSignalError, nmse, x_star, np.zeros(3))

        batch = np.column_stack([x_star, 2.0 * x_star])
        self.assertAlmostEqual(-20.0, nmse(0.9 * batch, batch))

    def test_layer_nmse(self):

        matrix = gen_gaussian(10, 20, 2)
        cfg = IstaConfig.for_matrix(matrix)
        params = init_from_ista(matrix, cfg.mu, cfg.lam, 4)
        dataset = gen_dataset(matrix, 10, 0.2, 20.0, 2)
        batch = (dataset.signal_matrix(), dataset.observation_matrix())

        values = layer_nmse(params, batch)
        self.assertEqual(4, len(values))
        iterates = forward(params, batch[1])
        for value, iterate in zip(values, iterates):
            self.assertAlmostEqual(nmse(iterate, batch[0]), value)


class TestTrainStagewise(unittest.TestCase):
    """
    Tests split_dataset and train_stagewise

    """

    def setUp(self):

        self.matrix = gen_gaussian(10, 20, 3)
        self.dataset = gen_dataset(self.matrix, 60, 0.2, 20.0, 3)

    def test_split_dataset(self):

        train, validation = split_dataset(self.dataset, 0.1)
        self.assertEqual((20, 54), train[0].shape)
        self.assertEqual((10, 54), train[1].shape)
        self.assertEqual((20, 6), validation[0].shape)
        np.testing.assert_array_equal(self.dataset.signal_matrix(range(54, 60)),
                                      validation[0])

    def test_train_stagewise(self):

        cfg = small_config()
        params, trace = train_stagewise(self.matrix, self.dataset, cfg, 2)

        self.assertEqual(2, params.K)
        self.assertAlmostEqual(0.09, params.layers[0].weight_multiplier)
        self.assertAlmostEqual(0.3, params.layers[1].threshold_multiplier)
        self.assertEqual([1, 2], sorted(set(record.stage for record in trace)))
        self.assertEqual(set(['layer', 'tune1', 'tune2']),
                         set(record.phase for record in trace))

        _, validation = split_dataset(self.dataset, 0.1)
        final = nmse(forward(params, validation[1])[-1], validation[0])
        stage_start = [record.nmse for record in trace
                       if record.stage == 2 and record.phase == 'layer'
                       and record.update == 0][0]
        self.assertLessEqual(final, stage_start)

        again, trace_again = train_stagewise(self.matrix, self.dataset, cfg,
                                             2)
        self.assertEqual(trace, trace_again)
        for layer, other in zip(params.layers, again.layers):
            np.testing.assert_array_equal(layer.weights, other.weights)

    def test_zero_patience(self):

        cfg = small_config(patience=0)
        params, trace = train_stagewise(self.matrix, self.dataset, cfg, 2)

        ista_cfg = IstaConfig.for_matrix(self.matrix)
        for layer in params.layers:
            np.testing.assert_array_equal(self.matrix.entries / ista_cfg.mu,
                                          layer.weights)
            self.assertEqual(ista_cfg.lam, layer.threshold)
        self.assertTrue(all(record.update == 0 for record in trace))

    def test_divergence(self):

        cfg = small_config()
        cfg.set_divergence_db(-1000.0)
        with self.assertLogs('pydlista.training', level='ERROR'):
            params, trace = train_stagewise(self.matrix, self.dataset, cfg,
                                            2)

        self.assertEqual(2, len([record for record in trace
                                 if record.phase == 'diverged']))
        ista_cfg = IstaConfig.for_matrix(self.matrix)
        for layer in params.layers:
            np.testing.assert_array_equal(self.matrix.entries / ista_cfg.mu,
                                          layer.weights)

    def test_errors(self):

        cfg = small_config()
        self.assertRaises(ParameterError, train_stagewise, self.matrix,
                          self.dataset, cfg, 0)


class TestTinyInstance(unittest.TestCase):
    """
    Tests training against its own ISTA initialization

    """

    def setUp(self):

        self.matrix = gen_gaussian(16, 32, 4)
        self.dataset = gen_dataset(self.matrix, 200, 0.1, 20.0, 4)
        _, self.validation = split_dataset(self.dataset, 0.1)
        self.ista_cfg = IstaConfig.for_matrix(self.matrix)

    def test_beats_ista(self):

        cfg = small_config(patience=100, max_stage_iters=600)
        params, trace = train_stagewise(self.matrix, self.dataset, cfg, 1)

        x_val, b_val = self.validation
        untrained = init_from_ista(self.matrix, self.ista_cfg.mu,
                                   self.ista_cfg.lam, 1)
        ista_db = nmse(forward(untrained, b_val)[-1], x_val)
        final_db = nmse(forward(params, b_val)[-1], x_val)

        self.assertAlmostEqual(ista_db, trace[0].nmse, places=9)
        self.assertLess(final_db, ista_db)

    def test_stage_best_nonincreasing(self):

        cfg = small_config(patience=100, max_stage_iters=300)
        params, trace = train_stagewise(self.matrix, self.dataset, cfg, 3)

        best = stage_best_nmse(trace)
        self.assertEqual(3, len(best))
        for earlier, later in zip(best, best[1:]):
            self.assertLessEqual(later, earlier)

        x_val, b_val = self.validation
        self.assertAlmostEqual(
            best[-1], nmse(forward(params, b_val)[-1], x_val), places=9)

    def test_stage_best_nmse(self):

        trace = [TraceRecord(1, 'layer', 0, -1.0),
                 TraceRecord(1, 'tune1', 5, -2.5),
                 TraceRecord(2, 'layer', 0, -2.0),
                 TraceRecord(2, 'diverged', 0, 60.0),
                 TraceRecord(3, 'diverged', 0, 70.0)]
        self.assertEqual([-2.5, -2.0], stage_best_nmse(trace))
        self.assertEqual([], stage_best_nmse([]))


if __name__ == '__main__':
    unittest.main()
