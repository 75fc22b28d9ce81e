#!/usr/bin/env python
#
#   Copyright (C) 2026  pydlista developers

#   This program is free software: you can redistribute it and/or modify
#   it under the terms of the GNU General Public License as published by
#   the Free Software Foundation, either version 3 of the License, or
#   (at your option) any later version.

#   This program is distributed in the hope that it will be useful,
#   but WITHOUT ANY WARRANTY; without even the implied warranty of
#   MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#   GNU General Public License for more details.

#   You should have received a copy of the GNU General Public License
#   along with this program.  If not, see <http://www.gnu.org/licenses/>.

#   See the LICENSE file included in this archive
#

"""
This module trains the LISTA-CP network layer by layer with Adam.

For stage tau = 1..K:

    * layer tau is trained alone at the initial rate alpha0,
    * all layers 1..tau are fine tuned at alpha1 = 0.2 alpha0, then at
      alpha2 = 0.02 alpha0,
    * the learning multipliers of layers 1..tau are multiplied by gamma.

Each phase watches the NMSE of x^tau on a held-out validation split and
stops when it has not improved for `patience` updates or after
`max_stage_iters` updates; the best parameters seen are kept.

"""

from collections import namedtuple
import hashlib
import logging
import math

import numpy as np

from pydlista.ista import IstaConfig, DEFAULT_LASSO_LAMBDA
from pydlista.lista import init_from_ista, forward, loss_and_gradients
from pydlista.lista import as_batch
from pydlista.utilities import ParameterError, DegenerateSignalError
from pydlista.utilities import TrainingDivergedError, check_count
from pydlista.utilities import STREAM_BATCH, derive_rng

DEFAULT_ALPHA0 = 0.0005
DEFAULT_RATE_DECAYS = (0.2, 0.02)
DEFAULT_GAMMA = 0.3
DEFAULT_PATIENCE = 400
DEFAULT_MAX_STAGE_ITERS = 5000
DEFAULT_BATCH_SIZE = 64
DEFAULT_SEED = 0
DEFAULT_VALIDATION_FRACTION = 0.1
DEFAULT_EVAL_INTERVAL = 10
DEFAULT_DIVERGENCE_DB = 50.0

FULL_PATIENCE = 4000
FULL_MAX_STAGE_ITERS = 200000

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

NMSE_FLOOR_DB = -300.0

PHASE_NEW_LAYER = 'layer'
PHASE_FINE_TUNE_1 = 'tune1'
PHASE_FINE_TUNE_2 = 'tune2'
PHASE_DIVERGED = 'diverged'

logger = logging.getLogger(__name__)

TraceRecord = namedtuple('TraceRecord', ['stage', 'phase', 'update', 'nmse'])

TRAIN_KEYS = ['alpha0', 'rate_decays', 'gamma', 'patience', 'max_stage_iters',
              'batch_size', 'seed', 'validation_fraction', 'eval_interval',
              'divergence_db']


class TrainConfig(object):
    """
    This class holds the parameters of the stage-wise training schedule.

    The defaults are the desk-scale settings; full_scale_preset returns the
    full-scale patience and stage length.

    """

    def __init__(self):
        """
        All parameters start at their default values and are changed
        through the set_ functions, which validate them.

        """

        self._alpha0 = DEFAULT_ALPHA0
        self._rate_decays = DEFAULT_RATE_DECAYS
        self._gamma = DEFAULT_GAMMA
        self._patience = DEFAULT_PATIENCE
        self._max_stage_iters = DEFAULT_MAX_STAGE_ITERS
        self._batch_size = DEFAULT_BATCH_SIZE
        self._seed = DEFAULT_SEED
        self._validation_fraction = DEFAULT_VALIDATION_FRACTION
        self._eval_interval = DEFAULT_EVAL_INTERVAL
        self._divergence_db = DEFAULT_DIVERGENCE_DB

    @classmethod
    def full_scale_preset(cls):
        """
        Returns a configuration with the full-scale stopping rule: patience
        4000 and 200000 updates per phase.

        """

        cfg = cls()
        cfg.set_max_stage_iters(FULL_MAX_STAGE_ITERS)
        cfg.set_patience(FULL_PATIENCE)
        return cfg

    def set_alpha0(self, alpha0):
        """
        This function sets the initial learning rate.

        """

        alpha0 = float(alpha0)
        if not alpha0 > 0.0:
            raise ParameterError(
                "The initial rate, %s, must be positive" % (alpha0))
        self._alpha0 = alpha0

    def get_alpha0(self):
        return self._alpha0

    def set_rate_decays(self, rate_decays):
        """
        This function sets the two fine tuning rate factors, so that
        alpha1 = rate_decays[0] alpha0 and alpha2 = rate_decays[1] alpha0.

        """

        rate_decays = tuple(float(item) for item in rate_decays)
        if len(rate_decays) != 2 or min(rate_decays) <= 0.0:
            raise ParameterError(
                "rate_decays, %s, must be two positive factors" % (
                    rate_decays,))
        self._rate_decays = rate_decays

    def get_rate_decays(self):
        return self._rate_decays

    def set_gamma(self, gamma):
        """
        This function sets the factor the learning multipliers of trained
        layers are multiplied by after every stage.

        """

        gamma = float(gamma)
        if not 0.0 < gamma < 1.0:
            raise ParameterError(
                "gamma, %s, must be strictly between 0 and 1" % (gamma))
        self._gamma = gamma

    def get_gamma(self):
        return self._gamma

    def set_patience(self, patience):
        """
        This function sets the number of updates without a validation
        improvement after which a phase ends.  It cannot exceed
        max_stage_iters.

        """

        patience = check_count(patience, 'patience', 0)
        if patience > self._max_stage_iters:
            raise ParameterError(
                "patience, %s, cannot exceed max_stage_iters, %s" % (
                    patience, self._max_stage_iters))
        self._patience = patience

    def get_patience(self):
        return self._patience

    def set_max_stage_iters(self, max_stage_iters):
        """
        This function sets the maximum number of updates per phase.

        """

        max_stage_iters = check_count(max_stage_iters, 'max_stage_iters', 0)
        if max_stage_iters < self._patience:
            raise ParameterError(
                "max_stage_iters, %s, cannot be below patience, %s" % (
                    max_stage_iters, self._patience))
        self._max_stage_iters = max_stage_iters

    def get_max_stage_iters(self):
        return self._max_stage_iters

    def set_batch_size(self, batch_size):
        self._batch_size = check_count(batch_size, 'batch_size', 1)

    def get_batch_size(self):
        return self._batch_size

    def set_seed(self, seed):
        self._seed = check_count(seed, 'seed', 0)

    def get_seed(self):
        return self._seed

    def set_validation_fraction(self, fraction):
        """
        This function sets the share of the dataset held out for the
        validation NMSE.

        """

        fraction = float(fraction)
        if not 0.0 < fraction < 1.0:
            raise ParameterError(
                "validation_fraction, %s, must be in (0, 1)" % (fraction))
        self._validation_fraction = fraction

    def get_validation_fraction(self):
        return self._validation_fraction

    def set_eval_interval(self, eval_interval):
        """
        This function sets how many updates pass between validation NMSE
        evaluations.

        """

        self._eval_interval = check_count(eval_interval, 'eval_interval', 1)

    def get_eval_interval(self):
        return self._eval_interval

    def set_divergence_db(self, divergence_db):
        self._divergence_db = float(divergence_db)

    def get_divergence_db(self):
        return self._divergence_db

    def items(self):
        """
        Returns (key, text value) pairs for every parameter, in the order
        of TRAIN_KEYS.

        """

        values = []
        for key in TRAIN_KEYS:
            value = getattr(self, 'get_%s' % (key))()
            if key == 'rate_decays':
                value = ', '.join(repr(item) for item in value)
            else:
                value = repr(value)
            values.append((key, value))

        return values

    def set_item(self, key, text):
        """
        This function sets a parameter from its text value, as read from a
        configuration file.

        """

        if key not in TRAIN_KEYS:
            raise ParameterError("Unknown training key: %s" % (key))
        if key == 'rate_decays':
            value = [item.strip() for item in text.split(',')]
        elif key in ('patience', 'max_stage_iters', 'batch_size', 'seed',
                     'eval_interval'):
            value = _parse_int(text, key)
        else:
            value = text

        if key == 'patience' and value > self._max_stage_iters:
            #   Keys may arrive in any order; raise the cap first.
            self._max_stage_iters = value
        getattr(self, 'set_%s' % (key))(value)

    def config_hash(self):
        """
        Returns a short hash of the parameters, stored in checkpoints.

        """

        text = '\n'.join('%s = %s' % item for item in self.items())
        return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


class AdamState(object):
    """
    This class holds the Adam moments for the parameters it has seen,
    keyed by (layer_no, 'W' or 'lam'), and the step count.

    """

    def __init__(self, beta1=ADAM_BETA1, beta2=ADAM_BETA2,
                 epsilon=ADAM_EPSILON):
        self.first_moment = {}
        self.second_moment = {}
        self.step_count = 0
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon


def adam_update(state, params, grads, rate, layers=None):
    """
    This function takes one bias-corrected Adam step on the given layers
    (numbers 1..K, all by default).  The rate applied to a parameter is
    rate times that parameter's learning multiplier.  params and state are
    updated in place and returned.

    """

    if not rate > 0.0:
        raise ParameterError("The learning rate, %s, must be positive" % (
            rate))
    if layers is None:
        layers = range(1, params.K + 1)

    state.step_count += 1
    first_correction = 1.0 - state.beta1 ** state.step_count
    second_correction = 1.0 - state.beta2 ** state.step_count

    for layer_no in layers:
        layer = params.layers[layer_no - 1]

        step = _adam_step(state, (layer_no, 'W'),
                          grads.weights[layer_no - 1],
                          rate * layer.weight_multiplier,
                          first_correction, second_correction)
        layer.weights -= step

        step = _adam_step(state, (layer_no, 'lam'),
                          np.float64(grads.thresholds[layer_no - 1]),
                          rate * layer.threshold_multiplier,
                          first_correction, second_correction)
        layer.set_threshold(layer.threshold - float(step))

    return params, state


def _adam_step(state, key, grad, rate, first_correction, second_correction):
    """
    Updates the moments of one parameter and returns the step to subtract.

    """

    if key not in state.first_moment:
        state.first_moment[key] = np.zeros_like(grad)
        state.second_moment[key] = np.zeros_like(grad)

    first = state.beta1 * state.first_moment[key] + (1.0 - state.beta1) * grad
    second = (state.beta2 * state.second_moment[key]
              + (1.0 - state.beta2) * grad * grad)
    state.first_moment[key] = first
    state.second_moment[key] = second

    first_hat = first / first_correction
    second_hat = second / second_correction

    return rate * first_hat / (np.sqrt(second_hat) + state.epsilon)


def nmse(x, x_star):
    """
    This function returns 10 log10(||x - x*||^2 / ||x*||^2) in decibels.
    For batches (samples as columns) the squared norms are summed over the
    batch.  A zero error returns the floor of -300 dB.

    """

    x = np.asarray(x, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    reference = float(np.sum(x_star * x_star))
    if reference == 0.0:
        raise DegenerateSignalError("The NMSE is undefined for x_star = 0")

    error = float(np.sum((x - x_star) ** 2))
    if error == 0.0:
        return NMSE_FLOOR_DB

    return max(10.0 * math.log10(error / reference), NMSE_FLOOR_DB)


def layer_nmse(params, batch):
    """
    This function returns the NMSE of every iterate x^1..x^K on a batch.

    """

    x_star, b = as_batch(batch)
    return [nmse(x, x_star) for x in forward(params, b)]


def split_dataset(dataset, validation_fraction):
    """
    This function holds out the last share of the dataset for validation
    and returns ((X_train, B_train), (X_val, B_val)).

    """

    n = dataset.n
    n_val = int(round(n * validation_fraction))
    n_val = min(max(n_val, 1), n - 1) if n > 1 else 0
    if n_val == 0:
        raise ParameterError("A dataset of %s sample cannot be split" % (n))

    train = range(0, n - n_val)
    validation = range(n - n_val, n)

    return ((dataset.signal_matrix(train), dataset.observation_matrix(train)),
            (dataset.signal_matrix(validation),
             dataset.observation_matrix(validation)))


def train_stagewise(matrix, dataset, cfg, K, lasso_lambda=DEFAULT_LASSO_LAMBDA,
                    params=None):
    """
    This function trains a K layer LISTA-CP network on the dataset with the
    stage-wise schedule, starting from the ISTA initialization (or from
    params when given), and returns (params, nmse_trace).

    The trace holds a TraceRecord for every validation evaluation.  When
    the validation NMSE climbs above cfg.get_divergence_db(), the rest of
    the stage is skipped, the best parameters are restored and the failure
    is logged and recorded in the trace.

    """

    if int(K) < 1:
        raise ParameterError("K, %s, must be at least 1" % (K))
    K = int(K)

    if params is None:
        ista_cfg = IstaConfig.for_matrix(matrix, lasso_lambda)
        params = init_from_ista(matrix, ista_cfg.mu, ista_cfg.lam, K)
    else:
        params = params.copy()

    train, validation = split_dataset(dataset, cfg.get_validation_fraction())
    rng = derive_rng(cfg.get_seed(), STREAM_BATCH)
    alpha0 = cfg.get_alpha0()
    phases = [(PHASE_NEW_LAYER, alpha0),
              (PHASE_FINE_TUNE_1, alpha0 * cfg.get_rate_decays()[0]),
              (PHASE_FINE_TUNE_2, alpha0 * cfg.get_rate_decays()[1])]

    trace = []
    for stage in range(1, K + 1):
        for phase, rate in phases:
            if phase == PHASE_NEW_LAYER:
                trainable = [stage]
            else:
                trainable = list(range(1, stage + 1))
            try:
                params = _train_phase(params, train, validation, cfg, rng,
                                      stage, phase, rate, trainable, trace)
            except TrainingDivergedError as exc:
                logger.error("%s, skipping the rest of the stage", exc)
                trace.append(
                    TraceRecord(stage, PHASE_DIVERGED, 0, exc.nmse_db))
                break

        for layer in params.layers[:stage]:
            layer.decay_multipliers(cfg.get_gamma())

    logger.info("best validation NMSE per stage: %s", ', '.join(
        '%.3f' % (value) for value in stage_best_nmse(trace)))

    return params, trace


def stage_best_nmse(trace):
    """
    This function returns the best validation NMSE of every stage in the
    trace, in stage order.  Divergence records are left out.

    """

    best = {}
    for record in trace:
        if record.phase == PHASE_DIVERGED:
            continue
        if record.stage not in best or record.nmse < best[record.stage]:
            best[record.stage] = record.nmse

    return [best[stage] for stage in sorted(best)]


def _train_phase(params, train, validation, cfg, rng, stage, phase, rate,
                 trainable, trace):
    """
    Runs one phase and returns the best parameters it saw.  On divergence
    the best parameters are copied back into params before raising.

    """

    x_train, b_train = train
    n_train = x_train.shape[1]
    batch_size = min(cfg.get_batch_size(), n_train)

    best = _validation_nmse(params, validation, stage)
    best_params = params.copy()
    trace.append(TraceRecord(stage, phase, 0, best))
    logger.info("stage %s phase %s: start at %.3f dB, rate %s", stage, phase,
                best, rate)

    state = AdamState()
    updates = 0
    since_improvement = 0
    while (updates < cfg.get_max_stage_iters()
           and since_improvement < cfg.get_patience()):
        columns = rng.choice(n_train, size=batch_size, replace=False)
        _, grads = loss_and_gradients(
            params, (x_train[:, columns], b_train[:, columns]), stage)
        adam_update(state, params, grads, rate, trainable)
        updates += 1
        since_improvement += 1

        if updates % cfg.get_eval_interval() == 0:
            current = _validation_nmse(params, validation, stage)
            trace.append(TraceRecord(stage, phase, updates, current))
            logger.debug("stage %s phase %s update %s: %.3f dB", stage, phase,
                         updates, current)
            if not current <= cfg.get_divergence_db():
                _restore(params, best_params)
                raise TrainingDivergedError(stage, current)
            if current < best:
                best = current
                best_params = params.copy()
                since_improvement = 0

    logger.info("stage %s phase %s: %s updates, best %.3f dB", stage, phase,
                updates, best)

    return best_params


def _restore(params, best_params):
    """
    Copies the layers of best_params into params.

    """

    params.layers = [layer.copy() for layer in best_params.layers]


def _validation_nmse(params, validation, depth):
    """
    NMSE of x^depth over the validation split.

    """

    x_val, b_val = validation
    return nmse(forward(params, b_val, depth=depth)[-1], x_val)


def _parse_int(text, name):
    """
    Parses an integer from configuration text.

    """

    try:
        return int(text)
    except (TypeError, ValueError):
        raise ParameterError("%s, %s, must be an int" % (name, text))
