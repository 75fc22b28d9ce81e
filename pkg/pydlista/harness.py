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
This module runs the coverage experiments end to end:

    1.  build the sensing matrix,
    2.  generate a training set and train LISTA-CP stage-wise,
    3.  draw one ground truth x*, fixed across trials,
    4.  for every trial draw fresh noise, observe, run the K layers,
        debias, build the confidence intervals and compute the hitrates
        and diagnostics,
    5.  aggregate, and export the report.

Every random draw is seeded from the configuration, so two runs with the
same configuration export identical record files.

"""

from collections import namedtuple
import configparser
import csv
import hashlib
import logging
import math
import os
import time

import numpy as np

from pydlista.datagen import gen_dataset, gen_signal, observe
from pydlista.debias import debias, decompose, remainder_diag, theta0_diag
from pydlista.ista import IstaConfig, DEFAULT_LASSO_LAMBDA, ista_iterates
from pydlista.lista import init_from_ista, forward
from pydlista.measurement import ENSEMBLES, ENSEMBLE_GAUSSIAN
from pydlista.measurement import ENSEMBLE_HADAMARD, gen_gaussian
from pydlista.measurement import gen_subsampled_hadamard, sample_covariance
from pydlista.training import TrainConfig, TraceRecord, nmse
from pydlista.training import train_stagewise
from pydlista.uq import confidence_intervals, hitrates, standardize, qq_data
from pydlista.uq import estimate_sigma_plugin, top_k_by_truth
from pydlista.utilities import DegenerateSignalError, DimensionError
from pydlista.utilities import ParameterError, TrialError
from pydlista.utilities import STREAM_TRUTH, STREAM_TRIAL, derive_seed
from pydlista.utilities import check_count, is_power_of_two

ESTIMATOR_LISTA = 'lista'
ESTIMATOR_ISTA = 'ista'
ESTIMATORS = [ESTIMATOR_LISTA, ESTIMATOR_ISTA]

SIGMA_KNOWN = 'known'
SIGMA_PLUGIN = 'plugin'
SIGMA_MODES = [SIGMA_KNOWN, SIGMA_PLUGIN]

MODE_EXPERIMENT = 'experiment'
MODE_ORACLE = 'oracle'

PRESET_DESK = 'desk'
PRESET_FULL = 'full'
PRESETS = [PRESET_DESK, PRESET_FULL]

DEFAULT_ENSEMBLE = ENSEMBLE_GAUSSIAN
DEFAULT_N = 256
DEFAULT_M = 128
DEFAULT_K = 8
DEFAULT_P = 0.1
DEFAULT_SNR_DB = 20.0
DEFAULT_ALPHA = 0.05
DEFAULT_N_TRAIN = 2000
DEFAULT_TRIALS = 200
DEFAULT_QQ_SCALE = 1.0
DEFAULT_TOP_K = 0

FULL_N = 1000
FULL_M = 600
FULL_K = 16
FULL_N_TRAIN = 10000
FULL_TRIALS = 500

#   Ground truth draws tried before giving up on a nonzero x*.
MAX_TRUTH_DRAWS = 100

CONFIG_FILE = 'config.ini'
TRIALS_FILE = 'trials.csv'
QQ_FILE = 'qq.csv'
CI_TABLE_FILE = 'ci_table.csv'
TRACE_FILE = 'training_trace.csv'
SUMMARY_FILE = 'summary.ini'
MANIFEST_FILE = 'manifest.txt'
CHECKPOINT_FILE = 'lista.npz'

EXPERIMENT_KEYS = ['ensemble', 'N', 'm', 'K', 'p', 'snr_db', 'alpha',
                   'n_train', 'trials', 'seed_matrix', 'seed_dataset',
                   'seed_trials', 'output_dir', 'estimator', 'sigma_mode',
                   'qq_scale', 'qq_trial', 'lasso_lambda', 'top_k']

_INT_KEYS = ['N', 'm', 'K', 'n_train', 'trials', 'seed_matrix',
             'seed_dataset', 'seed_trials', 'qq_trial', 'top_k']
_FLOAT_KEYS = ['p', 'snr_db', 'alpha', 'qq_scale', 'lasso_lambda']

TRIAL_FIELDS = ['trial', 'h', 'h_S', 'support_size', 'sigma', 'sigma_hat',
                'nmse_db', 'ista_nmse_db', 'r_inf', 'r_threshold',
                'r_exceeded', 'tail_bound', 'theta0', 'noise_statistic',
                'theta0_exceeded']

TrialRecord = namedtuple('TrialRecord', TRIAL_FIELDS)

CI_FIELDS = ['index', 'center', 'lo', 'hi', 'truth', 'hit']
QQ_FIELDS = ['theoretical', 'empirical']
TRACE_FIELDS = list(TraceRecord._fields)

logger = logging.getLogger(__name__)


class ExperimentConfig(object):
    """
    This class holds everything an experiment depends on.  The values are
    changed through the set_ functions, which validate each value; the
    checks that tie several values together are in validate.

    The configuration is saved as an INI file with an [experiment] and a
    [train] section.

    """

    def __init__(self):
        self._ensemble = DEFAULT_ENSEMBLE
        self._N = DEFAULT_N
        self._m = DEFAULT_M
        self._K = DEFAULT_K
        self._p = DEFAULT_P
        self._snr_db = DEFAULT_SNR_DB
        self._alpha = DEFAULT_ALPHA
        self._n_train = DEFAULT_N_TRAIN
        self._trials = DEFAULT_TRIALS
        self._seed_matrix = 0
        self._seed_dataset = 1
        self._seed_trials = 2
        self._output_dir = ''
        self._estimator = ESTIMATOR_LISTA
        self._sigma_mode = SIGMA_KNOWN
        self._qq_scale = DEFAULT_QQ_SCALE
        self._qq_trial = 0
        self._lasso_lambda = DEFAULT_LASSO_LAMBDA
        self._top_k = DEFAULT_TOP_K
        self.train = TrainConfig()

    def set_ensemble(self, ensemble):
        """
        This function sets the measurement ensemble, 'gaussian' or
        'hadamard'.

        """

        if ensemble not in ENSEMBLES:
            raise ParameterError("Invalid ensemble: %s" % (ensemble))
        self._ensemble = ensemble

    def get_ensemble(self):
        return self._ensemble

    def set_N(self, N):
        self._N = check_count(N, 'N', 2)

    def get_N(self):
        return self._N

    def set_m(self, m):
        self._m = check_count(m, 'm', 1)

    def get_m(self):
        return self._m

    def set_K(self, K):
        self._K = check_count(K, 'K', 1)

    def get_K(self):
        return self._K

    def set_p(self, p):
        """
        This function sets the probability that an index is in the support.

        """

        p = float(p)
        if not 0.0 < p < 1.0:
            raise ParameterError("p, %s, must be strictly between 0 and 1" % (
                p))
        self._p = p

    def get_p(self):
        return self._p

    def set_snr_db(self, snr_db):
        """
        This function sets the SNR in decibels; inf means noiseless.

        """

        snr_db = float(snr_db)
        if math.isnan(snr_db) or snr_db == float('-inf'):
            raise ParameterError("Invalid SNR: %s" % (snr_db))
        self._snr_db = snr_db

    def get_snr_db(self):
        return self._snr_db

    def set_alpha(self, alpha):
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise ParameterError(
                "alpha, %s, must be strictly between 0 and 1" % (alpha))
        self._alpha = alpha

    def get_alpha(self):
        return self._alpha

    def set_n_train(self, n_train):
        """
        This function sets the number of training samples, validation split
        included.

        """

        self._n_train = check_count(n_train, 'n_train', 2)

    def get_n_train(self):
        return self._n_train

    def set_trials(self, trials):
        """
        This function sets the number of noise realizations.

        """

        self._trials = check_count(trials, 'trials', 1)

    def get_trials(self):
        return self._trials

    def set_seeds(self, seed_matrix, seed_dataset, seed_trials):
        """
        This function sets the (matrix, dataset, trials) seed triple.

        """

        self.set_seed_matrix(seed_matrix)
        self.set_seed_dataset(seed_dataset)
        self.set_seed_trials(seed_trials)

    def get_seeds(self):
        return (self._seed_matrix, self._seed_dataset, self._seed_trials)

    def set_seed_matrix(self, seed):
        self._seed_matrix = check_count(seed, 'seed_matrix', 0)

    def get_seed_matrix(self):
        return self._seed_matrix

    def set_seed_dataset(self, seed):
        self._seed_dataset = check_count(seed, 'seed_dataset', 0)

    def get_seed_dataset(self):
        return self._seed_dataset

    def set_seed_trials(self, seed):
        self._seed_trials = check_count(seed, 'seed_trials', 0)

    def get_seed_trials(self):
        return self._seed_trials

    def set_output_dir(self, output_dir):
        """
        This function sets the directory reports are written to.  An empty
        value means nothing is written while running.

        """

        self._output_dir = str(output_dir)

    def get_output_dir(self):
        return self._output_dir

    def set_estimator(self, estimator):
        """
        This function selects what is debiased: the trained LISTA iterate
        ('lista') or the ISTA iterate of the untrained network ('ista').

        """

        if estimator not in ESTIMATORS:
            raise ParameterError("Invalid estimator: %s" % (estimator))
        self._estimator = estimator

    def get_estimator(self):
        return self._estimator

    def set_sigma_mode(self, sigma_mode):
        """
        This function selects the noise level the intervals use: the known
        one ('known') or the residual plug-in estimate ('plugin').

        """

        if sigma_mode not in SIGMA_MODES:
            raise ParameterError("Invalid sigma mode: %s" % (sigma_mode))
        self._sigma_mode = sigma_mode

    def get_sigma_mode(self):
        return self._sigma_mode

    def set_qq_scale(self, qq_scale):
        """
        This function sets the multiplier applied to the standardized
        residuals of the Q-Q export.

        """

        qq_scale = float(qq_scale)
        if not qq_scale > 0.0:
            raise ParameterError("qq_scale, %s, must be positive" % (qq_scale))
        self._qq_scale = qq_scale

    def get_qq_scale(self):
        return self._qq_scale

    def set_qq_trial(self, qq_trial):
        """
        This function sets the trial whose Q-Q pairs and CI table are kept.

        """

        self._qq_trial = check_count(qq_trial, 'qq_trial', 0)

    def get_qq_trial(self):
        return self._qq_trial

    def set_lasso_lambda(self, lasso_lambda):
        lasso_lambda = float(lasso_lambda)
        if not lasso_lambda > 0.0:
            raise ParameterError(
                "lasso_lambda, %s, must be positive" % (lasso_lambda))
        self._lasso_lambda = lasso_lambda

    def get_lasso_lambda(self):
        return self._lasso_lambda

    def set_top_k(self, top_k):
        """
        This function sets how many of the largest ground truth components
        the exported CI table keeps; 0 keeps all N.

        """

        self._top_k = check_count(top_k, 'top_k', 0)

    def get_top_k(self):
        return self._top_k

    def validate(self):
        """
        This function checks the values against each other.

        """

        if self._m > self._N:
            raise DimensionError("m, %s, cannot exceed N, %s" % (
                self._m, self._N))
        if self._ensemble == ENSEMBLE_HADAMARD and not is_power_of_two(
                self._N):
            raise DimensionError(
                "The Hadamard ensemble needs N a power of two, not %s" % (
                    self._N))
        if self._qq_trial >= self._trials:
            raise ParameterError(
                "qq_trial, %s, must be below trials, %s" % (
                    self._qq_trial, self._trials))
        if self.train.get_batch_size() > self._n_train:
            logger.warning("batch_size %s is above n_train %s",
                           self.train.get_batch_size(), self._n_train)

    def set_item(self, key, text):
        """
        This function sets one [experiment] key from its text value.

        """

        if key not in EXPERIMENT_KEYS:
            raise ParameterError("Unknown experiment key: %s" % (key))
        if key in _INT_KEYS:
            try:
                value = int(text)
            except (TypeError, ValueError):
                raise ParameterError("%s, %s, must be an int" % (key, text))
        else:
            value = text

        getattr(self, 'set_%s' % (key))(value)

    def output_values(self):
        """
        This function returns the configuration as INI text, complete
        enough to be loaded back by load.

        """

        output = '[experiment]\n'
        for key in EXPERIMENT_KEYS:
            value = getattr(self, 'get_%s' % (key))()
            if key in _FLOAT_KEYS:
                value = repr(float(value))
            output += '%s = %s\n' % (key, value)

        output += '\n[train]\n'
        for key, value in self.train.items():
            output += '%s = %s\n' % (key, value)

        return output

    def save(self, filename):
        """
        This function saves the configuration to a file.

        """

        try:
            with open(filename, 'w') as fobj:
                fobj.write(self.output_values())
        except (IOError, OSError) as exc:
            raise IOError("Cannot write %s: %s" % (filename, exc))

    def load(self, filename):
        """
        This function loads a file saved by save.  Keys that are not in the
        file keep their current values; unknown sections or keys raise a
        ParameterError.

        """

        config = configparser.ConfigParser(interpolation=None)
        config.optionxform = str
        try:
            with open(filename) as fobj:
                config.read_file(fobj)
        except configparser.Error as exc:
            raise ParameterError("Malformed config %s: %s" % (filename, exc))
        except (IOError, OSError) as exc:
            raise IOError("Cannot read %s: %s" % (filename, exc))

        for section in config.sections():
            if section not in ('experiment', 'train'):
                raise ParameterError("Unknown config section: %s" % (section))

        if config.has_section('experiment'):
            for key, text in config.items('experiment'):
                self.set_item(key, text)
        if config.has_section('train'):
            for key, text in config.items('train'):
                self.train.set_item(key, text)

        return self

    def config_hash(self):
        """
        Returns a short hash of output_values.

        """

        return hashlib.sha256(
            self.output_values().encode('utf-8')).hexdigest()[:16]


class AggregateReport(object):
    """
    This class holds the outcome of an experiment: the per-trial records,
    their means, the Q-Q pairs and CI table of the designated trial, the
    training trace and wall clock times.

    The means are computed from the records, so they always agree with
    them.  The mean of h_S skips trials with an empty support.

    """

    def __init__(self, config, records, qq=None, ci_table=None, trace=None,
                 wall_clock=None, mode=MODE_EXPERIMENT, config_hash=None):
        self.config = config
        self.records = list(records)
        self.qq = qq
        self.ci_table = ci_table if ci_table is not None else []
        self.trace = trace if trace is not None else []
        self.wall_clock = wall_clock if wall_clock is not None else {}
        self.mode = mode
        self.config_hash = config_hash or config.config_hash()
        self.params = None

    @property
    def trials(self):
        return len(self.records)

    @property
    def mean_h(self):
        return _mean([record.h for record in self.records])

    @property
    def mean_h_S(self):
        return _mean([record.h_S for record in self.records])

    @property
    def mean_nmse_db(self):
        return _mean([record.nmse_db for record in self.records])

    @property
    def mean_ista_nmse_db(self):
        return _mean([record.ista_nmse_db for record in self.records])

    @property
    def remainder_exceedance_rate(self):
        return _mean([float(record.r_exceeded) for record in self.records])

    @property
    def theta0_exceedance_rate(self):
        return _mean([float(record.theta0_exceeded)
                      for record in self.records])


def preset_config(name, ensemble=DEFAULT_ENSEMBLE):
    """
    This function returns the 'desk' or 'full' configuration for an
    ensemble.  The full scale uses N = 1000, or 1024 for the Hadamard
    ensemble, and takes hours to run.

    """

    cfg = ExperimentConfig()
    cfg.set_ensemble(ensemble)
    if name == PRESET_DESK:
        return cfg
    if name != PRESET_FULL:
        raise ParameterError("Unknown preset: %s" % (name))

    logger.warning("the full preset trains for hours and runs %s trials",
                   FULL_TRIALS)
    if ensemble == ENSEMBLE_HADAMARD:
        cfg.set_N(1024)
    else:
        cfg.set_N(FULL_N)
    cfg.set_m(FULL_M)
    cfg.set_K(FULL_K)
    cfg.set_n_train(FULL_N_TRAIN)
    cfg.set_trials(FULL_TRIALS)
    cfg.train = TrainConfig.full_scale_preset()

    return cfg


def build_matrix(cfg):
    """
    This function draws the sensing matrix of the configuration.

    """

    if cfg.get_ensemble() == ENSEMBLE_HADAMARD:
        return gen_subsampled_hadamard(cfg.get_m(), cfg.get_N(),
                                       cfg.get_seed_matrix())

    return gen_gaussian(cfg.get_m(), cfg.get_N(), cfg.get_seed_matrix())


def build_training_set(cfg, matrix, filename=None):
    """
    This function generates the n_train samples the network trains on.

    """

    return gen_dataset(matrix, cfg.get_n_train(), cfg.get_p(),
                       cfg.get_snr_db(), cfg.get_seed_dataset(), filename)


def train_network(cfg, matrix, dataset=None):
    """
    This function trains the K layer network of the configuration and
    returns (params, trace).

    """

    if dataset is None:
        dataset = build_training_set(cfg, matrix)
    logger.info("training %s layers on %s samples", cfg.get_K(), dataset.n)

    return train_stagewise(matrix, dataset, cfg.train, cfg.get_K(),
                           cfg.get_lasso_lambda())


def ground_truth(cfg):
    """
    This function draws the fixed ground truth x* the same way the
    training signals are drawn, from its own seed stream.  Empty supports
    are drawn again.

    """

    for attempt in range(MAX_TRUTH_DRAWS):
        signal = gen_signal(
            cfg.get_N(), cfg.get_p(),
            derive_seed(cfg.get_seed_dataset(), STREAM_TRUTH, attempt))
        if signal.s0 > 0:
            return signal

    raise DegenerateSignalError(
        "No nonzero ground truth in %s draws" % (MAX_TRUTH_DRAWS))


def run_experiment(cfg, params=None, matrix=None):
    """
    This function runs the coverage experiment of the configuration and
    returns an AggregateReport.  A trained network can be passed as params
    to skip the training; the matrix can be passed to skip drawing it.

    A failing trial raises a TrialError with its index after the records
    of the earlier trials are exported, when an output directory is set.

    """

    return _run(cfg, params, matrix, MODE_EXPERIMENT)


def run_oracle_coverage(cfg, matrix=None):
    """
    This function runs the same trials as run_experiment but debiases the
    ground truth itself, x_k = x*.  The remainder then vanishes and the
    coverage only reflects the Gaussian noise term.  Nothing is trained.

    """

    return _run(cfg, None, matrix, MODE_ORACLE)


def _run(cfg, params, matrix, mode):
    """
    Shared body of run_experiment and run_oracle_coverage.

    """

    cfg.validate()
    start = time.time()
    logger.info("%s run: %s %sx%s, K=%s, %s trials, config %s", mode,
                cfg.get_ensemble(), cfg.get_m(), cfg.get_N(), cfg.get_K(),
                cfg.get_trials(), cfg.config_hash())

    if matrix is None:
        matrix = build_matrix(cfg)
    if params is not None:
        check_params_matrix(params, matrix)

    ista_cfg = IstaConfig.for_matrix(matrix, cfg.get_lasso_lambda())
    trace = []
    if params is None:
        if mode == MODE_EXPERIMENT and cfg.get_estimator() == ESTIMATOR_LISTA:
            params, trace = train_network(cfg, matrix)
        else:
            params = init_from_ista(matrix, ista_cfg.mu, ista_cfg.lam,
                                    cfg.get_K())
    train_seconds = time.time() - start

    x_star = ground_truth(cfg)
    cov_diag = sample_covariance(matrix).diagonal
    if mode == MODE_ORACLE:
        #   x_u - x* = Aᵀe/m, so the noise is projected by A/m.
        projection = matrix.entries / matrix.m
    else:
        projection = params.W[-1]

    records = []
    qq = None
    ci_table = []
    report = AggregateReport(cfg, records, trace=trace, mode=mode)
    report.params = params
    progress_step = max(cfg.get_trials() // 10, 1)
    trial_start = time.time()
    for trial in range(cfg.get_trials()):
        try:
            record, est, ci = _run_trial(cfg, mode, trial, matrix, params,
                                         ista_cfg, x_star, cov_diag,
                                         projection)
        except ValueError as exc:
            logger.error("trial %s failed: %s", trial, exc)
            report.records = records
            report.qq = qq
            report.ci_table = ci_table
            if cfg.get_output_dir():
                export_report(report, cfg.get_output_dir())
            raise TrialError(trial, exc)

        records.append(record)
        if trial == cfg.get_qq_trial():
            ci_table = ci_rows(ci, x_star)
            qq = _qq_pairs(cfg, est, x_star)
        if (trial + 1) % progress_step == 0:
            logger.info("%s of %s trials done, mean h %.4f", trial + 1,
                        cfg.get_trials(), _mean([r.h for r in records]))

    report.records = records
    report.qq = qq
    report.ci_table = ci_table
    report.wall_clock = {
        'train_seconds': train_seconds,
        'trial_seconds': time.time() - trial_start,
        'total_seconds': time.time() - start}

    logger.info("hitrates: h = %s, h_S = %s", report.mean_h, report.mean_h_S)

    return report


def check_params_matrix(params, matrix):
    """
    This function checks that a network was trained with the matrix the
    trials observe with.

    """

    if params.entries.shape != matrix.shape:
        raise DimensionError(
            "The network acts on %s x %s, the matrix is %s x %s" % (
                tuple(params.entries.shape) + tuple(matrix.shape)))
    if (params.matrix_ref != matrix.ref
            or not np.array_equal(params.entries, matrix.entries)):
        raise ParameterError(
            "The network was trained with %s, the trials use %s" % (
                params.matrix_ref, matrix.ref))


def _run_trial(cfg, mode, trial, matrix, params, ista_cfg, x_star, cov_diag,
               projection):
    """
    Runs one noise realization and returns (record, estimate, intervals).

    """

    noise_seed = derive_seed(cfg.get_seed_trials(), STREAM_TRIAL, trial)
    observation = observe(matrix, x_star, cfg.get_snr_db(), noise_seed)
    b = observation.b
    sigma = observation.sigma
    eps = b - matrix.entries @ x_star.values

    if mode == MODE_ORACLE:
        x_k = x_star.values
    else:
        x_k = forward(params, b)[-1]

    if cfg.get_sigma_mode() == SIGMA_PLUGIN:
        sigma_hat = estimate_sigma_plugin(matrix, b, x_k)
    else:
        sigma_hat = sigma

    est = debias(x_k, matrix, b, cfg.get_K(), sigma_hat, cov_diag)
    ci = confidence_intervals(est, cfg.get_alpha(), sigma_hat,
                              allow_degenerate=True)
    rates = hitrates(ci, x_star)

    split = decompose(est, x_k, x_star, matrix, eps)
    remainder = remainder_diag(split.r_term, x_k, x_star, matrix.entry_bound,
                               matrix.N, matrix.m)
    noise = theta0_diag(eps, projection, sigma)

    ista_x = ista_iterates(matrix, b, ista_cfg, cfg.get_K())[-1]

    record = TrialRecord(
        trial=trial, h=rates.h, h_S=rates.h_S,
        support_size=rates.support_size, sigma=sigma, sigma_hat=sigma_hat,
        nmse_db=nmse(x_k, x_star.values),
        ista_nmse_db=nmse(ista_x, x_star.values),
        r_inf=remainder.r_inf, r_threshold=remainder.threshold,
        r_exceeded=bool(remainder.exceeded), tail_bound=remainder.tail_bound,
        theta0=noise.theta0, noise_statistic=noise.statistic,
        theta0_exceeded=bool(noise.exceeded))

    return record, est, ci


def _qq_pairs(cfg, est, x_star):
    """
    Q-Q pairs of one estimate, None when the noise level is zero.

    """

    try:
        standardized = standardize(est, x_star, est.sigma_used,
                                   cfg.get_qq_scale())
    except DegenerateSignalError as exc:
        logger.info("no Q-Q pairs: %s", exc)
        return None

    return qq_data(standardized)


def ci_rows(ci, x_star):
    """
    This function returns the CI table of one trial: a row of
    (index, center, lo, hi, truth, hit) per component.

    """

    hits = ci.contains(x_star.values)
    return [(i, float(ci.center[i]), float(ci.lo[i]), float(ci.hi[i]),
             float(x_star.values[i]), bool(hits[i])) for i in range(ci.N)]


def filter_ci_rows(rows, top_k):
    """
    This function keeps the rows of the min(top_k, N) components with the
    largest |truth|, sorted by |truth| descending.  top_k = 0 keeps all
    rows in index order.

    """

    if not top_k or not rows:
        return list(rows)

    truth = [row[4] for row in rows]
    return [rows[i] for i in top_k_by_truth(truth, top_k)]


def export_report(report, directory, top_k=None):
    """
    This function writes the report to directory: the config echo, one
    CSV row per trial, the Q-Q pairs, the CI table of the designated trial
    (the top_k largest ground truth components, cfg top_k by default), the
    training trace, a summary and a manifest listing the files.  Floats are
    written with repr, so the files read back exactly.

    """

    if top_k is None:
        top_k = report.config.get_top_k()

    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise IOError("Cannot create %s: %s" % (directory, exc))

    qq_rows = []
    if report.qq is not None:
        qq_rows = [(float(row[0]), float(row[1])) for row in report.qq]

    files = []
    _write_text(directory, CONFIG_FILE, report.config.output_values(), files)
    _write_csv(directory, TRIALS_FILE, TRIAL_FIELDS, report.records, files)
    _write_csv(directory, QQ_FILE, QQ_FIELDS, qq_rows, files)
    _write_csv(directory, CI_TABLE_FILE, CI_FIELDS,
               filter_ci_rows(report.ci_table, top_k), files)
    _write_csv(directory, TRACE_FILE, TRACE_FIELDS, report.trace, files)
    _write_text(directory, SUMMARY_FILE, _summary_text(report), files)
    update_manifest(directory, files)
    files.append(MANIFEST_FILE)

    logger.info("report written to %s", directory)

    return [os.path.join(directory, name) for name in files]


def update_manifest(directory, names):
    """
    This function adds names to the manifest of directory, after the names
    it already lists, and returns the listed names.  The manifest itself
    is always listed last.

    """

    path = os.path.join(directory, MANIFEST_FILE)
    listed = []
    if os.path.exists(path):
        try:
            with open(path) as fobj:
                listed = [line.strip() for line in fobj if line.strip()]
        except (IOError, OSError) as exc:
            raise IOError("Cannot read %s: %s" % (path, exc))

    listed = [name for name in listed if name != MANIFEST_FILE]
    for name in names:
        if name not in listed and name != MANIFEST_FILE:
            listed.append(name)
    listed.append(MANIFEST_FILE)

    _write_text(directory, MANIFEST_FILE,
                ''.join('%s\n' % (name) for name in listed), [])

    return listed


def export_trace(trace, directory):
    """
    This function writes a training trace on its own, one row per
    validation evaluation.

    """

    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise IOError("Cannot create %s: %s" % (directory, exc))

    _write_csv(directory, TRACE_FILE, TRACE_FIELDS, trace, [])

    return os.path.join(directory, TRACE_FILE)


def load_report(directory):
    """
    This function reads a report written by export_report back into an
    AggregateReport.  The parameters of the network are not part of the
    report.

    """

    cfg = ExperimentConfig()
    cfg.load(os.path.join(directory, CONFIG_FILE))

    records = [_parse_trial(row)
               for row in _read_csv(directory, TRIALS_FILE, TRIAL_FIELDS)]
    qq_rows = _read_csv(directory, QQ_FILE, QQ_FIELDS)
    qq = None
    if qq_rows:
        qq = np.array([[float(row[0]), float(row[1])] for row in qq_rows])
    ci_table = [(int(row[0]), float(row[1]), float(row[2]), float(row[3]),
                 float(row[4]), row[5] == '1')
                for row in _read_csv(directory, CI_TABLE_FILE, CI_FIELDS)]
    trace = [TraceRecord(int(row[0]), row[1], int(row[2]), float(row[3]))
             for row in _read_csv(directory, TRACE_FILE, TRACE_FIELDS)]

    summary = configparser.ConfigParser(interpolation=None)
    summary.optionxform = str
    path = os.path.join(directory, SUMMARY_FILE)
    try:
        with open(path) as fobj:
            summary.read_file(fobj)
    except (IOError, OSError) as exc:
        raise IOError("Cannot read %s: %s" % (path, exc))

    wall_clock = dict((key, float(value))
                      for key, value in summary.items('wall_clock'))

    return AggregateReport(cfg, records, qq, ci_table, trace, wall_clock,
                           summary.get('summary', 'mode'),
                           summary.get('summary', 'config_hash'))


def _summary_text(report):
    """
    INI text with the aggregate values and wall clock times.

    """

    output = '[summary]\n'
    output += 'mode = %s\n' % (report.mode)
    output += 'config_hash = %s\n' % (report.config_hash)
    output += 'trials = %s\n' % (report.trials)
    for name in ('mean_h', 'mean_h_S', 'mean_nmse_db', 'mean_ista_nmse_db',
                 'remainder_exceedance_rate', 'theta0_exceedance_rate'):
        output += '%s = %s\n' % (name, _format(getattr(report, name)))

    output += '\n[wall_clock]\n'
    for key in sorted(report.wall_clock):
        output += '%s = %s\n' % (key, repr(float(report.wall_clock[key])))

    return output


def _write_text(directory, name, text, files):
    """
    Writes one text file and adds its name to files.

    """

    path = os.path.join(directory, name)
    try:
        with open(path, 'w') as fobj:
            fobj.write(text)
    except (IOError, OSError) as exc:
        raise IOError("Cannot write %s: %s" % (path, exc))
    files.append(name)


def _write_csv(directory, name, header, rows, files):
    """
    Writes a header and rows with the csv module, formatting every value
    with _format.

    """

    path = os.path.join(directory, name)
    try:
        with open(path, 'w', newline='') as fobj:
            writer = csv.writer(fobj, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format(value) for value in row])
    except (IOError, OSError) as exc:
        raise IOError("Cannot write %s: %s" % (path, exc))
    files.append(name)


def _read_csv(directory, name, header):
    """
    Reads the rows of a CSV file written by _write_csv after checking its
    header.

    """

    path = os.path.join(directory, name)
    try:
        with open(path, newline='') as fobj:
            rows = list(csv.reader(fobj))
    except (IOError, OSError) as exc:
        raise IOError("Cannot read %s: %s" % (path, exc))

    if not rows or rows[0] != header:
        raise ParameterError("%s does not have the expected header" % (path))

    return rows[1:]


def _parse_trial(row):
    """
    Turns one CSV row back into a TrialRecord.

    """

    values = dict(zip(TRIAL_FIELDS, row))
    record = {}
    for field in TRIAL_FIELDS:
        text = values[field]
        if field in ('trial', 'support_size'):
            record[field] = int(text)
        elif field in ('r_exceeded', 'theta0_exceeded'):
            record[field] = text == '1'
        elif text == '':
            record[field] = None
        else:
            record[field] = float(text)

    return TrialRecord(**record)


def _format(value):
    """
    CSV text of a value: '' for None, 1/0 for booleans, repr for floats.

    """

    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return '1' if value else '0'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))

    return str(value)


def _mean(values):
    """
    Mean of the values that are not None, None if there are none.

    """

    values = [value for value in values if value is not None]
    if not values:
        return None

    return float(np.mean(values))
