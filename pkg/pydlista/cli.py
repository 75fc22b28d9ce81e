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
Command line interface.

    pydlista gen-matrix   draw the sensing matrix          -> matrix.npz
    pydlista gen-data     draw the training set             -> dataset.npz
    pydlista train        train the network                 -> lista.npz
    pydlista run          run the coverage experiment       -> report files
    pydlista oracle       run the oracle coverage check     -> report files
    pydlista report       print the summary of a report directory

The configuration is built from a preset, then a config file, then the
flags, each overriding the one before.  Every file is written under
--output-dir.

"""

import argparse
import logging
import os
import sys

from pydlista.datagen import Dataset
from pydlista.harness import EXPERIMENT_KEYS
from pydlista.harness import PRESETS, PRESET_DESK, CHECKPOINT_FILE
from pydlista.harness import build_matrix, build_training_set, train_network
from pydlista.harness import export_report, load_report, preset_config
from pydlista.harness import run_experiment, run_oracle_coverage
from pydlista.harness import export_trace, update_manifest, TRACE_FILE
from pydlista.lista import ListaParams
from pydlista.measurement import MeasurementMatrix
from pydlista.training import TRAIN_KEYS
from pydlista.utilities import DimensionError, ParameterError
from pydlista.utilities import DegenerateSignalError, ResourceLimitError
from pydlista.utilities import TrainingDivergedError, TrialError

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_DIMENSION = 3
EXIT_DEGENERATE = 4
EXIT_RESOURCE = 5
EXIT_DIVERGED = 6
EXIT_TRIAL = 7
EXIT_IO = 8

DEFAULT_OUTPUT_DIR = 'pydlista_output'
LOG_FILE = 'pydlista.log'
LOG_FORMAT = '%(asctime)s %(message)s'

MATRIX_FILE = 'matrix.npz'
DATASET_FILE = 'dataset.npz'

#   Files a command can leave under output_dir besides the report files.
ARTIFACT_FILES = [MATRIX_FILE, DATASET_FILE, CHECKPOINT_FILE, TRACE_FILE,
                  LOG_FILE]

#   Checked in order, so subclasses come first.
_EXIT_CODES = [(TrialError, EXIT_TRIAL),
               (TrainingDivergedError, EXIT_DIVERGED),
               (ResourceLimitError, EXIT_RESOURCE),
               (DegenerateSignalError, EXIT_DEGENERATE),
               (DimensionError, EXIT_DIMENSION),
               (ParameterError, EXIT_PARAMETER),
               (ValueError, EXIT_PARAMETER),
               (EnvironmentError, EXIT_IO)]

logger = logging.getLogger(__name__)


def build_parser():
    """
    This function builds the argument parser.  Every experiment and
    training key has a flag with dashes for underscores.

    """

    parser = argparse.ArgumentParser(
        prog='pydlista',
        description='Debiased LISTA confidence intervals and coverage runs')
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    commands = [
        ('gen-matrix', 'draw the sensing matrix'),
        ('gen-data', 'draw the training set'),
        ('train', 'train the network stage-wise'),
        ('run', 'run the coverage experiment'),
        ('oracle', 'run the coverage check with x_k = x*'),
    ]
    for name, text in commands:
        subparser = subparsers.add_parser(name, help=text)
        _add_config_arguments(subparser)
        if name == 'run':
            subparser.add_argument(
                '--checkpoint', help='use a trained network, skip training')

    subparser = subparsers.add_parser(
        'report', help='print the summary of a report directory')
    subparser.add_argument('directory')
    subparser.add_argument('--verbose', action='store_true')

    return parser


def _add_config_arguments(parser):
    """
    Adds --preset, --config, --verbose and one flag per config key.

    """

    parser.add_argument('--preset', choices=PRESETS, default=PRESET_DESK)
    parser.add_argument('--config', help='INI file with [experiment] and '
                        '[train] sections')
    parser.add_argument('--verbose', action='store_true',
                        help='also log to stderr')
    for key in EXPERIMENT_KEYS:
        parser.add_argument('--%s' % (key.replace('_', '-')), dest=key)
    for key in TRAIN_KEYS:
        parser.add_argument('--%s' % (key.replace('_', '-')),
                            dest='train_%s' % (key))


def config_from_args(args):
    """
    This function builds the ExperimentConfig: the preset, then the config
    file, then the flags that were given.

    """

    ensemble = getattr(args, 'ensemble', None)
    cfg = preset_config(args.preset, ensemble or 'gaussian')
    if args.config:
        cfg.load(args.config)

    for key in EXPERIMENT_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg.set_item(key, value)
    for key in TRAIN_KEYS:
        value = getattr(args, 'train_%s' % (key), None)
        if value is not None:
            cfg.train.set_item(key, value)

    if not cfg.get_output_dir():
        cfg.set_output_dir(DEFAULT_OUTPUT_DIR)
    cfg.validate()

    return cfg


def setup_logging(output_dir, verbose):
    """
    This function sends the log to output_dir/pydlista.log and, when
    verbose, to stderr as well.

    """

    handlers = []
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        handlers.append(logging.FileHandler(
            os.path.join(output_dir, LOG_FILE)))
    if verbose or not handlers:
        handlers.append(logging.StreamHandler())

    logging.basicConfig(format=LOG_FORMAT, level=logging.INFO,
                        handlers=handlers, force=True)


def gen_matrix_command(cfg):
    matrix = build_matrix(cfg)
    path = os.path.join(cfg.get_output_dir(), MATRIX_FILE)
    matrix.save(path)
    print('matrix %s written to %s' % (matrix.ref, path))


def gen_data_command(cfg):
    matrix = _matrix(cfg)
    path = os.path.join(cfg.get_output_dir(), DATASET_FILE)
    dataset = build_training_set(cfg, matrix, path)
    print('%s samples written to %s' % (dataset.n, path))


def train_command(cfg):
    """
    Trains on the saved dataset when there is one, else draws it.

    """

    matrix = _matrix(cfg)
    dataset = None
    path = os.path.join(cfg.get_output_dir(), DATASET_FILE)
    if os.path.exists(path):
        dataset = Dataset.load(path)
        if dataset.matrix_ref != matrix.ref:
            raise ParameterError(
                "%s was drawn with %s, not %s" % (
                    path, dataset.matrix_ref, matrix.ref))

    params, trace = train_network(cfg, matrix, dataset)
    path = os.path.join(cfg.get_output_dir(), CHECKPOINT_FILE)
    params.save(path, cfg.config_hash())
    export_trace(trace, cfg.get_output_dir())
    print('network written to %s' % (path))


def run_command(cfg, checkpoint=None):
    matrix = _matrix(cfg)
    params = None
    if checkpoint:
        params = ListaParams.load(checkpoint)
        if params.K != cfg.get_K():
            raise DimensionError("The checkpoint has %s layers, K is %s" % (
                params.K, cfg.get_K()))

    report = run_experiment(cfg, params, matrix)
    export_report(report, cfg.get_output_dir())
    if checkpoint is None and report.params is not None:
        report.params.save(
            os.path.join(cfg.get_output_dir(), CHECKPOINT_FILE),
            cfg.config_hash())
    _print_summary(report)


def oracle_command(cfg):
    report = run_oracle_coverage(cfg, _matrix(cfg))
    export_report(report, cfg.get_output_dir())
    _print_summary(report)


def report_command(directory):
    _print_summary(load_report(directory))


def _matrix(cfg):
    """
    Loads output_dir/matrix.npz when it exists, else draws the matrix.

    """

    path = os.path.join(cfg.get_output_dir(), MATRIX_FILE)
    if os.path.exists(path):
        matrix = MeasurementMatrix.load(path)
        if matrix.shape != (cfg.get_m(), cfg.get_N()):
            raise DimensionError("%s is %s x %s, the config asks %s x %s" % (
                path, matrix.m, matrix.N, cfg.get_m(), cfg.get_N()))
        if (matrix.ensemble, matrix.seed) != (cfg.get_ensemble(),
                                              cfg.get_seed_matrix()):
            raise ParameterError(
                "%s is %s, the config asks %s with seed %s" % (
                    path, matrix.ref, cfg.get_ensemble(),
                    cfg.get_seed_matrix()))
        return matrix

    return build_matrix(cfg)


def record_artifacts(output_dir):
    """
    This function lists the artifacts found in output_dir in its manifest.

    """

    names = [name for name in ARTIFACT_FILES
             if os.path.exists(os.path.join(output_dir, name))]
    return update_manifest(output_dir, names)


def _print_summary(report):
    print('mode        %s' % (report.mode))
    print('config      %s' % (report.config_hash))
    print('trials      %s' % (report.trials))
    print('h           %s' % (report.mean_h))
    print('h_S         %s' % (report.mean_h_S))
    print('NMSE dB     %s' % (report.mean_nmse_db))
    print('ISTA dB     %s' % (report.mean_ista_nmse_db))


def exit_code(exc):
    """
    This function maps an error to the exit code of its category.

    """

    for error_class, code in _EXIT_CODES:
        if isinstance(exc, error_class):
            return code

    return 1


def main(argv=None):
    """
    Entry point; returns the exit code.

    """

    args = build_parser().parse_args(argv)

    try:
        if args.command == 'report':
            setup_logging(None, args.verbose)
            report_command(args.directory)
            return EXIT_OK

        cfg = config_from_args(args)
        setup_logging(cfg.get_output_dir(), args.verbose)
        if args.command == 'gen-matrix':
            gen_matrix_command(cfg)
        elif args.command == 'gen-data':
            gen_data_command(cfg)
        elif args.command == 'train':
            train_command(cfg)
        elif args.command == 'run':
            run_command(cfg, args.checkpoint)
        elif args.command == 'oracle':
            oracle_command(cfg)
        record_artifacts(cfg.get_output_dir())
    except (ValueError, EnvironmentError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        sys.stderr.write('pydlista %s: %s\n' % (args.command, exc))
        return exit_code(exc)

    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
