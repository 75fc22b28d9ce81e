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
#   along with this program.  If not, see <http://www.gnu.org/licenses/>

#   See the LICENSE file included in this archive
#

"""
An example program that trains a small LISTA-CP network, compares its
layers with plain ISTA, fits the l2 error bound to the trained error curve
and measures how often the debiased confidence intervals cover the ground
truth.

The run takes a few minutes.  The report files are written to
demo_output, ready for plotting with any tool that reads CSV.

"""

import logging

import numpy as np

from pydlista.debias import fit_l2_error_bound
from pydlista.harness import preset_config, build_matrix, build_training_set
from pydlista.harness import train_network, run_experiment
from pydlista.harness import run_oracle_coverage, export_report
from pydlista.ista import IstaConfig
from pydlista.lista import init_from_ista, forward
from pydlista.training import layer_nmse, split_dataset

logging.basicConfig(format='%(asctime)s %(message)s', level=logging.INFO)

cfg = preset_config('desk')
cfg.set_N(128)
cfg.set_m(64)
cfg.set_K(6)
cfg.set_n_train(1000)
cfg.set_trials(100)
cfg.set_output_dir('demo_output')
cfg.train.set_patience(100)
cfg.train.set_max_stage_iters(1000)

matrix = build_matrix(cfg)
dataset = build_training_set(cfg, matrix)
params, trace = train_network(cfg, matrix, dataset)

#   NMSE per layer on the validation split, trained vs untrained
_, validation = split_dataset(dataset, cfg.train.get_validation_fraction())
ista_cfg = IstaConfig.for_matrix(matrix, cfg.get_lasso_lambda())
untrained = init_from_ista(matrix, ista_cfg.mu, ista_cfg.lam, cfg.get_K())

print("layer    LISTA dB    ISTA dB")
rows = zip(layer_nmse(params, validation), layer_nmse(untrained, validation))
for k, (lista_db, ista_db) in enumerate(rows):
    print("%5d  %10.3f %10.3f" % (k + 1, lista_db, ista_db))

#   mean l2 error per layer against s B exp(-ck) + Ctilde Cw sigma sqrt(6 log N)
x_val, b_val = validation
errors = [float(np.mean(np.linalg.norm(x - x_val, axis=0)))
          for x in forward(params, b_val)]
support = float(np.mean(np.count_nonzero(x_val, axis=0)))
largest = float(np.max(np.abs(x_val)))
c_w = float(np.max(np.linalg.norm(params.W[-1], axis=0)))
sigma = float(np.mean([obs.sigma for obs in dataset.observations]))

fit = fit_l2_error_bound(errors, support, largest, c_w, sigma, cfg.get_N())
print("l2 bound fit: c = %.4f, Ctilde = %.4f, R^2 = %.4f" % (
    fit.c, fit.c_tilde, fit.r_squared))

#   coverage of the trained network, then of the exact oracle
report = run_experiment(cfg, params, matrix)
report.trace = trace
export_report(report, cfg.get_output_dir())

oracle = run_oracle_coverage(cfg, matrix)

print("")
print("               h        h_S")
print("LISTA     %7.4f    %7.4f" % (report.mean_h, report.mean_h_S))
print("oracle    %7.4f    %7.4f" % (oracle.mean_h, oracle.mean_h_S))
print("remainder above its threshold in %.1f%% of the trials" % (
    100.0 * report.remainder_exceedance_rate))
