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
This module implements the iterative shrinkage thresholding algorithm
(ISTA) for the LASSO.

Two scalings meet here.  The LASSO objective is

    F(x) = 1/(2m) ||Ax - b||^2 + lasso_lambda ||x||_1,

while the ISTA step is written without the 1/m,

    x <- S_threshold(x + (1/mu) Aᵀ(b - Ax)).

The step is a proximal gradient step on F with step size m/mu exactly when
threshold = lasso_lambda * m / mu, and it descends monotonically on F when
mu >= lambda_max(AᵀA).  IstaConfig keeps the threshold and converts in
both directions.

"""

import logging

import numpy as np

from pydlista.utilities import ParameterError, as_matrix

DEFAULT_LASSO_LAMBDA = 0.1
DEFAULT_MAX_ITERS = 10000
DEFAULT_TOL = 1e-10

DEFAULT_POWER_ITERS = 200
DEFAULT_POWER_TOL = 1e-10
DEFAULT_SAFETY_FACTOR = 1.01

logger = logging.getLogger(__name__)


class IstaConfig(object):
    """
    This class holds the ISTA parameters: the threshold of the step, the
    step parameter mu, the iteration cap and the stationarity tolerance.

    """

    def __init__(self, lam, mu, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):

        if not lam > 0.0:
            raise ParameterError("The threshold, %s, must be positive" % (lam))
        if not mu > 0.0:
            raise ParameterError("The step parameter, %s, must be positive" % (
                mu))
        if int(max_iters) < 1:
            raise ParameterError(
                "max_iters, %s, must be at least 1" % (max_iters))
        if tol < 0.0:
            raise ParameterError("The tolerance, %s, cannot be negative" % (
                tol))

        self.lam = float(lam)
        self.mu = float(mu)
        self.max_iters = int(max_iters)
        self.tol = float(tol)

    @classmethod
    def for_matrix(cls, matrix, lasso_lambda=DEFAULT_LASSO_LAMBDA,
                   max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):
        """
        This function builds the default configuration for a matrix: mu from
        spectral_bound, which guarantees monotone descent, and the threshold
        that makes ISTA minimize the LASSO with lasso_lambda.

        """

        entries = as_matrix(matrix)
        mu = spectral_bound(entries)
        lam = lasso_lambda * entries.shape[0] / mu

        return cls(lam, mu, max_iters, tol)

    def lasso_lambda(self, m):
        """
        Returns the LASSO lambda that this threshold minimizes for m rows.

        """

        return self.lam * self.mu / m


def soft_threshold(vector, lam):
    """
    This function applies S_lam(x) = sgn(x) max(|x| - lam, 0) componentwise.

    """

    if lam < 0.0:
        raise ParameterError("The threshold, %s, cannot be negative" % (lam))

    vector = np.asarray(vector, dtype=float)
    return np.sign(vector) * np.maximum(np.abs(vector) - lam, 0.0)


def lasso_objective(matrix, b, x, lasso_lambda):
    """
    This function evaluates 1/(2m) ||Ax - b||^2 + lasso_lambda ||x||_1.

    """

    entries = as_matrix(matrix)
    residual = entries @ x - b

    return (0.5 / entries.shape[0] * float(residual @ residual)
            + lasso_lambda * float(np.sum(np.abs(x))))


def ista_step(matrix, b, x, cfg):
    """
    This function takes one ISTA step,

        S_lam((I - (1/mu) AᵀA) x + (1/mu) Aᵀb),

    evaluated as S_lam(x + (1/mu) Aᵀ(b - Ax)).

    """

    entries = as_matrix(matrix)
    gradient_step = x + entries.T @ (b - entries @ x) / cfg.mu

    return soft_threshold(gradient_step, cfg.lam)


def ista_iterates(matrix, b, cfg, iterations):
    """
    This function returns the first `iterations` ISTA iterates x^1..x^K
    started from zero, without any stopping rule.  This is the oracle the
    untrained LISTA network has to reproduce.

    """

    entries = as_matrix(matrix)
    x = np.zeros(entries.shape[1])
    iterates = []
    for _ in range(int(iterations)):
        x = ista_step(entries, b, x, cfg)
        iterates.append(x)

    return iterates


def ista_solve(matrix, b, cfg):
    """
    This function runs ISTA from x = 0 until the iterate difference
    ||x^{k+1} - x^k|| drops to cfg.tol or cfg.max_iters steps are taken.

    It returns (x_hat, objective_trace, iters).  The objective trace holds
    the LASSO objective, with the lambda matching cfg, of x^0 = 0 and of
    every iterate; it is nonincreasing when mu >= lambda_max(AᵀA).
    Non-convergence is logged, not raised.

    """

    entries = as_matrix(matrix)
    b = np.asarray(b, dtype=float)
    lasso_lambda = cfg.lasso_lambda(entries.shape[0])

    x = np.zeros(entries.shape[1])
    objective_trace = [lasso_objective(entries, b, x, lasso_lambda)]
    iters = 0
    converged = False
    while iters < cfg.max_iters:
        x_next = ista_step(entries, b, x, cfg)
        iters += 1
        objective_trace.append(lasso_objective(entries, b, x_next,
                                               lasso_lambda))
        change = float(np.linalg.norm(x_next - x))
        x = x_next
        if change <= cfg.tol:
            converged = True
            break

    if not converged:
        logger.info("ISTA stopped at max_iters=%s without meeting tol=%s",
                    cfg.max_iters, cfg.tol)

    return x, objective_trace, iters


def spectral_bound(matrix, max_iters=DEFAULT_POWER_ITERS,
                   tol=DEFAULT_POWER_TOL, safety=DEFAULT_SAFETY_FACTOR, seed=0):
    """
    This function estimates lambda_max(AᵀA) by power iteration and returns
    the estimate times a safety factor, as an upper bound for the step
    parameter mu.

    """

    entries = as_matrix(matrix)
    rng = np.random.default_rng(seed)
    vector = rng.standard_normal(entries.shape[1])
    vector /= np.linalg.norm(vector)

    estimate = 0.0
    for _ in range(int(max_iters)):
        image = entries.T @ (entries @ vector)
        new_estimate = float(np.linalg.norm(image))
        if new_estimate == 0.0:
            break
        vector = image / new_estimate
        change = abs(new_estimate - estimate) / new_estimate
        estimate = new_estimate
        if change < tol:
            break

    if estimate == 0.0:
        raise ParameterError("The matrix is zero, its spectrum is empty")

    return safety * estimate
