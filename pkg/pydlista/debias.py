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
This module implements the debiasing correction

    x_u = x_k + (1/m) Aᵀ(b - A x_k)

and the simulation diagnostics built on the split

    sqrt(m) (x_u - x*) = w_term + r_term,

where w_term = Aᵀe/sqrt(m) is Gaussian given A, with covariance
sigma^2 AᵀA/m, and r_term is the remainder.  r_term carries the sqrt(m)
factor so that the split holds exactly.

"""

from collections import namedtuple
import logging
import math

import numpy as np
from scipy.optimize import least_squares

from pydlista.measurement import sample_covariance
from pydlista.utilities import DimensionError, ParameterError
from pydlista.utilities import as_matrix, check_vector

#   Components of x_k - x* below this count as zero when counting Cs.
SUPPORT_TOL = 1e-10

logger = logging.getLogger(__name__)

RemainderDiagnostic = namedtuple(
    'RemainderDiagnostic',
    ['r_inf', 'threshold', 'exceeded', 'tail_bound', 'cs'])

NoiseProjectionDiagnostic = namedtuple(
    'NoiseProjectionDiagnostic', ['c_w', 'theta0', 'statistic', 'exceeded'])

L2BoundFit = namedtuple('L2BoundFit', ['c', 'c_tilde', 'r_squared'])


class DebiasedEstimate(object):
    """
    This class holds a debiased iterate x_u together with what the
    confidence intervals need: the diagonal of AᵀA/m, m, the iterate index
    and the noise level used.

    """

    def __init__(self, x_u, k, sigma_used, cov_diag, m):
        x_u = np.asarray(x_u, dtype=float)
        cov_diag = np.asarray(cov_diag, dtype=float)
        if x_u.shape != cov_diag.shape:
            raise DimensionError(
                "x_u has shape %s, the covariance diagonal %s" % (
                    x_u.shape, cov_diag.shape))
        if not np.all(np.isfinite(x_u)):
            raise ParameterError("The debiased estimate is not finite")
        if np.any(cov_diag < 0.0):
            raise ParameterError(
                "The covariance diagonal cannot be negative")
        if sigma_used < 0.0:
            raise ParameterError(
                "The noise level, %s, cannot be negative" % (sigma_used))

        self.x_u = x_u
        self.k = int(k)
        self.sigma_used = float(sigma_used)
        self.cov_diag = cov_diag
        self.m = int(m)

    @property
    def N(self):
        return self.x_u.shape[0]


class Decomposition(object):
    """
    w_term + r_term = sqrt(m) (x_u - x*).

    """

    def __init__(self, w_term, r_term):
        self.w_term = w_term
        self.r_term = r_term


def debias(x_k, matrix, b, k=0, sigma=0.0, cov_diag=None):
    """
    This function returns the debiased estimate
    x_u = x_k + (1/m) Aᵀ(b - A x_k).  k and sigma are carried along for the
    confidence intervals.  cov_diag can be passed to avoid recomputing the
    diagonal of AᵀA/m for every trial.

    """

    entries = as_matrix(matrix)
    m, N = entries.shape
    x_k = check_vector(x_k, N, 'x_k')
    b = check_vector(b, m, 'b')

    x_u = x_k + entries.T @ (b - entries @ x_k) / m
    if cov_diag is None:
        cov_diag = sample_covariance(entries).diagonal

    return DebiasedEstimate(x_u, k, sigma, cov_diag, m)


def decompose(x_u, x_k, x_star, matrix, eps):
    """
    This function splits sqrt(m) (x_u - x*) into the noise term
    w_term = Aᵀe/sqrt(m) and the remainder
    r_term = sqrt(m) (I - AᵀA/m)(x_k - x*).  Both the ground truth and the
    noise have to be known, so this is a simulation diagnostic.  r_term is
    exactly zero when x_k = x*.

    """

    entries = as_matrix(matrix)
    m, N = entries.shape
    x_u = getattr(x_u, 'x_u', x_u)
    x_u = check_vector(x_u, N, 'x_u')
    x_k = check_vector(x_k, N, 'x_k')
    x_star = check_vector(getattr(x_star, 'values', x_star), N, 'x_star')
    eps = check_vector(eps, m, 'eps')

    root_m = math.sqrt(m)
    w_term = entries.T @ eps / root_m
    error = x_k - x_star
    r_term = root_m * (error - entries.T @ (entries @ error) / m)

    return Decomposition(w_term, r_term)


def remainder_tail_bound(N, m, cs):
    """
    This function evaluates the tail bound on P(||R||_inf >= threshold),

        2N exp(-1 / (1/(2 log N) + sqrt(Cs)/(3 sqrt(m log N)))).

    With cs = 0 it reduces to 2/N.

    """

    if int(N) < 2:
        raise DimensionError("The tail bound needs N >= 2, not %s" % (N))
    if int(m) < 1:
        raise DimensionError("The tail bound needs m >= 1, not %s" % (m))
    if cs < 0:
        raise ParameterError("Cs, %s, cannot be negative" % (cs))

    log_n = math.log(N)
    denominator = (1.0 / (2.0 * log_n)
                   + math.sqrt(cs) / (3.0 * math.sqrt(m * log_n)))

    return 2.0 * N * math.exp(-1.0 / denominator)


def remainder_diag(r_term, x_k, x_star, K_bound, N, m, cs=None):
    """
    This function compares ||r_term||_inf with the threshold
    4 K_bound sqrt(log N) ||x_k - x*||_2 and returns a RemainderDiagnostic
    with the tail bound for Cs.  By default Cs is the number of components
    where |x_k - x*| exceeds SUPPORT_TOL.  The threshold is exceeded only
    when ||r_term||_inf is strictly above it.

    """

    if int(N) < 2:
        raise DimensionError("The diagnostic needs N >= 2, not %s" % (N))
    if not K_bound > 0.0:
        raise ParameterError(
            "The entry bound, %s, must be positive" % (K_bound))

    r_term = check_vector(r_term, N, 'r_term')
    difference = (check_vector(x_k, N, 'x_k')
                  - check_vector(getattr(x_star, 'values', x_star), N,
                                 'x_star'))
    if cs is None:
        cs = int(np.count_nonzero(np.abs(difference) > SUPPORT_TOL))

    r_inf = float(np.max(np.abs(r_term)))
    threshold = (4.0 * K_bound * math.sqrt(math.log(N))
                 * float(np.linalg.norm(difference)))

    return RemainderDiagnostic(r_inf, threshold, r_inf > threshold,
                               remainder_tail_bound(N, m, cs), cs)


def theta0_diag(eps, W_k, sigma):
    """
    This function computes the noise projection diagnostic of a layer with
    weights W_k (m x N): C_W, the largest column norm of W_k, the level
    theta0 = C_W sigma sqrt(6 log N) and the statistic max_j |<e, W_j>|.
    For Gaussian noise the statistic exceeds theta0 with probability at
    most N^-2.

    """

    W_k = as_matrix(W_k)
    m, N = W_k.shape
    eps = check_vector(eps, m, 'eps')
    if sigma < 0.0:
        raise ParameterError("The noise level, %s, cannot be negative" % (
            sigma))
    if N < 2:
        raise DimensionError("The diagnostic needs N >= 2, not %s" % (N))

    column_norms = np.linalg.norm(W_k, axis=0)
    if not np.all(np.isfinite(column_norms)):
        raise ParameterError("The columns of W_k must have finite norms")

    c_w = float(np.max(column_norms))
    theta0 = c_w * sigma * math.sqrt(6.0 * math.log(N))
    statistic = float(np.max(np.abs(W_k.T @ eps)))

    return NoiseProjectionDiagnostic(c_w, theta0, statistic,
                                     statistic > theta0)


def l2_error_bound_eval(s, B, c, k, Cw, Ctilde, sigma, N):
    """
    This function evaluates the l2 error bound of the k-th iterate,

        s B exp(-c k) + Ctilde Cw sigma sqrt(6 log N).

    k may be an array of layer indices.

    """

    if int(N) < 2:
        raise DimensionError("The bound needs N >= 2, not %s" % (N))

    k = np.asarray(k, dtype=float)
    value = (s * B * np.exp(-c * k)
             + Ctilde * Cw * sigma * math.sqrt(6.0 * math.log(N)))
    if value.ndim == 0:
        return float(value)

    return value


def fit_l2_error_bound(errors, s, B, Cw, sigma, N, layers=None):
    """
    This function fits c >= 0 and Ctilde >= 0 of the l2 error bound to an
    observed error curve (errors[i] is ||x^k - x*||_2 at layer layers[i],
    by default k = 1..len(errors)) by least squares on a log scale, and
    returns an L2BoundFit with the R^2 of the fit on that scale.

    """

    errors = np.asarray(errors, dtype=float)
    if errors.ndim != 1 or errors.shape[0] < 2:
        raise DimensionError("The fit needs at least two errors")
    if np.any(errors <= 0.0):
        raise ParameterError("The errors must be positive to fit on a log "
                             "scale")
    if layers is None:
        layers = np.arange(1, errors.shape[0] + 1)
    layers = np.asarray(layers, dtype=float)
    if layers.shape != errors.shape:
        raise DimensionError("layers and errors must have the same length")

    log_errors = np.log(errors)

    def residuals(theta):
        bound = l2_error_bound_eval(s, B, theta[0], layers, Cw, theta[1],
                                    sigma, N)
        return np.log(np.maximum(bound, np.finfo(float).tiny)) - log_errors

    floor_start = float(errors[-1]) / max(
        Cw * sigma * math.sqrt(6.0 * math.log(N)), np.finfo(float).tiny)
    start = [0.1, min(floor_start, 1e6)]
    result = least_squares(residuals, start, bounds=([0.0, 0.0],
                                                     [np.inf, np.inf]))

    residual_ss = float(np.sum(result.fun ** 2))
    total_ss = float(np.sum((log_errors - log_errors.mean()) ** 2))
    if total_ss == 0.0:
        r_squared = 1.0 if residual_ss == 0.0 else 0.0
    else:
        r_squared = 1.0 - residual_ss / total_ss
    logger.debug("l2 bound fit: c=%s, Ctilde=%s, R^2=%s", result.x[0],
                 result.x[1], r_squared)

    return L2BoundFit(float(result.x[0]), float(result.x[1]), r_squared)
