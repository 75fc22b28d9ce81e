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
This module builds the componentwise confidence intervals

    J_i = [x_u_i - delta_i, x_u_i + delta_i],
    delta_i = sigma_hat sqrt(Sigma_ii) / sqrt(m) * Phi^-1(1 - alpha/2),

around a debiased estimate, measures how often they contain the ground
truth and prepares standardized residuals for Q-Q plots.

"""

import logging
import math

import numpy as np
from scipy.special import erfc

from pydlista.utilities import DimensionError, ParameterError
from pydlista.utilities import DegenerateSignalError, as_matrix, check_vector

#   Rational approximation of the lower half of the normal quantile
#   (P. J. Acklam), relative error below 1.15e-9 before refinement.
_CENTRAL_NUMERATOR = [-3.969683028665376e+01, 2.209460984245205e+02,
                      -2.759285104469687e+02, 1.383577518672690e+02,
                      -3.066479806614716e+01, 2.506628277459239e+00]
_CENTRAL_DENOMINATOR = [-5.447609879822406e+01, 1.615858368580409e+02,
                        -1.556989798598866e+02, 6.680131188771972e+01,
                        -1.328068155288572e+01, 1.0]
_TAIL_NUMERATOR = [-7.784894002430293e-03, -3.223964580411365e-01,
                   -2.400758277161838e+00, -2.549732539343734e+00,
                   4.374664141464968e+00, 2.938163982698783e+00]
_TAIL_DENOMINATOR = [7.784695709041462e-03, 3.224671290700398e-01,
                     2.445134137142996e+00, 3.754408661907416e+00, 1.0]
_TAIL_START = 0.02425

DEFAULT_TOP_K = 50

logger = logging.getLogger(__name__)


class ConfidenceIntervals(object):
    """
    This class holds the intervals [lo_i, hi_i] of one debiased estimate,
    symmetric about the estimate with radius radius_i.

    """

    def __init__(self, center, radius, alpha):
        self.center = np.asarray(center, dtype=float)
        self.radius = np.asarray(radius, dtype=float)
        self.alpha = float(alpha)
        self.lo = self.center - self.radius
        self.hi = self.center + self.radius

    @property
    def N(self):
        return self.center.shape[0]

    def contains(self, values):
        """
        Returns the componentwise indicator lo_i <= values_i <= hi_i.
        Boundaries count as inside.

        """

        values = check_vector(values, self.N, 'values')
        return (self.lo <= values) & (values <= self.hi)


class HitrateReport(object):
    """
    This class holds the hitrate h over all components, the hitrate h_S
    over the support (None for an empty support) and the per-component
    hits they were computed from.

    """

    def __init__(self, h, h_S, support_size, hits=None):
        self.h = h
        self.h_S = h_S
        self.support_size = support_size
        self.hits = hits


def std_normal_cdf(x):
    """
    Phi(x) = erfc(-x/sqrt(2))/2, accurate in both tails.

    """

    value = 0.5 * erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))
    if np.ndim(value) == 0:
        return float(value)

    return value


def std_normal_quantile(p):
    """
    This function returns Phi^-1(p) for p in (0, 1), a scalar or an array.

    The lower half is computed with a rational approximation followed by
    one Newton step against std_normal_cdf, which brings the error down to
    rounding level.  The upper half uses Phi^-1(p) = -Phi^-1(1 - p), so
    the symmetry holds exactly.

    """

    values = np.asarray(p, dtype=float)
    if np.any(~((values > 0.0) & (values < 1.0))):
        raise ParameterError(
            "The probability must be strictly between 0 and 1, not %s" % (p))

    upper = values > 0.5
    lower_p = np.where(upper, 1.0 - values, values)
    quantile = _lower_quantile(lower_p)
    quantile = np.where(upper, -quantile, quantile)

    if quantile.ndim == 0:
        return float(quantile)

    return quantile


def _lower_quantile(p):
    """
    Quantile for 0 < p <= 0.5.

    """

    central_q = p - 0.5
    central_r = central_q * central_q
    central = (central_q * np.polyval(_CENTRAL_NUMERATOR, central_r)
               / np.polyval(_CENTRAL_DENOMINATOR, central_r))

    tail_q = np.sqrt(-2.0 * np.log(p))
    tail = (np.polyval(_TAIL_NUMERATOR, tail_q)
            / np.polyval(_TAIL_DENOMINATOR, tail_q))

    x = np.where(p < _TAIL_START, tail, central)

    density = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return x - (std_normal_cdf(x) - p) / density


def confidence_intervals(est, alpha, sigma_hat=None, allow_degenerate=False):
    """
    This function builds the intervals of level 1 - alpha around est.x_u,
    with radius sigma_hat sqrt(cov_diag_i)/sqrt(m) Phi^-1(1 - alpha/2).

    sigma_hat defaults to the noise level stored in the estimate.  A zero
    sigma_hat is only accepted with allow_degenerate, which gives point
    intervals; that is used by the noiseless oracle check.

    """

    if not 0.0 < alpha < 1.0:
        raise ParameterError(
            "alpha, %s, must be strictly between 0 and 1" % (alpha))
    if sigma_hat is None:
        sigma_hat = est.sigma_used
    sigma_hat = float(sigma_hat)
    if not sigma_hat > 0.0:
        if not (allow_degenerate and sigma_hat == 0.0):
            raise ParameterError(
                "The noise level, %s, must be positive" % (sigma_hat))

    quantile = std_normal_quantile(1.0 - alpha / 2.0)
    radius = (sigma_hat * np.sqrt(est.cov_diag) / math.sqrt(est.m)
              * quantile)

    return ConfidenceIntervals(est.x_u, radius, alpha)


def hitrates(ci, x_star):
    """
    This function returns the share of components whose interval contains
    the ground truth, over all N components (h) and over the support of
    x_star (h_S).  x_star is a SparseSignal or a vector.

    """

    values = check_vector(getattr(x_star, 'values', x_star), ci.N, 'x_star')
    support = getattr(x_star, 'support', None)
    if support is None:
        support = np.flatnonzero(values)

    hits = ci.contains(values)
    h = float(np.mean(hits))
    h_S = None
    if len(support) > 0:
        h_S = float(np.mean(hits[support]))

    return HitrateReport(h, h_S, int(len(support)), hits)


def standardize(est, x_star, sigma, scale=1.0):
    """
    This function returns

        scale * sqrt(m) (x_u - x*)_i / (sigma sqrt(cov_diag_i)),

    which is approximately standard normal for every component.  scale is
    a plain multiplier for plotting conventions.

    """

    values = check_vector(getattr(x_star, 'values', x_star), est.N, 'x_star')
    if not sigma > 0.0:
        raise DegenerateSignalError(
            "Residuals cannot be standardized with sigma = %s" % (sigma))
    if np.any(est.cov_diag == 0.0):
        raise DegenerateSignalError(
            "Residuals cannot be standardized on a zero column")

    return (scale * math.sqrt(est.m) * (est.x_u - values)
            / (sigma * np.sqrt(est.cov_diag)))


def qq_data(standardized):
    """
    This function sorts the standardized residuals and pairs the i-th
    order statistic with the Hazen position quantile Phi^-1((i - 0.5)/N).
    It returns an N x 2 array of (theoretical, empirical) rows.

    """

    standardized = np.asarray(standardized, dtype=float)
    if standardized.ndim != 1 or standardized.shape[0] < 2:
        raise DimensionError("Q-Q data needs a vector of length >= 2")

    N = standardized.shape[0]
    positions = (np.arange(1, N + 1) - 0.5) / N

    return np.column_stack([std_normal_quantile(positions),
                            np.sort(standardized)])


def quantile_correlation(standardized):
    """
    Returns the Pearson correlation of the two Q-Q columns.  A constant
    sample has no correlation and returns 0.

    """

    pairs = qq_data(standardized)
    if np.all(pairs[:, 1] == pairs[0, 1]):
        return 0.0

    return float(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1])


def estimate_sigma_plugin(matrix, b, x_k):
    """
    This function estimates the noise level from the residual,

        sigma_hat^2 = ||b - A x_k||^2 / (m - s_hat),   s_hat = |supp(x_k)|.

    This is an alternative to passing the known noise level through.

    """

    entries = as_matrix(matrix)
    m, N = entries.shape
    x_k = check_vector(x_k, N, 'x_k')
    b = check_vector(b, m, 'b')
    s_hat = int(np.count_nonzero(x_k))
    if s_hat >= m:
        raise DegenerateSignalError(
            "The estimate has %s nonzeros, the plug-in needs fewer than %s" % (
                s_hat, m))

    residual = b - entries @ x_k
    return math.sqrt(float(residual @ residual) / (m - s_hat))


def top_k_by_truth(x_star, k=DEFAULT_TOP_K):
    """
    This function returns the indices of the min(k, N) components with
    the largest |x*_i|, in decreasing order.  Ties keep index order.

    """

    values = np.asarray(getattr(x_star, 'values', x_star), dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DimensionError(
            "x_star must be a nonempty vector, not shape %s" % (
                values.shape,))
    if int(k) < 1:
        raise ParameterError("k, %s, must be at least 1" % (k))

    order = np.argsort(-np.abs(values), kind='stable')
    return order[:min(int(k), values.size)]
