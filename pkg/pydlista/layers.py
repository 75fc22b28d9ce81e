#!/usr/bin/env python
#
#   Copyright (C) 2012  Don Smiley  ds@sidorof.com
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
This module implements a layer class for the unrolled LISTA-CP network.

"""

import numpy as np

from pydlista.ista import soft_threshold
from pydlista.utilities import DimensionError, ParameterError

#   Thresholds are kept strictly positive after optimizer updates.
MIN_THRESHOLD = 1e-12


class ListaLayer(object):
    """
    A layer holds the free parameters of one unrolled iteration,

        x^k = S_{lam^k}(x^{k-1} + (W^k)ᵀ(b - A x^{k-1})),

    where W^k is stored m x N, the same layout as A, so that the operator
    applied to the residual is exactly (W^k)ᵀ.  Each parameter also carries
    a learning multiplier that scales its learning rate.

    """

    def __init__(self, layer_no, weights, threshold, weight_multiplier=1.0,
                 threshold_multiplier=1.0):
        """
        Layers are numbered from 1, the layer closest to the input.

        """

        weights = np.array(weights, dtype=float)
        if weights.ndim != 2:
            raise DimensionError("The layer weights must be an m x N matrix")
        if not threshold > 0.0:
            raise ParameterError(
                "The threshold, %s, must be positive" % (threshold))
        if int(layer_no) < 1:
            raise ParameterError("layer_no, %s, starts at 1" % (layer_no))

        self.layer_no = int(layer_no)
        self.weights = weights
        self.threshold = float(threshold)
        self.weight_multiplier = float(weight_multiplier)
        self.threshold_multiplier = float(threshold_multiplier)

    @property
    def shape(self):
        return self.weights.shape

    def copy(self):
        """
        Returns an independent copy of the layer.

        """

        return ListaLayer(self.layer_no, self.weights.copy(), self.threshold,
                          self.weight_multiplier, self.threshold_multiplier)

    def set_threshold(self, threshold):
        """
        This function sets the threshold, holding it at MIN_THRESHOLD or
        above.

        """

        self.threshold = max(float(threshold), MIN_THRESHOLD)

    def decay_multipliers(self, gamma):
        """
        This function multiplies both learning multipliers by gamma.

        """

        self.weight_multiplier *= gamma
        self.threshold_multiplier *= gamma

    def feed_forward(self, entries, b, x):
        """
        This function takes the iterate of the layer below and returns the
        cache (residual, pre-activation, output).  Batches are handled with
        samples as columns.

        """

        residual = b - entries @ x
        pre_activation = x + self.weights.T @ residual
        output = soft_threshold(pre_activation, self.threshold)

        return residual, pre_activation, output

    def back_propagate(self, entries, cache, grad_output):
        """
        This function takes the gradient of the loss with respect to this
        layer's output and returns the gradients with respect to the
        weights, the threshold and the layer's input.

        The soft threshold has derivative 1 in u where |u| > lam and 0
        elsewhere, and derivative -sgn(u) in lam where |u| > lam.  The
        subgradient 0 is used at |u| = lam.

        """

        residual, pre_activation, _ = cache
        active = np.abs(pre_activation) > self.threshold
        grad_pre = np.where(active, grad_output, 0.0)

        grad_threshold = -float(np.sum(np.sign(pre_activation) * grad_pre))
        if grad_pre.ndim == 1:
            grad_weights = np.outer(residual, grad_pre)
        else:
            grad_weights = residual @ grad_pre.T
        grad_input = grad_pre - entries.T @ (self.weights @ grad_pre)

        return grad_weights, grad_threshold, grad_input
