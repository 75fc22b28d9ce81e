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
This module implements the unrolled LISTA-CP network: its parameters, the
forward recursion, the training loss and exact reverse-mode gradients.

The network keeps the sensing matrix A next to its layers, since every
layer evaluates the residual b - Ax.

"""

import numpy as np

from pydlista.layers import ListaLayer
from pydlista.measurement import check_format
from pydlista.utilities import DimensionError, ParameterError, as_matrix

#   Stored W^k are m x N and the forward pass applies (W^k)ᵀ.
WEIGHT_LAYOUT = 'm-by-N-applied-transposed'

CHECKPOINT_FORMAT = 'pydlista-lista'
CHECKPOINT_FORMAT_VERSION = 1


class ListaParams(object):
    """
    This class holds the trainable parameters (W^k, lam^k), k = 1..K, of a
    LISTA-CP network along with the sensing matrix they act with.

    """

    def __init__(self, matrix, layers, matrix_ref=None):
        """
        layers is a list of ListaLayer, numbered 1..K in order.

        """

        self.entries = as_matrix(matrix)
        self.matrix_ref = matrix_ref or getattr(matrix, 'ref', 'unnamed')
        if not layers:
            raise ParameterError("A network needs at least one layer")

        for position, layer in enumerate(layers):
            if layer.shape != self.entries.shape:
                raise DimensionError(
                    "Layer %s has weights %s, the matrix is %s" % (
                        layer.layer_no, layer.shape, self.entries.shape))
            if layer.layer_no != position + 1:
                raise ParameterError(
                    "Layer %s found at position %s" % (
                        layer.layer_no, position + 1))

        self.layers = list(layers)

    @property
    def K(self):
        return len(self.layers)

    @property
    def m(self):
        return self.entries.shape[0]

    @property
    def N(self):
        return self.entries.shape[1]

    @property
    def W(self):
        return [layer.weights for layer in self.layers]

    @property
    def lam(self):
        return [layer.threshold for layer in self.layers]

    def copy(self):
        """
        Returns a copy whose layers can be changed independently.

        """

        return ListaParams(self.entries, [layer.copy() for layer in
                                          self.layers], self.matrix_ref)

    def save(self, filename, config_hash=''):
        """
        This function saves the network to an npz checkpoint: a header
        (m, N, K, weight layout, matrix reference, training config hash),
        the matrix and the per-layer weights, thresholds and multipliers.

        """

        np.savez(
            filename,
            format=np.array(CHECKPOINT_FORMAT),
            version=np.array(CHECKPOINT_FORMAT_VERSION),
            m=np.array(self.m),
            N=np.array(self.N),
            K=np.array(self.K),
            layout=np.array(WEIGHT_LAYOUT),
            matrix_ref=np.array(self.matrix_ref),
            config_hash=np.array(config_hash),
            matrix=self.entries,
            weights=np.stack(self.W),
            thresholds=np.array(self.lam),
            weight_multipliers=np.array(
                [layer.weight_multiplier for layer in self.layers]),
            threshold_multipliers=np.array(
                [layer.threshold_multiplier for layer in self.layers]))

    @classmethod
    def load(cls, filename):
        """
        This function loads a checkpoint saved by save.

        """

        with np.load(filename, allow_pickle=False) as archive:
            check_format(archive, CHECKPOINT_FORMAT, CHECKPOINT_FORMAT_VERSION)
            if str(archive['layout']) != WEIGHT_LAYOUT:
                raise ParameterError(
                    "Unknown weight layout: %s" % (str(archive['layout'])))
            weights = archive['weights']
            K, m, N = (int(archive['K']), int(archive['m']),
                       int(archive['N']))
            if weights.shape != (K, m, N):
                raise DimensionError(
                    "Stored weights %s do not match the header" % (
                        weights.shape,))

            layers = [
                ListaLayer(k + 1, weights[k], archive['thresholds'][k],
                           archive['weight_multipliers'][k],
                           archive['threshold_multipliers'][k])
                for k in range(K)]

            return cls(archive['matrix'], layers, str(archive['matrix_ref']))


class Gradients(object):
    """
    This class holds gradients with the same shapes as ListaParams: one
    m x N array and one float per layer.

    """

    def __init__(self, weights, thresholds):
        self.weights = weights
        self.thresholds = thresholds


def init_from_ista(matrix, mu, lam, K):
    """
    This function sets W^k = A/mu and lam^k = lam for every layer, so that
    the untrained network reproduces K steps of ISTA.

    """

    if not mu > 0.0:
        raise ParameterError("The step parameter, %s, must be positive" % (mu))
    if not lam > 0.0:
        raise ParameterError("The threshold, %s, must be positive" % (lam))
    if int(K) < 1:
        raise ParameterError("K, %s, must be at least 1" % (K))

    entries = as_matrix(matrix)
    layers = [ListaLayer(k + 1, entries / mu, lam) for k in range(int(K))]

    return ListaParams(matrix, layers)


def forward(params, b, x0=None, depth=None):
    """
    This function runs the recursion

        x^k = S_{lam^k}(x^{k-1} + (W^k)ᵀ(b - A x^{k-1})),   x^0 = x0 or 0,

    through the first `depth` layers (all of them by default), and returns
    the iterates x^1..x^depth.  b may be one m-vector or an m x B batch.

    """

    return [cache[2] for cache in _feed_forward(params, b, x0, depth)]


def as_batch(batch):
    """
    This function accepts either a list of (x_star, b) pairs or a pair of
    arrays (X_star, B) with samples as columns, and returns the arrays.

    """

    if (isinstance(batch, tuple) and len(batch) == 2
            and np.ndim(batch[0]) == 2):
        x_star, b = batch
    else:
        batch = list(batch)
        if not batch:
            raise ParameterError("The batch is empty")
        x_star = np.column_stack([np.asarray(pair[0], dtype=float)
                                  for pair in batch])
        b = np.column_stack([np.asarray(pair[1], dtype=float)
                             for pair in batch])

    x_star = np.asarray(x_star, dtype=float)
    b = np.asarray(b, dtype=float)
    if x_star.shape[1] == 0:
        raise ParameterError("The batch is empty")
    if x_star.shape[1] != b.shape[1]:
        raise DimensionError("The batch has %s signals but %s observations" % (
            x_star.shape[1], b.shape[1]))

    return x_star, b


def loss(params, batch, depth=None):
    """
    This function returns the mean over the batch of ||x^depth - x_star||^2,
    where x^depth is the last iterate of the current depth.

    """

    x_star, b = as_batch(batch)
    output = forward(params, b, depth=depth)[-1]

    return _mean_squared_error(output, x_star)


def backward(params, batch, depth=None):
    """
    This function returns the exact gradients of loss(params, batch, depth)
    with respect to every W^k and lam^k.  Layers above depth receive zero
    gradients.

    """

    return loss_and_gradients(params, batch, depth)[1]


def loss_and_gradients(params, batch, depth=None):
    """
    This function runs the forward pass once and back propagates through
    it, returning (loss, Gradients).

    """

    x_star, b = as_batch(batch)
    depth = _check_depth(params, depth)
    caches = _feed_forward(params, b, None, depth)
    output = caches[-1][2]
    batch_size = x_star.shape[1]

    grad_weights = [np.zeros_like(layer.weights) for layer in params.layers]
    grad_thresholds = [0.0] * params.K

    grad_x = 2.0 / batch_size * (output - x_star)
    for k in range(depth - 1, -1, -1):
        layer = params.layers[k]
        grad_w, grad_lam, grad_x = layer.back_propagate(
            params.entries, caches[k], grad_x)
        grad_weights[k] = grad_w
        grad_thresholds[k] = grad_lam

    return (_mean_squared_error(output, x_star),
            Gradients(grad_weights, grad_thresholds))


def _feed_forward(params, b, x0, depth):
    """
    Runs the layers and returns the per-layer caches.

    """

    depth = _check_depth(params, depth)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != params.m:
        raise DimensionError("b has %s rows, the matrix has %s" % (
            b.shape[0], params.m))

    if x0 is None:
        x = np.zeros((params.N,) + b.shape[1:])
    else:
        x = np.asarray(x0, dtype=float)
        if x.shape != (params.N,) + b.shape[1:]:
            raise DimensionError("x0 has shape %s" % (x.shape,))

    caches = []
    for layer in params.layers[:depth]:
        cache = layer.feed_forward(params.entries, b, x)
        caches.append(cache)
        x = cache[2]

    return caches


def _check_depth(params, depth):
    """
    Resolves the default depth and checks its range.

    """

    if depth is None:
        return params.K
    depth = int(depth)
    if not 1 <= depth <= params.K:
        raise ParameterError("depth, %s, must be in 1..%s" % (
            depth, params.K))

    return depth


def _mean_squared_error(output, x_star):
    """
    Mean over the samples (columns) of the squared l2 error.

    """

    difference = output - x_star
    if difference.ndim == 1:
        return float(difference @ difference)

    return float(np.sum(difference * difference) / difference.shape[1])
