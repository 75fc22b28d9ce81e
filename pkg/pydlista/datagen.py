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
This module generates the synthetic data: Bernoulli-Gaussian sparse
signals, noisy observations b = Ax + e at a given SNR, and training
datasets of (signal, observation) pairs.

The SNR is in decibels with the amplitude convention, so SNR = 20 dB means
||e||/||Ax|| is about 0.1.  The noise level is set per observation from the
realized ||Ax||.

"""

import logging
import math

import numpy as np

from pydlista.measurement import check_format
from pydlista.utilities import DimensionError, ParameterError
from pydlista.utilities import DegenerateSignalError, derive_seed
from pydlista.utilities import STREAM_SIGNAL, STREAM_NOISE, STREAM_RESAMPLE
from pydlista.utilities import as_matrix

DATASET_FORMAT = 'pydlista-dataset'
DATASET_FORMAT_VERSION = 1

logger = logging.getLogger(__name__)


class SparseSignal(object):
    """
    This class holds a ground truth vector together with its support.

    """

    def __init__(self, values, support=None):
        """
        If the support is not given it is read off the nonzero entries.  A
        given support must agree with the nonzero entries exactly.

        """

        values = np.array(values, dtype=float)
        if values.ndim != 1:
            raise DimensionError("A signal must be a 1-d vector")

        nonzero = np.flatnonzero(values)
        if support is None:
            support = nonzero
        else:
            support = np.unique(np.asarray(support, dtype=int))
            if not np.array_equal(support, nonzero):
                raise ParameterError(
                    "The support does not match the nonzero entries")

        values.setflags(write=False)
        self.values = values
        self.support = support

    @property
    def s0(self):
        """ Sparsity |S|. """
        return int(self.support.shape[0])

    @property
    def N(self):
        return int(self.values.shape[0])


class Observation(object):
    """
    This class holds a data vector b along with the noise level and the
    seed of the noise that went into it.

    """

    def __init__(self, b, sigma, noise_seed, snr_db=None):
        if sigma < 0.0:
            raise ParameterError(
                "The noise level, %s, cannot be negative" % (sigma))

        self.b = np.asarray(b, dtype=float)
        self.sigma = float(sigma)
        self.noise_seed = int(noise_seed)
        self.snr_db = snr_db

    @property
    def m(self):
        return int(self.b.shape[0])

    def noise(self):
        """
        This function regenerates the noise vector from the stored seed and
        noise level.

        """

        return noise_vector(self.m, self.sigma, self.noise_seed)


class Dataset(object):
    """
    This class holds n (signal, observation) pairs drawn with one matrix.

    The header fields (N, m, p, snr_db, master_seed, matrix_ref) are kept so
    that a saved dataset describes itself.

    """

    def __init__(self, signals, observations, matrix_ref, p, snr_db,
                 master_seed):
        if len(signals) != len(observations):
            raise DimensionError(
                "%s signals but %s observations" % (
                    len(signals), len(observations)))
        if not signals:
            raise DimensionError("A dataset needs at least one sample")

        self.signals = list(signals)
        self.observations = list(observations)
        self.matrix_ref = matrix_ref
        self.p = float(p)
        if snr_db is None:
            snr_db = float('inf')
        self.snr_db = float(snr_db)
        self.master_seed = int(master_seed)

    @property
    def n(self):
        return len(self.signals)

    @property
    def N(self):
        return self.signals[0].N

    @property
    def m(self):
        return self.observations[0].m

    def signal_matrix(self, indices=None):
        """
        Returns the ground truths as columns of an N x n array.

        """

        if indices is None:
            indices = range(self.n)
        return np.column_stack([self.signals[i].values for i in indices])

    def observation_matrix(self, indices=None):
        """
        Returns the data vectors as columns of an m x n array.

        """

        if indices is None:
            indices = range(self.n)
        return np.column_stack([self.observations[i].b for i in indices])

    def save(self, filename):
        """
        This function saves the dataset to an npz container.  The layout is
        described in docs/formats.txt.

        """

        np.savez(
            filename,
            format=np.array(DATASET_FORMAT),
            version=np.array(DATASET_FORMAT_VERSION),
            N=np.array(self.N),
            m=np.array(self.m),
            n=np.array(self.n),
            p=np.array(self.p),
            snr_db=np.array(self.snr_db),
            master_seed=np.array(self.master_seed, dtype=np.uint64),
            matrix_ref=np.array(self.matrix_ref),
            signals=self.signal_matrix().T,
            observations=self.observation_matrix().T,
            sigmas=np.array([obs.sigma for obs in self.observations]),
            noise_seeds=np.array(
                [obs.noise_seed for obs in self.observations],
                dtype=np.uint64))

    @classmethod
    def load(cls, filename):
        """
        This function loads a dataset saved by save.

        """

        with np.load(filename, allow_pickle=False) as archive:
            check_format(archive, DATASET_FORMAT, DATASET_FORMAT_VERSION)
            snr_db = float(archive['snr_db'])
            signals = [SparseSignal(row) for row in archive['signals']]
            observations = [
                Observation(b, sigma, seed, snr_db)
                for b, sigma, seed in zip(archive['observations'],
                                          archive['sigmas'],
                                          archive['noise_seeds'])]
            if len(signals) != int(archive['n']):
                raise DimensionError("Stored samples do not match the header")

            return cls(signals, observations, str(archive['matrix_ref']),
                       float(archive['p']), snr_db,
                       int(archive['master_seed']))


def noise_vector(m, sigma, noise_seed):
    """
    This function draws the noise e ~ N(0, sigma^2 I_m) for a seed.

    """

    rng = np.random.default_rng(noise_seed)
    return sigma * rng.standard_normal(m)


def gen_signal(N, p, seed):
    """
    This function draws a Bernoulli-Gaussian signal: each index enters the
    support independently with probability p, and the values on the
    support are i.i.d. standard normal.  An empty support is a valid
    outcome.

    """

    if not 0.0 < p < 1.0:
        raise ParameterError(
            "The probability, %s, must be strictly between 0 and 1" % (p))
    if int(N) <= 0:
        raise DimensionError("The signal length, %s, must be positive" % (N))

    rng = np.random.default_rng(seed)
    mask = rng.random(int(N)) < p
    values = np.zeros(int(N))
    values[mask] = rng.standard_normal(int(mask.sum()))

    return SparseSignal(values, np.flatnonzero(mask))


def observe(matrix, signal, snr_db, seed):
    """
    This function computes b = Ax + e.  The noise level is

        sigma = ||Ax|| 10^(-snr_db/20) / sqrt(m),

    so E||e||^2 = m sigma^2 = ||Ax||^2 10^(-snr_db/10).  An infinite snr_db,
    or None, gives the noiseless observation with sigma = 0.

    """

    entries = as_matrix(matrix)
    values = getattr(signal, 'values', signal)
    if np.shape(values) != (entries.shape[1],):
        raise DimensionError(
            "Signal of shape %s does not fit a %s x %s matrix" % (
                np.shape(values), entries.shape[0], entries.shape[1]))

    m = entries.shape[0]
    clean = entries @ values
    if snr_db is None or math.isinf(snr_db):
        if snr_db is not None and snr_db < 0:
            raise ParameterError("The SNR cannot be minus infinity")
        return Observation(clean, 0.0, seed, snr_db)

    norm = float(np.linalg.norm(clean))
    if norm == 0.0:
        raise DegenerateSignalError(
            "Ax is zero, the noise level is undefined at SNR %s dB" % (
                snr_db))

    sigma = norm * 10.0 ** (-snr_db / 20.0) / math.sqrt(m)
    b = clean + noise_vector(m, sigma, seed)

    return Observation(b, sigma, seed, snr_db)


def gen_pair(matrix, p, snr_db, master_seed, index):
    """
    This function draws sample `index` of the stream under master_seed.
    A zero signal is drawn again once with a perturbed seed; a second zero
    signal propagates the DegenerateSignalError.

    """

    entries = as_matrix(matrix)
    N = entries.shape[1]
    noise_seed = derive_seed(master_seed, STREAM_NOISE, index)
    signal = gen_signal(N, p, derive_seed(master_seed, STREAM_SIGNAL, index))
    try:
        observation = observe(entries, signal, snr_db, noise_seed)
    except DegenerateSignalError:
        logger.debug("sample %s drew a zero signal, resampling", index)
        signal = gen_signal(
            N, p, derive_seed(master_seed, STREAM_RESAMPLE, index))
        observation = observe(entries, signal, snr_db, noise_seed)

    return signal, observation


def gen_dataset(matrix, n, p, snr_db, master_seed, filename=None):
    """
    This function draws n independent (signal, observation) pairs.  The
    seeds of sample i are derived from (master_seed, i), so the dataset
    does not depend on the order the samples are generated in.  If a
    filename is given, the dataset is saved there too.

    """

    if int(n) < 1:
        raise ParameterError("The dataset size, %s, must be at least 1" % (n))

    pairs = [gen_pair(matrix, p, snr_db, master_seed, i)
             for i in range(int(n))]
    dataset = Dataset([pair[0] for pair in pairs],
                      [pair[1] for pair in pairs],
                      getattr(matrix, 'ref', 'unnamed'), p, snr_db,
                      master_seed)

    if filename is not None:
        dataset.save(filename)

    return dataset
