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
This module implements the sensing matrices: the column normalized
Gaussian ensemble and the randomly subsampled Hadamard ensemble, together
with the sample covariance and a fast Walsh-Hadamard transform.

The matrices are stored unnormalized, with rows of identity second moment,
so that the diagonal of the sample covariance AᵀA/m is all ones.  Every
1/m or 1/sqrt(m) factor lives in the formula that needs it.

"""

import logging

import numpy as np

from pydlista.utilities import DimensionError, ParameterError
from pydlista.utilities import ResourceLimitError, is_power_of_two

ENSEMBLE_GAUSSIAN = 'gaussian'
ENSEMBLE_HADAMARD = 'hadamard'
ENSEMBLES = [ENSEMBLE_GAUSSIAN, ENSEMBLE_HADAMARD]

#   Dense H_d above this order would need more than 128MB of float64.
DEFAULT_MAX_HADAMARD_ORDER = 12

#   Largest N for which the full N x N sample covariance is materialized.
DEFAULT_MAX_FULL_COVARIANCE = 4096

MATRIX_FORMAT = 'pydlista-matrix'
MATRIX_FORMAT_VERSION = 1

logger = logging.getLogger(__name__)


class MeasurementMatrix(object):
    """
    This class holds a dense m x N sensing matrix along with the ensemble
    it was drawn from, the bound K on its entries and the seed that
    produced it.

    The entries are made read-only on construction; a matrix can be shared
    freely between solvers.

    """

    def __init__(self, entries, ensemble, seed, entry_bound=None):
        """
        The entries must be a 2-d array with m <= N.  If entry_bound is not
        given, the empirical maximum of |A_ij| is recorded.

        """

        entries = np.array(entries, dtype=float)
        if entries.ndim != 2:
            raise DimensionError("The entries must form a 2-d matrix")

        m, N = entries.shape
        if m == 0 or N == 0:
            raise DimensionError(
                "The matrix must be nonempty, not %s x %s" % (m, N))
        if m > N:
            raise DimensionError(
                "The number of rows, %s, cannot exceed the columns, %s" % (
                    m, N))
        if not np.all(np.isfinite(entries)):
            raise ParameterError("The matrix entries must be finite")

        if ensemble not in ENSEMBLES:
            raise ParameterError("invalid ensemble: %s" % (ensemble))
        if ensemble == ENSEMBLE_HADAMARD:
            if not np.all(np.abs(entries) == 1.0):
                raise ParameterError(
                    "A subsampled Hadamard matrix must have +1/-1 entries")

        if entry_bound is None:
            entry_bound = float(np.max(np.abs(entries)))
        if entry_bound <= 0.0:
            raise ParameterError(
                "The entry bound, %s, must be positive" % (entry_bound))

        entries.setflags(write=False)
        self.entries = entries
        self.ensemble = ensemble
        self.entry_bound = float(entry_bound)
        self.seed = int(seed)

    @property
    def m(self):
        """ Number of rows (measurements). """
        return self.entries.shape[0]

    @property
    def N(self):
        """ Number of columns (signal length). """
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    @property
    def ref(self):
        """
        A text identifier that pins the matrix down: ensemble, size and
        seed.  Datasets and checkpoints record it.

        """

        return '%s-%sx%s-seed%s' % (self.ensemble, self.m, self.N, self.seed)

    def save(self, filename):
        """
        This function saves the matrix to an npz container.  The layout is
        described in docs/formats.txt.

        """

        np.savez(
            filename,
            format=np.array(MATRIX_FORMAT),
            version=np.array(MATRIX_FORMAT_VERSION),
            m=np.array(self.m),
            N=np.array(self.N),
            ensemble=np.array(self.ensemble),
            seed=np.array(self.seed, dtype=np.uint64),
            entry_bound=np.array(self.entry_bound),
            entries=np.ascontiguousarray(self.entries))

    @classmethod
    def load(cls, filename):
        """
        This function loads a matrix that has been saved by save.

        """

        with np.load(filename, allow_pickle=False) as archive:
            check_format(archive, MATRIX_FORMAT, MATRIX_FORMAT_VERSION)
            entries = archive['entries']
            if entries.shape != (int(archive['m']), int(archive['N'])):
                raise DimensionError(
                    "Stored entries %s do not match the header" % (
                        entries.shape,))
            return cls(entries, str(archive['ensemble']),
                       int(archive['seed']), float(archive['entry_bound']))


class SampleCovariance(object):
    """
    This class holds the diagonal of the sample covariance AᵀA/m and,
    optionally, the full matrix.

    """

    def __init__(self, diagonal, full=None):
        self.diagonal = diagonal
        self.full = full


def check_format(archive, format_tag, version):
    """
    This function checks the format tag and version of a loaded npz
    container.

    """

    if 'format' not in archive or str(archive['format']) != format_tag:
        raise ParameterError("Not a %s container" % (format_tag))
    if int(archive['version']) > version:
        raise ParameterError(
            "%s version %s is newer than supported version %s" % (
                format_tag, int(archive['version']), version))


def gen_gaussian(m, N, seed):
    """
    This function draws an m x N matrix with i.i.d. standard normal entries
    and scales every column to Euclidean norm sqrt(m), so that every
    diagonal entry of the sample covariance is one.

    """

    _check_dimensions(m, N)
    rng = np.random.default_rng(seed)
    entries = rng.standard_normal((m, N))
    entries *= np.sqrt(m) / np.linalg.norm(entries, axis=0)

    return MeasurementMatrix(entries, ENSEMBLE_GAUSSIAN, seed)


def gen_hadamard(d, max_order=DEFAULT_MAX_HADAMARD_ORDER):
    """
    This function builds the 2^d x 2^d Hadamard matrix recursively,

        H_0 = [1],   H_d = [[H_{d-1},  H_{d-1}],
                            [H_{d-1}, -H_{d-1}]].

    The entries are exact +1/-1 floats, so H_dᵀH_d = 2^d I holds exactly.

    """

    d = int(d)
    if d < 0:
        raise DimensionError("The order, %s, cannot be negative" % (d))
    if d > max_order:
        raise ResourceLimitError(
            "Hadamard order %s exceeds the cap of %s" % (d, max_order))

    hadamard = np.ones((1, 1))
    for _ in range(d):
        hadamard = np.block([[hadamard, hadamard], [hadamard, -hadamard]])

    return hadamard


def subsample_rows(hadamard, m, seed, rows=None):
    """
    This function selects m rows of a full Hadamard matrix, independently
    and uniformly at random, so rows may repeat.  Passing rows selects
    those row indices instead of drawing them.

    """

    hadamard = np.asarray(hadamard, dtype=float)
    total_rows = hadamard.shape[0]
    m = int(m)
    if m <= 0 or m > total_rows:
        raise DimensionError(
            "The number of rows, %s, must be in 1..%s" % (m, total_rows))

    if rows is None:
        rng = np.random.default_rng(seed)
        rows = rng.integers(0, total_rows, size=m)
    else:
        rows = np.asarray(rows, dtype=int)
        if rows.shape != (m,):
            raise DimensionError("rows must hold exactly %s indices" % (m))

    return MeasurementMatrix(hadamard[rows], ENSEMBLE_HADAMARD, seed, 1.0)


def gen_subsampled_hadamard(m, N, seed, max_order=DEFAULT_MAX_HADAMARD_ORDER):
    """
    Convenience wrapper: builds H_d for N = 2^d and subsamples m rows.

    """

    if not is_power_of_two(N):
        raise DimensionError(
            "The Hadamard ensemble needs N a power of two, not %s" % (N))
    d = int(N).bit_length() - 1

    return subsample_rows(gen_hadamard(d, max_order), m, seed)


def sample_covariance(matrix, materialize_full=False,
                      max_full=DEFAULT_MAX_FULL_COVARIANCE):
    """
    This function computes the sample covariance AᵀA/m.  The diagonal is
    always computed; the full matrix only when asked for and N <= max_full.

    """

    entries = getattr(matrix, 'entries', matrix)
    entries = np.asarray(entries, dtype=float)
    if entries.ndim != 2 or entries.shape[0] == 0:
        raise DimensionError("The sample covariance needs a nonempty matrix")

    m, N = entries.shape
    diagonal = np.einsum('ij,ij->j', entries, entries) / m

    full = None
    if materialize_full:
        if N <= max_full:
            full = entries.T @ entries / m
            full = (full + full.T) / 2.0
        else:
            logger.debug(
                "not materializing the %s x %s covariance, cap is %s",
                N, N, max_full)

    return SampleCovariance(diagonal, full)


def fwht(vector):
    """
    This function applies the Hadamard matrix H_d to a vector of length 2^d
    with the in-place butterfly of the fast Walsh-Hadamard transform, in
    O(2^d d) operations.  The input is not modified.

    """

    result = np.array(vector, dtype=float)
    if result.ndim != 1 or not is_power_of_two(result.shape[0]):
        raise DimensionError(
            "fwht needs a vector with a power of two length, not %s" % (
                result.shape,))

    length = result.shape[0]
    half = 1
    while half < length:
        blocks = result.reshape(-1, 2, half)
        upper = blocks[:, 0, :].copy()
        blocks[:, 0, :] += blocks[:, 1, :]
        blocks[:, 1, :] = upper - blocks[:, 1, :]
        half *= 2

    return result


def _check_dimensions(m, N):
    """
    Checks 0 < m <= N.

    """

    if int(m) <= 0 or int(N) <= 0 or int(m) > int(N):
        raise DimensionError(
            "Dimensions must satisfy 0 < m <= N, not m=%s, N=%s" % (m, N))
