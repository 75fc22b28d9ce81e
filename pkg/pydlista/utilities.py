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
This module implements some basic utilities shared by the sparse recovery
modules: the error categories, the seed derivation scheme and a couple of
array helpers.

All error categories subclass ValueError, so callers that only care about
"bad input" can keep catching ValueError.

"""

import numpy as np

#   Seed streams.  A stream number is the first element of the spawn key,
#   so that seeds drawn for different purposes never collide.
STREAM_SIGNAL = 0
STREAM_NOISE = 1
STREAM_RESAMPLE = 2
STREAM_TRUTH = 3
STREAM_TRIAL = 4
STREAM_BATCH = 5


class DimensionError(ValueError):
    """
    Raised when sizes are invalid or incompatible with each other.

    """


class ParameterError(ValueError):
    """
    Raised when a parameter is outside its admissible range, or when a
    configuration file is malformed.

    """


class DegenerateSignalError(ValueError):
    """
    Raised when a zero signal is given where a scale has to be derived
    from it, for example the noise level or the NMSE denominator.

    """


class ResourceLimitError(ValueError):
    """
    Raised when a request would exceed one of the configured memory caps.

    """


class TrainingDivergedError(ValueError):
    """
    Raised when the validation NMSE climbs above the divergence threshold.

    """

    def __init__(self, stage, nmse_db):
        ValueError.__init__(
            self, "stage %s diverged with validation NMSE %.2f dB" % (
                stage, nmse_db))
        self.stage = stage
        self.nmse_db = nmse_db


class TrialError(ValueError):
    """
    Raised by the harness when a trial fails.  It carries the index of the
    failing trial and the original error.

    """

    def __init__(self, trial, cause):
        ValueError.__init__(self, "trial %s failed: %s" % (trial, cause))
        self.trial = trial
        self.cause = cause


def derive_rng(master_seed, *key):
    """
    This function returns a numpy Generator for the stream identified by
    key under master_seed.

    The seed material is a numpy SeedSequence with entropy master_seed and
    spawn key `key`, which is a counter-mixed hash of both.  Streams with
    different keys are statistically independent and do not depend on the
    order in which they are requested, so samples and trials can be drawn
    in any order or in parallel.

    """

    return np.random.default_rng(_seed_sequence(master_seed, key))


def derive_seed(master_seed, *key):
    """
    This function returns an unsigned 32 bit integer seed for the stream
    identified by key.  It is used where the seed itself has to be stored,
    for example the noise seed of an observation.

    """

    return int(_seed_sequence(master_seed, key).generate_state(1)[0])


def _seed_sequence(master_seed, key):
    """
    Builds the SeedSequence after checking the inputs.

    """

    if int(master_seed) < 0:
        raise ParameterError(
            "The seed, %s, must be an unsigned integer" % (master_seed))
    for item in key:
        if int(item) < 0:
            raise ParameterError(
                "The seed key, %s, must hold unsigned integers" % (key,))

    return np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(i) for i in key))


def as_matrix(matrix):
    """
    This function accepts either a MeasurementMatrix or anything numpy can
    turn into a 2-d float array, and returns the 2-d array.

    """

    entries = getattr(matrix, 'entries', matrix)
    entries = np.asarray(entries, dtype=float)
    if entries.ndim != 2:
        raise DimensionError(
            "A matrix must be 2-d, not %s-d" % (entries.ndim))

    return entries


def is_power_of_two(value):
    """
    Returns True when value is a positive integral power of two.

    """

    value = int(value)
    return value > 0 and value & (value - 1) == 0


def check_vector(vector, length, name):
    """
    This function turns vector into a 1-d float array and checks its
    length.

    """

    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.shape[0] != length:
        raise DimensionError(
            "%s must be a vector of length %s, not shape %s" % (
                name, length, vector.shape))

    return vector


def check_count(value, name, minimum):
    """
    This function checks that value is an integer no smaller than minimum
    and returns it as an int.  Booleans are not counts.

    """

    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError("%s, %s, must be an int" % (name, value))
    if value < minimum:
        raise ParameterError("%s, %s, must be at least %s" % (
            name, value, minimum))

    return int(value)
