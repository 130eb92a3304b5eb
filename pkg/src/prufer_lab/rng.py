"""Keyed random streams.

Every random quantity is drawn from a stream addressed by
``(master, index, stream)`` so realizations are reproducible and do not
depend on the order (or the worker) in which they are computed.
"""

import numpy as np

STREAM_PATH = 0
STREAM_SDE = 1
STREAM_PERMUTATION = 2
STREAM_SAMPLING = 3


def seed_sequence(master, index=0, stream=0):
    return np.random.SeedSequence(int(master), spawn_key=(int(index), int(stream)))


def generator(master, index=0, stream=0):
    """Philox generator keyed by (master, index, stream)."""
    return np.random.Generator(np.random.Philox(seed_sequence(master, index, stream)))


def kernel_seed(master, index=0, stream=0):
    """32-bit seed for the Mersenne Twister used inside numba kernels."""
    return int(seed_sequence(master, index, stream).generate_state(1, np.uint32)[0])


def kernel_seeds(master, indices, stream=0):
    return np.array([kernel_seed(master, i, stream) for i in indices], dtype=np.int64)
