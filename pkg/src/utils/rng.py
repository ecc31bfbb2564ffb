"""
Random Stream Helpers
======================
Counter-based random streams keyed by integer coordinates, so a trial draws
the same numbers whether it runs serially or on a worker thread.
"""
from typing import Tuple

import numpy as np


def stream_seed(master_seed: int, *indices: int) -> Tuple[int, ...]:
    """Seed tuple recorded with a snapshot set."""
    return (int(master_seed),) + tuple(int(i) for i in indices)


def trial_generator(master_seed: int, *indices: int) -> np.random.Generator:
    """
    Philox generator for (master_seed, *indices).

    Args:
        master_seed: Non-negative experiment seed
        *indices: Non-negative coordinates (grid index, trial index, stream tag)
    """
    seed = stream_seed(master_seed, *indices)
    if any(part < 0 for part in seed):
        raise ValueError(f"Seed components must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(seed))))
