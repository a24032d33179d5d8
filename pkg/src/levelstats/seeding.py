"""Deterministic per-realization random streams.

Every stochastic routine in the package draws from a Generator produced here,
so a (master_seed, realization_index) pair pins the realization regardless of
worker count or execution order.
"""

import numpy as np

from .errors import ValidationError

_U64_MAX = 2**64 - 1


def check_seed(seed):
    """Validate a 64-bit unsigned master seed and return it as int."""
    seed = int(seed)
    if not 0 <= seed <= _U64_MAX:
        raise ValidationError(f"seed must fit in uint64, got {seed}")
    return seed


def realization_rng(master_seed, realization_index=0):
    """Generator for one realization, derived by hashing (master_seed, index)."""
    master_seed = check_seed(master_seed)
    if realization_index < 0:
        raise ValidationError(f"realization_index must be >= 0, got {realization_index}")
    ss = np.random.SeedSequence((master_seed, int(realization_index)))
    return np.random.default_rng(ss)
