"""Counter-based random streams.

Every random draw in the package comes from a Philox generator whose key is
derived from ``(base_seed, purpose, *indices)``.  A disorder sample or a
Markov chain therefore owns its stream regardless of which worker runs it or
in which order.
"""

from __future__ import annotations

import numpy as np

# purpose tags, first element of the spawn key
DISORDER = 0
MCMC = 1
INNER = 2
INIT = 3


def stream(base_seed: int, *ids: int) -> np.random.Generator:
    """Independent Philox generator addressed by ``(base_seed, *ids)``."""
    if base_seed < 0:
        raise ValueError("seeds must be non-negative")
    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.Philox(ss))


def normals(base_seed: int, ids, shape) -> np.ndarray:
    """Standard normal draws of ``shape`` from the stream ``ids``."""
    return stream(base_seed, *ids).standard_normal(shape)
