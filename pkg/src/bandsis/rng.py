"""Reproducible random streams and deterministic parallel maps.

Samples are grouped into fixed blocks of ``BLOCK_SIZE`` consecutive sample
indices.  Block ``b`` under seed ``s`` always draws from the counter-based
stream ``Philox(key = s + 2**64 * b)``, so results never depend on how many
workers process the blocks.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

__all__ = ["BLOCK_SIZE", "substream", "block_sizes", "map_blocks"]

BLOCK_SIZE = 1024
_MASK64 = (1 << 64) - 1


def substream(seed: int, block: int) -> np.random.Generator:
    """Generator for block ``block`` of the run seeded by ``seed`` (64-bit)."""
    if seed < 0 or block < 0:
        raise ValueError("seed and block index must be nonnegative")
    return np.random.Generator(np.random.Philox(key=(seed & _MASK64) | (block << 64)))


def block_sizes(n_samples: int, block_size: int = BLOCK_SIZE) -> list[int]:
    full, rem = divmod(n_samples, block_size)
    return [block_size] * full + ([rem] if rem else [])


def map_blocks(
    fn: Callable,
    n_samples: int,
    seed: int,
    args: Sequence = (),
    workers: int = 1,
    block_size: int = BLOCK_SIZE,
) -> list:
    """Evaluate ``fn(*args, seed, block, size)`` for every block, in block order."""
    sizes = block_sizes(n_samples, block_size)
    tasks = [(b, size) for b, size in enumerate(sizes)]
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*args, seed, b, size) for b, size in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, seed, b, size) for b, size in tasks]
        return [f.result() for f in futures]
