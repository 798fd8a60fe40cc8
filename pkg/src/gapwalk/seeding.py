"""Deterministic seed derivation and worker-count-independent mapping.

Every stochastic operation takes a master seed and derives one generator
per internal task from (master, task index). Results are assembled in
task-index order, so output never depends on scheduling or pool size.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_rng(master_seed: int, *stream: int) -> np.random.Generator:
    """Generator for a (master seed, stream index...) pair.

    Distinct streams are statistically independent; the same pair always
    yields the same generator state.
    """
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed) & _MASK64, *map(int, stream)])
    )


def parallel_map(fn, items, workers: int = 1) -> list:
    """Map fn over items, preserving order regardless of worker count."""
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
