"""Deterministic path-parallel execution.

Every Monte-Carlo ensemble maps a worker over path indices 0..n-1.  Each path
derives its own rng stream from (master seed, path index), and results are
reassembled in path-index order before any reduction, so outputs are
bit-identical for every worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

__all__ = ["map_paths"]


def _run_chunk(fn: Callable, args: tuple, indices: Sequence[int]) -> list:
    return [fn(args, int(i)) for i in indices]


def map_paths(fn: Callable, args: tuple, n_paths: int, workers: int = 1) -> list:
    """Evaluate fn(args, i) for i in range(n_paths), in path order.

    fn must be a module-level callable and args picklable when workers > 1.
    """
    if n_paths < 0:
        raise ValueError("n_paths must be nonnegative")
    if workers <= 1 or n_paths <= 1:
        return _run_chunk(fn, args, range(n_paths))
    chunks = np.array_split(np.arange(n_paths), min(4 * workers, n_paths))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, fn, args, c.tolist()) for c in chunks]
        parts = [f.result() for f in futures]
    return [item for part in parts for item in part]
