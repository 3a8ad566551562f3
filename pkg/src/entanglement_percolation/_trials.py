"""Counter-based random streams and the chunked trial runner shared by the engines."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_SEED = 20070101
MAX_SEED = 2**64 - 1
BLOCK_TRIALS = 4096


class TrialError(ValueError):
    """Raised for seeds or stream indices a Philox stream cannot take."""


def trial_stream(seed: int, index: int) -> np.random.Generator:
    """Independent stream for (master seed, trial or block index).

    Philox is counter-based: the index occupies the top counter word, so
    stream contents depend only on (seed, index), never on scheduling.
    """
    if not 0 <= seed <= MAX_SEED:
        raise TrialError(f"seed must lie in [0, {MAX_SEED}], got {seed}.")
    if index < 0:
        raise TrialError(f"index must be non-negative, got {index}.")
    counter = np.array([0, 0, 0, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def run_chunked(
    func: Callable[[int, int], T],
    total: int,
    chunk: int,
    threads: Optional[int] = None,
) -> list[T]:
    """Call ``func(start, stop)`` over fixed chunks of ``range(total)``.

    Results come back in chunk order whatever the thread count.
    """
    if total <= 0:
        return []
    bounds = [(start, min(start + chunk, total)) for start in range(0, total, chunk)]
    workers = default_threads() if threads is None else max(1, int(threads))
    if workers == 1 or len(bounds) == 1:
        return [func(start, stop) for start, stop in bounds]
    with ThreadPoolExecutor(max_workers=min(workers, len(bounds))) as pool:
        return list(pool.map(lambda b: func(*b), bounds))


def block_sizes(total: int, block: int = BLOCK_TRIALS) -> list[int]:
    return [min(block, total - start) for start in range(0, total, block)]
