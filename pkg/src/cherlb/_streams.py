"""Deterministic random substreams.

Every Monte Carlo routine in the package splits its draws into fixed-size
chunks.  Chunk ``c`` of stream ``s`` is generated by a Philox generator keyed
on ``(seed, s, c)``, so draw ``i`` depends only on the seed and ``i``, never on
how chunks are distributed over workers.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

WORKERS_ENV = "CHERLB_WORKERS"

# stream ids, one per kind of random object
STREAM_CHI2 = 1
STREAM_CHANNEL = 2
STREAM_INNOVATION = 3
STREAM_RIS = 4


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def chunk_rng(seed, stream, chunk):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(chunk)))
    return np.random.Generator(np.random.Philox(ss))


def chunk_bounds(n, chunk_size):
    """Yield ``(chunk_index, start, stop)`` covering ``range(n)``."""
    for c, start in enumerate(range(0, n, chunk_size)):
        yield c, start, min(start + chunk_size, n)


def map_chunks(fn, n, chunk_size, workers=None):
    """Apply ``fn(chunk_index, start, stop)`` over all chunks, in chunk order.

    Results are returned in chunk order whatever the worker count, so any
    reduction done by the caller is order-stable.
    """
    bounds = list(chunk_bounds(n, chunk_size))
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(bounds) <= 1:
        return [fn(*b) for b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))


def fold_chunks(fn, n, chunk_size, fold, state, workers=None, window=None):
    """Stream ``fn`` over chunks and fold results into ``state`` in chunk order.

    Only ``window`` chunk results are held at a time, so n can exceed memory.
    """
    bounds = list(chunk_bounds(n, chunk_size))
    workers = default_workers() if workers is None else max(1, int(workers))
    window = window or 4 * workers
    if workers == 1:
        for b in bounds:
            state = fold(state, fn(*b))
        return state
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i in range(0, len(bounds), window):
            for res in pool.map(lambda b: fn(*b), bounds[i : i + window]):
                state = fold(state, res)
    return state


class LowerTail:
    """Keep the ``r`` smallest values seen so far (streaming order statistic)."""

    def __init__(self, r):
        self.r = int(r)
        self._kept = np.empty(0)

    def update(self, values):
        values = np.asarray(values, dtype=float).ravel()
        if values.size > self.r:
            values = np.partition(values, self.r - 1)[: self.r]
        merged = np.concatenate([self._kept, values])
        if merged.size > self.r:
            merged = np.partition(merged, self.r - 1)[: self.r]
        self._kept = merged

    def order_statistic(self):
        """The r-th smallest value (1-indexed)."""
        if self._kept.size < self.r:
            raise ValueError("fewer than r values observed")
        return float(np.max(self._kept))
