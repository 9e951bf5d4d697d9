"""Ordered worker pool and seed derivation for independent jobs."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

WORKERS_ENV = "SFUC_LAB_WORKERS"


def worker_count(requested=None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    if requested:
        return max(1, int(requested))
    return 1


def ordered_map(func, items, workers=None) -> list:
    """``[func(x) for x in items]`` on a bounded thread pool.

    Results come back in input order, so the output never depends on the
    schedule.  The first exception raised by a job propagates.
    """
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def derive_seed(master, *keys) -> int:
    """64-bit seed mixed from a master seed and integer keys."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(master, *keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys)))
