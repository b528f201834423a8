"""Deterministic fan-out of seeded work over worker processes.

Work is cut into fixed-size chunks and chunk ``k`` always receives child
``k`` of the master ``SeedSequence``, so results do not depend on the number
of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

import numpy as np

DEFAULT_CHUNK = 65536


def chunk_plan(seed: int | np.random.SeedSequence, total: int, chunk: int = DEFAULT_CHUNK):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    n_chunks = max(1, -(-total // chunk))
    children = ss.spawn(n_chunks)
    plan = []
    for k, child in enumerate(children):
        start = k * chunk
        plan.append((start, min(chunk, total - start), child))
    return [p for p in plan if p[1] > 0]


def run_ordered(fn: Callable[..., Any], tasks: Sequence[tuple], jobs: int = 1) -> list:
    """``[fn(*t) for t in tasks]``, optionally across ``jobs`` processes."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]
