"""Thread pool for independent lambda batches, merged back in submission order."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")


def chunked(values: np.ndarray, parts: int) -> list[np.ndarray]:
    parts = max(1, min(parts, values.size))
    return [chunk for chunk in np.array_split(values, parts) if chunk.size]


def ordered_map(fn: Callable[[np.ndarray], Sequence[T]], values, threads: int | None = None) -> list[T]:
    """Apply fn to contiguous chunks of values; results keep the input order."""
    values = np.asarray(values)
    threads = threads or settings.relax_evans_threads
    if threads <= 1 or values.size < 2 * threads:
        return list(fn(values))
    chunks = chunked(values, threads)
    logger.debug("evaluating %d samples in %d chunks on %d threads", values.size, len(chunks), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(fn, chunks))
    out: list[T] = []
    for part in results:
        out.extend(part)
    return out
