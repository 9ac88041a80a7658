"""Parallel evaluation helpers."""

from worker.pool import chunked, ordered_map

__all__ = ["ordered_map", "chunked"]
