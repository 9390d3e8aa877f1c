"""Deterministic work partitioning shared by the optimizer and the suites."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "MAXENT_THREADS"


def thread_count() -> int:
    """Worker cap from MAXENT_THREADS; 0 or unset picks the automatic value.

    The automatic value is 1: every job here is deterministic and
    GIL-dominated, so threads only pay off when asked for explicitly.
    """
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    if value <= 0:
        return 1
    return value


def ordered_map(fn: Callable[[T], R], jobs: Sequence[T]) -> list[R]:
    """Map ``fn`` over ``jobs``, preserving job order in the result.

    Results are identical for any worker count: jobs are independent and the
    reduction is ordered.
    """
    workers = min(thread_count(), max(len(jobs), 1))
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))
