"""
Thread-pool fan-out for independent benchmark trials.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")

logger = logging.getLogger(__name__)


def run_jobs(jobs: Sequence[Callable[[], T]], threads: int = 1) -> List[Optional[T]]:
    """Run every job and return the results in job order.

    Each job writes only its own slot, so the result does not depend on the
    thread count or on scheduling. Exceptions propagate to the caller.
    """
    slots: List[Optional[T]] = [None] * len(jobs)

    def run(index: int) -> None:
        slots[index] = jobs[index]()

    if threads <= 1 or len(jobs) <= 1:
        for i in range(len(jobs)):
            run(i)
        return slots
    logger.debug("running %d jobs on %d threads", len(jobs), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for future in [pool.submit(run, i) for i in range(len(jobs))]:
            future.result()
    return slots
