from __future__ import annotations

__all__ = ["resolve_threads", "run_replicates"]

import os
from concurrent.futures import ThreadPoolExecutor
from logging import Logger
from typing import Callable, List, TypeVar

from ..utils.logger import void_logger

_T = TypeVar("_T")


def resolve_threads(threads: int | str | None) -> int:
    """
    Turns a thread request into a worker count; "auto" and None mean one
    worker per CPU.
    """
    if threads is None or (isinstance(threads, str) and threads.lower() == "auto"):
        return os.cpu_count() or 1
    count = int(threads)
    if count < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    return count


def run_replicates(
    fn: Callable[[int], _T],
    reps: int,
    threads: int = 1,
    logger: Logger = void_logger,
) -> List[_T]:
    """
    Evaluates fn(0) .. fn(reps - 1) on a worker pool and returns the results in
    replicate order, so any reduction over them is independent of scheduling.

    :param fn: replicate body; must depend only on its replicate index and
               read-only shared state
    :param reps: number of replicates
    :param threads: worker count
    :param logger: progress logger
    :return: results ordered by replicate
    """
    if reps < 1:
        raise ValueError(f"at least one replicate is required, got {reps}")

    workers = min(resolve_threads(threads), reps)
    logger.debug(f"running {reps} replicates on {workers} worker(s)")
    if workers == 1:
        return [fn(r) for r in range(reps)]

    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="lrdw") as pool:
        results = list(pool.map(fn, range(reps)))
    logger.debug(f"gathered {len(results)} replicate results")
    return results
