"""Order-preserving map over an optional worker-process pool.

threads <= 1 runs in-process. Larger values fan out over a
ProcessPoolExecutor; results come back in input order, so output is
byte-identical for every worker count. Heavy shared state (a compiled
matcher, a word list) is shipped once per worker through the
initializer instead of once per task.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_DEFAULT_CHUNK = 256


def parallel_map(
    fn: Callable[[T], R],
    items: Sequence[T],
    *,
    threads: int = 1,
    chunksize: int = _DEFAULT_CHUNK,
    initializer: Callable[..., None] | None = None,
    initargs: tuple = (),
) -> list[R]:
    if threads <= 1 or len(items) < 2 * chunksize:
        if initializer is not None:
            initializer(*initargs)
        return [fn(item) for item in items]
    with ProcessPoolExecutor(
        max_workers=threads, initializer=initializer, initargs=initargs
    ) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
