#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
Ordered parallel map shared by the verifiers, the coefficient search and the pipeline.

Work items only read shared data, so results are independent of scheduling and are returned in
input order.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply ``func`` to every item, using up to ``workers`` threads.

    :param func: function without side effects on shared state.
    :param items: the work items.
    :param workers: number of threads. 1 or less evaluates in the calling thread.
    :return: results in the order of ``items``. The first exception raised by ``func`` is re-raised.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug(f"mapping {len(items)} items on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="grsc") as executor:
        return list(executor.map(func, items))
