# --------------------------------------------------------------------------- #
#   executor.py                                                               #
#                                                                             #
#   Copyright © 2024, the detkit authors.                                     #
#                                                                             #
#   Licensed under the Apache License, Version 2.0 (the "License");           #
#   you may not use this file except in compliance with the License.          #
#   You may obtain a copy of the License at:                                  #
#       http://www.apache.org/licenses/LICENSE-2.0                            #
#                                                                             #
#   Unless required by applicable law or agreed to in writing, software       #
#   distributed under the License is distributed on an "AS IS" BASIS,         #
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.  #
#   See the License for the specific language governing permissions and       #
#   limitations under the License.                                            #
# --------------------------------------------------------------------------- #
'Scatter work over a thread pool and gather it back in a fixed order.'


from __future__ import annotations

import concurrent.futures
from typing import Callable
from typing import Iterable
from typing import List
from typing import Tuple
from typing import TypeVar

from .monkey import logger


T = TypeVar('T')
R = TypeVar('R')


def partition(total: int, parts: int) -> Tuple[range, ...]:
    '''Split range(total) into `parts` contiguous, nearly equal ranges.

    Earlier ranges get the remainder, so the split only depends on (total,
    parts) and never on scheduling:

        >>> partition(10, 3)
        (range(0, 4), range(4, 7), range(7, 10))
        >>> partition(2, 4)
        (range(0, 1), range(1, 2), range(2, 2), range(2, 2))
    '''
    if parts < 1:
        raise ValueError('parts must be an int >= 1')
    quotient, remainder = divmod(total, parts)
    ranges, start = [], 0
    for index in range(parts):
        stop = start + quotient + (index < remainder)
        ranges.append(range(start, stop))
        start = stop
    return tuple(ranges)


def ordered_map(func: Callable[[T], R],
                items: Iterable[T],
                *,
                workers: int = 1,
                ) -> List[R]:
    '''Apply func to every item, using up to `workers` threads.

    Results come back in submission order, so any reduction over them is
    deterministic no matter which thread finishes first.  With workers <= 1
    everything runs inline on the calling thread.

        >>> ordered_map(lambda x: x * x, range(5), workers=3)
        [0, 1, 4, 9, 16]
    '''
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug('Scattering %d tasks over %d threads', len(items), workers)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
