# --------------------------------------------------------------------------- #
#   test_executor.py                                                          #
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


import threading
import time

import pytest

from detkit.executor import ordered_map
from detkit.executor import partition


def test_partition_covers_everything() -> None:
    'Ranges are contiguous, cover range(total) and differ in size by at most one'
    for total in range(20):
        for parts in range(1, 6):
            ranges = partition(total, parts)
            assert len(ranges) == parts
            assert [i for r in ranges for i in r] == list(range(total))
            sizes = [len(r) for r in ranges]
            assert max(sizes) - min(sizes) <= 1
            assert sizes == sorted(sizes, reverse=True)


def test_partition_needs_a_part() -> None:
    with pytest.raises(ValueError):
        partition(10, 0)


def test_ordered_map_keeps_submission_order() -> None:
    'Later items finish first, but results come back in order'
    def slow_for_small(x: int) -> int:
        time.sleep(0.01 * (5 - x))
        return x * 10

    assert ordered_map(slow_for_small, range(5), workers=5) == [0, 10, 20, 30, 40]


def test_ordered_map_inline() -> None:
    'One worker runs everything on the calling thread'
    callers = ordered_map(lambda _: threading.get_ident(), range(3), workers=1)
    assert set(callers) == {threading.get_ident()}


def test_ordered_map_propagates_errors() -> None:
    def fail_on_two(x: int) -> int:
        if x == 2:
            raise ZeroDivisionError(x)
        return x

    with pytest.raises(ZeroDivisionError):
        ordered_map(fail_on_two, range(4), workers=2)
