# --------------------------------------------------------------------------- #
#   monkey.py                                                                 #
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
'Monkey patches.'


from __future__ import annotations

import logging
from typing import Final


logger: Final[logging.Logger] = logging.getLogger('detkit')
logger.addHandler(logging.NullHandler())


import functools  # isort: skip
import json  # isort: skip
import math  # isort: skip
from fractions import Fraction  # isort: skip
from typing import Any  # isort: skip
from typing import Callable  # isort: skip


def format_number(value: Any) -> str:
    '''Render a probability the way reports print it.

    Exact rationals print as "a/b", floats with 15 significant digits, and
    infinities as "inf" / "-inf".

        >>> format_number(Fraction(19, 90))
        '19/90'
        >>> format_number(Fraction(1))
        '1'
        >>> format_number(0.25)
        '0.25'
        >>> format_number(-math.inf)
        '-inf'
    '''
    if isinstance(value, Fraction):
        return str(value)
    value = float(value)
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return format(value, '.15g')


class DetkitEncoder(json.JSONEncoder):
    'Custom JSON encoder that can serialize Fractions and detkit reports.'

    def default(self, o: Any) -> Any:
        if isinstance(o, Fraction):
            return format_number(o)
        if hasattr(o, 'to_dict'):
            return _replace_infinities(o.to_dict())
        return super().default(o)

    def iterencode(self, o: Any, _one_shot: bool = False) -> Any:
        # The base encoder writes bare Infinity for float('inf'); reports use
        # the quoted form instead.
        return super().iterencode(_replace_infinities(o), _one_shot)


def _replace_infinities(o: Any) -> Any:
    if isinstance(o, float) and math.isinf(o):
        return format_number(o)
    if isinstance(o, dict):
        return {key: _replace_infinities(value) for key, value in o.items()}
    if isinstance(o, (list, tuple)):
        return [_replace_infinities(value) for value in o]
    return o


def _decorate_dumps(func: Callable[..., str]) -> Callable[..., str]:
    'Decorate json.dumps() to use DetkitEncoder by default.'
    @functools.wraps(func)
    def wrapper(*args: Any,
                cls: type[json.JSONEncoder] = DetkitEncoder,
                **kwargs: Any,
                ) -> str:
        return func(*args, cls=cls, **kwargs)
    return wrapper

json.dumps = _decorate_dumps(json.dumps)

logger.info(
    'Monkey patched json.dumps() to be able to JSONify Fractions and detkit '
    'reports by default'
)
