# --------------------------------------------------------------------------- #
#   exceptions.py                                                             #
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


from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable
from typing import Tuple


@dataclass
class DetkitError(Exception):
    'Base exception class for detkit.'

    message: str = ''

    def __str__(self) -> str:
        return self.message or str(self.__class__.__doc__)

@dataclass
class ModelError(DetkitError, ValueError):
    'Malformed observation model.'

    violations: Tuple[str, ...] = tuple()

    def __str__(self) -> str:
        if self.violations:
            return '; '.join(self.violations)
        return super().__str__()

@dataclass
class ZeroProbabilityObservation(DetkitError, ValueError):
    'Observation has zero probability under both hypotheses.'

    observation: Hashable = None

class PolicyError(DetkitError, ValueError):
    'Malformed sensor policy, or policies that do not fit together.'

@dataclass
class UnreachableActions(DetkitError, ValueError):
    'Action tuple has zero probability under both hypotheses.'

    actions: Tuple[int, ...] = tuple()

class DegenerateLaws(DetkitError, ValueError):
    'Output laws vanish on every action.'


@dataclass
class EnumerationCapExceeded(DetkitError, RuntimeError):
    'Exact enumeration is too large; estimate with Monte Carlo instead.'

    needed: int = 0
    cap: int = 0

    def __str__(self) -> str:
        return (
            f'{self.message or self.__class__.__doc__} '
            f'(needs {self.needed} outcomes, cap is {self.cap})'
        )

class SearchBudgetExceeded(EnumerationCapExceeded):
    'Design search is too large for exhaustive enumeration.'


@dataclass
class InputFileError(DetkitError):
    'Malformed input file.'

    path: str = ''
    line: int = 1

    def __str__(self) -> str:
        return f'{self.path}:{self.line}: {self.message}'


class DetkitWarning(Warning):
    'Base warning class for detkit.'

class SpotCheckWarning(DetkitWarning):
    'Too many sensors to enumerate S_N; exchangeability is spot-checked on random permutations.'

class MonteCarloFallbackWarning(DetkitWarning):
    'Exact enumeration is over the cap; falling back to Monte Carlo.'

class VoidBoundWarning(DetkitWarning):
    'Some sensor output law has one-sided zero mass; the exponent lower bound is void.'
