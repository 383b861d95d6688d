# --------------------------------------------------------------------------- #
#   conftest.py                                                               #
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


import random
import warnings
from fractions import Fraction
from typing import List
from typing import Tuple

import pytest

from detkit import DetkitWarning
from detkit.catalog import example_model
from detkit.catalog import perfect_model
from detkit.catalog import policies_ab
from detkit.catalog import policies_cd
from detkit.models import FiniteObservationModel
from detkit.models import GaussianShiftModel
from detkit.models import Prior
from detkit.policies import StochasticKernel


@pytest.fixture(autouse=True)
def filter_warnings() -> None:
    warnings.filterwarnings('ignore', category=DetkitWarning)


@pytest.fixture
def model() -> FiniteObservationModel:
    return example_model()


@pytest.fixture
def perfect() -> FiniteObservationModel:
    return perfect_model()


@pytest.fixture
def gaussian() -> GaussianShiftModel:
    return GaussianShiftModel(0.0, 1.0, 1.0)


@pytest.fixture
def uninformative() -> FiniteObservationModel:
    return FiniteObservationModel((1, 2), ('1/2', '1/2'), ('1/2', '1/2'))


@pytest.fixture
def prior() -> Prior:
    return Prior.equal()


@pytest.fixture
def ab() -> Tuple[StochasticKernel, StochasticKernel]:
    return policies_ab()


@pytest.fixture
def cd() -> Tuple[StochasticKernel, StochasticKernel]:
    return policies_cd()


def random_pmf(rng: random.Random, size: int, *, zeros: bool = True) -> Tuple[Fraction, ...]:
    'A random rational pmf with small integer weights.'
    low = 0 if zeros else 1
    while True:
        weights = [rng.randint(low, 20) for _ in range(size)]
        if sum(weights):
            break
    total = sum(weights)
    return tuple(Fraction(weight, total) for weight in weights)


def random_models(seed: int,
                  count: int,
                  *,
                  max_size: int = 4,
                  zeros: bool = True,
                  ) -> List[FiniteObservationModel]:
    '''Random rational finite models whose likelihood ratios are all defined.

    Symbols with no mass under either hypothesis are rerolled.
    '''
    rng = random.Random(seed)
    models = []
    while len(models) < count:
        size = rng.randint(2, max_size)
        pmf1, pmf2 = random_pmf(rng, size, zeros=zeros), random_pmf(rng, size, zeros=zeros)
        if any(a == 0 and b == 0 for a, b in zip(pmf1, pmf2)):
            continue
        models.append(FiniteObservationModel(tuple(range(1, size + 1)), pmf1, pmf2))
    return models
