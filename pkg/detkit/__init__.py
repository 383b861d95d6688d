# --------------------------------------------------------------------------- #
#   __init__.py                                                               #
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
'''Decentralized binary detection with quantizing sensors.

N sensors each observe a noisy signal, quantize it to one of |U| actions, and
a fusion center decides between two hypotheses from the actions alone.
detkit computes the exact Bayes risk of such teams in rational arithmetic,
estimates it by Monte Carlo where exact enumeration is out of reach, finds
Chernoff error exponents, and searches for the best threshold designs.
'''


from typing import Final
from typing import Tuple


__title__: Final[str] = 'detkit'
__version__: Final[str] = '1.0.0'
__description__: Final[str] = __doc__.split(sep='\n\n', maxsplit=1)[0]
__url__: Final[str] = 'https://github.com/detkit/detkit'
__author__: Final[str] = 'the detkit authors'
__author_email__: Final[str] = 'detkit@users.noreply.github.com'
__license__: Final[str] = 'Apache 2.0'
__keywords__: Final[str] = 'decentralized detection sensor fusion Bayes risk Chernoff exponent'
__copyright__: Final[str] = f'Copyright © 2024, {__author__}.'


from .monkey import DetkitEncoder  # isort: skip

from .exceptions import DetkitError  # isort:skip
from .exceptions import ModelError  # isort:skip
from .exceptions import ZeroProbabilityObservation  # isort:skip
from .exceptions import PolicyError  # isort:skip
from .exceptions import UnreachableActions  # isort:skip
from .exceptions import DegenerateLaws  # isort:skip
from .exceptions import EnumerationCapExceeded  # isort:skip
from .exceptions import SearchBudgetExceeded  # isort:skip
from .exceptions import InputFileError  # isort:skip
from .exceptions import DetkitWarning  # isort:skip
from .exceptions import SpotCheckWarning  # isort:skip
from .exceptions import MonteCarloFallbackWarning  # isort:skip
from .exceptions import VoidBoundWarning  # isort:skip

from .models import Hypothesis  # isort:skip
from .models import Prior  # isort:skip
from .models import FiniteObservationModel  # isort:skip
from .models import GaussianShiftModel  # isort:skip
from .models import likelihood_ratio  # isort:skip
from .models import validate_model  # isort:skip
from .models import induced_lr_law  # isort:skip

from .policies import ThresholdPolicy  # isort:skip
from .policies import StochasticKernel  # isort:skip
from .policies import TeamPolicy  # isort:skip
from .policies import TeamMixture  # isort:skip
from .policies import compile_threshold  # isort:skip
from .policies import output_law  # isort:skip
from .policies import enumerate_threshold_policies  # isort:skip

from .fusion import FusionInfo  # isort:skip
from .fusion import MapRule  # isort:skip
from .fusion import FusionTable  # isort:skip
from .fusion import map_decide  # isort:skip

from .evaluate import RiskReport  # isort:skip
from .evaluate import exact_risk  # isort:skip
from .evaluate import mixture_risk  # isort:skip
from .evaluate import mc_risk  # isort:skip
from .evaluate import sweep_n  # isort:skip

from .exponent import chernoff_exponent  # isort:skip
from .exponent import exponent_lower_bound  # isort:skip

from .optimize import best_team_exhaustive  # isort:skip
from .optimize import best_response  # isort:skip
from .optimize import coordinate_descent  # isort:skip
from .optimize import best_symmetric_exponent  # isort:skip
from .optimize import best_two_group  # isort:skip


__all__: Final[Tuple[str, ...]] = (
    'DetkitEncoder',

    'DetkitError',
    'ModelError',
    'ZeroProbabilityObservation',
    'PolicyError',
    'UnreachableActions',
    'DegenerateLaws',
    'EnumerationCapExceeded',
    'SearchBudgetExceeded',
    'InputFileError',
    'DetkitWarning',
    'SpotCheckWarning',
    'MonteCarloFallbackWarning',
    'VoidBoundWarning',

    'Hypothesis',
    'Prior',
    'FiniteObservationModel',
    'GaussianShiftModel',
    'likelihood_ratio',
    'validate_model',
    'induced_lr_law',

    'ThresholdPolicy',
    'StochasticKernel',
    'TeamPolicy',
    'TeamMixture',
    'compile_threshold',
    'output_law',
    'enumerate_threshold_policies',

    'FusionInfo',
    'MapRule',
    'FusionTable',
    'map_decide',

    'RiskReport',
    'exact_risk',
    'mixture_risk',
    'mc_risk',
    'sweep_n',

    'chernoff_exponent',
    'exponent_lower_bound',

    'best_team_exhaustive',
    'best_response',
    'coordinate_descent',
    'best_symmetric_exponent',
    'best_two_group',
)
