# --------------------------------------------------------------------------- #
#   catalog.py                                                                #
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
'''The two-sensor worked example where asymmetric quantizers beat symmetric ones.

Each sensor observes y ∈ {1, 2, 3} with

    P(y | H1) = (4/5, 1/5, 0)        P(y | H2) = (1/3, 1/3, 1/3)

and sends one bit.  There are only two informative threshold policies: A
(u = 1 iff y = 1) and B (u = 1 iff y ∈ {1, 2}).  The team (A, B) beats both
(A, A) and (B, B).  A perfect-observation variant with policies C (report y)
and D (report a fair coin) separates the two fusion information regimes.

    >>> rows = example_rows()
    >>> [row.status for row in rows].count('PASS') == len(rows)
    True
'''


from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any
from typing import Dict
from typing import List
from typing import Tuple

from .evaluate import exact_risk
from .evaluate import mixture_risk
from .fusion import FusionInfo
from .fusion import MapRule
from .fusion import bayes_log_ratio
from .models import FiniteObservationModel
from .models import Prior
from .monkey import format_number
from .policies import StochasticKernel
from .policies import TeamMixture
from .policies import TeamPolicy
from .policies import compile_threshold
from .policies import enumerate_threshold_policies
from .policies import identity_kernel
from .policies import uniform_kernel


def example_model() -> FiniteObservationModel:
    return FiniteObservationModel(
        (1, 2, 3),
        (Fraction(4, 5), Fraction(1, 5), Fraction(0)),
        (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)),
    )


def perfect_model() -> FiniteObservationModel:
    'y = 1 under H1 and y = 2 under H2, always.'
    return FiniteObservationModel((1, 2), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))


def named_threshold_kernels(model: FiniteObservationModel, num_actions: int = 2) -> Dict[str, StochasticKernel]:
    '''Canonical threshold policies under short names.

    The constant policy is "const"; the rest are lettered A, B, ... in
    enumeration order, which makes A and B the policies of the worked
    example.

        >>> sorted(named_threshold_kernels(example_model()))
        ['A', 'B', 'const']
    '''
    policies = enumerate_threshold_policies(model, num_actions)
    names = ['const'] + [chr(ord('A') + index) for index in range(len(policies) - 1)]
    return {name: compile_threshold(policy, model, num_actions) for name, policy in zip(names, policies)}


def policies_ab() -> Tuple[StochasticKernel, StochasticKernel]:
    kernels = named_threshold_kernels(example_model())
    return kernels['A'], kernels['B']


def policies_cd() -> Tuple[StochasticKernel, StochasticKernel]:
    model = perfect_model()
    return identity_kernel(model), uniform_kernel(model, 2)


@dataclass(frozen=True)
class ExampleRow:
    name: str
    value: Any
    expected: Any
    status: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'value': format_number(self.value),
            'decimal': format(float(self.value), '.15g'),
            'expected': self.expected if isinstance(self.expected, str) else format_number(self.expected),
            'status': self.status,
        }


def example_rows(prior: Prior | None = None) -> List[ExampleRow]:
    '''Every quantity of the worked example, checked against its known value.

    With a prior other than the equal one, the rows are recomputed and
    marked "off-paper" instead.
    '''
    checked = prior is None or prior == Prior.equal()
    prior = prior or Prior.equal()
    model, perfect = example_model(), perfect_model()
    a, b = policies_ab()
    c, d = policies_cd()
    exchangeable_ab = TeamMixture(((Fraction(1, 2), TeamPolicy((a, b))), (Fraction(1, 2), TeamPolicy((b, a)))))
    exchangeable_cd = TeamMixture(((Fraction(1, 2), TeamPolicy((c, d))), (Fraction(1, 2), TeamPolicy((d, c)))))
    independent = TeamMixture.symmetric_independent_of([(Fraction(1, 2), a), (Fraction(1, 2), b)], 2)

    known, bayes = FusionInfo.KNOWN_RANDOMIZATION, FusionInfo.BAYESIAN
    computed: List[Tuple[str, Any, Any]] = [
        ('J(A,B)', exact_risk(TeamPolicy((a, b)), MapRule(), model, prior).risk, Fraction(19, 90)),
        ('J(A,A)', exact_risk(TeamPolicy((a, a)), MapRule(), model, prior).risk, Fraction(53, 225)),
        ('J(B,B)', exact_risk(TeamPolicy((b, b)), MapRule(), model, prior).risk, Fraction(2, 9)),
        ('symmetric independent {A,B}', mixture_risk(independent, known, model, prior).risk, Fraction(11, 50)),
        ('exchangeable {(A,B),(B,A)}, known', mixture_risk(exchangeable_ab, known, model, prior).risk, Fraction(19, 90)),
        ('Bayesian log-ratio at u=(1,1)', bayes_log_ratio((1, 1), exchangeable_ab, model), 'positive'),
        ('exchangeable {(C,D),(D,C)}, known', mixture_risk(exchangeable_cd, known, perfect, prior).risk, Fraction(0)),
        ('exchangeable {(C,D),(D,C)}, Bayesian', mixture_risk(exchangeable_cd, bayes, perfect, prior).risk, Fraction(1, 4)),
    ]

    rows = []
    for name, value, expected in computed:
        if not checked:
            status = 'off-paper'
        elif expected == 'positive':
            status = 'PASS' if value > 0 else 'FAIL'
        else:
            status = 'PASS' if value == expected else 'FAIL'
        rows.append(ExampleRow(name, value, expected, status))
    return rows
