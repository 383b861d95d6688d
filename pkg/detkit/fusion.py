# --------------------------------------------------------------------------- #
#   fusion.py                                                                 #
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
'''Fusion center: the Δ_N statistic, MAP decisions and decision tables.

The fusion center sees one action per sensor and decides H1 or H2.  Under
the uniform cost the Bayes-optimal rule is MAP:

    decide H1  iff  p1·P(u | H1) >= p2·P(u | H2)

which, for conditionally independent sensors, is Δ_N(u) >= (1/N)·log(p2/p1)
with Δ_N(u) = (1/N)·Σ_i log(g_i(H1, u_i) / g_i(H2, u_i)).  Exact models are
decided by comparing the products directly, so no logarithm is ever taken.
'''


from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any
from typing import Dict
from typing import Final
from typing import List
from typing import Sequence
from typing import Tuple
from typing import Union

from scipy.special import logsumexp

from .annotations import Actions
from .annotations import Law
from .annotations import Probability
from .exceptions import EnumerationCapExceeded
from .exceptions import PolicyError
from .exceptions import UnreachableActions
from .models import Hypothesis
from .models import ObservationModel
from .models import Prior
from .monkey import logger
from .policies import TeamMixture
from .policies import TeamPolicy


FUSION_TABLE_CAP: Final[int] = 2**20


class FusionInfo(enum.Enum):
    '''What the fusion center knows besides the actions.

    KNOWN_RANDOMIZATION: the realized team drawn from the mixture.
    BAYESIAN: only the mixture itself, so joint action laws are averaged.
    '''

    KNOWN_RANDOMIZATION = 'known'
    BAYESIAN = 'bayes'


@dataclass(frozen=True)
class MapRule:
    '''Threshold rule on Δ_N; ties decide H1.

    Without an explicit threshold the rule is the Bayes-optimal one for
    whatever prior it is evaluated with, t = (1/N)·log(p2/p1).
    '''

    threshold: float | None = None

    @staticmethod
    def optimal_threshold(prior: Prior, num_sensors: int) -> float:
        return math.log(prior.p2 / prior.p1) / num_sensors

    def to_dict(self) -> Dict[str, Any]:
        return {'map': {'threshold': 'optimal' if self.threshold is None else self.threshold}}


@dataclass(frozen=True)
class FusionTable:
    'Explicit decision for every action tuple, in mixed-radix (lexicographic) order.'

    num_sensors: int
    num_actions: int
    decisions: Tuple[Hypothesis, ...]

    def __post_init__(self) -> None:
        expected = self.num_actions ** self.num_sensors
        if len(self.decisions) != expected:
            raise PolicyError(
                f'a fusion table over {self.num_sensors} sensors and {self.num_actions} '
                f'actions needs {expected} entries, got {len(self.decisions)}'
            )
        object.__setattr__(self, 'decisions', tuple(Hypothesis(d) for d in self.decisions))

    @staticmethod
    def rank(actions: Actions, num_actions: int) -> int:
        '''Mixed-radix rank of an action tuple; sensor 1 is most significant.

            >>> FusionTable.rank((1, 1), 2), FusionTable.rank((2, 1), 2)
            (0, 2)
        '''
        rank = 0
        for action in actions:
            rank = rank * num_actions + (action - 1)
        return rank

    def decide(self, actions: Actions) -> Hypothesis:
        _check_actions(actions, self.num_sensors, self.num_actions)
        return self.decisions[self.rank(actions, self.num_actions)]

    def to_dict(self) -> Dict[str, Any]:
        return {'table': [int(d) for d in self.decisions]}


FusionRule = Union[MapRule, FusionTable]


def all_actions(num_sensors: int, num_actions: int) -> Any:
    'Every action tuple, in rank order.'
    return itertools.product(range(1, num_actions + 1), repeat=num_sensors)


def _check_actions(actions: Actions, num_sensors: int, num_actions: int) -> None:
    if len(actions) != num_sensors:
        raise PolicyError(f'{actions} has {len(actions)} actions for {num_sensors} sensors')
    if any(not 1 <= action <= num_actions for action in actions):
        raise PolicyError(f'{actions} has actions outside 1..{num_actions}')


def log_mass(value: Probability) -> float:
    if value == 0:
        return -math.inf
    if isinstance(value, Fraction):
        return math.log(value.numerator) - math.log(value.denominator)
    return math.log(value)


def joint_masses(actions: Actions, laws: Sequence[Tuple[Law, Law]]) -> Tuple[Probability, Probability]:
    'P(u | H1) and P(u | H2) for conditionally independent sensors.'
    mass1 = math.prod((g1[u - 1] for u, (g1, _) in zip(actions, laws)), start=Fraction(1))
    mass2 = math.prod((g2[u - 1] for u, (_, g2) in zip(actions, laws)), start=Fraction(1))
    return mass1, mass2


def delta_n(actions: Actions, team: TeamPolicy, model: ObservationModel) -> float:
    '''Δ_N(u): mean per-sensor log ratio of the action probabilities.

    A sensor whose action is impossible under H2 contributes +inf, under H1
    -inf.  A tuple impossible under both hypotheses is rejected.
    '''
    _check_actions(actions, len(team), team.num_actions)
    terms: List[float] = []
    for action, (g1, g2) in zip(actions, team.output_laws(model)):
        p, q = g1[action - 1], g2[action - 1]
        if p == 0 and q == 0:
            raise UnreachableActions(f'{actions} cannot occur under either hypothesis', actions=actions)
        terms.append(log_mass(p) - log_mass(q))
    if math.inf in terms and -math.inf in terms:
        raise UnreachableActions(f'{actions} cannot occur under either hypothesis', actions=actions)
    return math.fsum(terms) / len(team)


def mixture_masses(actions: Actions,
                   mixture: TeamMixture,
                   model: ObservationModel,
                   ) -> Tuple[Probability, Probability]:
    'Mixture-averaged joint masses: Σ_atoms w·P^γ(u | H_j).'
    mass1: Probability = Fraction(0)
    mass2: Probability = Fraction(0)
    for weight, team in mixture.support:
        atom1, atom2 = joint_masses(actions, team.output_laws(model))
        mass1 += weight * atom1
        mass2 += weight * atom2
    return mass1, mass2


def bayes_log_ratio(actions: Actions, mixture: TeamMixture, model: ObservationModel) -> float:
    '''log P(u | H1) / P(u | H2) under the mixture's averaged joint law.

    Sensors are not conditionally independent under a non-product mixture,
    so the joint laws are averaged before taking the ratio.  For a point
    mass this is N·Δ_N(u).
    '''
    _check_actions(actions, mixture.num_sensors, mixture.num_actions)
    mass1, mass2 = mixture_masses(actions, mixture, model)
    if mass1 == 0 and mass2 == 0:
        raise UnreachableActions(f'{actions} cannot occur under either hypothesis', actions=actions)
    return log_mass(mass1) - log_mass(mass2)


def _log_masses(actions: Actions,
                policy: TeamPolicy | TeamMixture,
                model: ObservationModel,
                ) -> Tuple[float, float]:
    if isinstance(policy, TeamPolicy):
        laws = policy.output_laws(model)
        return (
            math.fsum(log_mass(g1[u - 1]) for u, (g1, _) in zip(actions, laws)),
            math.fsum(log_mass(g2[u - 1]) for u, (_, g2) in zip(actions, laws)),
        )
    atoms = [
        (log_mass(weight), _log_masses(actions, team, model)) for weight, team in policy.support
    ]
    return (
        float(logsumexp([w + m1 for w, (m1, _) in atoms])),
        float(logsumexp([w + m2 for w, (_, m2) in atoms])),
    )


def map_decide(actions: Actions,
               policy: TeamPolicy | TeamMixture,
               model: ObservationModel,
               prior: Prior,
               info: FusionInfo = FusionInfo.KNOWN_RANDOMIZATION,
               *,
               rule: MapRule = MapRule(),
               ) -> Hypothesis:
    '''MAP decision for an action tuple.

    KNOWN_RANDOMIZATION needs the realized TeamPolicy; BAYESIAN takes a
    TeamMixture (a bare team is treated as a point mass).  Exact models and
    priors are compared as products, everything else in the log domain.
    '''
    if info is FusionInfo.KNOWN_RANDOMIZATION:
        if not isinstance(policy, TeamPolicy):
            raise PolicyError('known-randomization fusion needs the realized team')
        team = policy
        _check_actions(actions, len(team), team.num_actions)
        if rule.threshold is not None:
            return Hypothesis.H1 if delta_n(actions, team, model) >= rule.threshold else Hypothesis.H2
        if model.exact and prior.exact:
            mass1, mass2 = joint_masses(actions, team.output_laws(model))
            return _decide_exact(actions, prior.p1 * mass1, prior.p2 * mass2)
        delta = delta_n(actions, team, model)
        return Hypothesis.H1 if delta >= MapRule.optimal_threshold(prior, len(team)) else Hypothesis.H2

    mixture = TeamMixture.point(policy) if isinstance(policy, TeamPolicy) else policy
    _check_actions(actions, mixture.num_sensors, mixture.num_actions)
    if rule.threshold is not None:
        statistic = bayes_log_ratio(actions, mixture, model) / mixture.num_sensors
        return Hypothesis.H1 if statistic >= rule.threshold else Hypothesis.H2
    if model.exact and prior.exact:
        mass1, mass2 = mixture_masses(actions, mixture, model)
        return _decide_exact(actions, prior.p1 * mass1, prior.p2 * mass2)
    log1, log2 = _log_masses(actions, mixture, model)
    if log1 == log2 == -math.inf:
        raise UnreachableActions(f'{actions} cannot occur under either hypothesis', actions=actions)
    return Hypothesis.H1 if log1 + log_mass(prior.p1) >= log2 + log_mass(prior.p2) else Hypothesis.H2


def _decide_exact(actions: Actions, posterior1: Probability, posterior2: Probability) -> Hypothesis:
    if posterior1 == 0 and posterior2 == 0:
        raise UnreachableActions(f'{actions} cannot occur under either hypothesis', actions=actions)
    return Hypothesis.H1 if posterior1 >= posterior2 else Hypothesis.H2


def uca_cost(hypothesis: Hypothesis, decision: Hypothesis) -> int:
    '''Uniform cost: 1 for a wrong decision, 0 for a right one.

        >>> uca_cost(Hypothesis.H1, Hypothesis.H2)
        1
    '''
    return int(hypothesis != decision)


def exhaustive_best_fusion(team: TeamPolicy,
                           model: ObservationModel,
                           prior: Prior,
                           *,
                           cap: int = FUSION_TABLE_CAP,
                           ) -> Tuple[FusionTable, Probability]:
    '''Best decision table over all 2^(|U|^N) tables, and its Bayes risk.

    The risk separates over action tuples, so the search picks the larger
    posterior mass tuple by tuple (ties, and tuples that cannot occur,
    decide H1).
    '''
    num_sensors, num_actions = len(team), team.num_actions
    size = num_actions ** num_sensors
    if size > cap:
        raise EnumerationCapExceeded(
            'Fusion table is too large to search exhaustively',
            needed=size,
            cap=cap,
        )
    laws = team.output_laws(model)
    decisions, risk = [], 0 * prior.p1
    for actions in all_actions(num_sensors, num_actions):
        mass1, mass2 = joint_masses(actions, laws)
        posterior1, posterior2 = prior.p1 * mass1, prior.p2 * mass2
        if posterior1 >= posterior2:
            decisions.append(Hypothesis.H1)
            risk += posterior2
        else:
            decisions.append(Hypothesis.H2)
            risk += posterior1
    logger.debug('Searched %d fusion table entries; risk %s', size, risk)
    return FusionTable(num_sensors, num_actions, tuple(decisions)), risk
