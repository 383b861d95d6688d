# --------------------------------------------------------------------------- #
#   policies.py                                                               #
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
'''Sensor policies: threshold quantizers, kernels, teams and team mixtures.

A threshold policy partitions the likelihood-ratio axis into consecutive
right-closed bins and emits one action label per bin.  Compiled against a
finite model it becomes a row-stochastic kernel (one row per observation
symbol); against a Gaussian model it stays in threshold form and its output
law is a difference of normal CDFs.

    >>> from detkit.models import FiniteObservationModel
    >>> model = FiniteObservationModel(
    ...     (1, 2, 3), ('4/5', '1/5', '0'), ('1/3', '1/3', '1/3'),
    ... )
    >>> a, b = enumerate_threshold_policies(model, 2)[1:]
    >>> a
    ThresholdPolicy(thresholds=(Fraction(25, 24),), labels=(1, 2))
    >>> kernel = compile_threshold(b, model)
    >>> kernel.rows
    ((Fraction(1, 1), Fraction(0, 1)), (Fraction(1, 1), Fraction(0, 1)), (Fraction(0, 1), Fraction(1, 1)))
    >>> output_law(kernel, model, Hypothesis.H2)
    (Fraction(2, 3), Fraction(1, 3))
'''


from __future__ import annotations

import abc
import bisect
import functools
import itertools
import math
import random
import warnings
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Any
from typing import Dict
from typing import Final
from typing import Generator
from typing import Iterator
from typing import List
from typing import Sequence
from typing import Tuple
from typing import cast

import numpy as np

from .annotations import Law
from .annotations import Permutation
from .annotations import Probability
from .exceptions import PolicyError
from .exceptions import SpotCheckWarning
from .models import FiniteObservationModel
from .models import GaussianShiftModel
from .models import Hypothesis
from .models import ObservationModel
from .models import as_probability
from .monkey import logger


EXCHANGEABILITY_FULL_CHECK_MAX_N: Final[int] = 8
SPOT_CHECK_SAMPLES: Final[int] = 1000


@dataclass(frozen=True)
class ThresholdPolicy:
    '''Monotone threshold quantizer of the likelihood ratio.

    Bin d is (t_{d-1}, t_d], the first bin includes 0 and the last includes
    +inf.  labels[d] is the action emitted for bin d.
    '''

    thresholds: Tuple[Probability, ...]
    labels: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'thresholds', tuple(self.thresholds))
        object.__setattr__(self, 'labels', tuple(self.labels))
        if len(self.labels) != len(self.thresholds) + 1:
            raise PolicyError('a threshold policy needs exactly one more label than thresholds')
        if any(t <= 0 for t in self.thresholds):
            raise PolicyError('thresholds must be positive')
        if any(a >= b for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise PolicyError('thresholds must be strictly increasing')
        if len(set(self.labels)) != len(self.labels):
            raise PolicyError('labels must be pairwise distinct')
        if any(label < 1 for label in self.labels):
            raise PolicyError('action labels start at 1')

    @property
    def num_bins(self) -> int:
        return len(self.labels)

    def bin_of(self, lr: Probability) -> int:
        '''0-based index of the bin containing the likelihood ratio lr.

            >>> ThresholdPolicy((1, 2), (1, 2, 3)).bin_of(2)
            1
        '''
        return bisect.bisect_left(self.thresholds, lr)

    def action(self, lr: Probability) -> int:
        return self.labels[self.bin_of(lr)]

    def to_dict(self) -> Dict[str, Any]:
        return {'thresholds': list(self.thresholds), 'labels': list(self.labels)}


class SensorKernel(abc.ABC):
    'Base class for a sensor\'s (possibly randomized) map from observations to actions.'

    num_actions: int

    @property
    @abc.abstractmethod
    def deterministic(self) -> bool:
        raise NotImplementedError

    @abc.abstractmethod
    def sample_actions(self,
                       model: ObservationModel,
                       observations: np.ndarray,
                       rng: np.random.Generator,
                       ) -> np.ndarray:
        'Map sampled observations (as returned by model.sample()) to 1-based actions.'
        raise NotImplementedError

    @abc.abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class StochasticKernel(SensorKernel):
    '''Row-stochastic channel from a finite alphabet to the actions.

    rows[y][u - 1] is the probability of action u given the symbol at
    alphabet position y.  `policy` records the threshold policy a kernel was
    compiled from, if any; it does not take part in equality.
    '''

    rows: Tuple[Law, ...]
    num_actions: int = 0
    policy: ThresholdPolicy | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        rows = tuple(tuple(as_probability(p) for p in row) for row in self.rows)
        if not rows:
            raise PolicyError('a kernel needs at least one row')
        num_actions = self.num_actions or len(rows[0])
        violations = []
        for index, row in enumerate(rows):
            if len(row) != num_actions:
                violations.append(f'row {index} has {len(row)} entries, expected {num_actions}')
            elif any(p < 0 for p in row):
                violations.append(f'row {index} has a negative entry')
            elif (sum(row) != 1) if all(isinstance(p, Fraction) for p in row) else not math.isclose(sum(row), 1):
                violations.append(f'row {index} sums to {sum(row)}, not 1')
        if violations:
            raise PolicyError('; '.join(violations))
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'num_actions', num_actions)

    @property
    def deterministic(self) -> bool:
        return all(max(row) == 1 for row in self.rows)

    def sample_actions(self,
                       model: ObservationModel,
                       observations: np.ndarray,
                       rng: np.random.Generator,
                       ) -> np.ndarray:
        table = np.array([[float(p) for p in row] for row in self.rows])
        if self.deterministic:
            return table.argmax(axis=1)[observations] + 1
        cumulative = table.cumsum(axis=1)
        draws = rng.random(len(observations))
        actions = (draws[:, np.newaxis] >= cumulative[observations]).sum(axis=1) + 1
        return np.minimum(actions, self.num_actions)

    def to_dict(self) -> Dict[str, Any]:
        if self.policy is not None:
            return {'threshold': self.policy.to_dict(), 'kernel': [list(row) for row in self.rows]}
        return {'kernel': [list(row) for row in self.rows]}


@dataclass(frozen=True)
class ThresholdKernel(SensorKernel):
    'A threshold policy acting on a continuous observation model.'

    policy: ThresholdPolicy
    num_actions: int = 0

    def __post_init__(self) -> None:
        num_actions = self.num_actions or max(self.policy.labels)
        if max(self.policy.labels) > num_actions:
            raise PolicyError(f'labels {self.policy.labels} fall outside 1..{num_actions}')
        object.__setattr__(self, 'num_actions', num_actions)

    @property
    def deterministic(self) -> bool:
        return True

    def sample_actions(self,
                       model: ObservationModel,
                       observations: np.ndarray,
                       rng: np.random.Generator,
                       ) -> np.ndarray:
        model = cast(GaussianShiftModel, model)
        log_thresholds = np.log(np.array([float(t) for t in self.policy.thresholds]))
        bins = np.searchsorted(log_thresholds, model.log_likelihood_ratio(observations), side='left')
        return np.array(self.policy.labels)[bins]

    def to_dict(self) -> Dict[str, Any]:
        return {'threshold': self.policy.to_dict()}


def compile_threshold(policy: ThresholdPolicy,
                      model: ObservationModel,
                      num_actions: int | None = None,
                      ) -> SensorKernel:
    '''Turn a threshold policy into a kernel for `model`.

    Finite models get a deterministic StochasticKernel; symbols with no mass
    under either hypothesis get the first bin's label.  Bins that no atom
    falls into are allowed.
    '''
    num_actions = num_actions or max(policy.labels)
    if max(policy.labels) > num_actions:
        raise PolicyError(f'labels {policy.labels} fall outside 1..{num_actions}')
    if not isinstance(model, FiniteObservationModel):
        return ThresholdKernel(policy, num_actions)

    one, zero = (Fraction(1), Fraction(0)) if model.exact else (1.0, 0.0)
    rows = []
    for lr in model.lr_values():
        action = policy.labels[0] if lr is None else policy.action(lr)
        rows.append(tuple(one if u == action else zero for u in range(1, num_actions + 1)))
    return StochasticKernel(tuple(rows), num_actions, policy)


def identity_kernel(model: FiniteObservationModel) -> StochasticKernel:
    'The unquantized channel: the symbol at position y is reported as action y + 1.'
    size = len(model.alphabet)
    return StochasticKernel(tuple(
        tuple(Fraction(int(y == u)) for u in range(size)) for y in range(size)
    ))


def uniform_kernel(model: FiniteObservationModel, num_actions: int) -> StochasticKernel:
    'The uninformative kernel: every action with probability 1/|U| whatever the symbol.'
    row = (Fraction(1, num_actions),) * num_actions
    return StochasticKernel((row,) * len(model.alphabet))


def output_law(kernel: SensorKernel,
               model: ObservationModel,
               hypothesis: Hypothesis,
               ) -> Law:
    '''g(h, u): probability that the sensor emits action u under hypothesis h.

    Exact whenever both the kernel and the model are.
    '''
    return _output_law(kernel, model, hypothesis)


@functools.lru_cache(maxsize=4096)
def _output_law(kernel: SensorKernel,
                model: ObservationModel,
                hypothesis: Hypothesis,
                ) -> Law:
    if isinstance(kernel, StochasticKernel):
        if not isinstance(model, FiniteObservationModel):
            raise PolicyError('row kernels only apply to finite observation models')
        if len(kernel.rows) != len(model.alphabet):
            raise PolicyError(
                f'kernel has {len(kernel.rows)} rows but the alphabet has '
                f'{len(model.alphabet)} symbols'
            )
        pmf = model.pmf(hypothesis)
        return tuple(
            sum((row[u] * mass for row, mass in zip(kernel.rows, pmf)), 0 * pmf[0])
            for u in range(kernel.num_actions)
        )

    kernel = cast(ThresholdKernel, kernel)
    if not isinstance(model, GaussianShiftModel):
        raise PolicyError('compile threshold policies against finite models first')
    edges = (0.0, *(float(t) for t in kernel.policy.thresholds), math.inf)
    cdf = [model.lr_cdf(edge, hypothesis) for edge in edges]
    law = [0.0] * kernel.num_actions
    for label, low, high in zip(kernel.policy.labels, cdf, cdf[1:]):
        law[label - 1] += max(high - low, 0.0)
    return tuple(law)


def canonical_law_key(g1: Law, g2: Law) -> Tuple[Tuple[Probability, Probability], ...]:
    '''A sensor's output-law pair up to relabelling of the actions.

        >>> canonical_law_key((Fraction(1, 2), Fraction(1, 2), Fraction(0)), (Fraction(0), Fraction(1, 2), Fraction(1, 2)))
        ((Fraction(0, 1), Fraction(1, 2)), (Fraction(1, 2), Fraction(0, 1)), (Fraction(1, 2), Fraction(1, 2)))
    '''
    return tuple(sorted(zip(g1, g2)))


@dataclass(frozen=True)
class TeamPolicy:
    'One kernel per sensor; sensor i (0-based) uses kernels[i].'

    kernels: Tuple[SensorKernel, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kernels', tuple(self.kernels))
        if not self.kernels:
            raise PolicyError('a team needs at least one sensor')
        sizes = {kernel.num_actions for kernel in self.kernels}
        if len(sizes) != 1:
            raise PolicyError(f'sensors disagree on the action alphabet size: {sorted(sizes)}')

    def __len__(self) -> int:
        return len(self.kernels)

    def __iter__(self) -> Iterator[SensorKernel]:
        return iter(self.kernels)

    def __getitem__(self, index: int) -> SensorKernel:
        return self.kernels[index]

    @property
    def num_actions(self) -> int:
        return self.kernels[0].num_actions

    def replace(self, index: int, kernel: SensorKernel) -> TeamPolicy:
        kernels = list(self.kernels)
        kernels[index] = kernel
        return TeamPolicy(tuple(kernels))

    def output_laws(self, model: ObservationModel) -> Tuple[Tuple[Law, Law], ...]:
        return tuple(
            (output_law(kernel, model, Hypothesis.H1), output_law(kernel, model, Hypothesis.H2))
            for kernel in self.kernels
        )

    def to_dict(self) -> Dict[str, Any]:
        return {'team': [kernel.to_dict() for kernel in self.kernels]}


@dataclass(frozen=True)
class TeamMixture:
    '''Finite-support distribution over teams (common randomness).

    support holds (weight, team) pairs with positive weights summing to 1.
    Duplicate teams are allowed; weights() merges them.
    '''

    support: Tuple[Tuple[Probability, TeamPolicy], ...]
    symmetric_independent: bool = False

    def __post_init__(self) -> None:
        support = tuple((as_probability(weight), team) for weight, team in self.support)
        if not support:
            raise PolicyError('a mixture needs at least one atom')
        if any(weight <= 0 for weight, _ in support):
            raise PolicyError('mixture weights must be positive')
        total = sum(weight for weight, _ in support)
        exact = all(isinstance(weight, Fraction) for weight, _ in support)
        if (total != 1) if exact else not math.isclose(total, 1):
            raise PolicyError(f'mixture weights sum to {total}, not 1')
        if len({(len(team), team.num_actions) for _, team in support}) != 1:
            raise PolicyError('every team in a mixture needs the same N and action alphabet')
        object.__setattr__(self, 'support', support)

    @classmethod
    def point(cls, team: TeamPolicy) -> TeamMixture:
        return cls(((Fraction(1), team),))

    @classmethod
    def symmetric_independent_of(cls,
                                 weighted_kernels: Sequence[Tuple[Any, SensorKernel]],
                                 num_sensors: int,
                                 ) -> TeamMixture:
        '''Every sensor independently draws its kernel from one common law.

            >>> from detkit.models import FiniteObservationModel
            >>> model = FiniteObservationModel((1, 2), (1, 0), (0, 1))
            >>> c = identity_kernel(model)
            >>> d = uniform_kernel(model, 2)
            >>> mix = TeamMixture.symmetric_independent_of([('1/2', c), ('1/2', d)], 2)
            >>> [weight for weight, _ in mix.support]
            [Fraction(1, 4), Fraction(1, 4), Fraction(1, 4), Fraction(1, 4)]
        '''
        weighted = [(as_probability(weight), kernel) for weight, kernel in weighted_kernels]
        support = []
        for combination in itertools.product(weighted, repeat=num_sensors):
            weight = math.prod((w for w, _ in combination), start=Fraction(1))
            support.append((weight, TeamPolicy(tuple(kernel for _, kernel in combination))))
        return cls(tuple(support), symmetric_independent=True)

    @property
    def num_sensors(self) -> int:
        return len(self.support[0][1])

    @property
    def num_actions(self) -> int:
        return self.support[0][1].num_actions

    @property
    def exchangeable(self) -> bool:
        return self.symmetric_independent or is_exchangeable(self)

    def weights(self) -> Dict[TeamPolicy, Probability]:
        'Atom-weight multiset: total weight per distinct team.'
        merged: Dict[TeamPolicy, Probability] = {}
        for weight, team in self.support:
            merged[team] = merged.get(team, 0 * weight) + weight
        return merged

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mixture': [
                {'weight': weight, **team.to_dict()} for weight, team in self.support
            ],
            'symmetric_independent': self.symmetric_independent,
        }


def _check_permutation(permutation: Permutation, num_sensors: int) -> None:
    if sorted(permutation) != list(range(1, num_sensors + 1)):
        raise PolicyError(f'{permutation} is not a permutation of 1..{num_sensors}')


def permute_team(team: TeamPolicy, permutation: Permutation) -> TeamPolicy:
    '''Sensor i of the result runs the kernel of sensor σ(i) of the input.

    σ is given 1-based, as (σ(1), ..., σ(N)).
    '''
    _check_permutation(permutation, len(team))
    return TeamPolicy(tuple(team[index - 1] for index in permutation))


def permute_mixture(mixture: TeamMixture, permutation: Permutation) -> TeamMixture:
    _check_permutation(permutation, mixture.num_sensors)
    return TeamMixture(
        tuple((weight, permute_team(team, permutation)) for weight, team in mixture.support),
        symmetric_independent=mixture.symmetric_independent,
    )


def _arrangements(items: Tuple[Any, ...]) -> Generator[Tuple[Any, ...], None, None]:
    'Distinct orderings of a multiset, each exactly once.'
    if not items:
        yield tuple()
        return
    seen = []
    for index, item in enumerate(items):
        if item in seen:
            continue
        seen.append(item)
        for rest in _arrangements(items[:index] + items[index+1:]):
            yield (item, *rest)


def symmetrize(mixture: TeamMixture) -> TeamMixture:
    '''Average a mixture over every relabelling of the sensors.

    Averaging each atom over S_N spreads its weight evenly over the atom's
    orbit, so only the distinct rearrangements of its kernels are generated.
    '''
    merged: Dict[TeamPolicy, Probability] = {}
    for weight, team in mixture.support:
        orbit = [TeamPolicy(kernels) for kernels in _arrangements(team.kernels)]
        share = weight / len(orbit)
        for member in orbit:
            merged[member] = merged.get(member, 0 * share) + share
    logger.debug('Symmetrized %d atoms into %d', len(mixture.support), len(merged))
    return TeamMixture(
        tuple((weight, team) for team, weight in merged.items()),
        symmetric_independent=mixture.symmetric_independent,
    )


def _same_weights(left: Dict[TeamPolicy, Probability],
                  right: Dict[TeamPolicy, Probability],
                  ) -> bool:
    if left.keys() != right.keys():
        return False
    return all(
        left[team] == right[team] or math.isclose(left[team], right[team])
        for team in left
    )


def is_exchangeable(mixture: TeamMixture,
                    *,
                    samples: int = SPOT_CHECK_SAMPLES,
                    seed: int = 0,
                    ) -> bool:
    '''Whether every sensor relabelling leaves the atom-weight multiset unchanged.

    Up to EXCHANGEABILITY_FULL_CHECK_MAX_N sensors all of S_N is checked.
    Beyond that, `samples` random permutations are checked and a
    SpotCheckWarning is issued.
    '''
    num_sensors = mixture.num_sensors
    weights = mixture.weights()
    if num_sensors <= EXCHANGEABILITY_FULL_CHECK_MAX_N:
        permutations: Iterator[Permutation] = itertools.permutations(range(1, num_sensors + 1))
    else:
        warnings.warn(cast(str, SpotCheckWarning.__doc__), SpotCheckWarning)
        logger.info('Spot checking exchangeability on %d random permutations', samples)
        rand = random.Random(seed)
        permutations = (
            tuple(rand.sample(range(1, num_sensors + 1), num_sensors))
            for _ in range(samples)
        )
    return all(
        _same_weights(permute_mixture(mixture, permutation).weights(), weights)
        for permutation in permutations
    )


def threshold_between(low: Probability, high: Probability) -> Probability:
    'A threshold separating two neighbouring likelihood-ratio atoms.'
    if math.isinf(high):
        return 2 * low if low > 0 else Fraction(1)
    return (low + high) / 2


def enumerate_threshold_policies(model: FiniteObservationModel,
                                 num_actions: int,
                                 ) -> List[ThresholdPolicy]:
    '''Every canonical threshold policy of a finite model.

    The sorted likelihood-ratio atoms are cut into at most `num_actions`
    nonempty consecutive bins, labelled 1, 2, ... left to right.  Thresholds
    sit midway between neighbouring atoms.  The constant policy comes first,
    then policies by bin count, then by cut positions.
    '''
    atoms = model.lr_atoms()
    policies = []
    for bins in range(1, min(num_actions, len(atoms)) + 1):
        for cuts in itertools.combinations(range(1, len(atoms)), bins - 1):
            thresholds = tuple(threshold_between(atoms[c - 1], atoms[c]) for c in cuts)
            policies.append(ThresholdPolicy(thresholds, tuple(range(1, bins + 1))))
    return policies


def count_threshold_policies(num_atoms: int, num_actions: int, *, canonical: bool = True) -> int:
    '''How many threshold policies k atoms and |U| actions admit.

    canonical=False counts every injective labelling of the bins as well.

        >>> count_threshold_policies(4, 2)
        4
        >>> count_threshold_policies(4, 2, canonical=False)
        8
    '''
    return sum(
        math.comb(num_atoms - 1, bins - 1) * (1 if canonical else math.perm(num_actions, bins))
        for bins in range(1, min(num_actions, num_atoms) + 1)
    )
