# --------------------------------------------------------------------------- #
#   models.py                                                                 #
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
'''Binary hypotheses, priors, and per-sensor observation channels.

Every sensor sees an observation y drawn i.i.d. (given the hypothesis) from
one of two laws.  The likelihood ratio L(y) = f(y | H2) / f(y | H1) is the
sufficient statistic a sensor quantizes.

    >>> model = FiniteObservationModel(
    ...     alphabet=(1, 2, 3),
    ...     pmf1=(Fraction(4, 5), Fraction(1, 5), Fraction(0)),
    ...     pmf2=(Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)),
    ... )
    >>> likelihood_ratio(model, 1)
    Fraction(5, 12)
    >>> likelihood_ratio(model, 3)
    inf
    >>> model.lr_atoms()
    (Fraction(5, 12), Fraction(5, 3), inf)
'''


from __future__ import annotations

import abc
import enum
import math
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Any
from typing import ClassVar
from typing import Dict
from typing import Final
from typing import Sequence
from typing import Tuple
from typing import cast

import numpy as np
from scipy.stats import norm

from .annotations import Probability
from .annotations import Symbol
from .exceptions import ModelError
from .exceptions import ZeroProbabilityObservation
from .monkey import logger


class Hypothesis(enum.IntEnum):
    'The two hypotheses.  H1 < H2, which fixes iteration order everywhere.'

    H1 = 1
    H2 = 2

    def __str__(self) -> str:
        return self.name


HYPOTHESES: Final[Tuple[Hypothesis, Hypothesis]] = (Hypothesis.H1, Hypothesis.H2)


def as_probability(value: Any) -> Probability:
    '''Coerce a number to the probability representation detkit computes with.

    ints and numeric strings become exact Fractions; floats stay floats.

        >>> as_probability('4/5')
        Fraction(4, 5)
        >>> as_probability(1)
        Fraction(1, 1)
        >>> as_probability(0.5)
        0.5
    '''
    if isinstance(value, bool):
        raise TypeError(f'{value!r} is not a probability')
    if isinstance(value, (Fraction, float)):
        return value
    if isinstance(value, (int, str)):
        if isinstance(value, str) and value.strip().lower() in {'inf', '+inf', 'infinity'}:
            return math.inf
        return Fraction(value)
    raise TypeError(f'{value!r} is not a probability')


@dataclass(frozen=True)
class Prior:
    'Prior probabilities of H1 and H2; both strictly positive.'

    p1: Probability
    p2: Probability

    def __post_init__(self) -> None:
        if not 0 < self.p1 < 1 or not 0 < self.p2 < 1:
            raise ModelError(f'prior must put positive mass on both hypotheses, got ({self.p1}, {self.p2})')
        total = self.p1 + self.p2
        exact = isinstance(self.p1, Fraction) and isinstance(self.p2, Fraction)
        if (total != 1) if exact else not math.isclose(total, 1):
            raise ModelError(f'prior must sum to 1, got {total}')

    @classmethod
    def equal(cls) -> Prior:
        return cls(Fraction(1, 2), Fraction(1, 2))

    @classmethod
    def from_p1(cls, p1: Any) -> Prior:
        '''Build the prior from P(H1) alone.

            >>> Prior.from_p1('0.6')
            Prior(p1=Fraction(3, 5), p2=Fraction(2, 5))
        '''
        p1 = as_probability(p1)
        return cls(p1, 1 - p1)

    def __getitem__(self, hypothesis: Hypothesis) -> Probability:
        return self.p1 if hypothesis is Hypothesis.H1 else self.p2

    @property
    def exact(self) -> bool:
        return isinstance(self.p1, Fraction) and isinstance(self.p2, Fraction)


class ObservationModel(abc.ABC):
    '''Observation channel abstract base class.

    Concrete models define the two conditional laws of a single sensor's
    observation, how to sample from them, and the likelihood ratio.  Models
    are immutable and hashable, so they can key caches.
    '''

    finite: ClassVar[bool]

    @abc.abstractmethod
    def likelihood_ratio(self, y: Any) -> Probability:
        raise NotImplementedError

    @abc.abstractmethod
    def sample(self,
               hypothesis: Hypothesis,
               rng: np.random.Generator,
               size: int,
               ) -> np.ndarray:
        '''Draw `size` i.i.d. observations under a hypothesis.

        Finite models return alphabet positions (not symbols) so that kernels
        can index their rows directly.
        '''
        raise NotImplementedError

    @property
    @abc.abstractmethod
    def exact(self) -> bool:
        'Whether probabilities are exact rationals.'


@dataclass(frozen=True)
class FiniteObservationModel(ObservationModel):
    'Observation channel on a finite alphabet, one pmf per hypothesis.'

    finite: ClassVar[bool] = True

    alphabet: Tuple[Symbol, ...]
    pmf1: Tuple[Probability, ...]
    pmf2: Tuple[Probability, ...]
    _positions: Dict[Symbol, int] = field(
        init=False,
        repr=False,
        compare=False,
        hash=False,
    )

    def __post_init__(self) -> None:
        violations = []
        if not self.alphabet:
            violations.append('alphabet must be nonempty')
        if len(set(self.alphabet)) != len(self.alphabet):
            violations.append('alphabet symbols must be distinct')
        if not len(self.pmf1) == len(self.pmf2) == len(self.alphabet):
            violations.append('pmf1 and pmf2 need one entry per alphabet symbol')
        if violations:
            raise ModelError(violations=tuple(violations))

        pmf1 = tuple(as_probability(mass) for mass in self.pmf1)
        pmf2 = tuple(as_probability(mass) for mass in self.pmf2)
        if not all(isinstance(mass, Fraction) for mass in pmf1 + pmf2):
            pmf1 = tuple(float(mass) for mass in pmf1)
            pmf2 = tuple(float(mass) for mass in pmf2)
        object.__setattr__(self, 'alphabet', tuple(self.alphabet))
        object.__setattr__(self, 'pmf1', pmf1)
        object.__setattr__(self, 'pmf2', pmf2)
        positions = {symbol: index for index, symbol in enumerate(self.alphabet)}
        object.__setattr__(self, '_positions', positions)

    @property
    def exact(self) -> bool:
        return all(isinstance(mass, Fraction) for mass in self.pmf1 + self.pmf2)

    @property
    def arithmetic(self) -> str:
        return 'exact-rational' if self.exact else 'float'

    def pmf(self, hypothesis: Hypothesis) -> Tuple[Probability, ...]:
        return self.pmf1 if hypothesis is Hypothesis.H1 else self.pmf2

    def position(self, y: Symbol) -> int:
        try:
            return self._positions[y]
        except (KeyError, TypeError):
            raise ZeroProbabilityObservation(
                f'{y!r} is not in the alphabet',
                observation=y,
            ) from None

    def support(self) -> Tuple[int, ...]:
        'Alphabet positions with positive mass under at least one hypothesis.'
        return tuple(
            index for index, (mass1, mass2) in enumerate(zip(self.pmf1, self.pmf2))
            if mass1 > 0 or mass2 > 0
        )

    def likelihood_ratio(self, y: Any) -> Probability:
        return self._ratio_at(self.position(y))

    def _ratio_at(self, index: int) -> Probability:
        mass1, mass2 = self.pmf1[index], self.pmf2[index]
        if mass1 > 0:
            return mass2 / mass1
        if mass2 > 0:
            return math.inf
        raise ZeroProbabilityObservation(
            f'{self.alphabet[index]!r} has zero probability under both hypotheses',
            observation=self.alphabet[index],
        )

    def lr_values(self) -> Tuple[Probability | None, ...]:
        'Likelihood ratio per alphabet position; None off the support.'
        support = set(self.support())
        return tuple(
            self._ratio_at(index) if index in support else None
            for index in range(len(self.alphabet))
        )

    def lr_atoms(self) -> Tuple[Probability, ...]:
        'Distinct likelihood ratio values, ascending, +inf last.'
        return tuple(sorted({self._ratio_at(index) for index in self.support()}))

    def sample(self,
               hypothesis: Hypothesis,
               rng: np.random.Generator,
               size: int,
               ) -> np.ndarray:
        probabilities = np.array([float(mass) for mass in self.pmf(hypothesis)])
        probabilities /= probabilities.sum()
        return rng.choice(len(self.alphabet), size=size, p=probabilities)


@dataclass(frozen=True)
class GaussianShiftModel(ObservationModel):
    '''y ~ N(mean1, sigma²) under H1 and N(mean2, sigma²) under H2.

    The log likelihood ratio is linear in y, so threshold rules on L(y) are
    threshold rules on y, and every bin probability is a normal CDF
    difference.

        >>> GaussianShiftModel(0.0, 1.0, 1.0).likelihood_ratio(0.5)
        1.0
    '''

    finite: ClassVar[bool] = False

    mean1: float
    mean2: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ModelError(f'sigma must be positive, got {self.sigma}')
        for name in ('mean1', 'mean2', 'sigma'):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def exact(self) -> bool:
        return False

    def mean(self, hypothesis: Hypothesis) -> float:
        return self.mean1 if hypothesis is Hypothesis.H1 else self.mean2

    @property
    def slope(self) -> float:
        'd log L / dy.'
        return (self.mean2 - self.mean1) / self.sigma**2

    @property
    def midpoint(self) -> float:
        return (self.mean1 + self.mean2) / 2

    def log_likelihood_ratio(self, y: Any) -> Any:
        return self.slope * (np.asarray(y, dtype=float) - self.midpoint)

    def likelihood_ratio(self, y: Any) -> float:
        log_lr = float(self.log_likelihood_ratio(y))
        try:
            return math.exp(log_lr)
        except OverflowError:
            return math.inf

    def density(self, y: Any, hypothesis: Hypothesis) -> Any:
        return norm.pdf(y, loc=self.mean(hypothesis), scale=self.sigma)

    def lr_cdf(self, t: float, hypothesis: Hypothesis) -> float:
        'P(L(y) <= t | hypothesis), in closed form.'
        if t <= 0:
            return 0.0
        if math.isinf(t):
            return 1.0
        if self.slope == 0:
            return 1.0 if t >= 1 else 0.0
        y = self.midpoint + math.log(t) / self.slope
        z = (y - self.mean(hypothesis)) / self.sigma
        return float(norm.cdf(z)) if self.slope > 0 else float(norm.sf(z))

    def sample(self,
               hypothesis: Hypothesis,
               rng: np.random.Generator,
               size: int,
               ) -> np.ndarray:
        return rng.normal(self.mean(hypothesis), self.sigma, size=size)


def likelihood_ratio(model: ObservationModel, y: Any) -> Probability:
    'L(y) = f(y | H2) / f(y | H1); +inf where only H2 can produce y.'
    return model.likelihood_ratio(y)


@dataclass(frozen=True)
class ValidationReport:
    '''Outcome of validate_model().

    second_moments[h] is E[(log L)² | h], +inf where one-sided zero mass makes it diverge.
    flagged lists the symbols whose one-sided zero mass makes a moment
    infinite.
    '''

    normalized: bool
    second_moments: Dict[Hypothesis, float]
    flagged: Dict[Hypothesis, Tuple[Symbol, ...]]

    @property
    def finite_moments(self) -> bool:
        return all(math.isfinite(moment) for moment in self.second_moments.values())

    @property
    def violations(self) -> Tuple[str, ...]:
        return tuple(
            f'log L has an infinite second moment under {hypothesis}'
            for hypothesis, moment in self.second_moments.items()
            if not math.isfinite(moment)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'normalized': self.normalized,
            'finite_moments': self.finite_moments,
            'second_moments': {str(h): m for h, m in self.second_moments.items()},
            'flagged': {str(h): list(s) for h, s in self.flagged.items()},
            'violations': list(self.violations),
        }


def validate_model(model: ObservationModel) -> ValidationReport:
    '''Check normalization and the second moment of log L under each hypothesis.

    Structural violations (negative mass, pmfs that do not sum to 1, a
    hypothesis with no mass anywhere) raise ModelError listing all of them.
    An infinite second moment is reported, not raised: finite-N evaluation
    stays valid and only exponent bounds are void.

        >>> report = validate_model(FiniteObservationModel((1, 2), (1, 1), (1, 1)))
        Traceback (most recent call last):
          ...
        detkit.exceptions.ModelError: pmf1 sums to 2, not 1; pmf2 sums to 2, not 1
    '''
    if isinstance(model, GaussianShiftModel):
        a, m = model.slope, model.midpoint
        moments = {
            h: a**2 * (model.sigma**2 + (model.mean(h) - m)**2)
            for h in HYPOTHESES
        }
        return ValidationReport(True, moments, {h: tuple() for h in HYPOTHESES})

    model = cast(FiniteObservationModel, model)
    violations = []
    for hypothesis in HYPOTHESES:
        pmf = model.pmf(hypothesis)
        name = f'pmf{int(hypothesis)}'
        negative = [model.alphabet[i] for i, mass in enumerate(pmf) if mass < 0]
        if negative:
            violations.append(f'{name} has negative mass at {negative}')
        total = sum(pmf)
        if (total != 1) if model.exact else not math.isclose(total, 1):
            violations.append(f'{name} sums to {total}, not 1')
    if violations:
        raise ModelError(violations=tuple(violations))

    moments: Dict[Hypothesis, float] = {}
    flagged: Dict[Hypothesis, Tuple[Symbol, ...]] = {}
    for hypothesis in HYPOTHESES:
        pmf = model.pmf(hypothesis)
        moment, bad = 0.0, []
        for index in model.support():
            if pmf[index] == 0:
                continue
            ratio = model._ratio_at(index)
            if ratio == 0 or math.isinf(ratio):
                bad.append(model.alphabet[index])
            else:
                moment += float(pmf[index]) * math.log(ratio)**2
        moments[hypothesis] = math.inf if bad else moment
        flagged[hypothesis] = tuple(bad)
        if bad:
            logger.info(
                'Infinite second moment under %s: one-sided zero mass at %s',
                hypothesis,
                bad,
            )
    return ValidationReport(True, moments, flagged)


def sample_observation(model: ObservationModel,
                       hypothesis: Hypothesis,
                       rng: np.random.Generator,
                       ) -> Any:
    '''Draw one observation under a hypothesis.

    Reproducible for a seeded Generator; finite models return the alphabet
    symbol.
    '''
    draw = model.sample(hypothesis, rng, 1)[0]
    if isinstance(model, FiniteObservationModel):
        return model.alphabet[int(draw)]
    return float(draw)


def induced_lr_law(model: FiniteObservationModel,
                   hypothesis: Hypothesis,
                   ) -> Dict[Probability, Probability]:
    '''Law of L(y) under a hypothesis: pmf mass regrouped by likelihood ratio.

    Atoms are ascending with +inf last; atoms that carry no mass under this
    hypothesis (but some under the other) are kept with mass 0.
    '''
    pmf = model.pmf(hypothesis)
    law: Dict[Probability, Probability] = {
        atom: 0 * pmf[0] for atom in model.lr_atoms()
    }
    for index in model.support():
        law[model._ratio_at(index)] += pmf[index]
    return law


def finite_model(alphabet: Sequence[Symbol],
                 pmf1: Sequence[Any],
                 pmf2: Sequence[Any],
                 ) -> FiniteObservationModel:
    'Build and validate a finite model in one go.'
    model = FiniteObservationModel(tuple(alphabet), tuple(pmf1), tuple(pmf2))
    validate_model(model)
    return model
