# --------------------------------------------------------------------------- #
#   evaluate.py                                                               #
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
'''Bayes risk of a team: exact enumeration, Monte Carlo, and sweeps over N.

Exact evaluation of a MAP-fused team never walks all |U|^N action tuples.
Sensors with identical output laws are grouped, and only the per-group
action counts (type classes) are enumerated, each weighted by its
multinomial coefficient:

    >>> from detkit.models import FiniteObservationModel
    >>> from detkit.policies import compile_threshold, enumerate_threshold_policies
    >>> model = FiniteObservationModel(
    ...     (1, 2, 3), ('4/5', '1/5', '0'), ('1/3', '1/3', '1/3'),
    ... )
    >>> a, b = (compile_threshold(p, model) for p in enumerate_threshold_policies(model, 2)[1:])
    >>> exact_risk(TeamPolicy((a, b)), MapRule(), model, Prior.equal()).risk
    Fraction(19, 90)
    >>> exact_risk(TeamPolicy((b,) * 16), MapRule(), model, Prior.equal()).risk
    Fraction(32768, 43046721)
'''


from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Any
from typing import Callable
from typing import Dict
from typing import Final
from typing import Iterable
from typing import List
from typing import Mapping
from typing import Sequence
from typing import Tuple
from typing import cast

import numpy as np

from .annotations import Law
from .annotations import Probability
from .exceptions import EnumerationCapExceeded
from .exceptions import MonteCarloFallbackWarning
from .exceptions import PolicyError
from .exceptions import UnreachableActions
from .executor import ordered_map
from .executor import partition
from .fusion import FUSION_TABLE_CAP
from .fusion import FusionInfo
from .fusion import FusionRule
from .fusion import FusionTable
from .fusion import MapRule
from .fusion import all_actions
from .fusion import joint_masses
from .fusion import log_mass
from .fusion import map_decide
from .fusion import mixture_masses
from .models import Hypothesis
from .models import ObservationModel
from .models import Prior
from .monkey import format_number
from .monkey import logger
from .policies import SensorKernel
from .policies import TeamMixture
from .policies import TeamPolicy


ENUMERATION_CAP: Final[int] = 2**24
MC_BLOCK_SIZE: Final[int] = 2**16


def _decimal(value: Any) -> Any:
    'A number rounded to 15 significant digits, for reports.'
    if value is None:
        return None
    value = float(value)
    return value if math.isinf(value) else float(format(value, '.15g'))


def error_exponent_empirical(risk: RiskReport | Probability, num_sensors: int) -> float:
    '''log(risk) / N, and -inf for a zero risk.

        >>> error_exponent_empirical(Fraction(1), 3)
        0.0
        >>> error_exponent_empirical(Fraction(0), 3)
        -inf
    '''
    if num_sensors < 1:
        raise ValueError('N must be an int >= 1')
    if isinstance(risk, RiskReport):
        risk = risk.risk
    return log_mass(risk) / num_sensors


@dataclass(frozen=True)
class RiskReport:
    '''Bayes risk of a fused team, with the conditional error probabilities.

    risk = p1·err_given_h1 + p2·err_given_h2.  Exact reports carry rationals
    for exact inputs; Monte Carlo reports carry floats and a standard error.
    '''

    risk: Probability
    err_given_h1: Probability
    err_given_h2: Probability
    num_sensors: int
    method: str = 'exact'
    stderr: float | None = None
    samples: int | None = None

    @property
    def exponent(self) -> float:
        return error_exponent_empirical(self.risk, self.num_sensors)

    def to_dict(self) -> Dict[str, Any]:
        fields = {
            'risk': self.risk,
            'err_given_h1': self.err_given_h1,
            'err_given_h2': self.err_given_h2,
        }
        report: Dict[str, Any] = {'N': self.num_sensors, 'method': self.method}
        for name, value in fields.items():
            report[name] = format_number(value) if isinstance(value, Fraction) else _decimal(value)
            report[f'{name}_decimal'] = _decimal(value)
        report['exponent'] = _decimal(self.exponent)
        report['stderr'] = _decimal(self.stderr)
        if self.samples is not None:
            report['samples'] = self.samples
        return report

    def to_row(self) -> List[str]:
        'N,risk,err1,err2,exponent,stderr'
        return [
            str(self.num_sensors),
            format_number(self.risk),
            format_number(self.err_given_h1),
            format_number(self.err_given_h2),
            format_number(self.exponent),
            '' if self.stderr is None else format_number(self.stderr),
        ]


def _compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    '''Ways to write `total` as an ordered sum of `parts` nonnegative ints.

        >>> _compositions(2, 2)
        [(0, 2), (1, 1), (2, 0)]
    '''
    compositions = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1, *bars, total + parts - 1)
        compositions.append(tuple(high - low - 1 for low, high in zip(edges, edges[1:])))
    return compositions


def _multinomial(counts: Sequence[int]) -> int:
    coefficient, running = 1, 0
    for count in counts:
        running += count
        coefficient *= math.comb(running, count)
    return coefficient


def _group_laws(laws: Sequence[Tuple[Law, Law]]) -> List[Tuple[Tuple[Law, Law], int]]:
    groups: Dict[Tuple[Law, Law], int] = {}
    for pair in laws:
        groups[pair] = groups.get(pair, 0) + 1
    return list(groups.items())


def _accumulate(items: Sequence[Any],
                errors_of: Callable[[Any], Tuple[Probability, Probability]],
                zero: Probability,
                workers: int,
                ) -> Tuple[Probability, Probability]:
    def chunk(indices: range) -> Tuple[Probability, Probability]:
        err1, err2 = zero, zero
        for index in indices:
            e1, e2 = errors_of(items[index])
            err1 += e1
            err2 += e2
        return err1, err2

    partials = ordered_map(chunk, partition(len(items), max(workers, 1)), workers=workers)
    return (
        sum((e1 for e1, _ in partials), zero),
        sum((e2 for _, e2 in partials), zero),
    )


def exact_risk(team: TeamPolicy,
               fusion: FusionRule,
               model: ObservationModel,
               prior: Prior,
               *,
               cap: int = ENUMERATION_CAP,
               workers: int = 1,
               ) -> RiskReport:
    '''Bayes risk of a team under a fusion rule, by exact enumeration.

    MAP rules are evaluated over type classes, decision tables over every
    action tuple.  Raises EnumerationCapExceeded when either count is over
    `cap`; use mc_risk() then.
    '''
    laws = team.output_laws(model)
    num_sensors, num_actions = len(team), team.num_actions
    exact = model.exact and prior.exact
    zero = Fraction(0) if exact else 0.0

    if isinstance(fusion, FusionTable):
        if (fusion.num_sensors, fusion.num_actions) != (num_sensors, num_actions):
            raise PolicyError('fusion table does not fit the team')
        size = num_actions ** num_sensors
        if size > cap:
            raise EnumerationCapExceeded(needed=size, cap=cap)

        def tuple_errors(actions: Tuple[int, ...]) -> Tuple[Probability, Probability]:
            mass1, mass2 = joint_masses(actions, laws)
            if fusion.decide(actions) is Hypothesis.H1:
                return zero, mass2
            return mass1, zero

        err1, err2 = _accumulate(list(all_actions(num_sensors, num_actions)), tuple_errors, zero, workers)

    else:
        groups = _group_laws(laws)
        size = math.prod(math.comb(count + num_actions - 1, num_actions - 1) for _, count in groups)
        if size > cap:
            raise EnumerationCapExceeded(needed=size, cap=cap)
        per_group = [_compositions(count, num_actions) for _, count in groups]
        log_p1, log_p2 = log_mass(prior.p1), log_mass(prior.p2)

        def class_errors(counts: Tuple[Tuple[int, ...], ...]) -> Tuple[Probability, Probability]:
            mass1, mass2 = Fraction(1), Fraction(1)
            log1 = log2 = 0.0
            for ((g1, g2), _), composition in zip(groups, counts):
                for u, c in enumerate(composition):
                    if c:
                        mass1 *= g1[u]**c
                        mass2 *= g2[u]**c
                        log1 += c * log_mass(g1[u])
                        log2 += c * log_mass(g2[u])
            if log1 == log2 == -math.inf:
                return zero, zero
            if fusion.threshold is not None:
                decide_h1 = (log1 - log2) / num_sensors >= fusion.threshold
            elif exact:
                decide_h1 = prior.p1 * mass1 >= prior.p2 * mass2
            else:
                decide_h1 = log1 + log_p1 >= log2 + log_p2
            weight = math.prod(_multinomial(composition) for composition in counts)
            return (zero, weight * mass2) if decide_h1 else (weight * mass1, zero)

        err1, err2 = _accumulate(list(itertools.product(*per_group)), class_errors, zero, workers)

    risk = prior.p1 * err1 + prior.p2 * err2
    logger.debug('Exact risk over %d outcomes: %s', size, risk)
    return RiskReport(risk, err1, err2, num_sensors)


def mixture_risk(mixture: TeamMixture,
                 info: FusionInfo,
                 model: ObservationModel,
                 prior: Prior,
                 *,
                 cap: int = ENUMERATION_CAP,
                 workers: int = 1,
                 ) -> RiskReport:
    '''Bayes risk of a team mixture under either fusion information regime.

    KNOWN_RANDOMIZATION averages the MAP risk of every realized team.
    BAYESIAN applies MAP to the averaged joint action law, which is what a
    fusion center that only knows the mixture can do.
    '''
    zero = Fraction(0) if model.exact and prior.exact else 0.0
    num_sensors, num_actions = mixture.num_sensors, mixture.num_actions

    if info is FusionInfo.KNOWN_RANDOMIZATION:
        err1, err2 = zero, zero
        for weight, team in mixture.support:
            report = exact_risk(team, MapRule(), model, prior, cap=cap, workers=workers)
            err1 += weight * report.err_given_h1
            err2 += weight * report.err_given_h2
    else:
        size = num_actions ** num_sensors
        if size > cap:
            raise EnumerationCapExceeded(needed=size, cap=cap)

        def tuple_errors(actions: Tuple[int, ...]) -> Tuple[Probability, Probability]:
            mass1, mass2 = mixture_masses(actions, mixture, model)
            if mass1 == 0 and mass2 == 0:
                return zero, zero
            if map_decide(actions, mixture, model, prior, FusionInfo.BAYESIAN) is Hypothesis.H1:
                return zero, mass2
            return mass1, zero

        err1, err2 = _accumulate(list(all_actions(num_sensors, num_actions)), tuple_errors, zero, workers)

    risk = prior.p1 * err1 + prior.p2 * err2
    logger.debug('%s mixture risk over %d atoms: %s', info.name, len(mixture.support), risk)
    return RiskReport(risk, err1, err2, num_sensors)


class _Simulator:
    'Draws hypotheses, observations and actions block by block; decides each sample.'

    def __init__(self,
                 policy: TeamPolicy | TeamMixture,
                 fusion: FusionRule,
                 model: ObservationModel,
                 prior: Prior,
                 info: FusionInfo,
                 ) -> None:
        self.mixture = TeamMixture.point(policy) if isinstance(policy, TeamPolicy) else policy
        self.fusion = fusion
        self.model = model
        self.prior = prior
        self.info = info
        self.num_sensors = self.mixture.num_sensors
        self.num_actions = self.mixture.num_actions
        self.weights = np.array([float(w) for w, _ in self.mixture.support])
        self.weights /= self.weights.sum()
        self.tables = self.__decision_tables()

    def __decision_tables(self) -> List[np.ndarray | None]:
        'Exact per-atom decision tables where |U|^N is small enough.'
        size = self.num_actions ** self.num_sensors
        if isinstance(self.fusion, FusionTable):
            table = np.array([int(d) for d in self.fusion.decisions])
            return [table] * len(self.mixture.support)
        if size > FUSION_TABLE_CAP:
            if self.info is FusionInfo.BAYESIAN and len(self.mixture.support) > 1:
                raise EnumerationCapExceeded(
                    'Bayesian fusion of a mixture needs an explicit decision table',
                    needed=size,
                    cap=FUSION_TABLE_CAP,
                )
            return [None] * len(self.mixture.support)
        if self.info is FusionInfo.BAYESIAN:
            table = self.__table(self.mixture, FusionInfo.BAYESIAN)
            return [table] * len(self.mixture.support)
        return [self.__table(team, FusionInfo.KNOWN_RANDOMIZATION) for _, team in self.mixture.support]

    def __table(self, policy: TeamPolicy | TeamMixture, info: FusionInfo) -> np.ndarray:
        decisions = []
        for actions in all_actions(self.num_sensors, self.num_actions):
            try:
                decision = map_decide(actions, policy, self.model, self.prior, info, rule=cast(MapRule, self.fusion))
            except UnreachableActions:
                # Tuples that cannot occur are never sampled.
                decision = Hypothesis.H1
            decisions.append(int(decision))
        return np.array(decisions)

    def __log_statistic(self, team: TeamPolicy, actions: np.ndarray) -> np.ndarray:
        statistic = np.zeros(len(actions))
        with np.errstate(divide='ignore', invalid='ignore'):
            for sensor, (g1, g2) in enumerate(team.output_laws(self.model)):
                log_ratio = np.log(np.array(g1, dtype=float)) - np.log(np.array(g2, dtype=float))
                statistic += log_ratio[actions[:, sensor] - 1]
        return statistic

    def __decide(self, atom: int, actions: np.ndarray) -> np.ndarray:
        table = self.tables[atom]
        if table is not None:
            radix = self.num_actions ** np.arange(self.num_sensors - 1, -1, -1)
            return table[(actions - 1) @ radix]
        team = self.mixture.support[atom][1]
        fusion = cast(MapRule, self.fusion)
        if fusion.threshold is None:
            threshold = math.log(float(self.prior.p2) / float(self.prior.p1))
        else:
            threshold = fusion.threshold * self.num_sensors
        statistic = self.__log_statistic(team, actions)
        return np.where(statistic >= threshold, int(Hypothesis.H1), int(Hypothesis.H2))

    def errors(self, count: int, rng: np.random.Generator) -> Tuple[int, int, int, int]:
        'Simulate `count` samples: (H1 samples, H1 errors, H2 samples, H2 errors).'
        n1 = e1 = n2 = e2 = 0
        for block in partition(count, max(1, -(-count // MC_BLOCK_SIZE))):
            size = len(block)
            if not size:
                continue
            truth = np.where(rng.random(size) < float(self.prior.p1), int(Hypothesis.H1), int(Hypothesis.H2))
            atoms = rng.choice(len(self.weights), size=size, p=self.weights)
            decisions = np.empty(size, dtype=int)
            for atom, (_, team) in enumerate(self.mixture.support):
                selected = np.flatnonzero(atoms == atom)
                if not len(selected):
                    continue
                actions = np.empty((len(selected), self.num_sensors), dtype=int)
                for sensor, kernel in enumerate(team):
                    actions[:, sensor] = self.__actions(kernel, truth[selected], rng)
                decisions[selected] = self.__decide(atom, actions)
            wrong = decisions != truth
            is_h1 = truth == int(Hypothesis.H1)
            n1 += int(is_h1.sum())
            e1 += int((wrong & is_h1).sum())
            n2 += int((~is_h1).sum())
            e2 += int((wrong & ~is_h1).sum())
        return n1, e1, n2, e2

    def __actions(self, kernel: SensorKernel, truth: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        is_h1 = truth == int(Hypothesis.H1)
        draws1 = self.model.sample(Hypothesis.H1, rng, int(is_h1.sum()))
        draws2 = self.model.sample(Hypothesis.H2, rng, int((~is_h1).sum()))
        observations = np.empty(len(truth), dtype=draws1.dtype)
        observations[is_h1] = draws1
        observations[~is_h1] = draws2
        return kernel.sample_actions(self.model, observations, rng)


def mc_risk(policy: TeamPolicy | TeamMixture,
            fusion: FusionRule,
            model: ObservationModel,
            prior: Prior,
            n_samples: int,
            seed: int,
            workers: int = 1,
            info: FusionInfo = FusionInfo.KNOWN_RANDOMIZATION,
            ) -> RiskReport:
    '''Monte Carlo estimate of the Bayes risk.

    Samples are split into contiguous ranges, one per worker, and worker w
    draws from numpy's default_rng([seed, w]).  The estimate therefore only
    depends on (seed, workers), never on thread scheduling.  The reported
    risk is p1·ê1 + p2·ê2 from the empirical conditional error rates, and
    stderr is the matching sqrt(p1²·ê1(1 - ê1)/n1 + p2²·ê2(1 - ê2)/n2).
    '''
    if n_samples < 1:
        raise ValueError('n_samples must be an int >= 1')
    simulator = _Simulator(policy, fusion, model, prior, info)
    ranges = partition(n_samples, max(workers, 1))

    def run(worker: int) -> Tuple[int, int, int, int]:
        rng = np.random.default_rng([seed, worker])
        return simulator.errors(len(ranges[worker]), rng)

    counts = ordered_map(run, range(len(ranges)), workers=workers)
    n1, e1, n2, e2 = (sum(column) for column in zip(*counts))
    err1 = e1 / n1 if n1 else 0.0
    err2 = e2 / n2 if n2 else 0.0
    p1, p2 = float(prior.p1), float(prior.p2)
    risk = p1 * err1 + p2 * err2
    variance = 0.0
    if n1:
        variance += p1**2 * err1 * (1 - err1) / n1
    if n2:
        variance += p2**2 * err2 * (1 - err2) / n2
    stderr = math.sqrt(variance)
    logger.info('Monte Carlo risk %.6g ± %.2g over %d samples', risk, stderr, n_samples)
    return RiskReport(risk, err1, err2, simulator.num_sensors, 'monte-carlo', stderr, n_samples)


@dataclass(frozen=True)
class TeamSpec:
    '''Recipe that builds a team of any size from named kernels.

    parts are (name, share) pairs; every part but the last gets
    floor(share·N) sensors, the last gets the rest.

        >>> TeamSpec.parse('all-B').counts(5)
        [('B', 5)]
        >>> TeamSpec.parse('half-A-B').counts(5)
        [('A', 2), ('B', 3)]
    '''

    parts: Tuple[Tuple[str, Fraction], ...]

    @classmethod
    def parse(cls, text: str) -> TeamSpec:
        'all-X, half-X-Y, or X:share,...,Z (the last part takes the rest).'
        if text.startswith('all-'):
            return cls(((text[4:], Fraction(1)),))
        if text.startswith('half-'):
            first, _, second = text[5:].partition('-')
            return cls(((first, Fraction(1, 2)), (second, Fraction(1, 2))))
        parts = []
        for item in text.split(','):
            name, _, share = item.partition(':')
            parts.append((name, Fraction(share) if share else Fraction(0)))
        if not parts or not all(name for name, _ in parts):
            raise ValueError(f'cannot parse team spec {text!r}')
        return cls(tuple(parts))

    def counts(self, num_sensors: int) -> List[Tuple[str, int]]:
        counts = [(name, math.floor(share * num_sensors)) for name, share in self.parts[:-1]]
        counts.append((self.parts[-1][0], num_sensors - sum(count for _, count in counts)))
        return counts

    def build(self, num_sensors: int, kernels: Mapping[str, SensorKernel]) -> TeamPolicy:
        try:
            return TeamPolicy(tuple(
                kernels[name] for name, count in self.counts(num_sensors) for _ in range(count)
            ))
        except KeyError as error:
            raise PolicyError(f'no kernel named {error.args[0]!r}') from None

    def __str__(self) -> str:
        return ','.join(f'{name}:{share}' for name, share in self.parts)


@dataclass(frozen=True)
class SweepRow:
    report: RiskReport
    reference: float | None

    @property
    def gap(self) -> float | None:
        return None if self.reference is None else self.report.exponent - self.reference


@dataclass(frozen=True)
class SweepResult:
    'Exponent per N, next to a reference exponent (typically Chernoff).'

    spec: str
    rows: Tuple[SweepRow, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'spec': self.spec,
            'rows': [
                {**row.report.to_dict(), 'reference': _decimal(row.reference), 'gap': _decimal(row.gap)}
                for row in self.rows
            ],
        }


def sweep_n(spec: TeamSpec,
            kernels: Mapping[str, SensorKernel],
            model: ObservationModel,
            prior: Prior,
            n_values: Iterable[int],
            reference: float | None = None,
            *,
            cap: int = ENUMERATION_CAP,
            samples: int = 10**6,
            seed: int = 0,
            workers: int = 1,
            ) -> SweepResult:
    '''Exact (or, over the cap, Monte Carlo) exponent of spec's team for each N.

    Rows that fall back to Monte Carlo are tagged method='monte-carlo' and
    raise a MonteCarloFallbackWarning.
    '''
    n_values = list(n_values)
    if any(n < 1 for n in n_values) or any(a >= b for a, b in zip(n_values, n_values[1:])):
        raise ValueError('N values must be positive and strictly increasing')
    rows = []
    for num_sensors in n_values:
        team = spec.build(num_sensors, kernels)
        try:
            report = exact_risk(team, MapRule(), model, prior, cap=cap, workers=workers)
        except EnumerationCapExceeded:
            warnings.warn(cast(str, MonteCarloFallbackWarning.__doc__), MonteCarloFallbackWarning)
            report = mc_risk(team, MapRule(), model, prior, samples, seed, workers)
        logger.info('Sweep %s N=%d: exponent %s', spec, num_sensors, format_number(report.exponent))
        rows.append(SweepRow(report, reference))
    return SweepResult(str(spec), tuple(rows))
