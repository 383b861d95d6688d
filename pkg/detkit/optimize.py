# --------------------------------------------------------------------------- #
#   optimize.py                                                               #
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
'''Sensor policy design.

Global search over threshold teams (and, as an oracle, over every
deterministic sensor map), person-by-person best responses, and designs
that optimize the Chernoff exponent of identical sensors.

MAP risk does not depend on the order of the sensors, so team searches walk
multisets of policies (combinations with replacement) rather than tuples,
and ties go to the first multiset in lexicographic order.
'''


from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Any
from typing import Dict
from typing import Final
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .annotations import Probability
from .exceptions import DegenerateLaws
from .exceptions import EnumerationCapExceeded
from .exceptions import SearchBudgetExceeded
from .evaluate import exact_risk
from .executor import ordered_map
from .exponent import ChernoffResult
from .exponent import chernoff_exponent
from .fusion import FUSION_TABLE_CAP
from .fusion import MapRule
from .fusion import all_actions
from .fusion import joint_masses
from .fusion import log_mass
from .models import FiniteObservationModel
from .models import GaussianShiftModel
from .models import Hypothesis
from .models import ObservationModel
from .models import Prior
from .monkey import logger
from .policies import SensorKernel
from .policies import StochasticKernel
from .policies import TeamPolicy
from .policies import ThresholdKernel
from .policies import ThresholdPolicy
from .policies import canonical_law_key
from .policies import compile_threshold
from .policies import enumerate_threshold_policies
from .policies import output_law
from .policies import threshold_between


SEARCH_BUDGET: Final[int] = 2**24
MAX_ROUNDS: Final[int] = 100
GAUSSIAN_GRID_POINTS: Final[int] = 201
GAUSSIAN_MAX_SWEEPS: Final[int] = 50


@dataclass(frozen=True)
class DesignResult:
    '''Best design a search found.

    `objective` is a Bayes risk for team searches and a Chernoff value for
    exponent searches; re-evaluating `policy` reproduces it.
    '''

    policy: TeamPolicy | SensorKernel
    objective: Probability
    candidates: int
    method: str
    globally_optimal: bool = True
    converged: bool = True
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'method': self.method,
            'objective': self.objective,
            'candidates': self.candidates,
            'globally_optimal': self.globally_optimal,
            'converged': self.converged,
            'policy': self.policy.to_dict(),
            **self.detail,
        }


def threshold_kernels(model: FiniteObservationModel, num_actions: int) -> List[StochasticKernel]:
    'Canonical threshold policies of a finite model, compiled, in enumeration order.'
    return [
        compile_threshold(policy, model, num_actions)
        for policy in enumerate_threshold_policies(model, num_actions)
    ]


def _argmin_team(teams: Sequence[TeamPolicy],
                 model: ObservationModel,
                 prior: Prior,
                 workers: int,
                 ) -> Tuple[TeamPolicy, Probability]:
    risks = ordered_map(
        lambda team: exact_risk(team, MapRule(), model, prior).risk,
        teams,
        workers=workers,
    )
    best = min(range(len(teams)), key=risks.__getitem__)
    return teams[best], risks[best]


def _check_budget(needed: int, budget: int) -> None:
    if needed > budget:
        raise SearchBudgetExceeded(needed=needed, cap=budget)


def best_team_exhaustive(model: FiniteObservationModel,
                         num_sensors: int,
                         num_actions: int,
                         prior: Prior,
                         *,
                         budget: int = SEARCH_BUDGET,
                         workers: int = 1,
                         ) -> DesignResult:
    '''Exact optimum over teams of threshold policies with MAP fusion.

        >>> model = FiniteObservationModel(
        ...     (1, 2, 3), ('4/5', '1/5', '0'), ('1/3', '1/3', '1/3'),
        ... )
        >>> best_team_exhaustive(model, 2, 2, Prior.equal()).objective
        Fraction(19, 90)
    '''
    kernels = threshold_kernels(model, num_actions)
    _check_budget(len(kernels) ** num_sensors * num_actions ** num_sensors, budget)
    teams = [
        TeamPolicy(combination)
        for combination in itertools.combinations_with_replacement(kernels, num_sensors)
    ]
    team, risk = _argmin_team(teams, model, prior, workers)
    logger.info('Best of %d threshold teams: risk %s', len(teams), risk)
    return DesignResult(team, risk, len(teams), 'exhaustive-threshold')


def best_team_all_maps_oracle(model: FiniteObservationModel,
                              num_sensors: int,
                              num_actions: int,
                              prior: Prior,
                              *,
                              budget: int = SEARCH_BUDGET,
                              workers: int = 1,
                              ) -> DesignResult:
    '''Exact optimum over every deterministic map from symbols to actions.

    Maps whose output-law pairs agree up to relabelling the actions give the
    same risk in any team, so one representative of each is kept.
    '''
    size = len(model.alphabet)
    _check_budget((num_actions ** size) ** num_sensors, budget)
    one, zero = (Fraction(1), Fraction(0)) if model.exact else (1.0, 0.0)
    representatives: Dict[Any, StochasticKernel] = {}
    for assignment in itertools.product(range(num_actions), repeat=size):
        kernel = StochasticKernel(
            tuple(tuple(one if u == action else zero for u in range(num_actions)) for action in assignment),
            num_actions,
        )
        key = canonical_law_key(
            output_law(kernel, model, Hypothesis.H1),
            output_law(kernel, model, Hypothesis.H2),
        )
        representatives.setdefault(key, kernel)
    teams = [
        TeamPolicy(combination)
        for combination in itertools.combinations_with_replacement(representatives.values(), num_sensors)
    ]
    team, risk = _argmin_team(teams, model, prior, workers)
    logger.info(
        'Best of %d teams over %d distinct sensor maps: risk %s',
        len(teams),
        len(representatives),
        risk,
    )
    return DesignResult(team, risk, len(teams), 'exhaustive-all-maps')


def _conditional_error_costs(index: int,
                             team: TeamPolicy,
                             model: ObservationModel,
                             prior: Prior,
                             ) -> Tuple[List[Probability], List[Probability]]:
    '''C_j(u) = P(fusion errs | H_j, sensor `index` emits u), under the team's MAP fusion.

    Tuples that cannot occur under either hypothesis are decided H1.
    '''
    num_sensors, num_actions = len(team), team.num_actions
    size = num_actions ** num_sensors
    if size > FUSION_TABLE_CAP:
        raise EnumerationCapExceeded(needed=size, cap=FUSION_TABLE_CAP)
    laws = team.output_laws(model)
    others = laws[:index] + laws[index+1:]
    exact = model.exact and prior.exact
    zero = Fraction(0) if exact else 0.0
    costs1, costs2 = [zero] * num_actions, [zero] * num_actions
    for actions in all_actions(num_sensors, num_actions):
        mass1, mass2 = joint_masses(actions, laws)
        if exact:
            decide_h1 = prior.p1 * mass1 >= prior.p2 * mass2
        else:
            decide_h1 = (
                mass1 == mass2 == 0
                or log_mass(prior.p1) + log_mass(mass1) >= log_mass(prior.p2) + log_mass(mass2)
            )
        rest = actions[:index] + actions[index+1:]
        other1, other2 = joint_masses(rest, others)
        u = actions[index] - 1
        if decide_h1:
            costs2[u] += other2
        else:
            costs1[u] += other1
    return costs1, costs2


def _lower_envelope(intercepts: Sequence[Probability],
                    slopes: Sequence[Probability],
                    ) -> Tuple[List[Probability], List[int]]:
    '''Lower envelope of the lines a_u + b_u·l over l in [0, +inf).

    Returns the breakpoints and the 1-based label of the line winning each
    interval.  Ties prefer the smaller slope, then the lower label.
    '''
    lines = list(range(len(intercepts)))
    current = min(lines, key=lambda u: (intercepts[u], slopes[u], u))
    breakpoints: List[Probability] = []
    labels = [current + 1]
    position: Probability = 0
    while True:
        crossings = []
        for u in lines:
            if slopes[u] < slopes[current]:
                crossing = (intercepts[u] - intercepts[current]) / (slopes[current] - slopes[u])
                if crossing > position:
                    crossings.append((crossing, slopes[u], u))
        if not crossings:
            return breakpoints, labels
        position, _, current = min(crossings)
        breakpoints.append(position)
        labels.append(current + 1)


def _envelope_policy(index: int,
                     team: TeamPolicy,
                     model: ObservationModel,
                     prior: Prior,
                     ) -> ThresholdPolicy:
    'Threshold policy read off the lower envelope of the cost lines under `team`\'s MAP fusion.'
    costs1, costs2 = _conditional_error_costs(index, team, model, prior)
    ratio = prior.p2 / prior.p1
    breakpoints, labels = _lower_envelope(costs1, [cost * ratio for cost in costs2])
    logger.debug('Sensor %d envelope: breakpoints %s, labels %s', index, breakpoints, labels)
    if not isinstance(model, FiniteObservationModel):
        return ThresholdPolicy(tuple(breakpoints), tuple(labels))

    atoms = model.lr_atoms()
    runs: List[Tuple[int, List[Probability]]] = []
    for atom in atoms:
        label = labels[bisect.bisect_left(breakpoints, atom)]
        if runs and runs[-1][0] == label:
            runs[-1][1].append(atom)
        else:
            runs.append((label, [atom]))
    thresholds = tuple(
        threshold_between(left[1][-1], right[1][0]) for left, right in zip(runs, runs[1:])
    )
    return ThresholdPolicy(thresholds, tuple(label for label, _ in runs))


def _spread_policy(model: GaussianShiftModel, num_actions: int) -> ThresholdPolicy | None:
    '''Thresholds evenly spaced in y between the two means, one bin per action.

    None when the means coincide and no threshold separates anything.
    '''
    if model.slope == 0 or num_actions < 2:
        return None
    steps = [model.mean1 + k * (model.mean2 - model.mean1) / num_actions for k in range(1, num_actions)]
    thresholds = sorted(math.exp(float(model.log_likelihood_ratio(y))) for y in steps)
    return ThresholdPolicy(tuple(thresholds), tuple(range(1, num_actions + 1)))


def best_response(index: int,
                  team: TeamPolicy,
                  model: ObservationModel,
                  prior: Prior,
                  ) -> ThresholdPolicy:
    '''Best threshold policy for sensor `index` (0-based) with the rest held fixed.

    Sending u costs p1·f1(y)·[C1(u) + C2(u)·(p2/p1)·L(y)], affine in the
    likelihood ratio, so the best action for every y follows the lower
    envelope of |U| lines in L.  On a finite model the envelope's breakpoints
    are moved midway between the likelihood-ratio atoms they separate.

    The lines come from the current team's fusion, which cannot see actions
    the current kernel never emits.  Every candidate is therefore rescored
    with MAP fusion recomputed for the whole team, and the lowest risk wins:

    - finite models: every canonical threshold policy, in enumeration order,
      then the envelope policy (ties go to the earlier candidate);
    - Gaussian models: the envelope policy, plus, when the current kernel
      leaves actions unused, the envelope against a kernel that uses them all.

        >>> from detkit.catalog import example_model, named_threshold_kernels
        >>> model = example_model()
        >>> const = named_threshold_kernels(model)['const']
        >>> best_response(0, TeamPolicy((const,)), model, Prior.equal())
        ThresholdPolicy(thresholds=(Fraction(25, 24),), labels=(1, 2))
    '''
    num_actions = team.num_actions
    candidates: List[ThresholdPolicy] = []
    if isinstance(model, FiniteObservationModel):
        candidates.extend(enumerate_threshold_policies(model, num_actions))
        candidates.append(_envelope_policy(index, team, model, prior))
    else:
        candidates.append(_envelope_policy(index, team, model, prior))
        g1 = output_law(team[index], model, Hypothesis.H1)
        g2 = output_law(team[index], model, Hypothesis.H2)
        spread = _spread_policy(model, num_actions) if isinstance(model, GaussianShiftModel) else None
        if spread is not None and any(p == 0 and q == 0 for p, q in zip(g1, g2)):
            seeded = team.replace(index, compile_threshold(spread, model, num_actions))
            candidates.append(_envelope_policy(index, seeded, model, prior))

    risks = [
        exact_risk(team.replace(index, compile_threshold(policy, model, num_actions)), MapRule(), model, prior).risk
        for policy in candidates
    ]
    best = min(range(len(candidates)), key=risks.__getitem__)
    logger.debug('Sensor %d: best of %d candidates has risk %s', index, len(candidates), risks[best])
    return candidates[best]


def coordinate_descent(initial: TeamPolicy,
                       model: ObservationModel,
                       prior: Prior,
                       max_rounds: int = MAX_ROUNDS,
                       ) -> DesignResult:
    '''Cycle best responses over the sensors until nobody can improve.

    The result is person-by-person optimal, which is weaker than globally
    optimal.  Risk never increases from one accepted step to the next.
    '''
    team = initial
    risk = exact_risk(team, MapRule(), model, prior).risk
    history = [risk]
    rounds, converged = 0, False
    while rounds < max_rounds:
        rounds += 1
        improved = False
        for index in range(len(team)):
            policy = best_response(index, team, model, prior)
            candidate = team.replace(index, compile_threshold(policy, model, team.num_actions))
            candidate_risk = exact_risk(candidate, MapRule(), model, prior).risk
            if candidate_risk < risk:
                team, risk, improved = candidate, candidate_risk, True
                history.append(risk)
        if not improved:
            converged = True
            break
    logger.info('Coordinate descent stopped after %d rounds at risk %s', rounds, risk)
    return DesignResult(
        team,
        risk,
        rounds * len(team),
        'coordinate-descent',
        globally_optimal=False,
        converged=converged,
        detail={'person_by_person_optimal': converged, 'rounds': rounds, 'history': history},
    )


def _exponent_value(kernel: SensorKernel, model: ObservationModel) -> ChernoffResult:
    try:
        return chernoff_exponent(kernel, model)
    except DegenerateLaws:
        # Output laws with disjoint supports: the sensor never errs.
        return ChernoffResult(0.5, -math.inf)


def best_symmetric_exponent(model: ObservationModel,
                            num_actions: int,
                            *,
                            grid_points: int = GAUSSIAN_GRID_POINTS,
                            max_sweeps: int = GAUSSIAN_MAX_SWEEPS,
                            ) -> DesignResult:
    '''Kernel with the best Chernoff exponent, for N identical sensors.

    The exponent of a randomized kernel is a weighted average of the
    exponents of its components, so a single deterministic kernel is always
    optimal.  Finite models are searched exhaustively over threshold
    policies; Gaussian models over thresholds, by grid then refinement.
    '''
    if isinstance(model, FiniteObservationModel):
        kernels = threshold_kernels(model, num_actions)
        results = [_exponent_value(kernel, model) for kernel in kernels]
        best = min(range(len(kernels)), key=lambda k: results[k].value)
        return DesignResult(
            kernels[best],
            results[best].value,
            len(kernels),
            'exhaustive-chernoff',
            detail={'s_star': results[best].s_star, 'mixture_reduction': 'point mass'},
        )
    if isinstance(model, GaussianShiftModel):
        return _gaussian_symmetric_exponent(model, num_actions, grid_points, max_sweeps)
    raise TypeError(f'cannot search thresholds of a {type(model).__name__}')


def _gaussian_symmetric_exponent(model: GaussianShiftModel,
                                 num_actions: int,
                                 grid_points: int,
                                 max_sweeps: int,
                                 ) -> DesignResult:
    '''Search log-thresholds: a grid for the first, then cyclic 1-D refinements.

    Thresholds live on the likelihood-ratio range of y within six standard
    deviations of both means.
    '''
    if model.slope == 0:
        kernel = ThresholdKernel(ThresholdPolicy(tuple(), (1,)), num_actions)
        return DesignResult(kernel, 0.0, 1, 'gaussian-chernoff', detail={'s_star': 0.0})
    ends = [
        float(model.log_likelihood_ratio(mean + sign * 6 * model.sigma))
        for mean in (model.mean1, model.mean2) for sign in (-1, 1)
    ]
    low, high = min(ends), max(ends)
    evaluations = 0

    def value(log_thresholds: Sequence[float]) -> float:
        nonlocal evaluations
        evaluations += 1
        if any(b <= a for a, b in zip(log_thresholds, log_thresholds[1:])):
            return math.inf
        policy = ThresholdPolicy(tuple(math.exp(t) for t in log_thresholds), tuple(range(1, len(log_thresholds) + 2)))
        try:
            return chernoff_exponent(ThresholdKernel(policy, num_actions), model, cross_check=False).value
        except DegenerateLaws:
            return -math.inf

    cuts = num_actions - 1
    thresholds = [float(t) for t in np.linspace(low, high, cuts + 2)[1:-1]]
    step = (high - low) / (grid_points - 1)
    if cuts == 1:
        grid = np.linspace(low, high, grid_points)
        thresholds = [float(grid[int(np.argmin([value([t]) for t in grid]))])]
    best = value(thresholds)
    converged = False
    for _ in range(max_sweeps):
        previous = best
        for d in range(cuts):
            # A lone threshold is refined within its grid cell's neighbours;
            # otherwise each moves freely between the thresholds beside it.
            if cuts == 1:
                lo, hi = max(low, thresholds[0] - step), min(high, thresholds[0] + step)
            else:
                lo = thresholds[d - 1] if d > 0 else low
                hi = thresholds[d + 1] if d + 1 < cuts else high

            def along(t: float, d: int = d) -> float:
                return value(thresholds[:d] + [t] + thresholds[d+1:])

            refined = minimize_scalar(along, bounds=(lo, hi), method='bounded', options={'xatol': 1e-10})
            if refined.fun < best:
                thresholds[d], best = float(refined.x), float(refined.fun)
        if previous - best < 1e-12:
            converged = True
            break
    policy = ThresholdPolicy(tuple(math.exp(t) for t in thresholds), tuple(range(1, num_actions + 1)))
    kernel = ThresholdKernel(policy, num_actions)
    result = chernoff_exponent(kernel, model)
    logger.info('Gaussian threshold search: %d evaluations, value %.9g', evaluations, result.value)
    return DesignResult(
        kernel,
        result.value,
        evaluations,
        'gaussian-chernoff',
        converged=converged,
        detail={'s_star': result.s_star, 'log_thresholds': thresholds},
    )


def two_group_team(first: SensorKernel, second: SensorKernel, size: int, num_sensors: int) -> TeamPolicy:
    '`size` sensors run `first`, the remaining ones run `second`.'
    return TeamPolicy((first,) * size + (second,) * (num_sensors - size))


def best_two_group(model: FiniteObservationModel,
                   num_sensors: int,
                   num_actions: int,
                   prior: Prior,
                   *,
                   sizes: Sequence[int] | None = None,
                   budget: int = SEARCH_BUDGET,
                   workers: int = 1,
                   ) -> DesignResult:
    '''Best design where k sensors share one threshold policy and N - k another.

    `sizes` restricts k; sizes=[0] searches symmetric designs only.
    '''
    kernels = threshold_kernels(model, num_actions)
    sizes = list(range(num_sensors + 1)) if sizes is None else list(sizes)
    pairs = list(itertools.combinations_with_replacement(range(len(kernels)), 2))
    _check_budget(len(pairs) * len(sizes), budget)
    designs, teams = [], []
    for (a, b), k in itertools.product(pairs, sizes):
        team = two_group_team(kernels[a], kernels[b], k, num_sensors)
        if team not in teams:
            designs.append((a, b, k))
            teams.append(team)
    team, risk = _argmin_team(teams, model, prior, workers)
    a, b, k = designs[teams.index(team)]
    logger.info('Best two-group design: %d x policy %d, %d x policy %d, risk %s', k, a, num_sensors - k, b, risk)
    return DesignResult(
        team,
        risk,
        len(teams),
        'two-group',
        detail={'k': k, 'first': a, 'second': b},
    )
