# --------------------------------------------------------------------------- #
#   exponent.py                                                               #
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
'''Chernoff error exponents of sensor output laws.

For a sensor with output laws g1 = g(H1, ·) and g2 = g(H2, ·) the objective

    f(s) = log Σ_u g1(u)^(1-s) · g2(u)^s,        s ∈ [0, 1]

sums over the actions both laws can emit.  It is convex in s, and its
minimum is the decay rate of the Bayes risk of N identical sensors under
MAP fusion.

    >>> from fractions import Fraction
    >>> round(chernoff_objective((Fraction(1), Fraction(0)), (Fraction(2, 3), Fraction(1, 3)), 1), 6)
    -0.405465
'''


from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any
from typing import Callable
from typing import Dict
from typing import Final
from typing import List
from typing import Sequence
from typing import Tuple
from typing import cast

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .annotations import Law
from .exceptions import DegenerateLaws
from .exceptions import VoidBoundWarning
from .models import Hypothesis
from .models import ObservationModel
from .models import Prior
from .monkey import logger
from .policies import SensorKernel
from .policies import TeamPolicy
from .policies import output_law


GRID_POINTS: Final[int] = 10**4
XATOL: Final[float] = 1e-9
CROSS_CHECK_TOLERANCE: Final[float] = 1e-6
DIFFERENCE_STEP: Final[float] = 1e-4
BOUND_GRID_POINTS: Final[int] = 1001


def _common_support(g1: Law, g2: Law) -> Tuple[np.ndarray, np.ndarray]:
    if not any(p > 0 or q > 0 for p, q in zip(g1, g2)):
        raise DegenerateLaws()
    both = [(float(p), float(q)) for p, q in zip(g1, g2) if p > 0 and q > 0]
    log1 = np.log(np.array([p for p, _ in both], dtype=float))
    log2 = np.log(np.array([q for _, q in both], dtype=float))
    return log1, log2


def chernoff_objective(g1: Law, g2: Law, s: float) -> float:
    '''log Σ_u g1(u)^(1-s) g2(u)^s over the common support of g1 and g2.

    -inf when the supports are disjoint.
    '''
    if not 0 <= s <= 1:
        raise ValueError(f's must lie in [0, 1], got {s}')
    return float(chernoff_curve(g1, g2, np.array([float(s)]))[0])


def chernoff_curve(g1: Law, g2: Law, grid: Sequence[float] | np.ndarray) -> np.ndarray:
    '''The objective at every s of a grid, vectorized.

        >>> from fractions import Fraction
        >>> chernoff_curve((Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2)), [0, 0.5, 1])
        array([0., 0., 0.])
    '''
    log1, log2 = _common_support(g1, g2)
    s = np.asarray(grid, dtype=float)
    if not len(log1):
        return np.full(s.shape, -math.inf)
    exponents = np.outer(1 - s, log1) + np.outer(s, log2)
    return np.asarray(logsumexp(exponents, axis=1))


def _minimize(objective: Callable[[float], float],
              curve: Callable[[np.ndarray], np.ndarray],
              *,
              cross_check: bool,
              grid_points: int,
              ) -> Tuple[float, float]:
    '''Minimize a convex function of s over [0, 1].

    Bounded Brent search, then the endpoints explicitly (the objective may
    jump there when supports differ), then a dense-grid cross-check.
    '''
    if not np.isfinite(curve(np.array([0.5]))).all():
        raise DegenerateLaws('objective is not finite on [0, 1]; the laws have disjoint supports')
    result = minimize_scalar(objective, bounds=(0.0, 1.0), method='bounded', options={'xatol': XATOL})
    candidates = [(float(result.fun), float(result.x)), (objective(0.0), 0.0), (objective(1.0), 1.0)]
    value, s_star = min(candidates)
    if cross_check:
        grid = np.linspace(0.0, 1.0, grid_points)
        values = curve(grid)
        index = int(np.argmin(values))
        if abs(values[index] - value) > CROSS_CHECK_TOLERANCE:
            logger.warning(
                'Scalar search (%.12g at s=%.9g) disagrees with the grid (%.12g at s=%.9g)',
                value,
                s_star,
                values[index],
                grid[index],
            )
            if values[index] < value:
                value, s_star = float(values[index]), float(grid[index])
    return s_star, value


@dataclass(frozen=True)
class ChernoffResult:
    s_star: float
    value: float
    trace: Tuple[Tuple[float, float], ...] = tuple()

    def to_dict(self) -> Dict[str, Any]:
        report: Dict[str, Any] = {'s_star': self.s_star, 'value': self.value}
        if self.trace:
            report['grid'] = [list(point) for point in self.trace]
        return report


def _trace(curve: Callable[[np.ndarray], np.ndarray], points: int) -> Tuple[Tuple[float, float], ...]:
    if points <= 0:
        return tuple()
    grid = np.linspace(0.0, 1.0, points)
    return tuple(zip(grid.tolist(), curve(grid).tolist()))


def laws_of(kernel: SensorKernel, model: ObservationModel) -> Tuple[Law, Law]:
    return output_law(kernel, model, Hypothesis.H1), output_law(kernel, model, Hypothesis.H2)


def chernoff_exponent(kernel: SensorKernel,
                      model: ObservationModel,
                      *,
                      cross_check: bool = True,
                      grid_points: int = GRID_POINTS,
                      trace_points: int = 0,
                      ) -> ChernoffResult:
    '''Minimum of the Chernoff objective of a kernel's output laws.

    Raises DegenerateLaws when the output laws have disjoint supports (a
    perfect sensor, whose objective is -inf everywhere).
    '''
    g1, g2 = laws_of(kernel, model)
    s_star, value = _minimize(
        lambda s: chernoff_objective(g1, g2, s),
        lambda grid: chernoff_curve(g1, g2, grid),
        cross_check=cross_check,
        grid_points=grid_points,
    )
    logger.debug('Chernoff exponent %.9g at s=%.9g', value, s_star)
    return ChernoffResult(s_star, value, _trace(lambda grid: chernoff_curve(g1, g2, grid), trace_points))


@dataclass(frozen=True)
class MixtureChernoffResult(ChernoffResult):
    '''Chernoff exponent of a mixture, plus its best single component.

    The objective is linear in the mixture weights, so the best mixture is
    never better than the best point mass: value >= best_value.
    '''

    best_index: int = 0
    best_value: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {**super().to_dict(), 'best_index': self.best_index, 'best_value': self.best_value}


def mixture_exponent(weighted_kernels: Sequence[Tuple[Any, SensorKernel]],
                     model: ObservationModel,
                     *,
                     cross_check: bool = True,
                     grid_points: int = GRID_POINTS,
                     ) -> MixtureChernoffResult:
    'min over s of Σ_k w_k·f_k(s) for a representative sensor drawing its kernel at random.'
    weights = [float(weight) for weight, _ in weighted_kernels]
    laws = [laws_of(kernel, model) for _, kernel in weighted_kernels]

    def curve(grid: np.ndarray) -> np.ndarray:
        return cast(np.ndarray, sum(w * chernoff_curve(g1, g2, grid) for w, (g1, g2) in zip(weights, laws)))

    s_star, value = _minimize(
        lambda s: float(curve(np.array([s]))[0]),
        curve,
        cross_check=cross_check,
        grid_points=grid_points,
    )
    components = [
        chernoff_exponent(kernel, model, cross_check=False).value for _, kernel in weighted_kernels
    ]
    best_index = min(range(len(components)), key=components.__getitem__)
    return MixtureChernoffResult(s_star, value, tuple(), best_index, components[best_index])


def characteristic_diagnostic(kernel: SensorKernel,
                              model: ObservationModel,
                              prior: Prior,
                              s: float,
                              ) -> float:
    '''Σ_j P(H_j)·E[exp(s·log(g1(u)/g2(u))) | H_j], by direct summation over U.

    Actions impossible under H2 but not H1 contribute +inf for s > 0.
    '''
    if not 0 <= s <= 1:
        raise ValueError(f's must lie in [0, 1], got {s}')
    g1, g2 = laws_of(kernel, model)
    total = 0.0
    for hypothesis, law in ((Hypothesis.H1, g1), (Hypothesis.H2, g2)):
        for mass, p, q in zip(law, g1, g2):
            if mass == 0:
                continue
            if s == 0:
                term = 1.0
            elif q == 0:
                term = math.inf
            elif p == 0:
                term = 0.0
            else:
                term = (float(p) / float(q)) ** s
            total += float(prior[hypothesis]) * float(mass) * term
    return total


def log_mgf_second_derivative(g1: Law, g2: Law, s: float, step: float = DIFFERENCE_STEP) -> float:
    '''Central-difference d²f/ds², with s clipped into [step, 1 - step].

    Clipped at 0 from below; f is convex.
    '''
    s = min(max(s, step), 1 - step)
    left, middle, right = chernoff_curve(g1, g2, np.array([s - step, s, s + step]))
    return max(float((left - 2 * middle + right) / step**2), 0.0)


def _one_sided(g1: Law, g2: Law) -> bool:
    return any((p > 0) != (q > 0) for p, q in zip(g1, g2))


@dataclass(frozen=True)
class BoundReport:
    '''Finite-N lower bound on log(risk)/N for a MAP-fused team.

    lower_bound = main_term - kappa, both taken at s_at_bound.  void means
    some sensor's quantized likelihood ratio has an infinite second moment
    and the bound guarantees nothing.
    '''

    lower_bound: float
    kappa: float
    s_at_bound: float
    main_term: float
    void: bool
    num_sensors: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'N': self.num_sensors,
            'lower_bound': self.lower_bound,
            'kappa': self.kappa,
            's_at_bound': self.s_at_bound,
            'main_term': self.main_term,
            'void': self.void,
        }


def exponent_lower_bound(team: TeamPolicy,
                         model: ObservationModel,
                         prior: Prior | None = None,
                         *,
                         step: float = DIFFERENCE_STEP,
                         grid_points: int = BOUND_GRID_POINTS,
                         ) -> BoundReport:
    '''Lower bound on log(J^N)/N from the tilted second moment of the sensors.

        bound(s) = (1/N)·Σ_i f_i(s) - κ_N(s)
        κ_N(s) = (1/N)·[sqrt(2·Σ_i f_i''(s)) + log(4 / min(p1, p2))]

    minimized over s ∈ [step, 1 - step] on a grid, then refined.
    '''
    prior = prior or Prior.equal()
    laws = team.output_laws(model)
    num_sensors = len(team)
    groups: Dict[Tuple[Law, Law], int] = {}
    for pair in laws:
        groups[pair] = groups.get(pair, 0) + 1
    void = any(_one_sided(g1, g2) for g1, g2 in groups)
    if void:
        warnings.warn(cast(str, VoidBoundWarning.__doc__), VoidBoundWarning)
    constant = math.log(4 / float(min(prior.p1, prior.p2)))

    def terms(s: float) -> Tuple[float, float]:
        main = sum(count * chernoff_objective(g1, g2, s) for (g1, g2), count in groups.items())
        curvature = sum(
            count * log_mgf_second_derivative(g1, g2, s, step) for (g1, g2), count in groups.items()
        )
        kappa = (math.sqrt(2 * curvature) + constant) / num_sensors
        return main / num_sensors, kappa

    def bound(s: float) -> float:
        main, kappa = terms(s)
        return main - kappa

    grid: List[float] = np.linspace(step, 1 - step, grid_points).tolist()
    values = [bound(s) for s in grid]
    index = min(range(len(grid)), key=values.__getitem__)
    s_at_bound = grid[index]
    low, high = grid[max(index - 1, 0)], grid[min(index + 1, len(grid) - 1)]
    if high > low:
        refined = minimize_scalar(bound, bounds=(low, high), method='bounded', options={'xatol': XATOL})
        if refined.fun < values[index]:
            s_at_bound = float(refined.x)
    main, kappa = terms(s_at_bound)
    logger.debug('Lower bound %.9g (kappa %.9g) at s=%.9g', main - kappa, kappa, s_at_bound)
    return BoundReport(main - kappa, kappa, s_at_bound, main, void, num_sensors)
