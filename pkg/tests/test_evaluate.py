# --------------------------------------------------------------------------- #
#   test_evaluate.py                                                          #
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
'Exact, Monte Carlo and sweep risk evaluation tests.'


import json
import math
from fractions import Fraction
from typing import Tuple

import pytest

from detkit import EnumerationCapExceeded
from detkit import MonteCarloFallbackWarning
from detkit import PolicyError
from detkit.catalog import named_threshold_kernels
from detkit.evaluate import RiskReport
from detkit.evaluate import TeamSpec
from detkit.evaluate import error_exponent_empirical
from detkit.evaluate import exact_risk
from detkit.evaluate import mc_risk
from detkit.evaluate import mixture_risk
from detkit.evaluate import sweep_n
from detkit.fusion import FusionInfo
from detkit.fusion import MapRule
from detkit.fusion import exhaustive_best_fusion
from detkit.models import FiniteObservationModel
from detkit.models import GaussianShiftModel
from detkit.models import Prior
from detkit.policies import StochasticKernel
from detkit.policies import TeamMixture
from detkit.policies import TeamPolicy
from detkit.policies import ThresholdPolicy
from detkit.policies import compile_threshold


Kernels = Tuple[StochasticKernel, StochasticKernel]

B_EXPONENT = math.log(2 / 3)


class TestExactRisk:
    @staticmethod
    def test_example_teams(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        a, b = ab
        report = exact_risk(TeamPolicy((a, b)), MapRule(), model, prior)
        assert report.risk == Fraction(19, 90)
        assert report.err_given_h1 == Fraction(1, 5)
        assert report.err_given_h2 == Fraction(2, 9)
        assert exact_risk(TeamPolicy((a, a)), MapRule(), model, prior).risk == Fraction(53, 225)
        assert exact_risk(TeamPolicy((b, b)), MapRule(), model, prior).risk == Fraction(2, 9)

    @staticmethod
    def test_asymmetric_team_beats_symmetric_ones(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        a, b = ab
        mixed = exact_risk(TeamPolicy((a, b)), MapRule(), model, prior).risk
        assert mixed < exact_risk(TeamPolicy((a, a)), MapRule(), model, prior).risk
        assert mixed < exact_risk(TeamPolicy((b, b)), MapRule(), model, prior).risk

    @staticmethod
    def test_uninformative_model(uninformative: FiniteObservationModel) -> None:
        kernel = StochasticKernel(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))))
        team = TeamPolicy((kernel,) * 3)
        assert exact_risk(team, MapRule(), uninformative, Prior.equal()).risk == Fraction(1, 2)
        assert exact_risk(team, MapRule(), uninformative, Prior.from_p1('3/5')).risk == Fraction(2, 5)

    @staticmethod
    def test_all_b_closed_form(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        'J(B, ..., B) = ½(2/3)^N: H1 is missed only when every sensor reports 1 under H2'
        _, b = ab
        for num_sensors in (1, 3, 16):
            report = exact_risk(TeamPolicy((b,) * num_sensors), MapRule(), model, prior)
            assert report.risk == Fraction(1, 2) * Fraction(2, 3) ** num_sensors

    @staticmethod
    def test_table_and_map_agree(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        team = TeamPolicy(ab)
        table, _ = exhaustive_best_fusion(team, model, prior)
        assert exact_risk(team, table, model, prior) == exact_risk(team, MapRule(), model, prior)

    @staticmethod
    def test_workers_do_not_change_the_result(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        a, b = ab
        team = TeamPolicy((a, b, a, b, b))
        assert exact_risk(team, MapRule(), model, prior, workers=3) == exact_risk(team, MapRule(), model, prior)

    @staticmethod
    def test_cap(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        with pytest.raises(EnumerationCapExceeded) as excinfo:
            exact_risk(TeamPolicy(ab), MapRule(), model, prior, cap=2)
        assert excinfo.value.cap == 2

    @staticmethod
    def test_float_model(ab: Kernels, prior: Prior) -> None:
        model = FiniteObservationModel((1, 2, 3), (0.8, 0.2, 0.0), (1 / 3, 1 / 3, 1 / 3))
        a, b = ab
        team = TeamPolicy((
            StochasticKernel(tuple(tuple(float(p) for p in row) for row in a.rows)),
            StochasticKernel(tuple(tuple(float(p) for p in row) for row in b.rows)),
        ))
        assert exact_risk(team, MapRule(), model, prior).risk == pytest.approx(19 / 90)

    @staticmethod
    def test_gaussian_single_sensor(gaussian: GaussianShiftModel, prior: Prior) -> None:
        kernel = compile_threshold(ThresholdPolicy((1.0,), (1, 2)), gaussian)
        report = exact_risk(TeamPolicy((kernel,)), MapRule(), gaussian, prior)
        assert report.risk == pytest.approx(0.3085375387259869)


class TestMixtureRisk:
    @staticmethod
    def test_symmetric_independent(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        a, b = ab
        mix = TeamMixture.symmetric_independent_of([('1/2', a), ('1/2', b)], 2)
        assert mixture_risk(mix, FusionInfo.KNOWN_RANDOMIZATION, model, prior).risk == Fraction(11, 50)

    @staticmethod
    def test_exchangeable_known(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        a, b = ab
        mix = TeamMixture(((Fraction(1, 2), TeamPolicy((a, b))), (Fraction(1, 2), TeamPolicy((b, a)))))
        assert mixture_risk(mix, FusionInfo.KNOWN_RANDOMIZATION, model, prior).risk == Fraction(19, 90)

    @staticmethod
    def test_perfect_observation_regimes(perfect: FiniteObservationModel, cd: Kernels, prior: Prior) -> None:
        'Knowing who reported what is worth a quarter of the risk'
        c, d = cd
        mix = TeamMixture(((Fraction(1, 2), TeamPolicy((c, d))), (Fraction(1, 2), TeamPolicy((d, c)))))
        assert mixture_risk(mix, FusionInfo.KNOWN_RANDOMIZATION, perfect, prior).risk == 0
        assert mixture_risk(mix, FusionInfo.BAYESIAN, perfect, prior).risk == Fraction(1, 4)

    @staticmethod
    def test_point_mass_regimes_agree(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        mix = TeamMixture.point(TeamPolicy(ab))
        known = mixture_risk(mix, FusionInfo.KNOWN_RANDOMIZATION, model, prior)
        bayes = mixture_risk(mix, FusionInfo.BAYESIAN, model, prior)
        assert known.risk == bayes.risk == Fraction(19, 90)


class TestMonteCarlo:
    @staticmethod
    @pytest.mark.parametrize('seed', [1, 2, 3])
    def test_example_team(model: FiniteObservationModel, ab: Kernels, prior: Prior, seed: int) -> None:
        report = mc_risk(TeamPolicy(ab), MapRule(), model, prior, 10**6, seed)
        assert report.method == 'monte-carlo'
        assert report.stderr is not None
        assert abs(report.risk - 19 / 90) <= 4 * report.stderr

    @staticmethod
    def test_reproducible(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        first = mc_risk(TeamPolicy(ab), MapRule(), model, prior, 50000, 7, workers=3)
        second = mc_risk(TeamPolicy(ab), MapRule(), model, prior, 50000, 7, workers=3)
        assert json.dumps(first) == json.dumps(second)

    @staticmethod
    def test_gaussian(gaussian: GaussianShiftModel, prior: Prior) -> None:
        kernel = compile_threshold(ThresholdPolicy((1.0,), (1, 2)), gaussian)
        report = mc_risk(TeamPolicy((kernel,)), MapRule(), gaussian, prior, 200000, 0)
        assert report.stderr is not None
        assert abs(report.risk - 0.3085375387259869) <= 4 * report.stderr

    @staticmethod
    def test_bayesian_mixture(perfect: FiniteObservationModel, cd: Kernels, prior: Prior) -> None:
        c, d = cd
        mix = TeamMixture(((Fraction(1, 2), TeamPolicy((c, d))), (Fraction(1, 2), TeamPolicy((d, c)))))
        report = mc_risk(mix, MapRule(), perfect, prior, 100000, 3, info=FusionInfo.BAYESIAN)
        assert report.stderr is not None
        assert abs(report.risk - 0.25) <= 4 * report.stderr
        known = mc_risk(mix, MapRule(), perfect, prior, 100000, 3)
        assert known.risk == 0

    @staticmethod
    def test_stderr_follows_the_conditional_rates(model: FiniteObservationModel, prior: Prior) -> None:
        'The constant sensor is always fused to H1: ê1 = 0 and ê2 = 1 carry no sampling noise'
        const = named_threshold_kernels(model)['const']
        report = mc_risk(TeamPolicy((const,)), MapRule(), model, prior, 10000, 5)
        assert (report.err_given_h1, report.err_given_h2) == (0.0, 1.0)
        assert report.risk == 0.5
        assert report.stderr == 0.0

    @staticmethod
    def test_samples_must_be_positive(model: FiniteObservationModel, ab: Kernels, prior: Prior) -> None:
        with pytest.raises(ValueError):
            mc_risk(TeamPolicy(ab), MapRule(), model, prior, 0, 0)


class TestReports:
    @staticmethod
    def test_exponent() -> None:
        assert error_exponent_empirical(Fraction(1, 4), 2) == pytest.approx(math.log(1 / 2))
        with pytest.raises(ValueError):
            error_exponent_empirical(Fraction(1, 4), 0)

    @staticmethod
    def test_to_row() -> None:
        report = RiskReport(Fraction(19, 90), Fraction(1, 5), Fraction(2, 9), 2)
        row = report.to_row()
        assert row[:4] == ['2', '19/90', '1/5', '2/9']
        assert float(row[4]) == pytest.approx(math.log(19 / 90) / 2)
        assert row[5] == ''

    @staticmethod
    def test_to_dict_has_exact_and_decimal_forms() -> None:
        report = RiskReport(Fraction(19, 90), Fraction(1, 5), Fraction(2, 9), 2)
        data = report.to_dict()
        assert data['risk'] == '19/90'
        assert data['risk_decimal'] == pytest.approx(19 / 90)
        assert data['method'] == 'exact'
        assert data['stderr'] is None


class TestSweep:
    @staticmethod
    def test_team_spec() -> None:
        assert TeamSpec.parse('A:1/4,B').counts(8) == [('A', 2), ('B', 6)]
        assert str(TeamSpec.parse('half-A-B')) == 'A:1/2,B:1/2'

    @staticmethod
    def test_unknown_kernel(model: FiniteObservationModel) -> None:
        with pytest.raises(PolicyError):
            TeamSpec.parse('all-Z').build(2, named_threshold_kernels(model))

    @staticmethod
    def test_all_b_approaches_its_chernoff_exponent(model: FiniteObservationModel, prior: Prior) -> None:
        result = sweep_n(TeamSpec.parse('all-B'), named_threshold_kernels(model), model, prior, [2, 4, 8, 16], B_EXPONENT)
        gaps = [row.gap for row in result.rows]
        assert all(gap is not None and gap < 0 for gap in gaps)
        distances = [abs(gap) for gap in gaps if gap is not None]
        assert distances == sorted(distances, reverse=True)
        assert distances[-1] < 0.15
        assert result.rows[-1].report.exponent == pytest.approx(B_EXPONENT + math.log(0.5) / 16)

    @staticmethod
    def test_n_values_must_increase(model: FiniteObservationModel, prior: Prior) -> None:
        with pytest.raises(ValueError):
            sweep_n(TeamSpec.parse('all-B'), named_threshold_kernels(model), model, prior, [4, 2])

    @staticmethod
    def test_monte_carlo_fallback(model: FiniteObservationModel, prior: Prior) -> None:
        with pytest.warns(MonteCarloFallbackWarning):
            result = sweep_n(
                TeamSpec.parse('half-A-B'),
                named_threshold_kernels(model),
                model,
                prior,
                [4],
                cap=1,
                samples=2000,
                seed=1,
            )
        assert result.rows[0].report.method == 'monte-carlo'
        assert result.rows[0].report.samples == 2000
