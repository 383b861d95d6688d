# --------------------------------------------------------------------------- #
#   test_policies.py                                                          #
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
'Threshold policy, kernel, team and mixture tests.'


import itertools
import math
import random
from fractions import Fraction
from typing import Tuple

import numpy as np
import pytest

from detkit import PolicyError
from detkit import SpotCheckWarning
from detkit.evaluate import exact_risk
from detkit.evaluate import mixture_risk
from detkit.fusion import FusionInfo
from detkit.fusion import MapRule
from detkit.models import FiniteObservationModel
from detkit.models import GaussianShiftModel
from detkit.models import Hypothesis
from detkit.models import Prior
from detkit.policies import StochasticKernel
from detkit.policies import TeamMixture
from detkit.policies import TeamPolicy
from detkit.policies import ThresholdKernel
from detkit.policies import ThresholdPolicy
from detkit.policies import canonical_law_key
from detkit.policies import compile_threshold
from detkit.policies import count_threshold_policies
from detkit.policies import enumerate_threshold_policies
from detkit.policies import identity_kernel
from detkit.policies import is_exchangeable
from detkit.policies import output_law
from detkit.policies import permute_mixture
from detkit.policies import permute_team
from detkit.policies import symmetrize
from detkit.policies import threshold_between
from detkit.policies import uniform_kernel
from detkit.optimize import threshold_kernels
from tests.conftest import random_models


Kernels = Tuple[StochasticKernel, StochasticKernel]


class TestThresholdPolicy:
    @staticmethod
    def test_bins_are_right_closed() -> None:
        policy = ThresholdPolicy((Fraction(1), Fraction(2)), (1, 2, 3))
        assert policy.action(Fraction(1, 2)) == 1
        assert policy.action(Fraction(1)) == 1
        assert policy.action(Fraction(3, 2)) == 2
        assert policy.action(Fraction(2)) == 2
        assert policy.action(math.inf) == 3

    @staticmethod
    def test_labels_can_be_permuted() -> None:
        policy = ThresholdPolicy((Fraction(1),), (2, 1))
        assert policy.action(Fraction(1, 2)) == 2
        assert policy.action(Fraction(2)) == 1

    @staticmethod
    @pytest.mark.parametrize('thresholds, labels', [
        ((1,), (1,)),
        ((2, 1), (1, 2, 3)),
        ((1, 1), (1, 2, 3)),
        ((0,), (1, 2)),
        ((1,), (1, 1)),
        ((1,), (0, 1)),
    ])
    def test_invalid(thresholds: Tuple[int, ...], labels: Tuple[int, ...]) -> None:
        with pytest.raises(PolicyError):
            ThresholdPolicy(tuple(Fraction(t) for t in thresholds), labels)


class TestKernels:
    @staticmethod
    def test_policy_a_and_b(model: FiniteObservationModel, ab: Kernels) -> None:
        a, b = ab
        assert a.policy == ThresholdPolicy((Fraction(25, 24),), (1, 2))
        assert b.policy == ThresholdPolicy((Fraction(10, 3),), (1, 2))
        assert output_law(a, model, Hypothesis.H1) == (Fraction(4, 5), Fraction(1, 5))
        assert output_law(a, model, Hypothesis.H2) == (Fraction(1, 3), Fraction(2, 3))
        assert output_law(b, model, Hypothesis.H1) == (Fraction(1), Fraction(0))
        assert output_law(b, model, Hypothesis.H2) == (Fraction(2, 3), Fraction(1, 3))

    @staticmethod
    def test_output_laws_sum_to_one() -> None:
        for model in random_models(seed=3, count=30):
            for kernel in threshold_kernels(model, 3):
                for hypothesis in Hypothesis:
                    assert sum(output_law(kernel, model, hypothesis)) == 1

    @staticmethod
    def test_identity_and_uniform(perfect: FiniteObservationModel, cd: Kernels) -> None:
        c, d = cd
        assert output_law(c, perfect, Hypothesis.H1) == (Fraction(1), Fraction(0))
        assert output_law(c, perfect, Hypothesis.H2) == (Fraction(0), Fraction(1))
        assert output_law(d, perfect, Hypothesis.H1) == (Fraction(1, 2), Fraction(1, 2))
        assert c.deterministic
        assert not d.deterministic

    @staticmethod
    def test_rows_must_be_stochastic() -> None:
        with pytest.raises(PolicyError) as excinfo:
            StochasticKernel(((Fraction(1, 2), Fraction(1, 3)), (Fraction(1), Fraction(0))))
        assert 'row 0 sums to 5/6' in str(excinfo.value)

    @staticmethod
    def test_kernel_must_fit_the_alphabet(model: FiniteObservationModel) -> None:
        kernel = StochasticKernel(((Fraction(1),), (Fraction(1),)))
        with pytest.raises(PolicyError):
            output_law(kernel, model, Hypothesis.H1)

    @staticmethod
    def test_gaussian_threshold_kernel(gaussian: GaussianShiftModel) -> None:
        kernel = compile_threshold(ThresholdPolicy((1.0,), (1, 2)), gaussian)
        assert isinstance(kernel, ThresholdKernel)
        g1 = output_law(kernel, gaussian, Hypothesis.H1)
        assert g1[0] == pytest.approx(0.6914624612740131)
        assert sum(g1) == pytest.approx(1.0)

    @staticmethod
    def test_sampled_actions_follow_the_law(model: FiniteObservationModel) -> None:
        kernel = uniform_kernel(model, 2)
        rng = np.random.default_rng(5)
        observations = model.sample(Hypothesis.H1, rng, 20000)
        actions = kernel.sample_actions(model, observations, rng)
        assert set(np.unique(actions)) == {1, 2}
        assert abs((actions == 1).mean() - 0.5) < 0.02

    @staticmethod
    def test_canonical_law_key_ignores_labels(ab: Kernels, model: FiniteObservationModel) -> None:
        a, _ = ab
        swapped = StochasticKernel(tuple(tuple(reversed(row)) for row in a.rows))
        key = canonical_law_key(*(output_law(a, model, h) for h in Hypothesis))
        swapped_key = canonical_law_key(*(output_law(swapped, model, h) for h in Hypothesis))
        assert key == swapped_key


class TestEnumeration:
    @staticmethod
    def test_example_policies(model: FiniteObservationModel) -> None:
        policies = enumerate_threshold_policies(model, 2)
        assert [policy.thresholds for policy in policies] == [
            (),
            (Fraction(25, 24),),
            (Fraction(10, 3),),
        ]

    @staticmethod
    def test_counts_match() -> None:
        for model in random_models(seed=5, count=30):
            atoms = len(model.lr_atoms())
            for num_actions in (2, 3):
                policies = enumerate_threshold_policies(model, num_actions)
                assert len(policies) == count_threshold_policies(atoms, num_actions)

    @staticmethod
    def test_threshold_between() -> None:
        assert threshold_between(Fraction(1), Fraction(2)) == Fraction(3, 2)
        assert threshold_between(Fraction(5, 3), math.inf) == Fraction(10, 3)
        assert threshold_between(Fraction(0), math.inf) == 1


class TestTeams:
    @staticmethod
    def test_team_needs_one_action_alphabet(model: FiniteObservationModel, ab: Kernels) -> None:
        a, _ = ab
        with pytest.raises(PolicyError):
            TeamPolicy((a, identity_kernel(model)))

    @staticmethod
    def test_permute_team(ab: Kernels) -> None:
        a, b = ab
        team = TeamPolicy((a, b, b))
        assert permute_team(team, (2, 3, 1)) == TeamPolicy((b, b, a))
        with pytest.raises(PolicyError):
            permute_team(team, (1, 1, 2))

    @staticmethod
    def test_mixture_weights_must_sum_to_one(ab: Kernels) -> None:
        a, b = ab
        with pytest.raises(PolicyError):
            TeamMixture(((Fraction(1, 2), TeamPolicy((a, b))), (Fraction(1, 3), TeamPolicy((b, a)))))

    @staticmethod
    def test_mixture_teams_must_agree_on_n(ab: Kernels) -> None:
        a, b = ab
        with pytest.raises(PolicyError):
            TeamMixture(((Fraction(1, 2), TeamPolicy((a, b))), (Fraction(1, 2), TeamPolicy((a,)))))

    @staticmethod
    def test_weights_merge_duplicates(ab: Kernels) -> None:
        a, b = ab
        mix = TeamMixture(((Fraction(1, 4), TeamPolicy((a, b))), (Fraction(3, 4), TeamPolicy((a, b)))))
        assert mix.weights() == {TeamPolicy((a, b)): Fraction(1)}


class TestExchangeability:
    @staticmethod
    def test_point_mass_on_symmetric_team(ab: Kernels) -> None:
        a, _ = ab
        assert TeamMixture.point(TeamPolicy((a, a, a))).exchangeable

    @staticmethod
    def test_asymmetric_team_is_not(ab: Kernels) -> None:
        a, b = ab
        assert not is_exchangeable(TeamMixture.point(TeamPolicy((a, b))))

    @staticmethod
    def test_symmetrized_team_is(ab: Kernels) -> None:
        a, b = ab
        mix = symmetrize(TeamMixture.point(TeamPolicy((a, b, b))))
        assert len(mix.support) == 3
        assert all(weight == Fraction(1, 3) for weight, _ in mix.support)
        assert is_exchangeable(mix)

    @staticmethod
    def test_symmetric_independent_is(ab: Kernels) -> None:
        a, b = ab
        mix = TeamMixture.symmetric_independent_of([('1/3', a), ('2/3', b)], 3)
        assert mix.symmetric_independent
        assert is_exchangeable(mix)

    @staticmethod
    def test_large_teams_are_spot_checked(ab: Kernels) -> None:
        a, b = ab
        mix = symmetrize(TeamMixture.point(TeamPolicy((a,) + (b,) * 8)))
        with pytest.warns(SpotCheckWarning):
            assert is_exchangeable(mix, samples=20)

    @staticmethod
    def test_risk_is_permutation_invariant(prior: Prior) -> None:
        'Relabelling the sensors changes neither the risk of a team nor that of a mixture'
        rng = random.Random(17)
        for model in random_models(seed=17, count=100, max_size=3):
            kernels = threshold_kernels(model, 2)
            num_sensors = rng.randint(2, 4)
            teams = [TeamPolicy(tuple(rng.choice(kernels) for _ in range(num_sensors))) for _ in range(2)]
            mix = TeamMixture(((Fraction(1, 3), teams[0]), (Fraction(2, 3), teams[1])))
            permutation = tuple(rng.sample(range(1, num_sensors + 1), num_sensors))

            team_risk = exact_risk(teams[0], MapRule(), model, prior).risk
            assert exact_risk(permute_team(teams[0], permutation), MapRule(), model, prior).risk == team_risk
            for info in FusionInfo:
                risk = mixture_risk(mix, info, model, prior).risk
                assert mixture_risk(permute_mixture(mix, permutation), info, model, prior).risk == risk

    @staticmethod
    def test_symmetrization_preserves_known_risk(prior: Prior) -> None:
        rng = random.Random(23)
        for model in random_models(seed=23, count=100, max_size=3):
            kernels = threshold_kernels(model, 2)
            num_sensors = rng.randint(2, 4)
            team = TeamPolicy(tuple(rng.choice(kernels) for _ in range(num_sensors)))
            mix = TeamMixture.point(team)
            known = FusionInfo.KNOWN_RANDOMIZATION
            assert mixture_risk(symmetrize(mix), known, model, prior).risk == mixture_risk(mix, known, model, prior).risk

    @staticmethod
    def test_known_mixture_cannot_beat_best_team(prior: Prior) -> None:
        'A known-randomization mixture is never better than its best atom'
        rng = random.Random(29)
        for model in random_models(seed=29, count=100, max_size=3):
            kernels = threshold_kernels(model, 2)
            num_sensors = rng.randint(2, 3)
            teams = list(itertools.product(kernels, repeat=num_sensors))
            chosen = [TeamPolicy(teams[rng.randrange(len(teams))]) for _ in range(3)]
            mix = symmetrize(TeamMixture(tuple((Fraction(1, 3), team) for team in chosen)))
            best = min(exact_risk(TeamPolicy(team), MapRule(), model, prior).risk for team in teams)
            assert mixture_risk(mix, FusionInfo.KNOWN_RANDOMIZATION, model, prior).risk >= best
