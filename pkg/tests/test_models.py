# --------------------------------------------------------------------------- #
#   test_models.py                                                            #
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
'Observation model, prior and likelihood ratio tests.'


import math
import unittest.mock
from fractions import Fraction

import numpy as np
import pytest

from detkit import ModelError
from detkit import ZeroProbabilityObservation
from detkit.models import FiniteObservationModel
from detkit.models import GaussianShiftModel
from detkit.models import Hypothesis
from detkit.models import Prior
from detkit.models import finite_model
from detkit.models import induced_lr_law
from detkit.models import likelihood_ratio
from detkit.models import logger
from detkit.models import sample_observation
from detkit.models import validate_model
from tests.conftest import random_models


class TestPrior:
    @staticmethod
    def test_equal() -> None:
        prior = Prior.equal()
        assert prior[Hypothesis.H1] == prior[Hypothesis.H2] == Fraction(1, 2)
        assert prior.exact

    @staticmethod
    def test_from_p1_float() -> None:
        prior = Prior.from_p1(0.25)
        assert prior.p2 == 0.75
        assert not prior.exact

    @staticmethod
    @pytest.mark.parametrize('p1, p2', [(0, 1), (1, 0), (Fraction(1, 2), Fraction(1, 3))])
    def test_invalid(p1: Fraction, p2: Fraction) -> None:
        'A prior needs positive mass on both hypotheses and must sum to 1'
        with pytest.raises(ModelError):
            Prior(Fraction(p1), Fraction(p2))


class TestFiniteObservationModel:
    @staticmethod
    def test_likelihood_ratios(model: FiniteObservationModel) -> None:
        assert likelihood_ratio(model, 1) == Fraction(5, 12)
        assert likelihood_ratio(model, 2) == Fraction(5, 3)
        assert likelihood_ratio(model, 3) == math.inf

    @staticmethod
    def test_identical_laws_give_ratio_one(uninformative: FiniteObservationModel) -> None:
        assert likelihood_ratio(uninformative, 1) == likelihood_ratio(uninformative, 2) == 1

    @staticmethod
    def test_symbol_outside_alphabet(model: FiniteObservationModel) -> None:
        with pytest.raises(ZeroProbabilityObservation) as excinfo:
            likelihood_ratio(model, 4)
        assert excinfo.value.observation == 4

    @staticmethod
    def test_symbol_without_mass() -> None:
        model = FiniteObservationModel((1, 2, 3), ('1/2', '1/2', '0'), ('1/4', '3/4', '0'))
        with pytest.raises(ZeroProbabilityObservation):
            likelihood_ratio(model, 3)
        assert model.lr_values() == (Fraction(1, 2), Fraction(3, 2), None)

    @staticmethod
    def test_float_entries_make_the_model_float() -> None:
        model = FiniteObservationModel((1, 2), (0.5, '1/2'), ('1/4', '3/4'))
        assert not model.exact
        assert model.arithmetic == 'float'
        assert all(isinstance(mass, float) for mass in model.pmf1 + model.pmf2)

    @staticmethod
    def test_structural_errors() -> None:
        with pytest.raises(ModelError) as excinfo:
            FiniteObservationModel((1, 1), ('1/2', '1/2'), ('1/2',))
        assert 'distinct' in str(excinfo.value)
        assert 'one entry per alphabet symbol' in str(excinfo.value)

    @staticmethod
    def test_lr_atoms_merge_tied_symbols() -> None:
        model = FiniteObservationModel((1, 2, 3), ('1/4', '1/4', '1/2'), ('1/4', '1/4', '1/2'))
        assert model.lr_atoms() == (Fraction(1),)

    @staticmethod
    def test_sampling_is_reproducible(model: FiniteObservationModel) -> None:
        draws1 = model.sample(Hypothesis.H1, np.random.default_rng(7), 1000)
        draws2 = model.sample(Hypothesis.H1, np.random.default_rng(7), 1000)
        assert np.array_equal(draws1, draws2)
        # Symbol 3 has no mass under H1.
        assert not np.any(draws1 == 2)

    @staticmethod
    def test_sample_observation_returns_symbols(model: FiniteObservationModel) -> None:
        rng = np.random.default_rng(0)
        assert {sample_observation(model, Hypothesis.H2, rng) for _ in range(200)} == {1, 2, 3}


class TestGaussianShiftModel:
    @staticmethod
    def test_ratio_at_midpoint_is_one(gaussian: GaussianShiftModel) -> None:
        assert likelihood_ratio(gaussian, 0.5) == pytest.approx(1.0)

    @staticmethod
    def test_log_ratio_is_linear(gaussian: GaussianShiftModel) -> None:
        assert gaussian.log_likelihood_ratio(2.5) == pytest.approx(2.0)
        assert likelihood_ratio(gaussian, 2.5) == pytest.approx(math.exp(2.0))

    @staticmethod
    def test_overflow_is_infinite() -> None:
        model = GaussianShiftModel(0.0, 1.0, 1e-3)
        assert likelihood_ratio(model, 1e3) == math.inf

    @staticmethod
    def test_lr_cdf(gaussian: GaussianShiftModel) -> None:
        'P(L <= 1 | H1) = P(y <= 1/2 | H1) = Φ(1/2)'
        assert gaussian.lr_cdf(1.0, Hypothesis.H1) == pytest.approx(0.6914624612740131)
        assert gaussian.lr_cdf(1.0, Hypothesis.H2) == pytest.approx(0.3085375387259869)
        assert gaussian.lr_cdf(0.0, Hypothesis.H1) == 0.0
        assert gaussian.lr_cdf(math.inf, Hypothesis.H2) == 1.0

    @staticmethod
    def test_decreasing_mean_flips_the_ratio() -> None:
        'L <= 1 iff y >= 1/2 once the means swap'
        model = GaussianShiftModel(1.0, 0.0, 1.0)
        assert model.lr_cdf(1.0, Hypothesis.H1) == pytest.approx(0.6914624612740131)
        assert model.lr_cdf(1.0, Hypothesis.H2) == pytest.approx(0.3085375387259869)

    @staticmethod
    def test_sigma_must_be_positive() -> None:
        with pytest.raises(ModelError):
            GaussianShiftModel(0.0, 1.0, 0.0)


class TestValidateModel:
    @staticmethod
    def test_uninformative_model(uninformative: FiniteObservationModel) -> None:
        report = validate_model(uninformative)
        assert report.normalized
        assert report.finite_moments
        assert report.second_moments == {Hypothesis.H1: 0.0, Hypothesis.H2: 0.0}

    @staticmethod
    def test_one_sided_mass_is_flagged(model: FiniteObservationModel) -> None:
        with unittest.mock.patch.object(logger, 'info') as info:
            report = validate_model(model)
        assert not report.finite_moments
        assert math.isfinite(report.second_moments[Hypothesis.H1])
        assert report.second_moments[Hypothesis.H2] == math.inf
        assert report.flagged[Hypothesis.H2] == (3,)
        assert report.violations == ('log L has an infinite second moment under H2',)
        assert info.call_count == 1

    @staticmethod
    def test_all_violations_are_listed() -> None:
        model = FiniteObservationModel((1, 2), ('-1/2', '3/2'), ('1', '1'))
        with pytest.raises(ModelError) as excinfo:
            validate_model(model)
        assert excinfo.value.violations == (
            'pmf1 has negative mass at [1]',
            'pmf2 sums to 2, not 1',
        )

    @staticmethod
    def test_gaussian_moments(gaussian: GaussianShiftModel) -> None:
        report = validate_model(gaussian)
        assert report.finite_moments
        assert report.second_moments[Hypothesis.H1] == pytest.approx(1.25)

    @staticmethod
    def test_finite_model_validates() -> None:
        with pytest.raises(ModelError):
            finite_model((1, 2), ('1/2', '1/3'), ('1/2', '1/2'))

    @staticmethod
    def test_ratio_has_unit_mean_under_h1() -> None:
        'Σ L(y)·pmf1(y) equals the H2 mass where pmf1 > 0'
        for model in random_models(seed=11, count=50):
            total = sum(
                (ratio * mass for ratio, mass in zip(model.lr_values(), model.pmf1) if mass > 0),
                Fraction(0),
            )
            assert total == sum(m2 for m1, m2 in zip(model.pmf1, model.pmf2) if m1 > 0)


class TestInducedLrLaw:
    @staticmethod
    def test_regroups_by_ratio(model: FiniteObservationModel) -> None:
        assert induced_lr_law(model, Hypothesis.H1) == {
            Fraction(5, 12): Fraction(4, 5),
            Fraction(5, 3): Fraction(1, 5),
            math.inf: Fraction(0),
        }

    @staticmethod
    def test_identical_laws_give_one_atom(uninformative: FiniteObservationModel) -> None:
        assert induced_lr_law(uninformative, Hypothesis.H2) == {Fraction(1): Fraction(1)}
