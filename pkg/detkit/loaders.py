# --------------------------------------------------------------------------- #
#   loaders.py                                                                #
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
'''Read models, policies, teams and mixtures from JSON files.

Rationals are written as strings ("4/5"), floats as JSON numbers:

    >>> document = Document('ex1.json', """{
    ...   "prior": {"p1": "1/2", "p2": "1/2"},
    ...   "finite": {"alphabet": [1, 2, 3],
    ...              "pmf1": ["4/5", "1/5", "0"],
    ...              "pmf2": ["1/3", "1/3", "1/3"]}
    ... }""")
    >>> model, prior = parse_model(document)
    >>> model.lr_atoms()
    (Fraction(5, 12), Fraction(5, 3), inf)

Anything malformed raises InputFileError anchored at a line of the file:

    >>> parse_model(Document('bad.json', '{\\n  "finite": {"alphabet": [1]}\\n}'))
    Traceback (most recent call last):
      ...
    detkit.exceptions.InputFileError: bad.json:2: "finite" needs "alphabet", "pmf1" and "pmf2"
'''


from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import List
from typing import NoReturn
from typing import Tuple

from .exceptions import InputFileError
from .exceptions import ModelError
from .exceptions import PolicyError
from .models import FiniteObservationModel
from .models import GaussianShiftModel
from .models import ObservationModel
from .models import Prior
from .models import as_probability
from .models import validate_model
from .monkey import logger
from .policies import SensorKernel
from .policies import StochasticKernel
from .policies import TeamMixture
from .policies import TeamPolicy
from .policies import ThresholdPolicy
from .policies import compile_threshold


@dataclass(frozen=True)
class Document:
    'The text of one input file, kept around to anchor error messages.'

    path: str
    text: str

    @classmethod
    def read(cls, path: str | pathlib.Path) -> Document:
        path = pathlib.Path(path)
        try:
            return cls(str(path), path.read_text(encoding='utf-8'))
        except OSError as error:
            raise InputFileError(f'cannot read file: {error.strerror}', path=str(path)) from error

    def load(self) -> Any:
        try:
            return json.loads(self.text)
        except json.JSONDecodeError as error:
            raise InputFileError(error.msg, path=self.path, line=error.lineno) from error

    def line_of(self, key: str | None) -> int:
        'First line mentioning "key", or line 1.'
        if key is not None:
            needle = f'"{key}"'
            for number, line in enumerate(self.text.splitlines(), start=1):
                if needle in line:
                    return number
        return 1

    def fail(self, message: str, key: str | None = None) -> NoReturn:
        raise InputFileError(message, path=self.path, line=self.line_of(key))


def _probability(document: Document, value: Any, key: str) -> Any:
    try:
        return as_probability(value)
    except (TypeError, ValueError, ZeroDivisionError):
        document.fail(f'{value!r} is not a number', key)


def parse_prior(document: Document, data: Any) -> Prior:
    if not isinstance(data, dict) or 'p1' not in data:
        document.fail('"prior" needs "p1"', 'prior')
    p1 = _probability(document, data['p1'], 'p1')
    p2 = _probability(document, data.get('p2', 1 - p1), 'p2')
    try:
        return Prior(p1, p2)
    except ModelError as error:
        document.fail(str(error), 'prior')


def parse_model(document: Document) -> Tuple[ObservationModel, Prior]:
    '''Parse a model file into a validated model and its prior.

    The prior defaults to (1/2, 1/2) when the file has none.
    '''
    data = document.load()
    if not isinstance(data, dict):
        document.fail('a model file holds a JSON object')
    prior = parse_prior(document, data['prior']) if 'prior' in data else Prior.equal()

    model: ObservationModel
    if 'finite' in data:
        finite = data['finite']
        if not isinstance(finite, dict) or not {'alphabet', 'pmf1', 'pmf2'} <= finite.keys():
            document.fail('"finite" needs "alphabet", "pmf1" and "pmf2"', 'finite')
        alphabet = finite['alphabet']
        if not isinstance(alphabet, list):
            document.fail('"alphabet" must be a list', 'alphabet')
        pmfs = []
        for key in ('pmf1', 'pmf2'):
            if not isinstance(finite[key], list):
                document.fail(f'"{key}" must be a list', key)
            pmfs.append(tuple(_probability(document, mass, key) for mass in finite[key]))
        try:
            model = FiniteObservationModel(tuple(alphabet), pmfs[0], pmfs[1])
        except (ModelError, TypeError) as error:
            document.fail(str(error), 'finite')
    elif 'gaussian' in data:
        gaussian = data['gaussian']
        if not isinstance(gaussian, dict) or not {'mean1', 'mean2', 'sigma'} <= gaussian.keys():
            document.fail('"gaussian" needs "mean1", "mean2" and "sigma"', 'gaussian')
        try:
            model = GaussianShiftModel(
                float(gaussian['mean1']),
                float(gaussian['mean2']),
                float(gaussian['sigma']),
            )
        except (ModelError, TypeError, ValueError) as error:
            document.fail(str(error), 'gaussian')
    else:
        document.fail('a model file needs a "finite" or a "gaussian" section')

    try:
        report = validate_model(model)
    except ModelError as error:
        document.fail(str(error), 'pmf1')
    for violation in report.violations:
        logger.warning('%s: %s', document.path, violation)
    return model, prior


def parse_kernel(document: Document,
                 data: Any,
                 model: ObservationModel,
                 num_actions: int | None = None,
                 ) -> SensorKernel:
    'One sensor policy: {"threshold": {...}} or {"kernel": [[...], ...]}.'
    if not isinstance(data, dict):
        document.fail('a policy is a JSON object with "threshold" or "kernel"')
    try:
        if 'threshold' in data:
            threshold = data['threshold']
            if not isinstance(threshold, dict) or not {'thresholds', 'labels'} <= threshold.keys():
                document.fail('"threshold" needs "thresholds" and "labels"', 'threshold')
            policy = ThresholdPolicy(
                tuple(_probability(document, t, 'thresholds') for t in threshold['thresholds']),
                tuple(int(label) for label in threshold['labels']),
            )
            return compile_threshold(policy, model, num_actions)
        if 'kernel' in data:
            if not isinstance(model, FiniteObservationModel):
                document.fail('a "kernel" policy needs a finite model', 'kernel')
            rows = data['kernel']
            if not isinstance(rows, list) or len(rows) != len(model.alphabet):
                document.fail('"kernel" needs one row per alphabet symbol', 'kernel')
            return StochasticKernel(
                tuple(tuple(_probability(document, p, 'kernel') for p in row) for row in rows),
                num_actions or 0,
            )
    except (PolicyError, TypeError, ValueError) as error:
        document.fail(str(error), 'threshold' if 'threshold' in data else 'kernel')
    document.fail('a policy needs a "threshold" or a "kernel" section')


def _team(document: Document, data: Any, model: ObservationModel) -> TeamPolicy:
    if not isinstance(data, list) or not data:
        document.fail('a team is a nonempty list of policies', 'team')
    kernels = [parse_kernel(document, entry, model) for entry in data]
    num_actions = max(kernel.num_actions for kernel in kernels)
    if any(kernel.num_actions != num_actions for kernel in kernels):
        kernels = [parse_kernel(document, entry, model, num_actions) for entry in data]
    try:
        return TeamPolicy(tuple(kernels))
    except PolicyError as error:
        document.fail(str(error))


def parse_team(document: Document, model: ObservationModel) -> TeamPolicy:
    'A team file is a list of policies, one per sensor.'
    return _team(document, document.load(), model)


def parse_mixture(document: Document, model: ObservationModel) -> TeamMixture:
    'A mixture file is a list of {"weight": ..., "team": [...]} entries.'
    data = document.load()
    if not isinstance(data, list) or not data:
        document.fail('a mixture is a nonempty list of weighted teams')
    support: List[Tuple[Any, TeamPolicy]] = []
    for entry in data:
        if not isinstance(entry, dict) or not {'weight', 'team'} <= entry.keys():
            document.fail('every mixture entry needs "weight" and "team"', 'weight')
        weight = _probability(document, entry['weight'], 'weight')
        support.append((weight, _team(document, entry['team'], model)))
    try:
        return TeamMixture(tuple(support))
    except PolicyError as error:
        document.fail(str(error), 'weight')


def load_model(path: str | pathlib.Path) -> Tuple[ObservationModel, Prior]:
    return parse_model(Document.read(path))


def load_policy(path: str | pathlib.Path, model: ObservationModel) -> SensorKernel:
    document = Document.read(path)
    return parse_kernel(document, document.load(), model)


def load_team(path: str | pathlib.Path, model: ObservationModel) -> TeamPolicy:
    return parse_team(Document.read(path), model)


def load_mixture(path: str | pathlib.Path, model: ObservationModel) -> TeamMixture:
    return parse_mixture(Document.read(path), model)


def dump_kernel(kernel: SensorKernel) -> Dict[str, Any]:
    'Inverse of parse_kernel: the JSON object for one policy.'
    data = kernel.to_dict()
    if 'threshold' in data:
        return {'threshold': data['threshold']}
    return data
