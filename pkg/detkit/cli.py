# --------------------------------------------------------------------------- #
#   cli.py                                                                    #
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
'''Command-line interface.

    detkit evaluate --model M --team T [--samples S --seed X]
    detkit evaluate --model M --mixture X --info known|bayes
    detkit exponent --model M [--policy P [--grid K] | --team T]
    detkit sweep    --model M --spec all-B --N 2,4,8,16
    detkit design   --model M --N 2 [--method exhaustive|two-group|descent]
    detkit example1 [--prior P1]

Reports go to stdout as JSON (default) or CSV.  Exit status is 0 on
success, 2 for bad input, 3 when an exact computation is over its cap and 4
when example1 finds a value off its expectation.
'''


from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import pathlib
import sys
from fractions import Fraction
from typing import Any
from typing import Dict
from typing import Final
from typing import List
from typing import Sequence
from typing import TextIO
from typing import cast

from .catalog import example_rows
from .catalog import named_threshold_kernels
from .evaluate import RiskReport
from .evaluate import TeamSpec
from .evaluate import exact_risk
from .evaluate import mc_risk
from .evaluate import mixture_risk
from .evaluate import sweep_n
from .exceptions import DetkitError
from .exceptions import EnumerationCapExceeded
from .exponent import chernoff_exponent
from .exponent import exponent_lower_bound
from .fusion import FusionInfo
from .fusion import MapRule
from .loaders import dump_kernel
from .loaders import load_mixture
from .loaders import load_model
from .loaders import load_policy
from .loaders import load_team
from .models import FiniteObservationModel
from .models import ObservationModel
from .models import Prior
from .monkey import format_number
from .monkey import logger
from .optimize import best_symmetric_exponent
from .optimize import best_team_exhaustive
from .optimize import best_two_group
from .optimize import coordinate_descent
from .optimize import threshold_kernels
from .policies import SensorKernel
from .policies import TeamPolicy
from .policies import ThresholdPolicy
from .policies import compile_threshold


EXIT_OK: Final[int] = 0
EXIT_INPUT: Final[int] = 2
EXIT_CAP: Final[int] = 3
EXIT_MISMATCH: Final[int] = 4

RISK_COLUMNS: Final[Sequence[str]] = ('N', 'risk', 'err1', 'err2', 'exponent', 'stderr')
HANDLER_NAME: Final[str] = 'detkit-cli'


def _workers_default() -> int:
    try:
        return max(int(os.environ.get('DETKIT_WORKERS', '1')), 1)
    except ValueError:
        return 1


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f'{text} is not an int >= 1')
    return value


def _n_values(text: str) -> List[int]:
    try:
        values = [int(item) for item in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f'{text!r} is not a comma separated list of ints') from None
    if any(value < 1 for value in values):
        raise argparse.ArgumentTypeError('N must be >= 1')
    return values


def _named_policy(text: str) -> List[str]:
    name, sep, path = text.partition('=')
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f'{text!r} is not NAME=PATH')
    return [name, path]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='detkit',
        description='Decentralized binary detection: risks, exponents and designs.',
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--prior', metavar='P1', help='override P(H1), e.g. 0.6 or 3/5')
    common.add_argument('--format', choices=('json', 'csv'), default='json')
    common.add_argument('--workers', type=_positive, default=_workers_default(),
                        help='worker threads (default: $DETKIT_WORKERS or 1)')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v for info, -vv for debug logs')
    commands = parser.add_subparsers(dest='command', required=True)

    evaluate = commands.add_parser(
        'evaluate', parents=[common],
        help='Bayes risk of a team or mixture',
        description=f'Fields: {", ".join(RISK_COLUMNS)}, method, samples.',
    )
    evaluate.add_argument('--model', required=True, metavar='PATH')
    policy = evaluate.add_mutually_exclusive_group(required=True)
    policy.add_argument('--team', metavar='PATH')
    policy.add_argument('--mixture', metavar='PATH')
    evaluate.add_argument('--info', choices=('known', 'bayes'), default='known')
    evaluate.add_argument('--samples', type=_positive, help='estimate by Monte Carlo instead')
    evaluate.add_argument('--seed', type=int, default=0)

    exponent = commands.add_parser(
        'exponent', parents=[common],
        help='Chernoff exponent of a policy, or the best symmetric one',
        description='Fields: s_star, value, grid (with --grid); with --team: lower_bound, kappa, void.',
    )
    exponent.add_argument('--model', required=True, metavar='PATH')
    source = exponent.add_mutually_exclusive_group()
    source.add_argument('--policy', metavar='PATH')
    source.add_argument('--team', metavar='PATH', help='lower bound on the exponent of a team')
    exponent.add_argument('--grid', type=int, default=0, metavar='K', help='also emit the objective on K points')
    exponent.add_argument('--actions', type=_positive, default=2, metavar='U')

    sweep = commands.add_parser(
        'sweep', parents=[common],
        help='exponent of a team recipe for growing N',
        description=f'Fields: {", ".join(RISK_COLUMNS)}, reference, gap.',
    )
    sweep.add_argument('--model', required=True, metavar='PATH')
    sweep.add_argument('--spec', required=True, help='all-X, half-X-Y or X:share,...,Z')
    sweep.add_argument('--N', dest='n_values', type=_n_values, required=True, metavar='N1,N2,...')
    sweep.add_argument('--policy', type=_named_policy, action='append', default=[], metavar='NAME=PATH',
                       help='name a policy file for --spec (finite models also know const, A, B, ...)')
    sweep.add_argument('--actions', type=_positive, default=2, metavar='U')
    sweep.add_argument('--samples', type=_positive, default=10**6)
    sweep.add_argument('--seed', type=int, default=0)

    design = commands.add_parser(
        'design', parents=[common],
        help='search for the best team',
        description='Fields: method, objective, candidates, globally_optimal, converged, policy.',
    )
    design.add_argument('--model', required=True, metavar='PATH')
    design.add_argument('--N', dest='num_sensors', type=_positive, required=True)
    design.add_argument('--actions', type=_positive, default=2, metavar='U')
    design.add_argument('--method', choices=('exhaustive', 'two-group', 'descent'), default='exhaustive')
    design.add_argument('--output', metavar='PATH', help='write the winning team file here')

    example1 = commands.add_parser(
        'example1', parents=[common],
        help='reproduce the two-sensor example and check every value',
        description='Fields: name, value, decimal, expected, status.',
    )
    return parser


def configure_logging(verbosity: int) -> None:
    'Send detkit logs to stderr; repeated calls reuse one handler.'
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    for handler in logger.handlers:
        if handler.get_name() == HANDLER_NAME:
            cast(logging.StreamHandler, handler).setStream(sys.stderr)
            break
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.set_name(HANDLER_NAME)
        handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
        logger.addHandler(handler)
    logger.setLevel(level)


def _prior(args: argparse.Namespace, default: Prior) -> Prior:
    return default if args.prior is None else Prior.from_p1(args.prior)


def _emit(data: Dict[str, Any], out: TextIO) -> None:
    out.write(json.dumps(data, indent=2) + '\n')


def _emit_rows(header: Sequence[str], rows: Sequence[Sequence[str]], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)


def cmd_evaluate(args: argparse.Namespace, out: TextIO) -> int:
    model, prior = load_model(args.model)
    prior = _prior(args, prior)
    info = FusionInfo(args.info)
    report: RiskReport
    if args.team is not None:
        team = load_team(args.team, model)
        if args.samples:
            report = mc_risk(team, MapRule(), model, prior, args.samples, args.seed, args.workers)
        else:
            report = exact_risk(team, MapRule(), model, prior, workers=args.workers)
    else:
        mixture = load_mixture(args.mixture, model)
        if args.samples:
            report = mc_risk(mixture, MapRule(), model, prior, args.samples, args.seed, args.workers, info)
        else:
            report = mixture_risk(mixture, info, model, prior, workers=args.workers)
    if args.format == 'csv':
        _emit_rows(RISK_COLUMNS, [report.to_row()], out)
    else:
        _emit(report.to_dict(), out)
    return EXIT_OK


def cmd_exponent(args: argparse.Namespace, out: TextIO) -> int:
    model, prior = load_model(args.model)
    prior = _prior(args, prior)
    if args.team is not None:
        bound = exponent_lower_bound(load_team(args.team, model), model, prior)
        data = bound.to_dict()
    elif args.policy is not None:
        result = chernoff_exponent(load_policy(args.policy, model), model, trace_points=args.grid)
        data = result.to_dict()
    else:
        design = best_symmetric_exponent(model, args.actions)
        data = design.to_dict()
    if args.format == 'csv':
        _emit_rows(list(data), [[_cell(value) for value in data.values()]], out)
    else:
        _emit(data, out)
    return EXIT_OK


def _cell(value: Any) -> str:
    if isinstance(value, (Fraction, float, int)) and not isinstance(value, bool):
        return format_number(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return str(value)


def _kernels(args: argparse.Namespace, model: ObservationModel) -> Dict[str, SensorKernel]:
    kernels: Dict[str, SensorKernel] = {}
    if isinstance(model, FiniteObservationModel):
        kernels.update(named_threshold_kernels(model, args.actions))
    for name, path in args.policy:
        kernels[name] = load_policy(path, model)
    return kernels


def cmd_sweep(args: argparse.Namespace, out: TextIO) -> int:
    model, prior = load_model(args.model)
    prior = _prior(args, prior)
    spec = TeamSpec.parse(args.spec)
    reference = float(best_symmetric_exponent(model, args.actions).objective)
    result = sweep_n(
        spec,
        _kernels(args, model),
        model,
        prior,
        args.n_values,
        reference,
        samples=args.samples,
        seed=args.seed,
        workers=args.workers,
    )
    if args.format == 'csv':
        _emit_rows(
            (*RISK_COLUMNS, 'reference', 'gap'),
            [
                [*row.report.to_row(), _cell(row.reference), '' if row.gap is None else _cell(row.gap)]
                for row in result.rows
            ],
            out,
        )
    else:
        _emit(result.to_dict(), out)
    return EXIT_OK


def _initial_team(model: ObservationModel, num_sensors: int, num_actions: int) -> TeamPolicy:
    'Every sensor starts on the first informative threshold policy.'
    kernel: SensorKernel
    if isinstance(model, FiniteObservationModel):
        kernels = threshold_kernels(model, num_actions)
        kernel = kernels[min(1, len(kernels) - 1)]
    else:
        policy = ThresholdPolicy(tuple(Fraction(k) for k in range(1, num_actions)), tuple(range(1, num_actions + 1)))
        kernel = compile_threshold(policy, model, num_actions)
    return TeamPolicy((kernel,) * num_sensors)


def cmd_design(args: argparse.Namespace, out: TextIO) -> int:
    model, prior = load_model(args.model)
    prior = _prior(args, prior)
    if args.method == 'descent' or not isinstance(model, FiniteObservationModel):
        result = coordinate_descent(_initial_team(model, args.num_sensors, args.actions), model, prior)
    elif args.method == 'two-group':
        result = best_two_group(model, args.num_sensors, args.actions, prior, workers=args.workers)
    else:
        result = best_team_exhaustive(model, args.num_sensors, args.actions, prior, workers=args.workers)
    team = result.policy
    if args.output is not None:
        kernels = list(team) if isinstance(team, TeamPolicy) else [team]
        text = json.dumps([dump_kernel(kernel) for kernel in kernels], indent=2) + '\n'
        pathlib.Path(args.output).write_text(text, encoding='utf-8')
        logger.info('Wrote the winning team to %s', args.output)
    data = result.to_dict()
    if args.format == 'csv':
        header = ('method', 'objective', 'candidates', 'globally_optimal', 'converged')
        _emit_rows(header, [[_cell(data[key]) for key in header]], out)
    else:
        _emit(data, out)
    return EXIT_OK


def cmd_example1(args: argparse.Namespace, out: TextIO) -> int:
    prior = None if args.prior is None else Prior.from_p1(args.prior)
    rows = example_rows(prior)
    if args.format == 'csv':
        header = ('name', 'value', 'decimal', 'expected', 'status')
        _emit_rows(header, [[row.to_dict()[key] for key in header] for row in rows], out)
    else:
        _emit({'rows': [row.to_dict() for row in rows]}, out)
    failed = [row.name for row in rows if row.status == 'FAIL']
    for name in failed:
        logger.error('Example value off its expectation: %s', name)
    return EXIT_MISMATCH if failed else EXIT_OK


COMMANDS: Final = {
    'evaluate': cmd_evaluate,
    'exponent': cmd_exponent,
    'sweep': cmd_sweep,
    'design': cmd_design,
    'example1': cmd_example1,
}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    out = out or sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except EnumerationCapExceeded as error:
        sys.stderr.write(f'detkit: {error}; rerun with --samples to estimate instead\n')
        return EXIT_CAP
    except (DetkitError, ValueError) as error:
        sys.stderr.write(f'detkit: {error}\n')
        return EXIT_INPUT


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
