import argparse
from pathlib import Path
from typing import Sequence

from .config import SETTINGS


def _order(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'Expected comma-separated variable indices, got {text!r}')


def _add_run_flags(parser: argparse.ArgumentParser, verify_tol: bool = False):
    parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help=f'RNG seed (falls back to $SROABP_SEED, then {SETTINGS.run.seed}).',
    )
    parser.add_argument(
        '--tol', type=float, default=SETTINGS.run.tol, help='Numeric tolerance.'
    )
    parser.add_argument(
        '--trials',
        type=int,
        default=SETTINGS.run.trials,
        help='Random points used by the equality check.',
    )
    if verify_tol:
        parser.add_argument(
            '--verify-tol',
            type=float,
            default=SETTINGS.convert.verify_tol,
            help='Relative residual allowed between input and output.',
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='sroabp',
        description='Build, analyze and convert read-once oblivious algebraic branching programs.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument('--verbose', action='store_true', help='Log debug details.')
    commands = parser.add_subparsers(dest='command', required=True)

    construct = commands.add_parser(
        'construct',
        help='Write one of the standard constructions.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    construct.add_argument('family', choices=['esym', 'power', 'random'])
    construct.add_argument('n', type=int, help='Number of variables.')
    construct.add_argument('d', type=int, help='Degree (individual degree for random).')
    construct.add_argument('variant', nargs='?', choices=['comm', 'diag'], default='comm')
    construct.add_argument('--width', type=int, default=3, help='Width of a random family.')
    construct.add_argument('--jordan', action='store_true', help='Random family with a Jordan block.')
    construct.add_argument('--seed', type=int, default=None, help='Seed of a random family.')
    construct.add_argument('--out', type=Path, default=None, help='Output JSON path.')

    analyze = commands.add_parser(
        'analyze',
        help='Nisan profiles and partial-derivative dimension of a polynomial or ROABP.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    analyze.add_argument('--in', dest='input', type=Path, required=True, help='Input JSON path.')
    analyze.add_argument('--orders', choices=['given', 'all'], default='given')
    analyze.add_argument(
        '--order', type=_order, default=None, help='Comma-separated variable order for --orders given.'
    )
    analyze.add_argument('--out', type=Path, default=None, help='Report JSON path.')

    ring = commands.add_parser(
        'ring',
        help='Normal set, border basis, variety and dual spaces of a commutative ROABP.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    ring.add_argument('--in', dest='input', type=Path, required=True, help='CommRoabp JSON path.')
    ring.add_argument('--out', type=Path, default=None, help='Report JSON path.')
    _add_run_flags(ring)

    convert = commands.add_parser(
        'convert',
        help='Convert a commutative ROABP into a diagonal one and verify the result.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    convert.add_argument('--in', dest='input', type=Path, required=True, help='CommRoabp JSON path.')
    convert.add_argument('--out', type=Path, default=None, help='DiagRoabp JSON path.')
    convert.add_argument(
        '--rationalize', action='store_true', help='Round output coefficients to nearby rationals.'
    )
    _add_run_flags(convert, verify_tol=True)

    verify = commands.add_parser(
        'verify',
        help='Randomized equality check of two polynomials or ROABPs.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    verify.add_argument(
        '--in', dest='input', type=Path, nargs=2, required=True, metavar=('A', 'B'), help='Two JSON paths.'
    )
    verify.add_argument('--out', type=Path, default=None, help='Report JSON path.')
    _add_run_flags(verify)

    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)
