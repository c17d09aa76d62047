import logging
import sys
from argparse import Namespace
from pathlib import Path
from typing import Callable, Sequence

from dotenv import load_dotenv

from .args import parse_args
from .config import SETTINGS, RunConfig, resolve_seed
from .core.convert import comm_to_curve, convert_comm, verify_equal
from .core.dualspace import build_dual_basis
from .core.errors import InvalidParameterError, RoabpError
from .core.roabp import (
    CommRoabp,
    Roabp,
    all_orders,
    construct_esym_comm,
    construct_esym_diag,
    construct_power_comm,
    construct_power_diag,
    construct_random_comm,
    expand,
    nisan_profiles,
    profiles_frame,
    roabp_to_comm,
)
from .core.waring import catalecticant_lower_bound, dpd
from .exporters.json_codec import load_document, write_document
from .exporters.reports import (
    AnalyzeReport,
    conversion_report_model,
    profile_entries,
    ring_report,
    verification_model,
)

load_dotenv()
logging.basicConfig(
    level=logging.INFO, format='[%(asctime)s] %(message)s', datefmt='%H:%M:%S'
)
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


def _run_config(args: Namespace) -> RunConfig:
    inputs = args.input if isinstance(getattr(args, 'input', None), list) else [getattr(args, 'input', None)]
    return RunConfig(
        command=args.command,
        input_paths=[p for p in inputs if p is not None],
        output_path=args.out,
        seed=resolve_seed(getattr(args, 'seed', None), SETTINGS),
        tol=getattr(args, 'tol', SETTINGS.run.tol),
        trials=getattr(args, 'trials', SETTINGS.run.trials),
        verify_tol=getattr(args, 'verify_tol', SETTINGS.convert.verify_tol),
        guards=SETTINGS.guards,
    )


def _output_path(config: RunConfig, default_name: str) -> Path:
    return config.output_path or SETTINGS.output.dir / default_name


def _load_comm(path: Path) -> CommRoabp:
    obj = load_document(path)
    if isinstance(obj, Roabp):
        obj = roabp_to_comm(obj)
    if not isinstance(obj, CommRoabp):
        raise InvalidParameterError(f'{path} does not hold a commutative ROABP.')
    return obj


def cmd_construct(args: Namespace) -> int:
    config = _run_config(args)
    family, n, d, variant = args.family, args.n, args.d, args.variant
    match family, variant:
        case 'esym', 'comm':
            obj = construct_esym_comm(n, d)
        case 'esym', 'diag':
            obj = construct_esym_diag(n, d)
        case 'power', 'comm':
            obj = construct_power_comm(n, d)
        case 'power', 'diag':
            obj = construct_power_diag(n, d)
        case 'random', 'comm':
            obj = construct_random_comm(n, d, args.width, config.seed, jordan=args.jordan)
        case _:
            raise InvalidParameterError(f'No {variant} variant of the {family} family.')

    out = _output_path(config, f'{family}_{n}_{d}_{variant}.json')
    write_document(obj, out)
    logger.info('%s %s ROABP: n = %d, d = %d, width %d', family, variant, n, d, obj.w)
    return EXIT_OK


def cmd_analyze(args: Namespace) -> int:
    config = _run_config(args)
    obj = load_document(args.input)
    f = expand(obj, max_terms=config.guards.max_expand_terms)

    if args.orders == 'all':
        orders = all_orders(f.nvars, config.guards.max_order_vars)
    elif args.order is not None:
        orders = [args.order]
    elif isinstance(obj, Roabp):
        orders = [obj.order]
    else:
        orders = [tuple(range(f.nvars))]

    profiles = nisan_profiles(f, orders)
    frame = profiles_frame(profiles)
    smallest = frame.loc[frame['width'].idxmin()]
    largest = frame.loc[frame['width'].idxmax()]
    logger.info(
        'Width over %d orders: min %d at %s, max %d at %s',
        len(frame), smallest['width'], smallest['order'], largest['width'], largest['order'],
    )

    report = AnalyzeReport(
        source_kind=type(obj).__name__,
        n=f.nvars,
        degree=f.degree(),
        individual_degrees=list(f.individual_degrees()),
        term_count=len(f.terms),
        dpd=dpd(f, max_rows=config.guards.max_dpd_rows),
        catalecticant_lower_bound=catalecticant_lower_bound(f),
        profiles=profile_entries(profiles),
        min_width=int(smallest['width']),
        min_width_order=list(smallest['order']),
        max_width=int(largest['width']),
        max_width_order=list(largest['order']),
    )
    report.write(_output_path(config, f'{args.input.stem}.analyze.json'))
    logger.info('DPD %s, lower bound on the powering size %s', report.dpd, report.catalecticant_lower_bound)
    return EXIT_OK


def cmd_ring(args: Namespace) -> int:
    config = _run_config(args)
    cr = _load_comm(args.input)
    ring, _ = comm_to_curve(cr)
    db = build_dual_basis(ring, tol=config.tol, seed=config.seed)
    report = ring_report(ring, db)
    report.write(_output_path(config, f'{args.input.stem}.ring.json'))
    logger.info('Normal set of %d monomials, %d variety points, local dimensions %s', ring.m, len(db.spaces), report.local_dims)
    return EXIT_OK


def cmd_convert(args: Namespace) -> int:
    config = _run_config(args)
    cr = _load_comm(args.input)
    dr, report = convert_comm(
        cr,
        tol=config.tol,
        seed=config.seed,
        trials=config.trials,
        verify_tol=config.verify_tol,
        rationalize=args.rationalize or SETTINGS.convert.rationalize,
    )
    out = _output_path(config, f'{args.input.stem}.diag.json')
    write_document(dr, out)
    conversion_report_model(report).write(out.with_suffix('.report.json'))

    if not report.verification.passed:
        logger.error(
            'Converted ROABP disagrees with the input: residual %.3e > %.1e',
            report.verification.max_residual, config.verify_tol,
        )
        return EXIT_FAILED
    logger.info('Width %d → %d, residual %.3e', report.input_width, report.output_width, report.verification.max_residual)
    return EXIT_OK


def cmd_verify(args: Namespace) -> int:
    config = _run_config(args)
    first, second = (load_document(p) for p in config.input_paths)
    result = verify_equal(first, second, trials=config.trials, seed=config.seed, tol=config.tol)
    if config.output_path is not None:
        verification_model(result).write(config.output_path)
    if not result.passed:
        logger.error('Not equal: residual %.3e > %.1e', result.max_residual, result.tol)
        return EXIT_FAILED
    logger.info('Equal on %d random points (residual %.3e)', result.trials, result.max_residual)
    return EXIT_OK


COMMANDS: dict[str, Callable[[Namespace], int]] = {
    'construct': cmd_construct,
    'analyze': cmd_analyze,
    'ring': cmd_ring,
    'convert': cmd_convert,
    'verify': cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        # covers JSON decode and pydantic validation errors and the input-class RoabpErrors
        logger.error('%s', e)
        return EXIT_INPUT
    except RoabpError as e:
        logger.error('%s: %s', type(e).__name__, e)
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
