"""
Command line interface.

Subcommands: ``estimate`` fits a series file, ``simulate`` writes a
synthetic series, ``wv`` tabulates the empirical wavelet variance and
``benchmark`` runs the Monte Carlo harness. Exit codes are 0 on success,
1 for usage errors, 2 for data errors and 3 for numerical failures.
"""

import argparse
import json
import logging
import os
import sys

from . import __version__
from . import missingness, simulation
from .config import FitConfig, worker_count
from .errors import DataError, NumericalError, UsageError
from .estimator import ANNUAL, SEMIANNUAL, TrajectoryModel, build_design, \
    least_squares_missing, one_step_gmwmx
from .noise import NoiseModel
from .series import read_mom, write_fit, write_mom
from .wavelet import default_scales, empirical_wv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

TRAJECTORY_TERMS = {'trend', 'annual', 'semiannual', 'none'}


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports problems as :class:`.errors.UsageError`."""
    def error(self, message):
        raise UsageError(message)


def parse_trajectory(text, offsets=()):
    """TrajectoryModel from a list such as ``trend,annual,semiannual``."""
    terms = [t.strip().lower() for t in text.split(',') if t.strip()]
    unknown = set(terms) - TRAJECTORY_TERMS
    if unknown:
        raise UsageError('Unknown trajectory term(s): {0}'.format(', '.join(sorted(unknown))))
    frequencies = []
    if 'annual' in terms:
        frequencies.append(ANNUAL)
    if 'semiannual' in terms:
        frequencies.append(SEMIANNUAL)
    return TrajectoryModel(include_trend='trend' in terms,
                           seasonal_frequencies=tuple(frequencies),
                           offset_epochs=tuple(offsets))


def parse_scales(text):
    if text is None or text == 'auto':
        return None
    try:
        value = int(text)
    except ValueError:
        raise UsageError('--scales takes an integer or "auto", got {0!r}'.format(text))
    if value < 1:
        raise UsageError('--scales must be positive')
    return value


def _config(args, **extra):
    try:
        return FitConfig(scales=parse_scales(args.scales), **extra)
    except ValueError as e:
        raise UsageError(str(e))


def _jobs():
    try:
        return worker_count(-1)
    except ValueError as e:
        raise UsageError(str(e))


def cmd_estimate(args):
    template = NoiseModel.parse(args.noise)
    config = _config(args, correction=args.correction, ci_level=args.ci,
                     long_memory=args.long_memory, seed=args.seed)
    ts = read_mom(args.input)
    offsets = [] if args.no_offsets else ts.offsets
    traj = parse_trajectory(args.trajectory, offsets)
    fit = one_step_gmwmx(ts, traj, template, config, strict=args.strict)
    write_fit(args.output, fit, config, include_timings=not args.no_timings)
    logger.info('Wrote %s', args.output)
    return EXIT_OK


def cmd_simulate(args):
    if args.setting.lower() == 'custom':
        if args.noise is None:
            raise UsageError('--setting custom needs --noise')
        spec = simulation.SettingSpec('custom', NoiseModel.parse(args.noise),
                                      missingness.TABLE_SETTINGS[args.missing or 1],
                                      args.n or 3650, 1, seed=args.seed)
    else:
        spec = simulation.preset(args.setting, args.n, args.missing, 1, args.seed)
    ts = simulation.simulate_replicate(spec, 0)
    write_mom(args.output, ts)
    logger.info('Wrote %d epochs of %s to %s', ts.n, spec.name, args.output)
    return EXIT_OK


def cmd_wv(args):
    ts = read_mom(args.input)
    traj = parse_trajectory(args.trajectory, ts.offsets)
    X = build_design(ts.epochs, traj)
    _, residuals = least_squares_missing(X, ts.values, ts.mask)
    J = parse_scales(args.scales) or default_scales(ts.n)
    frame = empirical_wv(residuals, J).to_frame()
    frame.to_csv(args.output, index=False, float_format='%.17g')
    logger.info('Wrote %d scales to %s', J, args.output)
    return EXIT_OK


def cmd_benchmark(args):
    config = _config(args, correction=args.correction, seed=args.seed)
    if args.grid:
        specs = simulation.preset_grid(args.setting, args.reps, args.seed)
    else:
        specs = [simulation.preset(args.setting, args.n, args.missing, args.reps, args.seed)]
    jobs = args.jobs if args.jobs is not None else _jobs()
    reports, table = simulation.run_grid(specs, config, jobs)
    os.makedirs(args.output, exist_ok=True)
    for report in reports:
        base = os.path.join(args.output, report.setting)
        report.table.to_csv(base + '.csv', index=False, float_format='%.17g')
        with open(base + '.json', 'w') as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write('\n')
    table.to_csv(os.path.join(args.output, 'summary.csv'), index=False, float_format='%.17g')
    logger.info('Wrote %d report(s) to %s', len(reports), args.output)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog='gmwmx', description='Trajectory and noise estimation with GMWMX')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='store_true', help='debug output')
    parser.add_argument('-q', '--quiet', action='store_true', help='warnings only')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('estimate', help='fit a series file')
    p.add_argument('--input', required=True)
    p.add_argument('--noise', required=True, help='e.g. wn+pl or wn(10)+pl(6,0.9)')
    p.add_argument('--trajectory', default='trend,annual,semiannual')
    p.add_argument('--scales', default='auto')
    p.add_argument('--ci', type=float, default=0.95)
    p.add_argument('--correction', choices=('residual', 'none'), default='residual')
    p.add_argument('--long-memory', action='store_true',
                   help='intervals from the simulated long-memory limit')
    p.add_argument('--no-offsets', action='store_true', help='ignore offset headers')
    p.add_argument('--strict', action='store_true', help='fail if the optimizer does not converge')
    p.add_argument('--no-timings', action='store_true', help='omit stage timings from the report')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--output', required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser('simulate', help='write a synthetic series')
    p.add_argument('--setting', required=True, help='A1, A2, B1, B2, C1, C2 or custom')
    p.add_argument('--noise', help='noise model of a custom setting')
    p.add_argument('--n', type=int)
    p.add_argument('--missing', type=int, help='missingness setting 1..6')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--output', required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('wv', help='empirical wavelet variance of the residuals')
    p.add_argument('--input', required=True)
    p.add_argument('--trajectory', default='trend,annual,semiannual')
    p.add_argument('--scales', default='auto')
    p.add_argument('--output', required=True)
    p.set_defaults(func=cmd_wv)

    p = sub.add_parser('benchmark', help='Monte Carlo metrics of a setting')
    p.add_argument('--setting', required=True)
    p.add_argument('--n', type=int)
    p.add_argument('--missing', type=int)
    p.add_argument('--grid', action='store_true', help='every length and missingness of the preset')
    p.add_argument('--reps', type=int, default=500)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--scales', default='auto')
    p.add_argument('--correction', choices=('residual', 'none'), default='residual')
    p.add_argument('--jobs', type=int)
    p.add_argument('--output', required=True)
    p.set_defaults(func=cmd_benchmark)
    return parser


def _configure_logging(args):
    level = logging.INFO
    if getattr(args, 'verbose', False):
        level = logging.DEBUG
    elif getattr(args, 'quiet', False):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s - %(levelname)s - %(message)s')


def main(argv=None):
    """Runs the command line and returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args)
        return args.func(args)
    except UsageError as e:
        print('gmwmx: usage error: {0}'.format(e), file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as e:
        print('gmwmx: data error: {0}'.format(e), file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        print('gmwmx: numerical failure: {0}'.format(e), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
