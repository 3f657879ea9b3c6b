"""
The helmpy command line interface.

Usage::

    helmpy run [config.nml] [--case 1d_bump] [--omega 10pi] ...
    helmpy run --case 1d_bump --sweep omega=10pi,20pi,40pi --threads 3
    helmpy check --seed 1

Exit codes: 0 success, 2 invalid configuration, 3 run aborted.
"""
import argparse
import logging
import sys

from helmpy import __version__
from helmpy.utils import ConfigError, MeshError, RunAbort, run_parallel


log = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_ABORT = 3


def _sweep(value):
    key, _, values = value.partition('=')
    if key != 'omega' or not values:
        raise argparse.ArgumentTypeError(
            'Sweeps are given as omega=<value>,<value>,... not %r.' % value)
    return values.split(',')


def _levels(value):
    return value.split(',')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='helmpy', description='Adaptive time domain Helmholtz solver.')
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command')

    run = sub.add_parser('run', help='Run a case and write its results.')
    run.add_argument('config', nargs='?', help='Namelist configuration file.')
    run.add_argument('--case', help='Named case, e.g. 1d_bump or 2d_point.')
    run.add_argument('--omega', help='Angular frequency, e.g. 10pi or 31.4.')
    run.add_argument('--levels', type=_levels,
                     help='Comma separated mesh widths, e.g. 1/5,1/50.')
    run.add_argument('--degree', type=int)
    run.add_argument('--t-up', type=float, dest='t_up',
                     help='Mesh update interval.')
    run.add_argument('--eta0', type=float, help='Projection error threshold.')
    run.add_argument('--eps0', type=float, help='Stopping threshold.')
    run.add_argument('--cfl', type=float, help='CFL number.')
    run.add_argument('--uniform-baseline', action='store_const', const=True,
                     dest='uniform_baseline',
                     help='Also run the uniform finest mesh solver.')
    run.add_argument('--no-reference', action='store_const', const=False,
                     dest='reference', help='Skip the h_K/2 reference.')
    run.add_argument('--decomposition', action='store_const', const=True,
                     help='1D error decomposition table.')
    run.add_argument('--level-maps', action='store_const', const=True,
                     dest='level_maps', help='Write mesh level rasters.')
    run.add_argument('--sweep', type=_sweep,
                     help='Frequency sweep, omega=10pi,20pi,40pi.')
    run.add_argument('--out-dir', dest='out_dir')
    run.add_argument('--threads', type=int,
                     help='Worker processes of a sweep.')

    check = sub.add_parser('check', help='Run the randomised property checks.')
    check.add_argument('--seed', type=int, default=0)
    check.add_argument('--test', default='all',
                       help='Only run one check class.')

    for p in (run, check):
        p.add_argument('-v', '--verbose', action='store_true')
        p.add_argument('-q', '--quiet', action='store_true')
    return parser


def configure_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else (
        logging.WARNING if quiet else logging.INFO)
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    return


def run(args):
    """Resolve the configuration, run the case(s) and write the results."""
    from helmpy.config import resolve_config
    from helmpy.driver import run_case
    from helmpy.output import write_results
    overrides = {k: getattr(args, k, None) for k in (
        'case', 'omega', 'levels', 'degree', 't_up', 'eta0', 'eps0', 'cfl',
        'uniform_baseline', 'reference', 'decomposition', 'level_maps',
        'sweep', 'out_dir', 'threads')}
    config = resolve_config(args.config, **overrides)
    configs = [config.for_omega(o) for o in config.sweep] or [config]
    results = run_parallel(run_case, configs, config.threads)
    table = write_results(results, config)
    print(table.to_string(index=False))
    return 0


def check(args):
    """Run the in-package property checks."""
    from helmpy.tests import run_checks
    result = run_checks(seed=args.seed, test=args.test)
    return 0 if result.wasSuccessful() else 1


def main(argv=None):
    """Command line entry point, returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    configure_logging(args.verbose, args.quiet)
    try:
        return {'run': run, 'check': check}[args.command](args)
    except (ConfigError, MeshError) as err:
        log.error('Invalid configuration: %s' % err)
        return EXIT_CONFIG
    except RunAbort as err:
        log.error('Run aborted: %s' % err)
        return EXIT_ABORT


if __name__ == '__main__':
    sys.exit(main())
