'''Command-line front end.

    fracdiff integrate --alpha 0.5 --steps 1024 --function const:1 --method gl-trap
    fracdiff kernel --alpha 0.5 --rho-step 0.25 --tol 1e-8 --delta 1e-2
    fracdiff bench --method gl-trap expsum --sweep 10000 20000 40000
    fracdiff nodes --lambda 5

Exit status is 0 on success, 2 for invalid configuration and 3 for numerical failure.
'''
import argparse
import logging
import os
import sys
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from . import METHODS
from .diffusive.gauss_laguerre import MAX_ORDER, build_rule
from .diffusive.history_split import SplitIntegrator
from .expsum.kernel import eval_expsum, fit_expsum, kernel_exact, truncation_bounds
from .util.errors import ConfigurationError
from .util.evaluate.benchmark import compare_methods, doubling_ratios, summarize
from .util.problem import FractionalProblem, TimeGrid, parse_function_spec
from .util.trace import write_frame

logger = logging.getLogger(__name__)

THREADS_ENV = 'FRACDIFF_THREADS'
DEFAULT_SWEEP = (10000, 20000, 40000)
SPLIT_METHODS = {'gl-euler': 'euler', 'gl-trap': 'trapezoidal'}


@dataclass(frozen=True)
class RunConfig:
    '''Validated options of one command.'''
    command: str
    alpha: float = 0.5
    a: float = 0.0
    b: float = 1.0
    steps: int = 1024
    grid_file: Optional[str] = None
    function: str = 'const:1'
    methods: Tuple[str, ...] = ('gl-trap',)
    n_nodes: int = 40
    rho_step: float = 0.25
    tol: float = 1e-8
    delta: Optional[float] = None
    split_window: Optional[float] = None
    n_local: int = 64
    threads: int = 1
    sweep: Tuple[int, ...] = DEFAULT_SWEEP
    repeats: int = 3
    points: int = 200
    output: str = '-'
    fmt: str = 'csv'

    @classmethod
    def from_args(cls, args, environ=None):
        environ = os.environ if environ is None else environ
        values = {k: v for k, v in vars(args).items() if k in cls.__dataclass_fields__ and v is not None}
        if isinstance(values.get('methods'), str):
            values['methods'] = (values['methods'],)
        for key in ('methods', 'sweep'):
            if key in values:
                values[key] = tuple(values[key])
        if environ.get(THREADS_ENV):
            try:
                values['threads'] = int(environ[THREADS_ENV])
            except ValueError:
                raise ConfigurationError('{0}: expected an integer, got {1!r}'.format(
                    THREADS_ENV, environ[THREADS_ENV]))
        return cls(**values)

    def validate(self):
        '''Raise ConfigurationError naming the first out-of-range field.'''
        def fail(name, message, value):
            raise ConfigurationError('--{0}: {1}, got {2}'.format(name, message, value))

        if not 0 < self.alpha < 1:
            fail('alpha', 'must lie strictly inside (0, 1)', self.alpha)
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            fail('b', 'interval needs finite a < b', '[{0}, {1}]'.format(self.a, self.b))
        if self.steps < 1:
            fail('steps', 'must be >= 1', self.steps)
        if not 1 <= self.n_nodes <= MAX_ORDER:
            fail('lambda', 'must lie in [1, {0}]'.format(MAX_ORDER), self.n_nodes)
        if not self.rho_step > 0:
            fail('rho-step', 'must be positive', self.rho_step)
        if not self.tol > 0:
            fail('tol', 'must be positive', self.tol)
        if self.delta is not None and not self.delta > 0:
            fail('delta', 'must be positive', self.delta)
        if self.command == 'kernel' and self.delta is not None and not self.delta < self.b - self.a:
            fail('delta', 'must be below b - a = {0}'.format(self.b - self.a), self.delta)
        if self.split_window is not None:
            if not 0 < self.split_window < self.b - self.a:
                fail('split-window', 'must lie in (0, b - a)', self.split_window)
            if any(m not in SPLIT_METHODS for m in self.methods):
                fail('split-window', 'needs --method gl-euler or gl-trap', ','.join(self.methods))
        if self.n_local < 1:
            fail('n-local', 'must be >= 1', self.n_local)
        if self.threads == 0 or self.threads < -1:
            fail('threads', 'must be a positive integer or -1', self.threads)
        if any(P < 1 for P in self.sweep):
            fail('sweep', 'sizes must be >= 1', self.sweep)
        if self.repeats < 1:
            fail('repeats', 'must be >= 1', self.repeats)
        if self.points < 2:
            fail('points', 'must be >= 2', self.points)
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            fail('method', 'must be one of {0}'.format(', '.join(METHODS)), ','.join(unknown))
        return self

    def problem(self):
        return FractionalProblem(self.alpha, self.a, self.b, parse_function_spec(self.function, a=self.a))

    def grid(self):
        if self.grid_file is not None:
            return TimeGrid.from_csv(self.grid_file)
        return TimeGrid.uniform(self.a, self.b, self.steps)


def make_estimator(config, name):
    '''Estimator registered under `name` with the config's hyperparameters applied.'''
    if config.split_window is not None:
        estimator = SplitIntegrator(window=config.split_window, n_nodes=config.n_nodes,
                                    method=SPLIT_METHODS[name], n_local=config.n_local)
    else:
        estimator = METHODS[name]()
    overrides = {'n_nodes': config.n_nodes, 'rho_step': config.rho_step, 'tol': config.tol,
                 'delta': config.delta, 'n_jobs': config.threads}
    params = estimator.get_params()
    if config.threads != 1 and 'n_jobs' not in params:
        warnings.warn('--threads only applies to the oracle; {0} runs on one thread'.format(name))
    return estimator.set_params(**{k: v for k, v in overrides.items() if k in params})


def _split_grid(grid, start):
    # the history part is only defined from a + window on
    points = grid.points[grid.points >= start - 1e-12 * max(1.0, abs(start))]
    if points.size < 2:
        raise ConfigurationError('--split-window: fewer than two grid points lie after a + window = {0}'.format(start))
    return TimeGrid(points)


def cmd_integrate(config):
    problem = config.problem()
    grid = config.grid()
    if config.split_window is not None:
        grid = _split_grid(grid, problem.a + config.split_window)
    estimator = make_estimator(config, config.methods[0])
    trace = estimator.evaluate(problem, grid)
    truth = problem.analytic_solution(grid.points)
    return trace.to_frame(truth)


def cmd_kernel(config):
    delta = 1e-2 if config.delta is None else config.delta
    t_max = config.b - config.a
    expsum = fit_expsum(config.alpha, config.rho_step, delta, t_max, config.tol)
    t = np.geomspace(delta, t_max, config.points)
    exact = kernel_exact(config.alpha, t)
    approx = eval_expsum(expsum, t)
    bounds = [truncation_bounds(expsum, ti) for ti in t]
    return pd.DataFrame({
        't': t,
        'exact': exact,
        'expsum': approx,
        'rel_err': np.abs(approx - exact) / exact,
        'upper_bound': [bound.upper_tail for bound in bounds],
        'lower_bound': [bound.lower_tail for bound in bounds],
        'condition': [bound.condition_satisfied for bound in bounds],
    })


def cmd_bench(config):
    problem = config.problem()
    estimators = {name: make_estimator(config, name) for name in config.methods}
    frame = compare_methods(estimators, problem, config.sweep, config.repeats)
    for name, ratios in doubling_ratios(frame).items():
        logger.info('{0}: wall time ratios {1}'.format(name, np.round(ratios, 2).tolist()))
    summarize(frame, file=sys.stderr)
    return frame


def cmd_nodes(config):
    rule = build_rule(config.n_nodes)
    return pd.DataFrame({
        'l': np.arange(1, rule.order + 1),
        'x': rule.nodes,
        'w': rule.weights,
        'w_scaled': rule.scaled_weights,
    })


COMMANDS = {'integrate': cmd_integrate, 'kernel': cmd_kernel, 'bench': cmd_bench, 'nodes': cmd_nodes}


def _output_arguments(parser):
    parser.add_argument('--output', '-o', default='-', help='output file, - for stdout')
    parser.add_argument('--format', dest='fmt', choices=('csv', 'json'), default='csv', help='output format')


def _problem_arguments(parser):
    parser.add_argument('--alpha', type=float, default=0.5, help='fractional order in (0, 1)')
    parser.add_argument('--a', type=float, default=0.0, help='left end of the interval')
    parser.add_argument('--b', type=float, default=1.0, help='right end of the interval')
    parser.add_argument('--function', default='const:1',
                        help='source function: const:c, monomial:p, shifted:p, sin, exp or csv:path')


def _method_arguments(parser):
    parser.add_argument('--lambda', dest='n_nodes', type=int, default=40, help='Gauss-Laguerre order')
    parser.add_argument('--rho-step', dest='rho_step', type=float, default=0.25, help='exp-sum step in r')
    parser.add_argument('--tol', type=float, default=1e-8, help='exp-sum truncation tolerance')
    parser.add_argument('--threads', type=int, default=1,
                        help='oracle threads, ignored by the fast methods (overridden by ${0})'.format(THREADS_ENV))


def build_parser():
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog='fracdiff', formatter_class=formatter,
                                     description='Fast Riemann-Liouville fractional integrals via diffusive representations.')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG logging')
    subparsers = parser.add_subparsers(dest='command', required=True)

    integrate = subparsers.add_parser('integrate', formatter_class=formatter,
                                      help='evaluate I^alpha_a f on a time grid')
    _problem_arguments(integrate)
    integrate.add_argument('--steps', type=int, default=1024, help='number of uniform steps P')
    integrate.add_argument('--grid-file', dest='grid_file', help='CSV with a t column, replaces the uniform grid')
    integrate.add_argument('--method', dest='methods', choices=list(METHODS), default='gl-trap')
    _method_arguments(integrate)
    integrate.add_argument('--delta', type=float, default=None,
                           help='smallest exp-sum lag, defaults to the smallest grid step')
    integrate.add_argument('--split-window', dest='split_window', type=float, default=None,
                           help='local window width; evaluates local + history parts')
    integrate.add_argument('--n-local', dest='n_local', type=int, default=64,
                           help='product-integration intervals of the local part')
    _output_arguments(integrate)

    kernel = subparsers.add_parser('kernel', formatter_class=formatter,
                                   help='compare the exp-sum kernel with Gamma(1-alpha) t^(alpha-1)')
    kernel.add_argument('--alpha', type=float, default=0.5, help='fractional order in (0, 1)')
    kernel.add_argument('--a', type=float, default=0.0, help='left end of the interval')
    kernel.add_argument('--b', type=float, default=1.0, help='right end of the interval')
    kernel.add_argument('--rho-step', dest='rho_step', type=float, default=0.25, help='exp-sum step in r')
    kernel.add_argument('--tol', type=float, default=1e-8, help='truncation tolerance')
    kernel.add_argument('--delta', type=float, default=1e-2, help='smallest reported lag')
    kernel.add_argument('--points', type=int, default=200, help='log-spaced report points in [delta, b - a]')
    _output_arguments(kernel)

    bench = subparsers.add_parser('bench', formatter_class=formatter, help='time evaluators over a sweep of P')
    _problem_arguments(bench)
    bench.add_argument('--method', dest='methods', nargs='+', choices=list(METHODS), default=['gl-trap'])
    _method_arguments(bench)
    bench.add_argument('--sweep', type=int, nargs='+', default=list(DEFAULT_SWEEP), help='values of P')
    bench.add_argument('--repeats', type=int, default=3, help='best-of-N timing')
    _output_arguments(bench)

    nodes = subparsers.add_parser('nodes', formatter_class=formatter, help='print a Gauss-Laguerre rule')
    nodes.add_argument('--lambda', dest='n_nodes', type=int, default=40, help='number of nodes')
    _output_arguments(nodes)
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = RunConfig.from_args(args).validate()
        logger.info('running {0}'.format(config.command))
        frame = COMMANDS[config.command](config)
        write_frame(frame, sys.stdout if config.output == '-' else config.output, config.fmt)
    except (ValueError, OSError) as e:
        print('fracdiff: error: {0}'.format(e), file=sys.stderr)
        return 2
    except ArithmeticError as e:
        print('fracdiff: numerical failure: {0}'.format(e), file=sys.stderr)
        return 3
    return 0
