'''Diffusive evaluation on the equispaced exp-sum nodes r_n = n h.

The truncated trapezoidal rule sum_n h phi(t, n h) approximates int_R phi(t, r) dr
with the same nodes and truncation as the exponential-sum kernel; here the node
values phi(t, n h) are advanced with the A-stable diffusive steppers instead of the
piecewise-constant recursion.
'''
import logging
import time

import numpy as np
from sklearn.base import BaseEstimator

from .kernel import ExpSumApproximation, fit_expsum
from ..diffusive.core import METHODS, DiffusiveNodes
from ..diffusive.gauss_laguerre import march
from ..util.errors import ConfigurationError, ConvergenceError
from ..util.special import c_alpha
from ..util.trace import EvaluationTrace

logger = logging.getLogger(__name__)


def upper_tail_weight(expsum: ExpSumApproximation):
    '''Weight of f(t) standing in for the nodes n > N.

    Beyond the truncation the nodes are in quasi-steady state phi ~ c_alpha e^(-alpha r) f(t),
    whose trapezoidal sum is geometric.
    '''
    alpha, h = expsum.alpha.alpha, expsum.rho_step
    return c_alpha(alpha) * h * np.exp(-alpha * (expsum.N + 1) * h) / -np.expm1(-alpha * h)


def run_trapezoidal_nodes(problem, grid, expsum: ExpSumApproximation, method='trapezoidal', damped_start=True):
    problem.check_grid(grid)
    if expsum.alpha.alpha != problem.alpha:
        raise ConfigurationError('exp-sum built for alpha={0}, problem has alpha={1}'.format(
            expsum.alpha.alpha, problem.alpha))
    start_time = time.perf_counter()
    nodes = DiffusiveNodes.from_r(expsum.indices * expsum.rho_step, problem.alpha)
    values = np.array([expsum.rho_step * np.sum(v)
                       for v in march(nodes, problem, grid.points, method, damped_start)])
    values = values + upper_tail_weight(expsum) * np.where(grid.points > problem.a, problem.f(grid.points), 0.0)
    if not np.all(np.isfinite(values)):
        raise ConvergenceError('trapezoidal-node evaluation produced non-finite values')
    wall = time.perf_counter() - start_time
    logger.info('dr-{0}: P={1}, Lambda={2}, {3:.3f}s'.format(method, grid.n_steps, len(nodes), wall))
    return EvaluationTrace(grid, values, 'dr-' + method, n_terms=len(nodes), wall_seconds=wall,
                           params={'rho_step': expsum.rho_step, 'M': expsum.M, 'N': expsum.N})


class DiffusiveTrapezoidalIntegrator(BaseEstimator):
    '''Trapezoidal rule in r on the exp-sum nodes, node values by A-stable stepping.'''

    def __init__(self, rho_step=0.25, tol=1e-8, delta=None, method='trapezoidal', damped_start=True):
        self.rho_step = rho_step
        self.tol = tol
        self.delta = delta
        self.method = method
        self.damped_start = damped_start

    def evaluate(self, problem, grid):
        if self.method not in METHODS:
            raise ConfigurationError('method must be one of {0}, got {1!r}'.format(METHODS, self.method))
        if not self.rho_step > 0 or not self.tol > 0:
            raise ConfigurationError('rho_step and tol must be positive, got {0}, {1}'.format(self.rho_step, self.tol))
        if self.delta is not None and not self.delta > 0:
            raise ConfigurationError('delta must be positive, got {0}'.format(self.delta))
        t_max = grid.points[-1] - problem.a
        delta = grid.min_step if self.delta is None else float(self.delta)
        if not 0 < delta < t_max:
            delta = min(delta, 0.5 * t_max)
        self.expsum_ = fit_expsum(problem.alpha, self.rho_step, delta, t_max, self.tol)
        self.trace_ = run_trapezoidal_nodes(problem, grid, self.expsum_, self.method, self.damped_start)
        return self.trace_
