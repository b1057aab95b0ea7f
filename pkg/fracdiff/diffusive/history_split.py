'''Local/history splitting of the fractional integral.

For a window 0 < w < b - a and t >= a + w,

    I^alpha_a f(t) = L(t) + H(t),
    L(t) = 1/Gamma(alpha) int_(t-w)^t (t - tau)^(alpha-1) f(tau) d tau,
    H(t) = int_R mu(t, w, r) dr,

where mu solves d mu/dt = -e^r mu + c_alpha e^((1-alpha) r) e^(-w e^r) f(t - w) with
mu(a + w, w, r) = 0. The local part is integrated exactly against a piecewise-linear
interpolant, the history part with the Gauss-Laguerre diffusive scheme on nodes
whose forcing carries the extra factor e^(-w e^r).
'''
import logging
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .core import euler_update, trapezoidal_update, check_step, phi_quadrature
from .gauss_laguerre import (METHODS, MAX_ORDER, GaussLaguerreRule, build_rule, march, quadrature_sum,
                             transformed_nodes, _check_method, _check_scales)
from ..oracle.product_integration import product_weights
from ..util.errors import ConfigurationError, ConvergenceError
from ..util.problem import ConstantFunction, FractionalProblem, TimeGrid
from ..util.special import gamma
from ..util.trace import EvaluationTrace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HistoryWindow:
    '''Width of the local window, 0 < width < b - a.'''
    width: float

    def __post_init__(self):
        width = float(self.width)
        if not width > 0:
            raise ValueError('history window must be positive, got {0}'.format(width))
        object.__setattr__(self, 'width', width)

    def check(self, problem):
        if not self.width < problem.b - problem.a:
            raise ValueError('history window {0} must be shorter than b - a = {1}'.format(
                self.width, problem.b - problem.a))
        return self


def _width(window):
    return window.width if isinstance(window, HistoryWindow) else HistoryWindow(window).width


@dataclass(frozen=True, eq=False)
class HistoryDiffusiveState:
    '''Values mu(current_time, window, r) on the transformed Gauss-Laguerre nodes.'''
    rule: GaussLaguerreRule
    nodes: object
    values: np.ndarray
    window: float
    current_time: float
    scales: tuple

    @classmethod
    def initial(cls, rule, problem, window, scales=None):
        window = _width(window)
        nodes, scales = transformed_nodes(rule, problem.alpha, scales, window=window)
        return cls(rule, nodes, np.zeros(len(nodes)), window, problem.a + window, scales)


def local_part(problem: FractionalProblem, window, t, n_intervals=64):
    '''L(t): product integration over [t - window, t] on n_intervals equal pieces.

    Exact when f is linear on the window.
    '''
    window = _width(window)
    t = float(t)
    if t - window < problem.a - 1e-12 * max(1.0, abs(problem.a)):
        raise ValueError('window {0} reaches before a={1} at t={2}'.format(window, problem.a, t))
    start = max(t - window, problem.a)
    points = np.linspace(start, t, int(n_intervals) + 1)
    weights = product_weights(points, t, problem.alpha)
    return float(np.dot(weights, problem.f(points)) / gamma(problem.alpha))


def history_step(state: HistoryDiffusiveState, problem: FractionalProblem, t_next, method='trapezoidal'):
    '''Advance mu to t_next, sampling f at the delayed times t - window.'''
    _check_method(method)
    t_next = float(t_next)
    h = check_step(problem, state.current_time, t_next)
    delayed = t_next - state.window
    if delayed < problem.a - 1e-12 * max(1.0, abs(problem.a)):
        raise ValueError('delayed sample time {0} precedes a={1}'.format(delayed, problem.a))
    if method == 'euler':
        values = euler_update(state.nodes, state.values, h, problem.f(max(delayed, problem.a)))
    else:
        f_prev = problem.f(max(state.current_time - state.window, problem.a))
        values = trapezoidal_update(state.nodes, state.values, h, f_prev, problem.f(max(delayed, problem.a)))
    return HistoryDiffusiveState(state.rule, state.nodes, values, state.window, t_next, state.scales)


def history_evaluate(state: HistoryDiffusiveState):
    return quadrature_sum(state.rule, state.scales, state.values)


def mu_reference(problem: FractionalProblem, window, t, r):
    '''mu(t, window, r) from its integral definition (closed form for constant f).'''
    window = _width(window)
    if not problem.a + window <= t <= problem.b:
        raise ValueError('t={0} lies outside [a + window, b]'.format(t))
    c = problem.order.c
    r_arr = np.asarray(r, dtype=float)
    if isinstance(problem.f, ConstantFunction):
        with np.errstate(over='ignore'):
            rate = np.exp(np.minimum(r_arr, 700.0))
            result = (-c * problem.f.value * np.exp(-problem.alpha * r_arr - window * rate)
                      * np.expm1(-(t - problem.a - window) * rate))
    else:
        result = np.array([phi_quadrature(problem, t, ri, lower=window * np.exp(min(ri, 700.0)))
                           for ri in r_arr.ravel()]).reshape(r_arr.shape)
    if np.ndim(r) == 0:
        return float(result)
    return result


def split_evaluate(problem: FractionalProblem, grid: TimeGrid, window, n_nodes=40, method='trapezoidal',
                   damped_start=True, n_local=64, scales=None) -> EvaluationTrace:
    '''Evaluate L + H on a grid whose points all lie in [a + window, b].

    Parameters
    ----------
    problem: FractionalProblem
    grid: TimeGrid
    window: float or HistoryWindow
    n_nodes: int
        Gauss-Laguerre order of the history quadrature.
    method: str
        'euler' or 'trapezoidal' for the history ODEs.
    damped_start: bool
        First history step by backward Euler.
    n_local: int
        Number of product-integration intervals of the local part.
    scales: tuple, optional
        Node transform of the history quadrature.
    '''
    width = HistoryWindow(_width(window)).check(problem).width
    problem.check_grid(grid, start=problem.a + width)
    start_time = time.perf_counter()
    rule = build_rule(n_nodes)
    nodes, scales = transformed_nodes(rule, problem.alpha, scales, window=width)

    def delayed(t):
        return problem.f(max(t - width, problem.a))

    history = [quadrature_sum(rule, scales, v)
               for v in march(nodes, problem, grid.points, method, damped_start,
                              sample=delayed, start=problem.a + width)]
    local = [local_part(problem, width, t, n_local) for t in grid.points]
    values = np.asarray(local) + np.asarray(history)
    if not np.all(np.isfinite(values)):
        raise ConvergenceError('history-split evaluation produced non-finite values')
    wall = time.perf_counter() - start_time
    logger.info('split-{0}: P={1}, Lambda={2}, window={3}, {4:.3f}s'.format(
        method, grid.n_steps, rule.order, width, wall))
    return EvaluationTrace(grid, values, 'split-' + method, n_terms=len(nodes), wall_seconds=wall,
                           params={'n_nodes': rule.order, 'window': width, 'n_local': int(n_local)})


class SplitIntegrator(BaseEstimator):
    '''Local part by product integration, history part by damped diffusive quadrature.
    '''

    def __init__(self, window=0.5, n_nodes=40, method='trapezoidal', damped_start=True, n_local=64, scales=None):
        self.window = window
        self.n_nodes = n_nodes
        self.method = method
        self.damped_start = damped_start
        self.n_local = n_local
        self.scales = scales

    def _validate_params(self, problem):
        if not isinstance(self.n_nodes, (int, np.integer)) or not 1 <= self.n_nodes <= MAX_ORDER:
            raise ConfigurationError('n_nodes must be an integer in [1, {0}], got {1}'.format(MAX_ORDER, self.n_nodes))
        if self.method not in METHODS:
            raise ConfigurationError('method must be one of {0}, got {1!r}'.format(METHODS, self.method))
        if not isinstance(self.n_local, (int, np.integer)) or self.n_local < 1:
            raise ConfigurationError('n_local must be a positive integer, got {0}'.format(self.n_local))
        try:
            HistoryWindow(self.window).check(problem)
            if self.scales is not None:
                _check_scales(self.scales)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(str(e))

    def evaluate(self, problem, grid):
        self._validate_params(problem)
        self.trace_ = split_evaluate(problem, grid, self.window, int(self.n_nodes), self.method,
                                     self.damped_start, int(self.n_local), self.scales)
        return self.trace_
