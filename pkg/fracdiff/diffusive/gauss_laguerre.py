'''Gauss-Laguerre evaluation of the diffusive representation.

The diffusive integral is split at r = 0 and each half is mapped onto [0, inf)
with r = -x / (1 - alpha) on the left and r = x / alpha on the right. The Lambda-point
Gauss-Laguerre rule then gives

    I^alpha_a f(t) ~ sum_l w_l e^(x_l) [phi(t, r_l) / (1 - alpha) + phi(t, r~_l) / alpha],

where both node families are advanced in time with the diffusive steppers.
'''
import logging
import math
import time
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from sklearn.base import BaseEstimator

from .core import METHODS, DiffusiveNodes, euler_update, trapezoidal_update, check_step
from ..util.errors import ConfigurationError, ConvergenceError
from ..util.problem import FractionalProblem, TimeGrid, as_order
from ..util.special import log_gamma
from ..util.trace import EvaluationTrace

logger = logging.getLogger(__name__)

MAX_ORDER = 200
MAX_NEWTON_ITERATIONS = 50
NEWTON_TOL = 1e-12
RESCALE_AT = 1e100


def laguerre_pair(n, x):
    '''Evaluate L_n and L_(n-1) at x by the three-term recurrence.

    Large values are rescaled during the recurrence; the returned pair shares the
    common factor exp(-log_scale).

    Returns
    -------
    (np.ndarray, np.ndarray, np.ndarray)
        L_n(x) e^(-log_scale), L_(n-1)(x) e^(-log_scale), log_scale
    '''
    x = np.asarray(x, dtype=float)
    log_scale = np.zeros_like(x)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x), log_scale
    p = 1 - x
    for k in range(1, n):
        p_next = ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        p_prev, p = p, p_next
        big = np.abs(p) > RESCALE_AT
        if np.any(big):
            p[big] /= RESCALE_AT
            p_prev[big] /= RESCALE_AT
            log_scale[big] += math.log(RESCALE_AT)
    return p, p_prev, log_scale


@dataclass(frozen=True, eq=False)
class GaussLaguerreRule:
    '''Lambda-point Gauss-Laguerre rule for int_0^inf e^(-x) g(x) dx.

    Parameters
    ----------
    order: int
        Number of nodes Lambda.
    nodes: np.ndarray
        Roots of L_Lambda, increasing.
    weights: np.ndarray
        Quadrature weights (underflow to 0 for the largest nodes when Lambda is big).
    scaled_weights: np.ndarray
        w_l e^(x_l), formed in log space.
    log_weights: np.ndarray
        log w_l.
    '''
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray
    log_weights: np.ndarray

    def integrate(self, g):
        '''Apply the rule to a callable g: sum_l w_l g(x_l).'''
        return float(np.sum(self.weights * g(self.nodes)))

    def moment_errors(self, max_power=None):
        '''Relative errors of sum_l w_l x_l^k against k! for k = 0..max_power.'''
        max_power = 2 * self.order - 1 if max_power is None else max_power
        k = np.arange(max_power + 1)
        log_factorial = np.array([log_gamma(kk + 1) for kk in k])
        terms = np.exp(self.log_weights[None, :] + k[:, None] * np.log(self.nodes)[None, :]
                       - log_factorial[:, None])
        return np.abs(terms.sum(axis=1) - 1)


def _initial_guesses(n):
    if n == 1:
        return np.array([1.0])
    diagonal = 2 * np.arange(n) + 1.0
    off_diagonal = np.arange(1, n, dtype=float)
    return eigh_tridiagonal(diagonal, off_diagonal, eigvals_only=True)


def _newton_step(n, x):
    p, p_prev, _ = laguerre_pair(n, x)
    step = x * p / (n * (p - p_prev))
    return x - step, step


@lru_cache(maxsize=32)
def build_rule(n_nodes) -> GaussLaguerreRule:
    '''Compute the Gauss-Laguerre rule of order n_nodes (1 <= n_nodes <= 200).

    Nodes start from the eigenvalues of the Jacobi matrix and are polished with
    Newton's method on the recurrence; weights follow
    w_l = x_l / ((n+1)^2 L_(n+1)(x_l)^2). Polynomial exactness is checked before
    the rule is returned.
    '''
    if isinstance(n_nodes, bool) or int(n_nodes) != n_nodes or not 1 <= n_nodes <= MAX_ORDER:
        raise ValueError('Gauss-Laguerre order must be an integer in [1, {0}], got {1}'.format(MAX_ORDER, n_nodes))
    n = int(n_nodes)
    x = _initial_guesses(n)
    for iteration in range(1, MAX_NEWTON_ITERATIONS + 1):
        x, step = _newton_step(n, x)
        if np.all(np.abs(step) <= NEWTON_TOL * x):
            break
    else:
        raise ConvergenceError('Newton iteration for Laguerre roots of order {0} did not converge'.format(n))
    x, _ = _newton_step(n, x)
    if np.any(np.diff(x) <= 0) or x[0] <= 0:
        raise ConvergenceError('Laguerre roots of order {0} are not strictly increasing'.format(n))

    p_next, _, log_scale = laguerre_pair(n + 1, x)
    log_weights = np.log(x) - 2 * math.log(n + 1) - 2 * (np.log(np.abs(p_next)) + log_scale)
    rule = GaussLaguerreRule(order=n, nodes=x, weights=np.exp(log_weights),
                             scaled_weights=np.exp(log_weights + x), log_weights=log_weights)
    for arr in (rule.nodes, rule.weights, rule.scaled_weights, rule.log_weights):
        arr.flags.writeable = False

    errors = rule.moment_errors()
    if errors[0] > 1e-10 or np.max(errors) > 1e-8:
        raise ConvergenceError('Gauss-Laguerre rule of order {0} fails exactness (max error {1:.3g})'.format(
            n, np.max(errors)))
    logger.debug('built Gauss-Laguerre rule of order {0} in {1} Newton iterations'.format(n, iteration))
    return rule


def default_scales(alpha):
    alpha = as_order(alpha).alpha
    return 1 - alpha, alpha


def _check_scales(scales):
    left, right = (float(s) for s in scales)
    if not (left > 0 and right > 0):
        raise ValueError('node transform scales must be positive, got {0}'.format(scales))
    return left, right


def transformed_nodes(rule, alpha, scales=None, window=0.0):
    '''Left and right node families r = -x / scale_left and r = x / scale_right.'''
    scales = default_scales(alpha) if scales is None else _check_scales(scales)
    r = np.concatenate([-rule.nodes / scales[0], rule.nodes / scales[1]])
    return DiffusiveNodes.from_r(r, alpha, window=window), scales


def quadrature_sum(rule, scales, values):
    n = rule.order
    return float(np.sum(rule.scaled_weights * (values[:n] / scales[0] + values[n:] / scales[1])))


@dataclass(frozen=True, eq=False)
class GLIntegratorState:
    '''Both node families of the Gauss-Laguerre evaluator at current_time.

    `nodes` and `values` hold the left family first, then the right family.
    '''
    rule: GaussLaguerreRule
    nodes: DiffusiveNodes
    values: np.ndarray
    current_time: float
    scales: tuple

    @classmethod
    def initial(cls, rule, alpha, start, scales=None):
        nodes, scales = transformed_nodes(rule, alpha, scales)
        return cls(rule, nodes, np.zeros(len(nodes)), float(start), scales)

    @property
    def alpha(self):
        return self.nodes.alpha

    @property
    def left_nodes(self):
        return self.nodes.r[:self.rule.order]

    @property
    def right_nodes(self):
        return self.nodes.r[self.rule.order:]

    @property
    def left_values(self):
        return self.values[:self.rule.order]

    @property
    def right_values(self):
        return self.values[self.rule.order:]


def _check_method(method):
    if method not in METHODS:
        raise ValueError('unknown stepping method {0!r}, expected one of {1}'.format(method, METHODS))


def gl_step(state: GLIntegratorState, problem: FractionalProblem, t_next, method='trapezoidal') -> GLIntegratorState:
    _check_method(method)
    t_next = float(t_next)
    h = check_step(problem, state.current_time, t_next)
    if method == 'euler':
        values = euler_update(state.nodes, state.values, h, problem.f(t_next))
    else:
        values = trapezoidal_update(state.nodes, state.values, h, problem.f(state.current_time), problem.f(t_next))
    return GLIntegratorState(state.rule, state.nodes, values, t_next, state.scales)


def gl_evaluate(state: GLIntegratorState, alpha=None):
    '''Gauss-Laguerre quadrature of the current node values.'''
    if alpha is not None and float(alpha) != state.alpha:
        raise ValueError('state was built for alpha={0}, got {1}'.format(state.alpha, alpha))
    return quadrature_sum(state.rule, state.scales, state.values)


def march(nodes, problem, times, method, damped_start, sample=None, start=None):
    '''Advance node values from `start` through `times` and yield the values at each time.

    `sample(t)` gives the forcing sample used at time t (defaults to f(t)). With
    `damped_start` the first step is backward Euler whatever `method` is.
    '''
    _check_method(method)
    sample = problem.f if sample is None else sample
    t_prev = problem.a if start is None else float(start)
    f_prev = sample(t_prev)
    if method == 'trapezoidal' and not damped_start and f_prev != 0:
        warnings.warn('trapezoidal stepping from a nonzero forcing without a damped start leaves '
                      'an undamped start-up error at stiff nodes')
    values = np.zeros(len(nodes))
    first = True
    for t in times:
        t = float(t)
        if t > t_prev:
            h = check_step(problem, t_prev, t)
            f_next = sample(t)
            if method == 'euler' or (first and damped_start):
                values = euler_update(nodes, values, h, f_next)
            else:
                values = trapezoidal_update(nodes, values, h, f_prev, f_next)
            t_prev, f_prev, first = t, f_next, False
        elif t < t_prev - 1e-12 * max(1.0, abs(t_prev)):
            raise ValueError('times must not precede the start time {0}, got {1}'.format(t_prev, t))
        yield values


def run_gl(problem: FractionalProblem, grid: TimeGrid, n_nodes=40, method='trapezoidal',
           damped_start=True, scales=None) -> EvaluationTrace:
    '''Evaluate I^alpha_a f on a grid with the Gauss-Laguerre diffusive scheme.

    Parameters
    ----------
    problem: FractionalProblem
    grid: TimeGrid
        Evaluation times inside [a, b]; the node states start at a.
    n_nodes: int
        Order Lambda of the Gauss-Laguerre rule; 2 Lambda states are carried.
    method: str
        'euler' or 'trapezoidal'.
    damped_start: bool
        Take the first step with backward Euler.
    scales: tuple, optional
        Node transform (scale_left, scale_right), default (1 - alpha, alpha).
    '''
    problem.check_grid(grid)
    start_time = time.perf_counter()
    rule = build_rule(n_nodes)
    nodes, scales = transformed_nodes(rule, problem.alpha, scales)
    values = np.array([quadrature_sum(rule, scales, v)
                       for v in march(nodes, problem, grid.points, method, damped_start)])
    if not np.all(np.isfinite(values)):
        raise ConvergenceError('Gauss-Laguerre evaluation produced non-finite values')
    wall = time.perf_counter() - start_time
    logger.info('gl-{0}: P={1}, Lambda={2}, {3:.3f}s'.format(method, grid.n_steps, rule.order, wall))
    return EvaluationTrace(grid, values, 'gl-' + method, n_terms=len(nodes), wall_seconds=wall,
                           params={'n_nodes': rule.order, 'damped_start': damped_start})


class GaussLaguerreIntegrator(BaseEstimator):
    '''Gauss-Laguerre diffusive evaluator with O(Lambda) memory and O(Lambda P) work.

    Params
    ------
    n_nodes: int
        Order of the Gauss-Laguerre rule.
    method: str
        'euler' or 'trapezoidal'.
    damped_start: bool
        First step by backward Euler.
    scales: tuple, optional
        Node transform scales, default (1 - alpha, alpha).
    '''

    def __init__(self, n_nodes=40, method='trapezoidal', damped_start=True, scales=None):
        self.n_nodes = n_nodes
        self.method = method
        self.damped_start = damped_start
        self.scales = scales

    def _validate_params(self):
        if not isinstance(self.n_nodes, (int, np.integer)) or not 1 <= self.n_nodes <= MAX_ORDER:
            raise ConfigurationError('n_nodes must be an integer in [1, {0}], got {1}'.format(MAX_ORDER, self.n_nodes))
        if self.method not in METHODS:
            raise ConfigurationError('method must be one of {0}, got {1!r}'.format(METHODS, self.method))
        if self.scales is not None:
            try:
                _check_scales(self.scales)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(str(e))

    def evaluate(self, problem, grid):
        self._validate_params()
        self.rule_ = build_rule(int(self.n_nodes))
        self.trace_ = run_gl(problem, grid, int(self.n_nodes), self.method, self.damped_start, self.scales)
        return self.trace_
