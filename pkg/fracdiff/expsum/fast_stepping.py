'''Fast O(Lambda P) evaluation with the exponential-sum kernel.

f is replaced by the piecewise-constant interpolant F^n on J_n = (t_(n-1), t_n], so

    I^alpha_a f(t_n) ~ z_nn F^n + sum_l Phi_l^n,
    z_nn = (Delta t_n)^alpha / Gamma(alpha + 1),
    Phi_l^n = sum_(j<n) K_lnj F^j,  K_lnj = c_alpha w_l int_(J_j) e^(beta_l (t_n - tau)) d tau,

with beta_l = -beta~_l < 0. The history sums obey
Phi_l^n = K_(l,n,n-1) F^(n-1) + e^(beta_l Delta t_n) Phi_l^(n-1), so only Lambda values
are carried through the time loop.
'''
import logging
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .kernel import ExpSumApproximation, fit_expsum
from ..util.errors import ConfigurationError, ConvergenceError
from ..util.problem import FractionalProblem, TimeGrid, as_order
from ..util.special import c_alpha, gamma
from ..util.trace import EvaluationTrace

logger = logging.getLogger(__name__)


def local_weight(alpha, dt):
    '''z_nn = dt^alpha / Gamma(alpha + 1), the exact-kernel weight of the newest interval.'''
    alpha = as_order(alpha).alpha
    dt = float(dt)
    if not dt > 0:
        raise ValueError('local step must be positive, got {0}'.format(dt))
    return dt ** alpha / gamma(alpha + 1)


def _decay_integral(beta, length):
    '''(e^(beta length) - 1) / beta, with the beta = 0 limit.'''
    beta = np.asarray(beta, dtype=float)
    safe = np.where(beta == 0, 1.0, beta)
    return np.where(beta == 0, length, np.expm1(beta * length) / safe)


def k_weight(c_alpha_val, w_l, beta_l, t_n, t_jm1, t_j):
    '''c_alpha w_l int_(t_jm1)^(t_j) e^(beta_l (t_n - tau)) d tau for beta_l <= 0.'''
    if not t_jm1 < t_j <= t_n:
        raise ValueError('need t_jm1 < t_j <= t_n, got {0}, {1}, {2}'.format(t_jm1, t_j, t_n))
    beta_l = np.asarray(beta_l, dtype=float)
    if np.any(beta_l > 0):
        raise ValueError('exp-sum rates beta_l must be <= 0')
    result = c_alpha_val * np.asarray(w_l) * np.exp(beta_l * (t_n - t_j)) * _decay_integral(beta_l, t_j - t_jm1)
    if np.ndim(result) == 0:
        return float(result)
    return result


@dataclass(frozen=True, eq=False)
class HistoryAccumulator:
    '''History sums Phi_l and the last sample of the piecewise-constant interpolant.

    `last_start` is t_(n-2), the left end of the interval carried by `last_value`.
    '''
    expsum: ExpSumApproximation
    betas: np.ndarray
    phi: np.ndarray
    last_value: float
    last_time: float
    last_start: float

    @classmethod
    def initial(cls, expsum, t_0, t_1, F_1):
        '''Accumulator at t_1 with Phi_l^1 = 0.'''
        if not t_1 > t_0:
            raise ValueError('need t_1 > t_0, got {0}, {1}'.format(t_0, t_1))
        betas = -np.asarray(expsum.rates)
        return cls(expsum, betas, np.zeros(betas.size), float(F_1), float(t_1), float(t_0))

    @property
    def c(self):
        return c_alpha(self.expsum.alpha)


def _advance_phi(phi, scaled_weights, betas, t_n, start, last_time, last_value):
    history = scaled_weights * np.exp(betas * (t_n - last_time)) * _decay_integral(betas, last_time - start)
    return history * last_value + np.exp(betas * (t_n - last_time)) * phi


def advance(acc: HistoryAccumulator, t_n, F_n) -> HistoryAccumulator:
    '''Phi_l <- K_(l,n,n-1) F^(n-1) + e^(beta_l Delta t_n) Phi_l, then store (t_n, F_n).'''
    t_n = float(t_n)
    if not t_n > acc.last_time:
        raise ValueError('accumulator times must increase: {0} after {1}'.format(t_n, acc.last_time))
    phi = _advance_phi(acc.phi, acc.c * acc.expsum.weights, acc.betas, t_n,
                       acc.last_start, acc.last_time, acc.last_value)
    return HistoryAccumulator(acc.expsum, acc.betas, phi, float(F_n), t_n, acc.last_time)


def _check_grid(problem, grid, expsum, delta_guard):
    problem.check_grid(grid)
    nodes = grid.points if grid.points[0] <= problem.a else np.concatenate([[problem.a], grid.points])
    steps = np.diff(nodes)
    if delta_guard is None:
        delta_guard = expsum.delta if expsum.delta is not None else float(steps.min())
    if expsum.delta is not None and delta_guard < expsum.delta * (1 - 1e-12):
        raise ConfigurationError('delta_guard {0} is below the exp-sum validity bound {1}'.format(
            delta_guard, expsum.delta))
    short = np.flatnonzero(steps < delta_guard * (1 - 1e-12))
    if short.size:
        n = int(short[0]) + 1
        raise ConfigurationError('time step {0} has length {1:.6g}, below delta={2:.6g}'.format(
            n, steps[n - 1], delta_guard))
    if expsum.t_max is not None and nodes[-1] - nodes[0] > expsum.t_max * (1 + 1e-12):
        raise ConfigurationError('grid spans {0}, beyond the exp-sum validity bound t_max={1}'.format(
            nodes[-1] - nodes[0], expsum.t_max))
    return nodes, grid.points[0] > problem.a


def evaluate_fast(problem: FractionalProblem, grid: TimeGrid, expsum: ExpSumApproximation,
                  delta_guard=None) -> EvaluationTrace:
    '''Values z_nn F^n + sum_l Phi_l^n on the grid.

    Parameters
    ----------
    problem: FractionalProblem
    grid: TimeGrid
    expsum: ExpSumApproximation
        Built for the same alpha and valid on [delta, t_max].
    delta_guard: float, optional
        Smallest admissible time step; defaults to expsum.delta (or the smallest grid step).
    '''
    if expsum.alpha.alpha != problem.alpha:
        raise ConfigurationError('exp-sum built for alpha={0}, problem has alpha={1}'.format(
            expsum.alpha.alpha, problem.alpha))
    nodes, prepended = _check_grid(problem, grid, expsum, delta_guard)
    start_time = time.perf_counter()
    scaled_weights = c_alpha(problem.alpha) * expsum.weights
    betas = -np.asarray(expsum.rates)
    phi = np.zeros(betas.size)
    values = np.zeros(nodes.size)
    samples = np.asarray(problem.f(nodes[1:]), dtype=float)
    last_value = last_time = last_start = None
    for n in range(1, nodes.size):
        t_n, F_n = nodes[n], samples[n - 1]
        if n >= 2:
            phi = _advance_phi(phi, scaled_weights, betas, t_n, last_start, last_time, last_value)
        values[n] = local_weight(problem.alpha, t_n - nodes[n - 1]) * F_n + np.sum(phi)
        last_value, last_start, last_time = F_n, nodes[n - 1], t_n
    if prepended:
        values = values[1:]
    if not np.all(np.isfinite(values)):
        raise ConvergenceError('exp-sum evaluation produced non-finite values')
    wall = time.perf_counter() - start_time
    logger.info('expsum: P={0}, Lambda={1}, {2:.3f}s'.format(grid.n_steps, betas.size, wall))
    return EvaluationTrace(grid, values, 'expsum', n_terms=phi.size, wall_seconds=wall,
                           params={'rho_step': expsum.rho_step, 'M': expsum.M, 'N': expsum.N})


def direct_history_sum(problem: FractionalProblem, grid: TimeGrid, expsum: ExpSumApproximation) -> np.ndarray:
    '''The same approximation as evaluate_fast, summed directly at O(P^2 Lambda) cost.'''
    problem.check_grid(grid)
    nodes = grid.points if grid.points[0] <= problem.a else np.concatenate([[problem.a], grid.points])
    c = c_alpha(problem.alpha)
    betas = -np.asarray(expsum.rates)
    samples = np.asarray(problem.f(nodes), dtype=float)
    values = np.zeros(nodes.size)
    for n in range(1, nodes.size):
        total = local_weight(problem.alpha, nodes[n] - nodes[n - 1]) * samples[n]
        for j in range(1, n):
            total += np.sum(k_weight(c, expsum.weights, betas, nodes[n], nodes[j - 1], nodes[j])) * samples[j]
        values[n] = total
    return values[nodes.size - len(grid):]


class ExpSumIntegrator(BaseEstimator):
    '''Exp-sum fast evaluator; truncation selected for [delta, b - a].

    Params
    ------
    rho_step: float
        Trapezoidal step of the kernel discretisation.
    tol: float
        Tail tolerance for the truncation selection.
    delta: float, optional
        Lower end of the kernel validity range, defaults to the smallest grid step.
    '''

    def __init__(self, rho_step=0.25, tol=1e-8, delta=None):
        self.rho_step = rho_step
        self.tol = tol
        self.delta = delta

    def evaluate(self, problem, grid):
        if not self.rho_step > 0 or not self.tol > 0:
            raise ConfigurationError('rho_step and tol must be positive, got {0}, {1}'.format(self.rho_step, self.tol))
        problem.check_grid(grid)
        nodes = grid.points if grid.points[0] <= problem.a else np.concatenate([[problem.a], grid.points])
        delta = float(np.min(np.diff(nodes))) if self.delta is None else float(self.delta)
        t_max = nodes[-1] - nodes[0]
        if not 0 < delta <= t_max:
            raise ConfigurationError('delta must lie in (0, {0}], got {1}'.format(t_max, delta))
        if delta == t_max:
            # single step: the history sum is empty
            t_max = 2 * delta
        self.expsum_ = fit_expsum(problem.alpha, self.rho_step, delta, t_max, self.tol)
        self.trace_ = evaluate_fast(problem, grid, self.expsum_, delta_guard=delta)
        return self.trace_
