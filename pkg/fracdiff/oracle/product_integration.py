'''Reference solutions: closed forms for monomials and direct product integration.

`direct_integral` integrates the kernel (t_n - tau)^(alpha-1) exactly against the
piecewise-linear interpolant of f on the grid, at O(P^2) cost.
'''
import logging
import time
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from ..util.errors import ConfigurationError, ConvergenceError
from ..util.problem import FractionalProblem, TimeGrid, as_order
from ..util.special import gamma
from ..util.trace import EvaluationTrace

logger = logging.getLogger(__name__)

CHUNK_SIZE = 256


def analytic_monomial(alpha, p, t):
    '''I^alpha_0 tau^p (t) = Gamma(p+1) / Gamma(p+1+alpha) t^(p+alpha).'''
    alpha = as_order(alpha).alpha
    p = float(p)
    if p < 0:
        raise ValueError('monomial power must be >= 0, got {0}'.format(p))
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError('analytic monomial integral needs t >= 0')
    result = gamma(p + 1) / gamma(p + 1 + alpha) * t_arr ** (p + alpha)
    if np.ndim(t) == 0:
        return float(result)
    return result


def power_difference(upper, lower, delta, p):
    '''upper^p - lower^p for upper = lower + delta >= lower >= 0, without cancellation.'''
    upper, lower, delta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (upper, lower, delta)))
    out = upper ** p
    mask = lower > 0
    if np.any(mask):
        low = lower[mask]
        out = np.array(out, dtype=float)
        out[mask] = low ** p * np.expm1(p * np.log1p(delta[mask] / low))
    return out


@dataclass(frozen=True, eq=False)
class MomentTable:
    '''Moments of (t - tau)^(alpha-1) over the intervals [tau_(j-1), tau_j] of a partition.

    zeroth[j] = int (t - tau)^(alpha-1) d tau, first[j] = int (t - tau)^(alpha-1) tau d tau.
    '''
    t: float
    zeroth: np.ndarray
    first: np.ndarray


def _interval_weights(far, near, delta, alpha):
    '''Zeroth moment and the two hat-function weights of each interval.

    far = t - tau_(j-1), near = t - tau_j, delta = tau_j - tau_(j-1).
    '''
    zeroth = power_difference(far, near, delta, alpha) / alpha
    lag_moment = power_difference(far, near, delta, alpha + 1) / (alpha + 1)
    with np.errstate(invalid='ignore', divide='ignore'):
        left = np.where(delta > 0, (lag_moment - near * zeroth) / delta, 0.0)
    right = zeroth - left
    return zeroth, lag_moment, left, right


def moment_table(points, t, alpha) -> MomentTable:
    points = np.asarray(points, dtype=float)
    alpha = as_order(alpha).alpha
    if points[-1] > t:
        raise ValueError('partition ends at {0}, after t={1}'.format(points[-1], t))
    far, near = t - points[:-1], t - points[1:]
    zeroth, lag_moment, _, _ = _interval_weights(far, near, np.diff(points), alpha)
    return MomentTable(float(t), zeroth, t * zeroth - lag_moment)


def product_weights(points, t, alpha):
    '''Weights v_k with int_(points[0])^t (t - tau)^(alpha-1) f~(tau) d tau = sum_k v_k f(points[k]).

    f~ is the piecewise-linear interpolant of f on `points`, which must end at or before t.
    '''
    points = np.asarray(points, dtype=float)
    alpha = as_order(alpha).alpha
    far, near = t - points[:-1], t - points[1:]
    _, _, left, right = _interval_weights(far, near, np.diff(points), alpha)
    weights = np.zeros(points.size)
    weights[:-1] += left
    weights[1:] += right
    return weights


def _chunk_values(nodes, samples, rows, alpha):
    t = nodes[rows][:, None]
    start, end = nodes[None, :-1], nodes[None, 1:]
    valid = end <= t
    far = np.where(valid, t - start, 0.0)
    near = np.where(valid, t - end, 0.0)
    delta = np.where(valid, end - start, 0.0)
    _, _, left, right = _interval_weights(far, near, delta, alpha)
    return left.dot(samples[:-1]) + right.dot(samples[1:])


def direct_integral(problem: FractionalProblem, grid: TimeGrid, n_jobs=1) -> EvaluationTrace:
    '''Product-integration reference values of I^alpha_a f on a grid.

    Exact up to round-off when f is piecewise linear on the grid (with a added as a
    node when the grid starts later).

    Parameters
    ----------
    problem: FractionalProblem
    grid: TimeGrid
    n_jobs: int
        Threads used over blocks of output times.
    '''
    problem.check_grid(grid)
    start_time = time.perf_counter()
    nodes = grid.points
    offset = 0
    if nodes[0] > problem.a:
        nodes = np.concatenate([[problem.a], nodes])
        offset = 1
    samples = np.asarray(problem.f(nodes), dtype=float)
    rows = np.arange(offset, nodes.size)
    chunks = [rows[i:i + CHUNK_SIZE] for i in range(0, rows.size, CHUNK_SIZE)]
    if n_jobs == 1:
        parts = [_chunk_values(nodes, samples, chunk, problem.alpha) for chunk in chunks]
    else:
        parts = Parallel(n_jobs=n_jobs, prefer='threads')(
            delayed(_chunk_values)(nodes, samples, chunk, problem.alpha) for chunk in chunks)
    values = np.concatenate(parts) / gamma(problem.alpha)
    if not np.all(np.isfinite(values)):
        raise ConvergenceError('product integration produced non-finite values')
    wall = time.perf_counter() - start_time
    logger.info('oracle: P={0}, {1:.3f}s'.format(grid.n_steps, wall))
    return EvaluationTrace(grid, values, 'oracle', n_terms=nodes.size, wall_seconds=wall,
                           params={'n_jobs': n_jobs})


class ProductIntegrationOracle(BaseEstimator):
    '''O(P^2) product-integration reference evaluator.
    '''

    def __init__(self, n_jobs=1):
        self.n_jobs = n_jobs

    def evaluate(self, problem, grid):
        if not isinstance(self.n_jobs, (int, np.integer)) or self.n_jobs == 0 or self.n_jobs < -1:
            raise ConfigurationError('n_jobs must be a positive integer or -1, got {0}'.format(self.n_jobs))
        self.trace_ = direct_integral(problem, grid, int(self.n_jobs))
        return self.trace_
