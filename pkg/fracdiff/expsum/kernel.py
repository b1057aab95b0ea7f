'''Exponential-sum approximation of the kernel K(t) = Gamma(1-alpha) t^(alpha-1).

K(t) = int_R e^((1-alpha) r) exp(-t e^r) dr; the trapezoidal rule with step h
(`rho_step`) truncated to n = -M..N gives

    K(t) ~ sum_n w_n exp(-beta_n t),  w_n = h e^((1-alpha) n h),  beta_n = e^(n h).

When t e^(N h) >= 1 - alpha >= t e^(-M h) the discarded tails are bounded by

    upper: t^(alpha-1) Gamma(1-alpha, t e^(N h)),
    lower: t^(alpha-1) gamma(1-alpha, t e^(-M h)).
'''
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..util.errors import ConvergenceError
from ..util.problem import FractionalOrder, as_order
from ..util.special import gamma, lower_incomplete_gamma, upper_incomplete_gamma

logger = logging.getLogger(__name__)

MAX_TRUNCATION = 10 ** 4
MAX_RATE_EXPONENT = 700.0
LARGE_TERM_COUNT = 2000


@dataclass(frozen=True, eq=False)
class ExpSumApproximation:
    '''Terms (w_n, beta_n), n = -M..N, stored in ascending n.

    `delta` and `t_max`, when set, give the range [delta, t_max] the truncation was
    selected for. Rates below the double range are flushed to 0.
    '''
    alpha: FractionalOrder
    rho_step: float
    M: int
    N: int
    weights: np.ndarray
    rates: np.ndarray
    delta: Optional[float] = None
    t_max: Optional[float] = None

    @property
    def n_terms(self):
        return self.M + self.N + 1

    @property
    def indices(self):
        return np.arange(-self.M, self.N + 1)

    @property
    def terms(self):
        return list(zip(self.weights.tolist(), self.rates.tolist()))


def build_expsum(alpha, rho_step, M, N, delta=None, t_max=None) -> ExpSumApproximation:
    order = as_order(alpha)
    rho_step = float(rho_step)
    if not rho_step > 0:
        raise ValueError('rho_step must be positive, got {0}'.format(rho_step))
    if int(M) != M or int(N) != N or M < 0 or N < 0:
        raise ValueError('truncation indices must be nonnegative integers, got M={0}, N={1}'.format(M, N))
    M, N = int(M), int(N)
    if N * rho_step > MAX_RATE_EXPONENT:
        raise ValueError('largest rate e^({0}) overflows; reduce N or rho_step'.format(N * rho_step))
    n = np.arange(-M, N + 1)
    weights = rho_step * np.exp((1 - order.alpha) * n * rho_step)
    rates = np.exp(n * rho_step)
    for arr in (weights, rates):
        arr.flags.writeable = False
    if weights.size > LARGE_TERM_COUNT:
        warnings.warn('exponential sum has {0} terms'.format(weights.size))
    return ExpSumApproximation(order, rho_step, M, N, weights, rates,
                               None if delta is None else float(delta), None if t_max is None else float(t_max))


def kernel_exact(alpha, t):
    '''K(t) = Gamma(1 - alpha) t^(alpha - 1) for t > 0.'''
    alpha = as_order(alpha).alpha
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError('kernel is only defined for t > 0')
    result = gamma(1 - alpha) * t_arr ** (alpha - 1)
    if np.ndim(t) == 0:
        return float(result)
    return result


def eval_expsum(approx: ExpSumApproximation, t):
    '''sum_n w_n exp(-beta_n t), accumulated in ascending n.'''
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError('exponential sum is evaluated for t >= 0 only')
    terms = approx.weights * np.exp(-np.multiply.outer(t_arr, approx.rates))
    result = np.sum(terms, axis=-1)
    if np.ndim(t) == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class TruncationBound:
    upper_tail: float
    lower_tail: float
    condition_satisfied: bool


def _upper_tail(alpha, rho_step, N, t):
    log_x = math.log(t) + N * rho_step
    if log_x > MAX_RATE_EXPONENT:
        return 0.0
    return t ** (alpha - 1) * upper_incomplete_gamma(1 - alpha, math.exp(log_x))


def _lower_tail(alpha, rho_step, M, t):
    s = 1 - alpha
    log_x = math.log(t) - M * rho_step
    if log_x < -30:
        # gamma(s, x) = x^s / s (1 - s x / (s + 1) + ...)
        return math.exp((alpha - 1) * math.log(t) + s * log_x) / s
    return t ** (alpha - 1) * lower_incomplete_gamma(s, math.exp(log_x))


def _condition(alpha, rho_step, M, N, t):
    log_t, log_s = math.log(t), math.log(1 - alpha)
    return log_t + N * rho_step >= log_s >= log_t - M * rho_step


def truncation_bounds(approx: ExpSumApproximation, t) -> TruncationBound:
    '''Bounds on the discarded tails sum_(n>N) and sum_(n<-M) at time t > 0.'''
    t = float(t)
    if not t > 0:
        raise ValueError('truncation bounds need t > 0, got {0}'.format(t))
    alpha = approx.alpha.alpha
    return TruncationBound(_upper_tail(alpha, approx.rho_step, approx.N, t),
                           _lower_tail(alpha, approx.rho_step, approx.M, t),
                           _condition(alpha, approx.rho_step, approx.M, approx.N, t))


def select_truncation(alpha, rho_step, delta, t_max, tol, max_index=MAX_TRUNCATION):
    '''Smallest (M, N) whose tail bounds stay below tol on [delta, t_max].

    Both bounds are monotone in t, so they are checked at delta and t_max together
    with the condition that makes them valid.

    Returns
    -------
    (int, int)
    '''
    alpha = as_order(alpha).alpha
    rho_step, delta, t_max, tol = float(rho_step), float(delta), float(t_max), float(tol)
    if not rho_step > 0:
        raise ValueError('rho_step must be positive, got {0}'.format(rho_step))
    if not 0 < delta < t_max:
        raise ValueError('need 0 < delta < t_max, got delta={0}, t_max={1}'.format(delta, t_max))
    if not tol > 0:
        raise ValueError('tol must be positive, got {0}'.format(tol))
    log_s = math.log(1 - alpha)

    N = next((n for n in range(max_index + 1)
              if math.log(delta) + n * rho_step >= log_s
              and _upper_tail(alpha, rho_step, n, delta) <= tol
              and _upper_tail(alpha, rho_step, n, t_max) <= tol), None)
    M = next((m for m in range(max_index + 1)
              if math.log(t_max) - m * rho_step <= log_s
              and _lower_tail(alpha, rho_step, m, delta) <= tol
              and _lower_tail(alpha, rho_step, m, t_max) <= tol), None)
    if N is None or M is None:
        raise ConvergenceError('tolerance {0} unreachable with M, N <= {1} (alpha={2}, rho_step={3}, '
                               'delta={4}, t_max={5}); failing side: {6}'.format(
                                   tol, max_index, alpha, rho_step, delta, t_max,
                                   'upper (N)' if N is None else 'lower (M)'))
    logger.info('selected truncation M={0}, N={1} for tol={2} on [{3}, {4}]'.format(M, N, tol, delta, t_max))
    return M, N


def fit_expsum(alpha, rho_step, delta, t_max, tol) -> ExpSumApproximation:
    '''select_truncation followed by build_expsum, recording [delta, t_max].'''
    M, N = select_truncation(alpha, rho_step, delta, t_max, tol)
    return build_expsum(alpha, rho_step, M, N, delta=delta, t_max=t_max)
