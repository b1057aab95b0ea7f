'''Diffusive representation of the Riemann-Liouville integral.

For f on [a, b] and 0 < alpha < 1,

    I^alpha_a f(t) = int_R phi(t, r) dr,
    phi(t, r) = c_alpha e^((1-alpha) r) int_a^t exp(-(t - tau) e^r) f(tau) d tau,

and for every fixed r, phi(., r) solves the scalar initial value problem

    d phi / dt = -e^r phi + c_alpha e^((1-alpha) r) f(t),   phi(a, r) = 0.

The rates e^r span many orders of magnitude, so the steppers here are the A-stable
backward Euler and trapezoidal methods. Every node stores its coefficients in a
rescaled form: for r > 0 numerator and denominator of the update are divided by
e^r, so no intermediate exceeds c_alpha sup|f|.
'''
import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..util.problem import ConstantFunction, FractionalProblem, as_order

logger = logging.getLogger(__name__)

EXP_CLIP = 700.0
METHODS = ('euler', 'trapezoidal')


def _frozen(values):
    values = np.array(values, dtype=float)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class DiffusiveNodes:
    '''Diffusive nodes r_l with overflow-safe cached coefficients.

    With u = e^(-max(r, 0)) (`unit`) and v = e^(min(r, 0)) (`rate`) we have
    e^r = v / u, and the forcing coefficient is stored as
    g = c_alpha e^((1-alpha) r) u (`forcing`), which equals c_alpha e^(-alpha r) for
    r > 0. A history window w multiplies g by e^(-w e^r).

    Parameters
    ----------
    r: np.ndarray
        Node positions.
    alpha: float
        Fractional order.
    window: float
        Width of the local window whose forcing is damped away (0 for phi).
    '''
    r: np.ndarray
    alpha: float
    unit: np.ndarray
    rate: np.ndarray
    forcing: np.ndarray
    window: float = 0.0

    @classmethod
    def from_r(cls, r, alpha, window=0.0):
        order = as_order(alpha)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if not np.all(np.isfinite(r)):
            raise ValueError('diffusive nodes must be finite')
        if window < 0:
            raise ValueError('history window must be >= 0, got {0}'.format(window))
        unit = np.exp(-np.maximum(r, 0))
        rate = np.exp(np.minimum(r, 0))
        log_forcing = np.log(order.c) + (1 - order.alpha) * r - np.maximum(r, 0)
        if window > 0:
            with np.errstate(over='ignore'):
                log_forcing = log_forcing - window * np.exp(np.minimum(r, EXP_CLIP))
        forcing = np.exp(log_forcing)

        moderate = np.abs(r) <= EXP_CLIP
        assert np.allclose(rate[moderate] / unit[moderate], np.exp(r[moderate]), rtol=1e-13, atol=0), \
            'cached node rates are inconsistent with r'
        return cls(_frozen(r), order.alpha, _frozen(unit), _frozen(rate), _frozen(forcing), float(window))

    def __len__(self):
        return self.r.size

    def damping_factor(self, h, method='euler'):
        '''Amplification of phi over one step of size h with zero forcing.'''
        if method == 'euler':
            return self.unit / (self.unit + h * self.rate)
        if method == 'trapezoidal':
            half = 0.5 * h * self.rate
            return (self.unit - half) / (self.unit + half)
        raise ValueError('unknown stepping method {0!r}, expected one of {1}'.format(method, METHODS))


@dataclass(frozen=True, eq=False)
class DiffusiveState:
    '''Values phi(current_time, r_l) at every node.'''
    nodes: DiffusiveNodes
    values: np.ndarray
    current_time: float

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (len(self.nodes),):
            raise ValueError('got {0} values for {1} nodes'.format(values.size, len(self.nodes)))
        object.__setattr__(self, 'values', values)

    @classmethod
    def initial(cls, nodes, start):
        return cls(nodes, np.zeros(len(nodes)), float(start))


def euler_update(nodes, values, h, f_next):
    return (nodes.unit * values + h * nodes.forcing * f_next) / (nodes.unit + h * nodes.rate)


def trapezoidal_update(nodes, values, h, f_prev, f_next):
    half = 0.5 * h * nodes.rate
    return ((nodes.unit - half) * values + 0.5 * h * nodes.forcing * (f_prev + f_next)) / (nodes.unit + half)


def check_step(problem, current_time, t_next):
    h = t_next - current_time
    if not h > 0:
        raise ValueError('time step must be positive, got {0} (from {1} to {2})'.format(h, current_time, t_next))
    if t_next > problem.b + 1e-12 * max(1.0, abs(problem.b)):
        raise ValueError('cannot step past b={0}, asked for t={1}'.format(problem.b, t_next))
    return h


def step_backward_euler(state: DiffusiveState, problem: FractionalProblem, t_next) -> DiffusiveState:
    '''One backward Euler step of every node to t_next.
    '''
    t_next = float(t_next)
    h = check_step(problem, state.current_time, t_next)
    values = euler_update(state.nodes, state.values, h, problem.f(t_next))
    return DiffusiveState(state.nodes, values, t_next)


def step_trapezoidal(state: DiffusiveState, problem: FractionalProblem, t_next) -> DiffusiveState:
    '''One trapezoidal (Crank-Nicolson) step of every node to t_next.
    '''
    t_next = float(t_next)
    h = check_step(problem, state.current_time, t_next)
    values = trapezoidal_update(state.nodes, state.values, h, problem.f(state.current_time), problem.f(t_next))
    return DiffusiveState(state.nodes, values, t_next)


STEPPERS = {'euler': step_backward_euler, 'trapezoidal': step_trapezoidal}


def phi_reference(problem: FractionalProblem, t, r):
    '''Evaluate phi(t, r) directly from its integral definition.

    Constant f uses the closed form c_alpha f e^(-alpha r) (1 - exp(-(t-a) e^r));
    other f use adaptive quadrature after substituting u = (t - tau) e^r.

    Parameters
    ----------
    problem: FractionalProblem
    t: float
        Time in [a, b].
    r: float or np.ndarray
        Node position(s).

    Returns
    -------
    float or np.ndarray, matching the shape of r.
    '''
    if not problem.a <= t <= problem.b:
        raise ValueError('t={0} lies outside [{1}, {2}]'.format(t, problem.a, problem.b))
    c = problem.order.c
    alpha = problem.alpha
    r_arr = np.asarray(r, dtype=float)
    elapsed = t - problem.a
    if isinstance(problem.f, ConstantFunction):
        with np.errstate(over='ignore'):
            result = -c * problem.f.value * np.exp(-alpha * r_arr) * np.expm1(-elapsed * np.exp(r_arr))
    else:
        result = np.array([phi_quadrature(problem, t, ri) for ri in r_arr.ravel()]).reshape(r_arr.shape)
    if np.ndim(r) == 0:
        return float(result)
    return result


def phi_quadrature(problem, t, r, lower=0.0):
    '''c_alpha e^(-alpha r) int_lower^U e^(-u) f(t - u e^(-r)) du with U = (t - a) e^r.'''
    upper = (t - problem.a) * np.exp(min(r, EXP_CLIP))
    upper = min(upper, lower + 60.0)
    if upper <= lower or lower > 745.0:
        return 0.0
    scale = np.exp(-r)
    value, _ = integrate.quad(lambda u: np.exp(-u) * problem.f(max(t - u * scale, problem.a)), lower, upper,
                              epsabs=0.0, epsrel=1e-12, limit=200)
    return problem.order.c * np.exp(-problem.alpha * r) * value
