'''Problem statement types: fractional order, time grid, source function, problem.

All objects are immutable after construction; numpy arrays they hold are marked
read-only.
'''
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import pandas as pd

from .special import c_alpha, gamma


def _frozen_array(values):
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FractionalOrder:
    '''Order alpha of the fractional integral, strictly inside (0, 1).
    '''
    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0 < alpha < 1:
            raise ValueError('alpha must lie strictly inside (0, 1), got {0}'.format(alpha))
        object.__setattr__(self, 'alpha', alpha)

    def __float__(self):
        return self.alpha

    @property
    def c(self):
        return c_alpha(self.alpha)


def as_order(alpha: Union[float, FractionalOrder]) -> FractionalOrder:
    if isinstance(alpha, FractionalOrder):
        return alpha
    return FractionalOrder(alpha)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    '''Strictly increasing time points t_0 < t_1 < ... < t_P with P >= 1.
    '''
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).ravel()
        if points.size < 2:
            raise ValueError('a time grid needs at least two points (P >= 1), got {0}'.format(points.size))
        if not np.all(np.isfinite(points)):
            raise ValueError('time grid points must be finite')
        steps = np.diff(points)
        if np.any(steps <= 0):
            bad = int(np.argmax(steps <= 0)) + 1
            raise ValueError('time grid must be strictly increasing; step {0} is {1}'.format(bad, steps[bad - 1]))
        object.__setattr__(self, 'points', _frozen_array(points))

    @classmethod
    def uniform(cls, a, b, steps):
        if int(steps) < 1:
            raise ValueError('number of steps must be >= 1, got {0}'.format(steps))
        return cls(np.linspace(a, b, int(steps) + 1))

    @classmethod
    def from_csv(cls, path):
        '''Read a grid from a CSV file with a `t` column.'''
        frame = pd.read_csv(path)
        if 't' not in frame.columns:
            raise ValueError('grid file {0} has no `t` column'.format(path))
        return cls(frame['t'].to_numpy(dtype=float))

    def __len__(self):
        return self.points.size

    @property
    def n_steps(self):
        return self.points.size - 1

    @property
    def steps(self):
        return np.diff(self.points)

    @property
    def min_step(self):
        return float(np.min(self.steps))


class SourceFunction:
    '''A real function f of time, evaluable on numpy arrays.

    Subclasses implement `_evaluate`; `analytic_integral` returns the closed form of
    the Riemann-Liouville integral when one is known, else None.
    '''
    name = 'function'

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        values = self._evaluate(t_arr)
        if np.ndim(t) == 0:
            return float(values)
        return values

    def _evaluate(self, t):
        raise NotImplementedError

    def check_domain(self, a, b):
        '''Raise ValueError when the function cannot be evaluated on [a, b].'''

    def analytic_integral(self, alpha, a, t):
        return None

    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __mul__(self, scale):
        return LinearCombination([(float(scale), self)])

    __rmul__ = __mul__

    def __repr__(self):
        return self.name


class ConstantFunction(SourceFunction):
    def __init__(self, value=1.0):
        self.value = float(value)
        self.name = 'const:{0!r}'.format(self.value)

    def _evaluate(self, t):
        return np.full(t.shape, self.value)

    def analytic_integral(self, alpha, a, t):
        alpha = float(alpha)
        return self.value * np.asarray(t - a, dtype=float) ** alpha / gamma(alpha + 1)


class MonomialFunction(SourceFunction):
    '''tau^p with p >= 0.'''

    def __init__(self, power):
        self.power = float(power)
        if self.power < 0:
            raise ValueError('monomial power must be >= 0, got {0}'.format(self.power))
        self.name = 'monomial:{0!r}'.format(self.power)

    def _evaluate(self, t):
        if not self.power.is_integer() and np.any(t < 0):
            raise ValueError('tau^{0} is undefined for negative tau'.format(self.power))
        return t ** self.power

    def check_domain(self, a, b):
        if not self.power.is_integer() and a < 0:
            raise ValueError('tau^{0} is undefined on [{1}, {2}]'.format(self.power, a, b))

    def analytic_integral(self, alpha, a, t):
        if a != 0:
            return None
        from ..oracle.product_integration import analytic_monomial
        return analytic_monomial(alpha, self.power, t)


class ShiftedMonomialFunction(SourceFunction):
    '''(tau - shift)^p with p >= 0, defined for tau >= shift.'''

    def __init__(self, power, shift=0.0):
        self.power = float(power)
        self.shift = float(shift)
        if self.power < 0:
            raise ValueError('monomial power must be >= 0, got {0}'.format(self.power))
        self.name = 'shifted:{0!r}'.format(self.power)

    def _evaluate(self, t):
        shifted = t - self.shift
        if np.any(shifted < 0):
            raise ValueError('(tau - {0})^{1} is evaluated before its shift'.format(self.shift, self.power))
        return shifted ** self.power

    def check_domain(self, a, b):
        if a < self.shift:
            raise ValueError('(tau - {0})^p is undefined below {0}, interval starts at {1}'.format(self.shift, a))

    def analytic_integral(self, alpha, a, t):
        if a != self.shift:
            return None
        from ..oracle.product_integration import analytic_monomial
        return analytic_monomial(alpha, self.power, np.asarray(t, dtype=float) - a)


class SineFunction(SourceFunction):
    name = 'sin'

    def _evaluate(self, t):
        return np.sin(t)


class ExponentialFunction(SourceFunction):
    name = 'exp'

    def _evaluate(self, t):
        return np.exp(t)


class SampledFunction(SourceFunction):
    '''Piecewise-linear interpolant of (time, value) samples.

    Evaluation outside the sampled range is a domain error.
    '''

    def __init__(self, times: Sequence[float], values: Sequence[float], name='sampled'):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError('sampled function needs matching 1d time and value arrays of length >= 2')
        if np.any(np.diff(times) <= 0):
            raise ValueError('sample times must be strictly increasing')
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError('samples must be finite')
        self.times = _frozen_array(times)
        self.values = _frozen_array(values)
        self.name = name

    @classmethod
    def from_csv(cls, path):
        '''Load samples from a CSV file with header `t,f`.'''
        frame = pd.read_csv(path, encoding='utf-8')
        if list(frame.columns[:2]) != ['t', 'f']:
            raise ValueError('sample file {0} must have header `t,f`, got {1}'.format(path, list(frame.columns)))
        return cls(frame['t'].to_numpy(dtype=float), frame['f'].to_numpy(dtype=float),
                   name='csv:{0}'.format(path))

    def _evaluate(self, t):
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise ValueError('sampled function is defined on [{0}, {1}] only'.format(self.times[0], self.times[-1]))
        return np.interp(t, self.times, self.values)

    def check_domain(self, a, b):
        if a < self.times[0] or b > self.times[-1]:
            raise ValueError('samples cover [{0}, {1}] but the problem needs [{2}, {3}]'.format(
                self.times[0], self.times[-1], a, b))


class LinearCombination(SourceFunction):
    '''sum_i c_i f_i; the closed form integral exists when every term has one.'''

    def __init__(self, terms):
        flat = []
        for scale, func in terms:
            if isinstance(func, LinearCombination):
                flat.extend((scale * inner_scale, inner) for inner_scale, inner in func.terms)
            else:
                flat.append((float(scale), func))
        self.terms = tuple(flat)
        self.name = ' + '.join('{0!r}*{1}'.format(c, f) for c, f in self.terms)

    def _evaluate(self, t):
        total = np.zeros(t.shape)
        for scale, func in self.terms:
            total = total + scale * func._evaluate(t)
        return total

    def check_domain(self, a, b):
        for _, func in self.terms:
            func.check_domain(a, b)

    def analytic_integral(self, alpha, a, t):
        total = 0.0
        for scale, func in self.terms:
            part = func.analytic_integral(alpha, a, t)
            if part is None:
                return None
            total = total + scale * part
        return total


def parse_function_spec(spec: str, a=0.0) -> SourceFunction:
    '''Build a SourceFunction from `const:c`, `monomial:p`, `shifted:p`, `sin`, `exp` or `csv:path`.
    '''
    kind, _, arg = spec.partition(':')
    try:
        if kind == 'const':
            return ConstantFunction(float(arg))
        if kind == 'monomial':
            return MonomialFunction(float(arg))
        if kind == 'shifted':
            return ShiftedMonomialFunction(float(arg), shift=a)
    except ValueError as e:
        raise ValueError('invalid function spec {0!r}: {1}'.format(spec, e))
    if kind == 'sin' and not arg:
        return SineFunction()
    if kind == 'exp' and not arg:
        return ExponentialFunction()
    if kind == 'csv' and arg:
        return SampledFunction.from_csv(arg)
    raise ValueError('unknown function spec {0!r}; expected const:c, monomial:p, shifted:p, sin, exp or csv:path'.format(spec))


@dataclass(frozen=True, eq=False)
class FractionalProblem:
    '''I^alpha_a f on [a, b].'''
    order: FractionalOrder
    a: float
    b: float
    f: SourceFunction

    def __post_init__(self):
        object.__setattr__(self, 'order', as_order(self.order))
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise ValueError('interval must satisfy a < b, got [{0}, {1}]'.format(a, b))
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)
        self.f.check_domain(a, b)

    @property
    def alpha(self):
        return self.order.alpha

    def check_grid(self, grid: TimeGrid, start=None):
        '''Raise ValueError unless every grid point lies in [start, b] (start defaults to a).'''
        start = self.a if start is None else start
        tol = 1e-12 * max(1.0, abs(self.b))
        if grid.points[0] < start - tol or grid.points[-1] > self.b + tol:
            raise ValueError('grid [{0}, {1}] leaves the interval [{2}, {3}]'.format(
                grid.points[0], grid.points[-1], start, self.b))

    def analytic_solution(self, t):
        return self.f.analytic_integral(self.alpha, self.a, t)
