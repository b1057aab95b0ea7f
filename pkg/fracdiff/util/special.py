'''Special functions needed by the fractional integral evaluators.

Gamma uses a Lanczos approximation (g=7, nine coefficients) with the reflection
formula for arguments below 1/2. The incomplete gamma functions switch between the
power series (x < s + 1) and a modified Lentz continued fraction (x >= s + 1).
'''
import math

import numpy as np

from .errors import ConvergenceError

MACHEP = np.finfo(float).eps
MAXLOG = math.log(np.finfo(float).max)
FPMIN = np.finfo(float).tiny / MACHEP

LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
MAX_ITERATIONS = 500


def _check_order(alpha):
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise ValueError('fractional order alpha must lie strictly inside (0, 1), got {0}'.format(alpha))
    return alpha


def c_alpha(alpha):
    '''Constant sin(pi alpha) / pi of the diffusive representation.
    '''
    alpha = _check_order(alpha)
    return math.sin(math.pi * alpha) / math.pi


def _lanczos(z):
    '''Return (series, t) for Gamma(z + 1) = sqrt(2 pi) t^(z + 1/2) e^(-t) series.
    '''
    series = LANCZOS_COEFFICIENTS[0]
    for i in range(1, len(LANCZOS_COEFFICIENTS)):
        series += LANCZOS_COEFFICIENTS[i] / (z + i)
    return series, z + LANCZOS_G + 0.5


def gamma(x):
    '''Euler gamma function for positive real arguments.

    Parameters
    ----------
    x: float
        Argument, must be strictly positive.

    Returns
    -------
    float
        Gamma(x), or inf when the result exceeds the double range.
    '''
    x = float(x)
    if not x > 0:
        raise ValueError('gamma is only defined here for x > 0, got {0}'.format(x))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1 - x))
    z = x - 1
    series, t = _lanczos(z)
    if z < 140:
        return math.sqrt(2 * math.pi) * t ** (z + 0.5) * math.exp(-t) * series
    exponent = (z + 0.5) * math.log(t) - t + math.log(math.sqrt(2 * math.pi) * series)
    if exponent > MAXLOG:
        return math.inf
    return math.exp(exponent)


def log_gamma(x):
    '''Natural logarithm of Gamma(x) for x > 0.
    '''
    x = float(x)
    if not x > 0:
        raise ValueError('log_gamma is only defined here for x > 0, got {0}'.format(x))
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1 - x)
    z = x - 1
    series, t = _lanczos(z)
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(series)


def _check_incomplete(s, x):
    s, x = float(s), float(x)
    if not 0 < s <= 1:
        raise ValueError('incomplete gamma requires 0 < s <= 1, got s={0}'.format(s))
    if not x >= 0:
        raise ValueError('incomplete gamma requires x >= 0, got x={0}'.format(x))
    return s, x


def _series(s, x):
    '''Lower incomplete gamma by its power series, for x < s + 1.'''
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(MAX_ITERATIONS):
        ap += 1
        term *= x / ap
        total += term
        if abs(term) < abs(total) * MACHEP:
            return total * math.exp(s * math.log(x) - x)
    raise ConvergenceError('incomplete gamma series did not converge for s={0}, x={1}'.format(s, x))


def _continued_fraction(s, x):
    '''Upper incomplete gamma by modified Lentz, for x >= s + 1.'''
    b = x + 1 - s
    c = 1 / FPMIN
    d = 1 / b
    h = d
    for i in range(1, MAX_ITERATIONS + 1):
        an = -i * (i - s)
        b += 2
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < MACHEP:
            return math.exp(s * math.log(x) - x) * h
    raise ConvergenceError('incomplete gamma continued fraction did not converge for s={0}, x={1}'.format(s, x))


def upper_incomplete_gamma(s, x):
    '''Gamma(s, x) = int_x^inf rho^(s-1) e^(-rho) d rho for 0 < s <= 1, x >= 0.
    '''
    s, x = _check_incomplete(s, x)
    if x == 0:
        return gamma(s)
    if x < s + 1:
        return gamma(s) - _series(s, x)
    return _continued_fraction(s, x)


def lower_incomplete_gamma(s, x):
    '''gamma(s, x) = int_0^x rho^(s-1) e^(-rho) d rho for 0 < s <= 1, x >= 0.
    '''
    s, x = _check_incomplete(s, x)
    if x == 0:
        return 0.0
    if x < s + 1:
        return _series(s, x)
    return gamma(s) - _continued_fraction(s, x)
