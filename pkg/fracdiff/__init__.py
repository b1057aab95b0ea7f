"""
.. include:: ../readme.md
"""
# Python `fracdiff` package for fast evaluation of Riemann-Liouville fractional integrals.

import logging

from .diffusive.gauss_laguerre import GaussLaguerreIntegrator
from .diffusive.history_split import SplitIntegrator
from .expsum.diffusive_nodes import DiffusiveTrapezoidalIntegrator
from .expsum.fast_stepping import ExpSumIntegrator
from .oracle.product_integration import ProductIntegrationOracle
from .util.errors import ConfigurationError, ConvergenceError
from .util.problem import FractionalOrder, FractionalProblem, TimeGrid, parse_function_spec
from .util.trace import EvaluationTrace

logging.getLogger(__name__).addHandler(logging.NullHandler())

FAST_EVALUATORS = GaussLaguerreIntegrator, SplitIntegrator, ExpSumIntegrator, DiffusiveTrapezoidalIntegrator
REFERENCE_EVALUATORS = ProductIntegrationOracle,

METHODS = {
    'gl-euler': lambda: GaussLaguerreIntegrator(method='euler'),
    'gl-trap': lambda: GaussLaguerreIntegrator(method='trapezoidal'),
    'expsum': ExpSumIntegrator,
    'oracle': ProductIntegrationOracle,
    'dr-euler': lambda: DiffusiveTrapezoidalIntegrator(method='euler'),
    'dr-trap': lambda: DiffusiveTrapezoidalIntegrator(method='trapezoidal'),
}
