import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import integrate

from fracdiff import ConfigurationError, ProductIntegrationOracle
from fracdiff.oracle.product_integration import (analytic_monomial, direct_integral, moment_table, power_difference,
                                                 product_weights)
from fracdiff.util.problem import (ConstantFunction, FractionalProblem, MonomialFunction, SineFunction,
                                   TimeGrid)


def test_analytic_monomial():
    assert analytic_monomial(0.5, 0, 1.0) == pytest.approx(1.1283791671, rel=1e-10)
    assert analytic_monomial(0.5, 1, 1.0) == pytest.approx(0.7522527781, rel=1e-10)
    assert_allclose(analytic_monomial(0.5, 0, np.array([0.0, 4.0])), [0.0, 2 * 1.1283791671], rtol=1e-10)
    with pytest.raises(ValueError):
        analytic_monomial(0.5, -1, 1.0)
    with pytest.raises(ValueError):
        analytic_monomial(0.5, 1, -1.0)


def test_power_difference():
    value = power_difference(1 + 1e-10, 1.0, 1e-10, 0.5)
    assert value == pytest.approx(0.5e-10, rel=1e-6)
    assert_allclose(power_difference([2.0, 3.0], [0.0, 1.0], [2.0, 2.0], 1.5), [2 ** 1.5, 3 ** 1.5 - 1], rtol=1e-14)


def test_moments_match_quadrature():
    points = np.linspace(0, 0.9, 10)
    table = moment_table(points, 1.0, 0.3)
    for j, (lo, hi) in enumerate(zip(points[:-1], points[1:])):
        zeroth, _ = integrate.quad(lambda tau: (1.0 - tau) ** -0.7, lo, hi, epsabs=0, epsrel=1e-13)
        first, _ = integrate.quad(lambda tau: (1.0 - tau) ** -0.7 * tau, lo, hi, epsabs=0, epsrel=1e-13)
        assert table.zeroth[j] == pytest.approx(zeroth, rel=1e-10)
        assert table.first[j] == pytest.approx(first, rel=1e-9, abs=1e-14)
    with pytest.raises(ValueError):
        moment_table(points, 0.5, 0.3)


def test_product_weights_integrate_constants():
    points = np.array([0.0, 0.1, 0.35, 0.6, 1.0])
    weights = product_weights(points, 1.0, 0.5)
    assert np.sum(weights) == pytest.approx(2.0, rel=1e-14)
    assert np.all(weights > 0)


class TestDirectIntegral:
    def test_constant_is_exact(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        grid = TimeGrid.uniform(0, 1, 64)
        trace = direct_integral(problem, grid)
        assert_allclose(trace.values, problem.analytic_solution(grid.points), rtol=1e-13, atol=1e-15)
        assert trace.method == 'oracle'
        assert trace.n_terms == 65

    @pytest.mark.parametrize('alpha', [0.1, 0.5, 0.9])
    def test_linear_is_exact(self, alpha):
        problem = FractionalProblem(alpha, 0, 1, MonomialFunction(1))
        grid = TimeGrid(np.sort(np.concatenate([[0.0, 1.0], np.random.default_rng(2).uniform(0, 1, 62)])))
        trace = direct_integral(problem, grid)
        assert_allclose(trace.values, problem.analytic_solution(grid.points), rtol=1e-12, atol=1e-15)

    def test_second_order_for_quadratic(self):
        problem = FractionalProblem(0.5, 0, 1, MonomialFunction(2))
        exact = problem.analytic_solution(1.0)
        errors = [abs(direct_integral(problem, TimeGrid.uniform(0, 1, P)).final_value - exact) for P in (32, 64, 128)]
        ratios = np.array(errors[:-1]) / np.array(errors[1:])
        assert np.all((ratios >= 3.5) & (ratios <= 4.5)), ratios

    def test_linearity(self):
        grid = TimeGrid.uniform(0, 2, 100)
        f, g = SineFunction(), MonomialFunction(2)
        combined = direct_integral(FractionalProblem(0.3, 0, 2, f + 2 * g), grid).values
        separate = (direct_integral(FractionalProblem(0.3, 0, 2, f), grid).values
                    + 2 * direct_integral(FractionalProblem(0.3, 0, 2, g), grid).values)
        assert_allclose(combined, separate, rtol=1e-13, atol=1e-15)

    def test_grid_starting_after_a(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        trace = direct_integral(problem, TimeGrid([0.5, 1.0]))
        assert_allclose(trace.values, problem.analytic_solution(np.array([0.5, 1.0])), rtol=1e-13)

    def test_threads_agree(self):
        problem = FractionalProblem(0.5, 0, 1, SineFunction())
        grid = TimeGrid.uniform(0, 1, 1000)
        assert_array_equal(direct_integral(problem, grid, n_jobs=2).values, direct_integral(problem, grid).values)

    def test_grid_outside_interval(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        with pytest.raises(ValueError):
            direct_integral(problem, TimeGrid.uniform(0, 2, 8))


class TestProductIntegrationOracle:
    def test_evaluate(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        model = ProductIntegrationOracle(n_jobs=2)
        trace = model.evaluate(problem, TimeGrid.uniform(0, 1, 300))
        assert model.trace_ is trace
        assert trace.params['n_jobs'] == 2
        assert trace.final_value == pytest.approx(2 / np.sqrt(np.pi), rel=1e-12)

    def test_invalid_jobs(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        for n_jobs in (0, -2, 1.5):
            with pytest.raises(ConfigurationError):
                ProductIntegrationOracle(n_jobs=n_jobs).evaluate(problem, TimeGrid.uniform(0, 1, 8))
