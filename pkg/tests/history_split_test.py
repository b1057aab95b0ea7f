import numpy as np
import pytest
from numpy.testing import assert_array_equal

from fracdiff import ConfigurationError, SplitIntegrator
from fracdiff.diffusive.core import DiffusiveNodes, DiffusiveState, step_backward_euler
from fracdiff.diffusive.gauss_laguerre import build_rule, run_gl
from fracdiff.diffusive.history_split import (HistoryDiffusiveState, HistoryWindow, history_evaluate, history_step,
                                              local_part, mu_reference, split_evaluate)
from fracdiff.util.problem import (ConstantFunction, FractionalProblem, MonomialFunction, SineFunction,
                                   SourceFunction, TimeGrid)


class RecordingFunction(SourceFunction):
    '''f = 1, remembering the latest time it was evaluated at.'''

    def __init__(self):
        self.latest = []

    def _evaluate(self, t):
        self.latest.append(float(np.max(t)))
        return np.ones(t.shape)


def one_node_state(r, window=0.5, start=0.5, alpha=0.5):
    nodes = DiffusiveNodes.from_r([r], alpha, window=window)
    return HistoryDiffusiveState(build_rule(1), nodes, np.zeros(1), window, start, (1 - alpha, alpha))


def test_history_window():
    assert HistoryWindow(0.5).width == 0.5
    for width in (0, -0.1):
        with pytest.raises(ValueError):
            HistoryWindow(width)
    problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
    with pytest.raises(ValueError):
        HistoryWindow(1.0).check(problem)


class TestLocalPart:
    def test_constant(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        for t in (0.5, 0.75, 1.0):
            assert local_part(problem, 0.5, t) == pytest.approx(0.7978845608, rel=1e-10)

    def test_whole_interval(self):
        problem = FractionalProblem(0.5, 0, 1, MonomialFunction(1))
        assert local_part(problem, 1.0, 1.0) == pytest.approx(0.7522527781, rel=1e-10)

    def test_window_before_start(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        with pytest.raises(ValueError):
            local_part(problem, 0.5, 0.3)


class TestHistoryStep:
    def setup_method(self):
        self.ones = FractionalProblem(0.5, 0, 1, ConstantFunction(1))

    def test_one_euler_step(self):
        state = history_step(one_node_state(0.0), self.ones, 0.6, method='euler')
        expected = 0.1 * np.exp(-0.5) / np.pi / 1.1
        assert state.values[0] == pytest.approx(expected, rel=1e-12)
        assert state.values[0] == pytest.approx(0.0175513, abs=1e-7)
        assert state.current_time == 0.6

    def test_zero_window_matches_diffusive_step(self):
        state = history_step(one_node_state(0.7, window=0.0, start=0.0), self.ones, 0.1, method='euler')
        plain = step_backward_euler(DiffusiveState(DiffusiveNodes.from_r([0.7], 0.5), [0.0], 0.0), self.ones, 0.1)
        assert state.values[0] == pytest.approx(plain.values[0], rel=1e-15)

    def test_far_nodes_receive_no_forcing(self):
        state = one_node_state(20.0)
        assert state.nodes.forcing[0] == 0.0
        for t in np.linspace(0.55, 1.0, 10):
            state = history_step(state, self.ones, t)
            assert state.values[0] == 0.0

    def test_samples_are_delayed(self):
        f = RecordingFunction()
        problem = FractionalProblem(0.5, 0, 1, f)
        for method in ('euler', 'trapezoidal'):
            state = HistoryDiffusiveState.initial(build_rule(8), problem, 0.5)
            for t in np.linspace(0.5, 1.0, 21)[1:]:
                f.latest.clear()
                state = history_step(state, problem, t, method=method)
                assert max(f.latest) <= t - 0.5 + 1e-12

    def test_invalid_steps(self):
        state = one_node_state(0.0)
        with pytest.raises(ValueError):
            history_step(state, self.ones, 0.5)
        with pytest.raises(ValueError):
            history_step(state, self.ones, 0.7, method='rk4')
        early = one_node_state(0.0, start=0.1)
        with pytest.raises(ValueError):
            history_step(early, self.ones, 0.2)

    @pytest.mark.parametrize('method, low, high', [('euler', 1.7, 2.3), ('trapezoidal', 3.4, 4.6)])
    def test_converges_to_reference(self, method, low, high):
        exact = mu_reference(self.ones, 0.5, 1.0, 0.0)
        errors = []
        for P in (64, 128, 256):
            state = one_node_state(0.0)
            for t in np.linspace(0.5, 1.0, P + 1)[1:]:
                state = history_step(state, self.ones, t, method=method)
            errors.append(abs(state.values[0] - exact))
        ratios = np.array(errors[:-1]) / np.array(errors[1:])
        assert np.all((ratios >= low) & (ratios <= high)), ratios


class TestMuReference:
    def test_closed_form_matches_quadrature(self):
        closed = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        quadrature = FractionalProblem(0.5, 0, 1, 1.0 * ConstantFunction(1))
        for r in (-2.0, 0.0, 1.0, 3.0):
            assert mu_reference(quadrature, 0.5, 1.0, r) == pytest.approx(mu_reference(closed, 0.5, 1.0, r), rel=1e-8)

    def test_zero_at_start_and_envelope(self):
        problem = FractionalProblem(0.5, 0, 1, SineFunction())
        assert mu_reference(problem, 0.5, 0.5, 0.0) == 0.0
        c = problem.order.c
        for r in (-4.0, -1.0, 0.0, 1.0, 2.0):
            bound = c * np.sin(0.5) * np.exp(-0.5 * r - 0.5 * np.exp(r))
            assert abs(mu_reference(problem, 0.5, 1.0, r)) <= bound * (1 + 1e-9)
        assert mu_reference(problem, 0.5, 1.0, 20.0) == 0.0

    @pytest.mark.parametrize('alpha', [0.25, 0.5, 0.75])
    def test_decay_envelopes(self, alpha):
        problem = FractionalProblem(alpha, 0, 1, SineFunction())
        c, sup_f, window, t = problem.order.c, np.sin(1.0), 0.5, 1.0
        r = np.linspace(-40, 40, 161)
        mu = np.abs(mu_reference(problem, window, t, r))
        right = r >= 0
        bound = np.where(right, c * sup_f * np.exp(-alpha * r - window * np.exp(np.minimum(r, 700.0))),
                         c * sup_f * (t - problem.a - window) * np.exp((1 - alpha) * r))
        assert np.all(mu <= bound * (1 + 1e-9) + 1e-300), r[mu > bound * (1 + 1e-9) + 1e-300]

    def test_outside_interval(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        with pytest.raises(ValueError):
            mu_reference(problem, 0.5, 0.3, 0.0)


class TestSplitEvaluate:
    def test_constant_example(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        trace = split_evaluate(problem, TimeGrid.uniform(0.5, 1, 512), 0.5, n_nodes=40)
        assert trace.final_value == pytest.approx(1.1283791671, rel=1e-3)
        history = trace.final_value - local_part(problem, 0.5, 1.0)
        assert history == pytest.approx(0.3304946063, rel=5e-3)
        assert trace.method == 'split-trapezoidal'
        assert trace.n_terms == 80
        assert trace.params['window'] == 0.5

    @pytest.mark.parametrize('alpha', [0.25, 0.5, 0.75])
    @pytest.mark.parametrize('power', [0, 1, 2])
    def test_matches_full_evaluation(self, alpha, power):
        problem = FractionalProblem(alpha, 0, 1, MonomialFunction(power))
        split = split_evaluate(problem, TimeGrid.uniform(0.5, 1, 512), 0.5).final_value
        full = run_gl(problem, TimeGrid.uniform(0, 1, 1024)).final_value
        exact = problem.analytic_solution(1.0)
        assert abs(split - full) / exact <= 2e-3
        assert abs(split - exact) / exact <= 2e-3

    def test_zero_source(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(0))
        trace = split_evaluate(problem, TimeGrid.uniform(0.5, 1, 16), 0.5)
        assert_array_equal(trace.values, 0.0)

    def test_vanishing_history(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        trace = split_evaluate(problem, TimeGrid([0.99, 1.0]), 0.99)
        history = trace.final_value - local_part(problem, 0.99, 1.0)
        assert 0 <= history <= 0.01
        assert trace.final_value == pytest.approx(problem.analytic_solution(1.0), rel=5e-3)

    def test_history_evaluate_of_initial_state(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        state = HistoryDiffusiveState.initial(build_rule(10), problem, 0.5)
        assert state.current_time == 0.5
        assert history_evaluate(state) == 0.0

    def test_grid_before_window(self):
        problem = FractionalProblem(0.5, 0, 1, ConstantFunction(1))
        with pytest.raises(ValueError):
            split_evaluate(problem, TimeGrid.uniform(0, 1, 16), 0.5)
        with pytest.raises(ValueError):
            split_evaluate(problem, TimeGrid.uniform(0.5, 1, 16), 1.0)


class TestSplitIntegrator:
    def setup_method(self):
        self.problem = FractionalProblem(0.5, 0, 1, MonomialFunction(1))
        self.grid = TimeGrid.uniform(0.5, 1, 128)

    def test_evaluate(self):
        model = SplitIntegrator(window=0.5, n_nodes=20, method='euler')
        trace = model.evaluate(self.problem, self.grid)
        assert model.trace_ is trace
        assert trace.method == 'split-euler'
        assert trace.final_value == pytest.approx(self.problem.analytic_solution(1.0), rel=1e-2)

    def test_invalid_params(self):
        for params in ({'window': 1.0}, {'window': 0}, {'n_nodes': 0}, {'method': 'rk4'}, {'n_local': 0},
                       {'scales': (1, 0)}):
            with pytest.raises(ConfigurationError):
                SplitIntegrator(**params).evaluate(self.problem, self.grid)
