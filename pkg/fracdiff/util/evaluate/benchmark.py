'''Time evaluators over a sweep of grid sizes and report how cost and state grow with P.
'''
import logging
import sys
import time

import numpy as np
import pandas as pd
from sklearn.base import clone

from ..problem import TimeGrid

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ['method', 'P', 'lambda', 'wall_seconds', 'peak_state_count']


def print_results_table(results, rows, cols, cellsize=20, file=None):
    file = sys.stdout if file is None else file
    row_format = ("{:>" + str(cellsize) + "}") * (len(cols) + 1)
    print(row_format.format("", *cols), file=file)
    print("".join(["="] * cellsize * (len(cols) + 1)), file=file)
    for rh, row in zip(rows, results):
        print(row_format.format(rh, *row), file=file)


def peak_state_count(trace):
    '''Number of values carried from one time step to the next.

    The oracle keeps every sample of f, the fast evaluators a fixed set of node
    or term states.
    '''
    return int(trace.n_terms)


def _lambda(trace):
    if trace.method == 'oracle':
        return 0
    return int(trace.params.get('n_nodes', trace.n_terms))


def time_evaluator(estimator, problem, grid, repeats=3):
    '''Best-of-`repeats` wall time of estimator.evaluate(problem, grid), and the last trace.'''
    if repeats < 1:
        raise ValueError('repeats must be >= 1, got {0}'.format(repeats))
    best, trace = np.inf, None
    for _ in range(repeats):
        start = time.perf_counter()
        trace = estimator.evaluate(problem, grid)
        best = min(best, time.perf_counter() - start)
    return best, trace


def compare_methods(estimators, problem, sizes, repeats=3):
    '''Benchmark every estimator on uniform grids of P steps over [a, b].

    Params
    ------
    estimators: dict
        'name': estimator pairs; each estimator is cloned before every size.
    problem: FractionalProblem
    sizes: list of int
        Values of P to sweep.
    repeats: int
        Wall times are the best of this many runs.

    Returns
    -------
    pd.DataFrame with columns method, P, lambda, wall_seconds, peak_state_count.
    '''
    if type(estimators) != dict:
        raise ValueError("estimators needs to be a dict containing 'name': estimator pairs")
    records = []
    for name in estimators:
        for P in sizes:
            grid = TimeGrid.uniform(problem.a, problem.b, P)
            wall, trace = time_evaluator(clone(estimators[name]), problem, grid, repeats)
            logger.info('bench {0}: P={1}, {2:.4f}s'.format(name, P, wall))
            records.append({'method': name, 'P': int(P), 'lambda': _lambda(trace),
                            'wall_seconds': wall, 'peak_state_count': peak_state_count(trace)})
    return pd.DataFrame.from_records(records, columns=BENCH_COLUMNS)


def doubling_ratios(frame):
    '''Wall-time ratios between consecutive sizes of each method's sweep.'''
    ratios = {}
    for name, group in frame.groupby('method', sort=False):
        times = group.sort_values('P')['wall_seconds'].to_numpy()
        ratios[name] = times[1:] / times[:-1]
    return ratios


def summarize(frame, file=None, cellsize=18):
    '''Print a method x P table of wall times, as in a results comparison.'''
    sizes = sorted(frame['P'].unique())
    rows = list(dict.fromkeys(frame['method']))
    results = []
    for name in rows:
        group = frame[frame['method'] == name].set_index('P')
        results.append(['{0:.4f}s ({1})'.format(group.loc[P, 'wall_seconds'], group.loc[P, 'peak_state_count'])
                        if P in group.index else '' for P in sizes])
    print_results_table(results, rows, ['P=' + str(P) for P in sizes], cellsize, file=file)
