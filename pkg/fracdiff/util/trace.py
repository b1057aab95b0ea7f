'''EvaluationTrace: approximate I^alpha_a f values on a grid plus run diagnostics.
'''
import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .problem import TimeGrid

FLOAT_FORMAT = '%.17g'


@dataclass(frozen=True, eq=False)
class EvaluationTrace:
    '''Values of one evaluator on a time grid.

    Parameters
    ----------
    grid: TimeGrid
        Times t_0, ..., t_P at which values are reported.
    values: np.ndarray
        Approximations of I^alpha_a f(t_n), same length as the grid.
    method: str
        Tag of the evaluator that produced the values.
    n_terms: int
        Number of per-node or per-term states carried through the time loop.
    wall_seconds: float
        Wall time of the evaluation.
    '''
    grid: TimeGrid
    values: np.ndarray
    method: str
    n_terms: int = 0
    wall_seconds: float = 0.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise ValueError('trace has {0} values for {1} grid points'.format(values.size, len(self.grid)))
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @property
    def times(self):
        return self.grid.points

    @property
    def final_value(self):
        return float(self.values[-1])

    def to_frame(self, truth=None):
        '''DataFrame with columns t, value and, when truth is given, truth and rel_err.'''
        frame = pd.DataFrame({'t': self.grid.points, 'value': self.values})
        if truth is not None:
            truth = np.broadcast_to(np.asarray(truth, dtype=float), self.values.shape)
            frame['truth'] = truth
            with np.errstate(divide='ignore', invalid='ignore'):
                rel_err = np.abs(self.values - truth) / np.abs(truth)
            rel_err[truth == 0] = np.abs(self.values - truth)[truth == 0]
            frame['rel_err'] = rel_err
        return frame


def write_frame(frame: pd.DataFrame, out, fmt='csv'):
    '''Write a result table as CSV (17 significant digits, LF endings) or JSON records.

    `out` is a path or an open text stream.
    '''
    if fmt == 'csv':
        text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    elif fmt == 'json':
        records = [{k: _plain(v) for k, v in row.items()} for row in frame.to_dict(orient='records')]
        text = json.dumps(records, indent=1) + '\n'
    else:
        raise ValueError('unknown output format {0!r}, expected csv or json'.format(fmt))
    if hasattr(out, 'write'):
        out.write(text)
    else:
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    return value
