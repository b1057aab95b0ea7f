'''Exception types raised across fracdiff.

Domain and argument errors are plain `ValueError`s.
'''


class ConfigurationError(ValueError):
    '''An evaluator or command was configured with values it cannot run with.
    '''


class ConvergenceError(ArithmeticError):
    '''An iterative numerical procedure failed to reach its tolerance.
    '''
