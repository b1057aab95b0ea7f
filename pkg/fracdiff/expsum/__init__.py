'''Exponential-sum kernel approximation and the recursive fast evaluators built on it.
'''
