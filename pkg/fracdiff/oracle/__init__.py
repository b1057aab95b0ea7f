'''Reference values for checking the fast evaluators.
'''
