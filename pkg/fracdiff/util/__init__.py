'''Shared numerics: special functions, problem and grid types, traces.
'''
