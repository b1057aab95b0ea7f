'''Diffusive representation: node ODE steppers, Gauss-Laguerre quadrature, local/history splitting.
'''
