"""
Transport-collapse solvers for scalar conservation laws with
heterogeneous fluxes, on the whole line or on an interval with boundary
data, together with entropy and operator-property verification.
"""

__version__ = "0.1.0"
