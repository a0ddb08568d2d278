"""
nlica: nonlinear independent component analysis of multivariate paths
through signature cumulants.
"""

__version__ = "1.0.0"
