"""
pydlista: debiased LISTA networks and confidence intervals for sparse
recovery.

"""

__version__ = '0.1.0'
