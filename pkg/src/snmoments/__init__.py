"""Charge-sector moment operators for permutation-symmetric random circuits.

Builds orthogonal symmetric-group irrep actions, assembles k-fold moment
operators block by block over charge sectors, and analyses spectral gaps,
commutant dimensions, frame potentials and convergence-step bounds.
"""
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
