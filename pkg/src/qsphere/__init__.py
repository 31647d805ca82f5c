"""Numerical toolkit for the quantum odd sphere spectral triples."""

from .qcore import QContext

__version__ = "0.1.0"
__all__ = ["QContext", "__version__"]
