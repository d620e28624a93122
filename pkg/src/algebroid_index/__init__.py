"""Exact symbolic toolkit for the algebraic index theorem of Lie algebroids."""

from .scalar import Q, Poly, LaurentU, parse_poly

__version__ = "0.1.0"

__all__ = ["Q", "Poly", "LaurentU", "parse_poly", "__version__"]
