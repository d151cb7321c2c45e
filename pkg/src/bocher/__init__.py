"""Exact symbolic toolkit for 2D conformally superintegrable Laplace systems.

The package provides an exact computer-algebra kernel (Gaussian rationals,
formal square roots, multivariate rational functions, Laurent expansion),
a differential-operator algebra, the catalog of the eight Laplace
superintegrable systems, Bertrand-Darboux integrability machinery,
the six Bocher contractions, conformal Stackel transforms with their
quadratic algebras, and a CLI that regenerates the contraction tables.
"""

from bocher.scalars import GaussRat
from bocher.poly import Ring, Poly
from bocher.ratfun import RatFun
from bocher.laurent import LaurentSeries, laurent_expand, leading_term

__all__ = [
    "GaussRat",
    "Ring",
    "Poly",
    "RatFun",
    "LaurentSeries",
    "laurent_expand",
    "leading_term",
]

__version__ = "0.1.0"
