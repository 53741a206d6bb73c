"""Exact character theory of GSp(4, q) and Bessel-model Hom dimensions.

The package builds the symplectic similitude group of degree four over a
small finite field, computes its character table from scratch with the
Dixon-Schneider algorithm in exact arithmetic, and evaluates Hom-space
dimensions against the Bessel subgroup R = T N for every nondegenerate
datum (a, b, c).
"""

from .ffield import Field, FieldElement, FieldError, make_field, quadratic_extension
from .cyclotomic import Cyclotomic, CyclotomicRing, get_ring

__version__ = "0.1.0"

__all__ = [
    "Field",
    "FieldElement",
    "FieldError",
    "make_field",
    "quadratic_extension",
    "Cyclotomic",
    "CyclotomicRing",
    "get_ring",
    "__version__",
]
