"""Wagner lift of a 2-D Riemannian metric to its orthonormal frame bundle."""

from . import connection, expr, geodesic, jets, lift, surface
from .expr import eval_jet, parse
from .jets import Jet
from .surface import ConformalSurface, catalog

__all__ = [
    "Jet",
    "ConformalSurface",
    "catalog",
    "connection",
    "eval_jet",
    "expr",
    "geodesic",
    "jets",
    "lift",
    "parse",
    "surface",
]

__version__ = "0.1.0"
