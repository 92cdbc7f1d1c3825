"""Symmetric hyperbolic polygons, their side-pairing groups and random walks on them."""

from hypwalk.exceptions import GeometryError, HypwalkError

__version__ = "0.1.0"

__all__ = ["GeometryError", "HypwalkError", "__version__"]
