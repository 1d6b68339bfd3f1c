"""Primal-dual conic program modelling, duality diagnostics, and projection."""

from .cones import Cone, cone, cone_product, dual, polar
from .program import ConicProgram, dualize
from .solver import SolveResult, solve
from .spaces import EuclideanSpace, LinearMap, Subspace, real, space, sym

__all__ = [
    "Cone", "cone", "cone_product", "dual", "polar",
    "ConicProgram", "dualize",
    "SolveResult", "solve",
    "EuclideanSpace", "LinearMap", "Subspace", "real", "space", "sym",
]

__version__ = "0.1.0"
