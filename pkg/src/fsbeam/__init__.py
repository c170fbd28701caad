"""Geometrically exact spatial Bernoulli-Euler beams on the Frenet-Serret frame."""

from fsbeam.splines import (
    KnotVector,
    NurbsCurve,
    basis_derivatives,
    curve_derivatives,
    elevate_degree,
    find_span,
    make_circular_arc,
    make_line,
    refine_uniform,
)

__version__ = "0.1.0"
