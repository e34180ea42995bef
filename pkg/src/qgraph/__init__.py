"""Laplacians on metric graphs with general (non-self-adjoint) vertex conditions."""

from .boundary import BCClass, BCTag, BoundaryConditions, canonical_PL, cayley, cayley_poles, classify, quasi_weierstrass
from .classify import generator_verdict, report, similarity_verdict_star
from .errors import QGraphError
from .graph import EdgeFunction, MetricGraph, trace

__all__ = [
    "BCClass",
    "BCTag",
    "BoundaryConditions",
    "EdgeFunction",
    "MetricGraph",
    "QGraphError",
    "canonical_PL",
    "cayley",
    "cayley_poles",
    "classify",
    "generator_verdict",
    "quasi_weierstrass",
    "report",
    "similarity_verdict_star",
    "trace",
]

__version__ = "0.1.0"
