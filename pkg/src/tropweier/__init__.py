"""Exact tools for augmented metric graphs: potentials, divisors, slope
structures, Weierstrass reductions and equidistribution experiments."""

from .divisors import RankComputer, div, rank, reduce, reduce_divisor
from .functions import Measure, PLFunction, laplacian
from .graph import Divisor, MetricGraph, Point, TangentDirection, canonical_divisor, genus, refine, validate
from .potential import green, resistance, solve_poisson, zhang_measure

__version__ = "0.1.0"

__all__ = [
    "Divisor",
    "Measure",
    "MetricGraph",
    "PLFunction",
    "Point",
    "RankComputer",
    "TangentDirection",
    "canonical_divisor",
    "div",
    "genus",
    "green",
    "laplacian",
    "rank",
    "reduce",
    "reduce_divisor",
    "refine",
    "resistance",
    "solve_poisson",
    "validate",
    "zhang_measure",
]
