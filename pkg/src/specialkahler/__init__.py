"""Numerical verification toolkit for special Kahler and G2 gluing geometry."""
__version__ = "0.1.0"

from .chart_atlas import ChartId, WeightPair
from .errors import DomainError, GeometryError, NumericalError
from .reports import Check, Report

__all__ = ["ChartId", "WeightPair", "DomainError", "GeometryError", "NumericalError", "Check", "Report",
           "__version__"]
