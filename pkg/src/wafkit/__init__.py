"""Weighted curvature inequalities and curvature flows for convex curves and hypersurfaces of revolution in space forms."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvexityError,
    DomainError,
    NumericalError,
    WafError,
)
from .spaceform import SpaceForm, Weight, make_space_form, make_weight, parse_weight

__all__ = [
    "ConfigError",
    "ConvexityError",
    "DomainError",
    "NumericalError",
    "SpaceForm",
    "WafError",
    "Weight",
    "__version__",
    "make_space_form",
    "make_weight",
    "parse_weight",
]
