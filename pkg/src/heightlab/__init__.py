"""heightlab: heights of points and metrized models, densities, and numerical
checks of height inequalities for Fano varieties."""
from __future__ import annotations

from .core import DiagonalForm, HomogeneousForm, MetricSpec, ProjectiveSpace, normalize_point
from .errors import BudgetExceeded, HeightlabError, InputError, QuadratureFailure
from .heights import height_of, point_height

__all__ = [
    "BudgetExceeded", "DiagonalForm", "HeightlabError", "HomogeneousForm", "InputError",
    "MetricSpec", "ProjectiveSpace", "QuadratureFailure", "height_of", "normalize_point",
    "point_height",
]

__version__ = "0.1.0"
