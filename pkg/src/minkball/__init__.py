"""Support-function calculus for planar convex bodies and Pareto problems over Minkowski balls.

Bodies live on a uniform grid of ``n`` unit directions as support vectors;
their surface measures are atomic measures on the same grid.
"""

from .majorization import MajorizationResult, SublinearFunction, inclusion_up_to_translation, majorizes
from .measures import (
    GridMeasure,
    blaschke_sum,
    body_from_measure,
    disk_measure,
    integral_breadth,
    mixed_volume,
    pairing,
    surface_measure,
    symmetrize_measure,
    volume,
)
from .support_core import (
    DirectionGrid,
    GeometryError,
    SupportVector,
    breadth,
    convex_envelope,
    disk_support,
    make_grid,
    minkowski_combine,
    reconstruct_polygon,
    regular_polygon,
    support_of_polygon,
    symmetrize_support,
)

__version__ = "0.1.0"

__all__ = [
    "DirectionGrid", "GeometryError", "GridMeasure", "MajorizationResult", "SublinearFunction",
    "SupportVector", "blaschke_sum", "body_from_measure", "breadth", "convex_envelope",
    "disk_measure", "disk_support", "inclusion_up_to_translation", "integral_breadth",
    "majorizes", "make_grid", "minkowski_combine", "mixed_volume", "pairing",
    "reconstruct_polygon", "regular_polygon", "support_of_polygon", "surface_measure",
    "symmetrize_measure", "symmetrize_support", "volume",
]
