"""Exact-arithmetic laboratory for self-similar rank-one transformations and flows."""

from .errors import SelfSimError, StageCapExceeded
from .tower import LevelSet, PointCoord, SelfSimilarParams, base_set, build_stage, correlation

__all__ = [
    "LevelSet",
    "PointCoord",
    "SelfSimError",
    "SelfSimilarParams",
    "StageCapExceeded",
    "base_set",
    "build_stage",
    "correlation",
]
__version__ = "0.1.0"
