"""Collision and distance benchmark: mesh model against sphere model."""

from .environment import Environment, generate_environment
from .geometry import (
    LinkGeometry,
    PosedGeometry,
    check_collision,
    check_structure,
    distance_query,
    model_geometry,
)
from .runner import BenchReport, QueryRecord, records_from_csv, records_to_csv, run_benchmark

__all__ = [
    "BenchReport",
    "Environment",
    "LinkGeometry",
    "PosedGeometry",
    "QueryRecord",
    "check_collision",
    "check_structure",
    "distance_query",
    "generate_environment",
    "model_geometry",
    "records_from_csv",
    "records_to_csv",
    "run_benchmark",
]
