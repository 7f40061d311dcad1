"""Combinatorial hives: generation by Grassmannian trace maximization, surface
statistics, and Littlewood-Richardson coefficient counting and estimation."""

from .core import (
    Hive,
    HivePolytope,
    Rhombus,
    ValidationReport,
    WeightTriple,
    assemble_polytope,
    build_boundary,
    check_saturation,
    enumerate_rhombi,
    validate_hive,
)
from .ensembles import EnsembleSpec, MatrixPair, sample, spectrum, triple_from_pair
from .generate import OptimizerSettings, generate_hive, optimize_coefficient, success_probability

__all__ = [
    "Hive", "HivePolytope", "Rhombus", "ValidationReport", "WeightTriple", "assemble_polytope",
    "build_boundary", "check_saturation", "enumerate_rhombi", "validate_hive", "EnsembleSpec",
    "MatrixPair", "sample", "spectrum", "triple_from_pair", "OptimizerSettings", "generate_hive",
    "optimize_coefficient", "success_probability",
]
