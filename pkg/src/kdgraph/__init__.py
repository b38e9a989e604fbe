"""Kirkwood-Dirac classicality for the DFT pair in dimension ``d``.

The package builds the KD-classical pure states ``psi_{ms}``, the divisor
graphs ``G(x0)`` that organise them, and convex-decomposition certificates
for KD-positive mixed states, with an independent LP oracle as cross-check.
"""

from .decompose import (
    DecompositionCertificate,
    Rejection,
    Tolerances,
    lp_membership,
    sweep_decompose,
    theorem1_decompose,
)
from .graph import GraphPath, build_graph, canonical_path, enumerate_paths
from .hilbert import DftPair, DensityOperator, ValidationError, kd_distribution, kd_grid
from .numtheory import factorize
from .purestates import PureStateLabel, build_pure_state, enumerate_all

__all__ = [
    "DecompositionCertificate", "DensityOperator", "DftPair", "GraphPath",
    "PureStateLabel", "Rejection", "Tolerances", "ValidationError",
    "build_graph", "build_pure_state", "canonical_path", "enumerate_all",
    "enumerate_paths", "factorize", "kd_distribution", "kd_grid",
    "lp_membership", "sweep_decompose", "theorem1_decompose",
]
