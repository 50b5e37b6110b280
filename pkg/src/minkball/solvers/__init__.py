"""Feasible regions, the volume engine, optimality certificates and Pareto problems."""

from .certificates import (
    CERT_TOL,
    Certificate,
    check_external_certificate,
    check_external_flatten_certificate,
    check_internal_certificate,
)
from .problems import (
    CertificateWarning,
    FlatteningProblem,
    Frontier,
    ParetoPoint,
    VectorIsoResult,
    nondominated,
    perturbed_feasible,
    solve_external_urysohn,
    solve_external_urysohn_flatten,
    solve_internal_urysohn_flatten,
    solve_vector_isoperimetric,
    symmetrize_support_measure,
    trace_pareto_frontier,
    vector_isoperimetric,
)
from .region import FeasibleRegion, InfeasibleRegion, UnboundedRegion
from .volume import VolumeResult, maximize_volume

__all__ = [
    "CERT_TOL", "Certificate", "CertificateWarning", "FeasibleRegion", "FlatteningProblem",
    "Frontier", "InfeasibleRegion", "ParetoPoint", "UnboundedRegion", "VectorIsoResult",
    "VolumeResult", "check_external_certificate", "check_external_flatten_certificate",
    "check_internal_certificate", "maximize_volume", "nondominated", "perturbed_feasible",
    "solve_external_urysohn", "solve_external_urysohn_flatten", "solve_internal_urysohn_flatten",
    "solve_vector_isoperimetric", "symmetrize_support_measure", "trace_pareto_frontier",
    "vector_isoperimetric",
]
