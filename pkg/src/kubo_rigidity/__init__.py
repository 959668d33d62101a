"""Kubo-Ando operator means and their rigidity on quantum positivity cones."""

from .cones import (
    ConeVerdict,
    SchmidtInfo,
    SchmidtNumberBound,
    is_ppt,
    is_psd,
    is_separable_small,
    schmidt_number_2x2,
    schmidt_number_pure_tensor,
    schmidt_rank,
)
from .hermitian import (
    Bipartite,
    LocalIsometryPair,
    apply_spectral_function,
    eigh,
    embed,
    jacobi_eigh,
    kron,
    partial_trace_second,
    partial_transpose,
    swap_middle_factors,
)
from .kubo_ando import (
    Family,
    RepresentingFunction,
    curvature_numeric,
    make_mean,
    mean,
    mean_commuting,
    parse_mean_spec,
)

__all__ = [
    "Bipartite",
    "ConeVerdict",
    "Family",
    "LocalIsometryPair",
    "RepresentingFunction",
    "SchmidtInfo",
    "SchmidtNumberBound",
    "apply_spectral_function",
    "curvature_numeric",
    "eigh",
    "embed",
    "is_ppt",
    "is_psd",
    "is_separable_small",
    "jacobi_eigh",
    "kron",
    "make_mean",
    "mean",
    "mean_commuting",
    "parse_mean_spec",
    "partial_trace_second",
    "partial_transpose",
    "schmidt_number_2x2",
    "schmidt_number_pure_tensor",
    "schmidt_rank",
    "swap_middle_factors",
]
