"""Diversified recommendations via exact k-DPP sampling.

Thin Python surface over the C++ core: PCA reduction, quality-modulated
low-rank DPP kernels, exact sampling, diversity metrics and the offline
A/B/C evaluation harness.
"""

from ._core import (
    ReductionModel,
    brute_force_k_dpp,
    cosine,
    evaluate_files,
    fit_reduction,
    generate_synthetic_files,
    greedy_map_select,
    log_volume,
    mann_whitney_u,
    oracle_total_variation,
    project,
    quality_diversity_decomposition,
    reconstruct,
    sample_k_dpp,
)

__all__ = [
    "ReductionModel",
    "brute_force_k_dpp",
    "cosine",
    "evaluate_files",
    "fit_reduction",
    "generate_synthetic_files",
    "greedy_map_select",
    "log_volume",
    "mann_whitney_u",
    "oracle_total_variation",
    "project",
    "quality_diversity_decomposition",
    "reconstruct",
    "sample_k_dpp",
]
