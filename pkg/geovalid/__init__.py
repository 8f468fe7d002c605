from geovalid.facies import Facies, FaciesResult, folk_facies, mean_grain_size
from geovalid.mds import classical_mds
from geovalid.pyramid import halving_plan, laplacian_pyramid, reconstruct_pyramid
from geovalid.superposition import superposition_fraction, superposition_fractions
from geovalid.swd import (
    SwdResult,
    extract_patches,
    nearest_training_sample,
    pairwise_swd,
    sliced_wasserstein,
    swd_score,
    wasserstein_1d,
)

__all__ = [
    "Facies",
    "FaciesResult",
    "SwdResult",
    "classical_mds",
    "extract_patches",
    "folk_facies",
    "halving_plan",
    "laplacian_pyramid",
    "mean_grain_size",
    "nearest_training_sample",
    "pairwise_swd",
    "reconstruct_pyramid",
    "sliced_wasserstein",
    "superposition_fraction",
    "superposition_fractions",
    "swd_score",
    "wasserstein_1d",
]
