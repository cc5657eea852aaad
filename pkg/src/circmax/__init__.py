"""Block-maxima extreme-value inference with circular block maxima and block bootstrap."""

__version__ = "0.1.0"

from .blocks import (  # noqa: E402
    BlockMaxSeries,
    BlockScheme,
    CompressedBlocks,
    circmax,
    compress,
    disjoint_maxima,
    disjoint_repeated,
    sliding_maxima,
)
from .boot import (  # noqa: E402
    BootstrapSpec,
    Correction,
    Estimator,
    IntervalEstimate,
    basic_ci,
    bootstrap_ci,
    bootstrap_replicates,
    correction_factor,
    sliding_circular_ci,
)
from .dist import FrechetParams, GevParams  # noqa: E402
from .fit import WeightedSample, fit_frechet, fit_gev, return_level_from_gev, weighted_mean  # noqa: E402

__all__ = [
    "BlockMaxSeries",
    "BlockScheme",
    "BootstrapSpec",
    "CompressedBlocks",
    "Correction",
    "Estimator",
    "FrechetParams",
    "GevParams",
    "IntervalEstimate",
    "WeightedSample",
    "basic_ci",
    "bootstrap_ci",
    "bootstrap_replicates",
    "circmax",
    "compress",
    "correction_factor",
    "disjoint_maxima",
    "disjoint_repeated",
    "fit_frechet",
    "fit_gev",
    "return_level_from_gev",
    "sliding_circular_ci",
    "sliding_maxima",
    "weighted_mean",
]
