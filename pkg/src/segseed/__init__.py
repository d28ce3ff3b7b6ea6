"""Seeded region growing for 2-D grayscale images with GA-optimized seed points."""

from segseed.errors import (
    ConfigError,
    DimensionMismatchError,
    EmptyPoolError,
    InsufficientPeaksError,
    InvalidBandError,
    InvalidClassError,
    PGMError,
    SeedRejectedError,
    SegSeedError,
)
from segseed.image import (
    BACKGROUND,
    CSF,
    GM,
    WM,
    Image2D,
    LabelMap,
    Point,
    load_pgm,
    mask_of_class,
    save_pgm,
)
from segseed.regiongrow import (
    GrowthCriterion,
    Neighborhood,
    RegionStats,
    accepts,
    grow_region,
    segment,
    stats_update,
)
from segseed.seeding import (
    CandidatePool,
    ThresholdBands,
    histogram_peak_seeds,
    pool_from_thresholds,
    random_seeds,
)
from segseed.ga import GAConfig, SeedChromosome, evolve, fitness
from segseed.metrics import EvalReport, rms_error
from segseed.phantom import PhantomSpec, generate

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND", "CSF", "GM", "WM",
    "CandidatePool", "ConfigError", "DimensionMismatchError", "EmptyPoolError",
    "EvalReport", "GAConfig", "GrowthCriterion", "Image2D", "InsufficientPeaksError",
    "InvalidBandError", "InvalidClassError", "LabelMap", "Neighborhood", "PGMError",
    "PhantomSpec", "Point", "RegionStats", "SeedChromosome", "SeedRejectedError",
    "SegSeedError", "ThresholdBands", "accepts", "evolve", "fitness", "generate",
    "grow_region", "histogram_peak_seeds", "load_pgm", "mask_of_class",
    "pool_from_thresholds", "random_seeds", "rms_error", "save_pgm", "segment",
    "stats_update",
]
