"""Local coordinate coding for generative models."""

from .lcc import (
    AnchorSet,
    Coding,
    LccConfig,
    SamplerConfig,
    interpolate,
    learn_anchors,
    localization_measure,
    reconstruct,
    sample_coding,
    solve_coding,
)
from .rng import Rng

__version__ = "0.1.0"
