"""Instances, diagnostics, evaluation, baseline and benchmarks."""

from .diagnostics import diagnostics_nicely_separated
from .evaluation import MatchReport, match_and_score
from .instances import orthonormal_components, sample_components
from .isotropic import IsotropicTransform
from .jennrich import JennrichResult, jennrich_oracle

__all__ = [
    "IsotropicTransform",
    "JennrichResult",
    "MatchReport",
    "diagnostics_nicely_separated",
    "jennrich_oracle",
    "match_and_score",
    "orthonormal_components",
    "sample_components",
]
