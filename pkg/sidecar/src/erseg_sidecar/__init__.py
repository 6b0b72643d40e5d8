"""Masked-LM gap scorer served over the erseg sidecar line protocol."""

__version__ = "0.1.0"

from .scoring import MlmScorer, SidecarConfig, StubScorer
from .serve import serve

__all__ = ["MlmScorer", "SidecarConfig", "StubScorer", "serve", "__version__"]
