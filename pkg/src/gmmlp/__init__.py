"""Geometric multiplex networks with link persistence."""
from .coupling import CorrelationParams
from .embedding import EmbeddingConfig
from .generator import Multiplex
from .geometry import LayerParams, NodeCoords, derive_params
from .linkpred import PsiKind, ScoredPairs
from .theory import TheoryContext

__all__ = [
    "CorrelationParams",
    "EmbeddingConfig",
    "LayerParams",
    "Multiplex",
    "NodeCoords",
    "PsiKind",
    "ScoredPairs",
    "TheoryContext",
    "derive_params",
]
__version__ = "0.1.0"
