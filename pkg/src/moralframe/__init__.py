"""Moral-framing scores for fundraising appeals and the regressions built on them."""
from .embeddings import EmbeddingTable, cosine, load_embeddings, lookup
from .frameaxis import BiasScore, MoralAxis, MoralAxisSet, build_axes, score_document, split_groups
from .lexicon import FRAMES, SeedLexicon, load_lexicon, resolve_coverage
from .stats import DesignMatrix, FitResult, fit_ols

__version__ = "0.1.0"

__all__ = [
    "FRAMES",
    "BiasScore",
    "DesignMatrix",
    "EmbeddingTable",
    "FitResult",
    "MoralAxis",
    "MoralAxisSet",
    "SeedLexicon",
    "build_axes",
    "cosine",
    "fit_ols",
    "load_embeddings",
    "load_lexicon",
    "lookup",
    "resolve_coverage",
    "score_document",
    "split_groups",
]
