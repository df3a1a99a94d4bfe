"""divkit: diversity measurement for large text corpora.

Heuristic metrics (context length, self-repetition, n-gram diversity,
compression ratio), model-based metrics (perplexity, perplexity gap,
K-means over embeddings), an LLM clustering judge with self-verification,
topic-seeded synthetic data generation, and bootstrap/regression reporting.
"""

__version__ = "0.1.0"

from .corpus import Corpus, CorpusError, Document, TokenizerKind, count_tokens, load_corpus, tokenize
from .heuristics import (
    MetricError,
    MetricResult,
    NGramConfig,
    compression_ratio,
    context_length,
    ngram_diversity,
    self_repetition,
)

__all__ = [
    "Corpus",
    "CorpusError",
    "Document",
    "TokenizerKind",
    "count_tokens",
    "load_corpus",
    "tokenize",
    "MetricError",
    "MetricResult",
    "NGramConfig",
    "compression_ratio",
    "context_length",
    "ngram_diversity",
    "self_repetition",
    "__version__",
]
