"""Heuristic diversity metrics: context length, self-repetition,
n-gram diversity, and compression ratio.

All four are pure functions of a corpus sample. Float accumulation uses
math.fsum, which is exact regardless of summation order, so serial and
parallel-reduced runs agree bit-for-bit.
"""

from __future__ import annotations

import gzip
import logging
import math
from dataclasses import dataclass, field
from typing import Any

from .corpus import Corpus, TokenizerKind, tokenize

log = logging.getLogger(__name__)


class MetricError(Exception):
    """Metric precondition violated (empty corpus, no usable documents)."""


@dataclass(frozen=True)
class NGramConfig:
    n_min: int = 1
    n_max: int = 4
    tokenizer: TokenizerKind = TokenizerKind.UNICODE_WORDS

    def __post_init__(self):
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ValueError(f"need 1 <= n_min <= n_max, got {self.n_min}..{self.n_max}")
        if self.n_max > 8:
            raise ValueError(f"n_max > 8 is a configuration mistake (got {self.n_max})")


@dataclass(frozen=True)
class MetricResult:
    metric: str
    value: float
    params: dict[str, str] = field(default_factory=dict)
    sample_size: int = 0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"{self.metric}: non-finite value {self.value}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "value": self.value,
            "params": dict(self.params),
            "sample_size": self.sample_size,
        }


def _ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def context_length(corpus: Corpus, tok: TokenizerKind) -> MetricResult:
    """Mean per-document token count."""
    counts = [len(tokenize(d.text, tok)) for d in corpus]
    if not counts:
        raise MetricError("context_length: empty corpus")
    return MetricResult(
        metric="context_length",
        value=math.fsum(counts) / len(counts),
        params={"tokenizer": tok.value},
        sample_size=len(counts),
    )


def _self_repetition_doc_score(k: int, other_doc_counts: list[int]) -> float:
    """ln(k * sum(N_hat_i + 1)) for one document.

    N_hat_i counts DOCUMENTS (not occurrences) other than this one that
    contain the i-th n-gram; counting documents is the reading we fixed for
    cross-corpus repetition, and isolating it here keeps the alternative an
    easy one-line change.
    """
    return math.log(k * sum(c + 1 for c in other_doc_counts))


def self_repetition(corpus: Corpus, cfg: NGramConfig) -> MetricResult:
    """Cross-document repetition of n_max-grams, log scale, natural log.

    Documents shorter than n_max tokens yield no n-grams and are skipped
    with a warning (padding would invent n-grams).
    """
    per_doc_grams: list[tuple[str, list[tuple[str, ...]]]] = []
    containing: dict[tuple[str, ...], int] = {}
    for d in corpus:
        grams = _ngrams(tokenize(d.text, cfg.tokenizer), cfg.n_max)
        per_doc_grams.append((d.id, grams))
        for g in set(grams):
            containing[g] = containing.get(g, 0) + 1

    scores = []
    skipped = 0
    for doc_id, grams in per_doc_grams:
        if not grams:
            log.warning("self_repetition: %s shorter than n=%d, skipped", doc_id, cfg.n_max)
            skipped += 1
            continue
        others = [containing[g] - 1 for g in grams]
        scores.append(_self_repetition_doc_score(len(grams), others))
    if not scores:
        raise MetricError(f"self_repetition: no document has an n-gram at n={cfg.n_max}")
    return MetricResult(
        metric="self_repetition",
        value=math.fsum(scores) / len(scores),
        params={
            "n": str(cfg.n_max),
            "tokenizer": cfg.tokenizer.value,
            "log_base": "e",
            "neighbor_counting": "documents",
            "docs_skipped": str(skipped),
        },
        sample_size=len(scores),
    )


def ngram_diversity(corpus: Corpus, cfg: NGramConfig) -> MetricResult:
    """Sum over orders n_min..n_max of (distinct n-grams / total n-grams).

    N-grams never cross document boundaries. An order with zero n-grams
    contributes 0 and is flagged in params.
    """
    docs_tokens = [tokenize(d.text, cfg.tokenizer) for d in corpus]
    if not docs_tokens:
        raise MetricError("ngram_diversity: empty corpus")
    params: dict[str, str] = {
        "n_min": str(cfg.n_min),
        "n_max": str(cfg.n_max),
        "tokenizer": cfg.tokenizer.value,
    }
    total_score = 0.0
    empty_orders = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        distinct: set[tuple[str, ...]] = set()
        total = 0
        for tokens in docs_tokens:
            grams = _ngrams(tokens, n)
            total += len(grams)
            distinct.update(grams)
        if total == 0:
            empty_orders.append(n)
            params[f"order_{n}"] = "0 (no n-grams)"
            continue
        term = len(distinct) / total
        params[f"order_{n}"] = repr(term)
        total_score += term
    if empty_orders:
        params["empty_orders"] = ",".join(map(str, empty_orders))
    return MetricResult(
        metric="ngram_diversity",
        value=total_score,
        params=params,
        sample_size=len(docs_tokens),
    )


def compression_ratio(corpus: Corpus, level: int = 6) -> MetricResult:
    """Original bytes / gzip-compressed bytes of the newline-joined corpus.

    Concatenation order is corpus iteration order and the separator is a
    single newline, fixed so byte counts are reproducible. mtime is pinned
    to zero so the gzip container is byte-stable.
    """
    if not 1 <= level <= 9:
        raise MetricError(f"compression level must be 1..9, got {level}")
    texts = [d.text for d in corpus]
    if not texts:
        raise MetricError("compression_ratio: empty corpus")
    data = "\n".join(texts).encode("utf-8")
    compressed = gzip.compress(data, compresslevel=level, mtime=0)
    return MetricResult(
        metric="compression_ratio",
        value=len(data) / len(compressed),
        params={"level": str(level), "separator": "\\n", "container": "gzip"},
        sample_size=len(texts),
    )
