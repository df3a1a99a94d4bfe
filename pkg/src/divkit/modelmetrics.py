"""Model-based diversity metrics: perplexity, perplexity gap, and K-means
clustering over embeddings with a cluster-shape report.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .heuristics import MetricError
from .providers import LogProbProvider
from .rng import SplitMix64


@dataclass(frozen=True)
class PerplexityResult:
    value: float
    scored_tokens: int
    normalization: str = "per-token"
    model_name: str = ""

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"perplexity must be positive, got {self.value}")


def perplexity(corpus: Corpus, lp: LogProbProvider) -> PerplexityResult:
    """2^(-(sum of token log2-probs) / (number of scored tokens)).

    Normalization is per token, not per sample: per-sample averaging would
    confound the value with document length, which context_length already
    measures. math.fsum keeps the sum independent of accumulation order.
    """
    logprob_sum_parts: list[float] = []
    scored = 0
    for doc in corpus:
        seq = lp.token_logprobs(doc.text)
        if not seq.tokens:
            continue
        logprob_sum_parts.append(math.fsum(seq.logprobs))
        scored += len(seq.tokens)
    if scored == 0:
        raise MetricError("perplexity: provider scored zero tokens")
    mean_lp = math.fsum(logprob_sum_parts) / scored
    return PerplexityResult(
        value=2.0 ** (-mean_lp),
        scored_tokens=scored,
        model_name=getattr(lp, "model_name", ""),
    )


def perplexity_gap(corpus: Corpus, lp_small: LogProbProvider, lp_large: LogProbProvider) -> float:
    """Absolute difference between the two models' per-token perplexities."""
    return abs(perplexity(corpus, lp_small).value - perplexity(corpus, lp_large).value)


# ---------------------------------------------------------------------------
# K-means
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KMeansModel:
    centroids: np.ndarray
    k: int
    iterations_run: int
    inertia: float
    seed: int
    inertia_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class KMeansDiversityReport:
    non_empty_clusters: int
    mean_nonempty_size: float
    assignment_entropy_normalized: float
    score: float
    score_definition: str = "artifact-defined: non_empty_clusters / mean_nonempty_size"


def _point_centroid_dist2(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n, k). Per-centroid loop keeps the
    arithmetic cancellation-free and deterministic."""
    n, k = X.shape[0], centroids.shape[0]
    d2 = np.empty((n, k), dtype=np.float64)
    for j in range(k):
        diff = X - centroids[j]
        d2[:, j] = np.einsum("ij,ij->i", diff, diff)
    return d2


def _kmeans_pp_init(X: np.ndarray, k: int, rng: SplitMix64) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[rng.randbelow(n)]
    diff = X - centroids[0]
    d2 = np.einsum("ij,ij->i", diff, diff)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            # Remaining points coincide with chosen centers; fall back to uniform.
            idx = rng.randbelow(n)
        else:
            r = rng.uniform() * total
            idx = min(int(np.searchsorted(np.cumsum(d2), r, side="right")), n - 1)
        centroids[j] = X[idx]
        diff = X - centroids[j]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", diff, diff))
    return centroids


def kmeans_fit(
    embeddings: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> KMeansModel:
    """Lloyd's algorithm with k-means++ seeding.

    Stops when the relative centroid shift drops below tol or after max_iter
    iterations. Empty clusters keep their previous centroid. Deterministic
    for a fixed seed.
    """
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim != 2:
        raise MetricError(f"embeddings must be a 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise MetricError("embeddings contain NaN or infinite entries")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise MetricError(f"need 1 <= k <= n, got k={k}, n={n}")

    rng = SplitMix64(seed)
    centroids = _kmeans_pp_init(X, k, rng)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = _point_centroid_dist2(X, centroids)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        if history and inertia > history[-1] * (1 + 1e-12) + 1e-12:
            raise MetricError(
                f"inertia increased ({history[-1]} -> {inertia}); numerical fault"
            )
        history.append(inertia)
        new_centroids = centroids.copy()
        for j in range(k):
            members = X[labels == j]
            if len(members):
                new_centroids[j] = members.mean(axis=0)
        shift = float(np.linalg.norm(new_centroids - centroids))
        scale = float(np.linalg.norm(centroids)) or 1.0
        centroids = new_centroids
        if shift / scale < tol:
            break
    d2 = _point_centroid_dist2(X, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return KMeansModel(
        centroids=centroids,
        k=k,
        iterations_run=iterations,
        inertia=inertia,
        seed=seed,
        inertia_history=history,
    )


def mean_center(embeddings: np.ndarray) -> np.ndarray:
    """Column-mean-centered copy; optional preprocessing, off by default.
    Apply the same transform before fit and assign."""
    X = np.asarray(embeddings, dtype=np.float64)
    return X - X.mean(axis=0)


def kmeans_assign(model: KMeansModel, embeddings: np.ndarray) -> np.ndarray:
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.centroids.shape[1]:
        raise MetricError(
            f"embedding dim {X.shape} does not match centroids {model.centroids.shape}"
        )
    return np.argmin(_point_centroid_dist2(X, model.centroids), axis=1)


def kmeans_diversity(model: KMeansModel, embeddings: np.ndarray) -> KMeansDiversityReport:
    """Cluster-shape report over nearest-centroid assignments.

    The scalar score (non-empty clusters / mean non-empty size) mirrors the
    C/S form of the LLM cluster score so the two cluster-based metrics sit
    on comparable scales; the composition is this artifact's definition and
    is labeled as such in the report.
    """
    labels = kmeans_assign(model, embeddings)
    sizes = np.bincount(labels, minlength=model.k)
    nonempty = sizes[sizes > 0]
    c = int(len(nonempty))
    mean_size = float(nonempty.mean())
    if c <= 1:
        entropy_norm = 0.0
    else:
        p = nonempty / nonempty.sum()
        entropy = float(-(p * np.log(p)).sum())
        entropy_norm = entropy / math.log(c)
    return KMeansDiversityReport(
        non_empty_clusters=c,
        mean_nonempty_size=mean_size,
        assignment_entropy_normalized=entropy_norm,
        score=c / mean_size,
    )


# ---------------------------------------------------------------------------
# Embedding matrix files
# ---------------------------------------------------------------------------

_EMB_MAGIC = b"DIVKEMB1"


def write_embeddings(path: str, matrix: np.ndarray) -> None:
    """Binary format: magic, n and d as little-endian uint64, then
    row-major float64 little-endian data."""
    X = np.ascontiguousarray(matrix, dtype="<f8")
    if X.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got {X.shape}")
    with open(path, "wb") as fh:
        fh.write(_EMB_MAGIC)
        fh.write(struct.pack("<QQ", X.shape[0], X.shape[1]))
        fh.write(X.tobytes())


def read_embeddings(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(len(_EMB_MAGIC))
        if magic != _EMB_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        n, d = struct.unpack("<QQ", fh.read(16))
        data = fh.read()
    expected = n * d * 8
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} data bytes, found {len(data)}")
    return np.frombuffer(data, dtype="<f8").reshape(n, d).astype(np.float64)


def read_embeddings_jsonl(path: str) -> tuple[list[str], np.ndarray]:
    """JSONL rows of {id, vector}; returns ids and the (n, d) matrix."""
    ids: list[str] = []
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            obj = json.loads(raw)
            ids.append(str(obj["id"]))
            rows.append([float(v) for v in obj["vector"]])
    if not rows:
        raise ValueError(f"{path}: no embedding rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent vector dimensions {sorted(widths)}")
    return ids, np.asarray(rows, dtype=np.float64)
