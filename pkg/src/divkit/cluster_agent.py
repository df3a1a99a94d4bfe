"""LLM clustering judge: propose clustering criteria from corpus samples,
cluster small batches against them, self-verify, and aggregate a diversity
score.

Score definition: each accepted round contributes C/S where C is the number
of verified clusters and S the arithmetic mean of their sizes; the corpus
score is the mean of these round values. Singleton clusters are always
treated as valid (the verification instructions demand it), invalid clusters
are dropped without reassigning their samples, and rounds that fail schema
checks after retries are discarded and excluded from the average.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any

from .corpus import Corpus, Document
from . import cluster_prompts as prompts
from .providers import (
    ChatProvider,
    ChatRequest,
    JsonExtractError,
    ProviderError,
    complete_json,
)
from .rng import derive_seed

log = logging.getLogger(__name__)

# Criteria-proposal rounds draw from a separate seed stream than clustering
# rounds (which use derive_seed(seed, round_index) directly).
_CRITERIA_STREAM = 0x6372697465726961


class AgentError(Exception):
    """Pipeline-level failure (every round failed, unusable summaries)."""


@dataclass(frozen=True)
class AgentParams:
    samples_per_criteria_round: int = 5
    criteria_rounds: int = 100
    criteria_size: int = 4
    samples_per_round: int = 10
    rounds: int = 5000
    seed: int = 0
    max_round_retries: int = 2
    temperature: float = 0.7
    verify_temperature: float = 0.0

    def __post_init__(self):
        if self.samples_per_criteria_round < 2:
            raise ValueError("samples_per_criteria_round must be >= 2")
        if self.criteria_rounds < 1:
            raise ValueError("criteria_rounds must be >= 1")
        if self.samples_per_round < 2:
            raise ValueError("samples_per_round must be >= 2")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.criteria_size < 1:
            raise ValueError("criteria_size must be >= 1")


@dataclass
class CriteriaCandidatePool:
    """Raw metadata/metric proposals merged across rounds.

    Names are merged case-insensitively after trimming; the first-seen
    spelling is kept for display. No stemming: merging stays conservative.
    """

    metadata: dict[str, list[str]] = field(default_factory=dict)
    metrics: dict[str, list[str]] = field(default_factory=dict)
    failed_rounds: int = 0

    @staticmethod
    def _merge(target: dict[str, list[str]], name: str, definition: str) -> None:
        display = name.strip()
        wanted = display.casefold()
        for existing in target:
            if existing.casefold() == wanted:
                target[existing].append(definition)
                return
        target[display] = [definition]

    def add_round(self, metadata: dict[str, str], metrics: dict[str, str]) -> None:
        for name, definition in metadata.items():
            self._merge(self.metadata, name, definition)
        for name, definition in metrics.items():
            self._merge(self.metrics, name, definition)

    def __bool__(self) -> bool:
        return bool(self.metadata or self.metrics)


@dataclass(frozen=True)
class CriterionEntry:
    name: str
    definition: str
    criterion: str


@dataclass(frozen=True)
class CriteriaSet:
    metadata: list[CriterionEntry]
    metrics: list[CriterionEntry]

    def interleaved(self) -> list[tuple[str, str]]:
        """(name, criterion) pairs, metadata and metric alternating."""
        pairs = []
        for md, mt in zip(self.metadata, self.metrics):
            pairs.append((md.name, md.criterion))
            pairs.append((mt.name, mt.criterion))
        return pairs

    def to_dict(self) -> dict[str, Any]:
        return {
            "metadata": [asdict(e) for e in self.metadata],
            "metrics": [asdict(e) for e in self.metrics],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CriteriaSet":
        return cls(
            metadata=[CriterionEntry(**e) for e in data["metadata"]],
            metrics=[CriterionEntry(**e) for e in data["metrics"]],
        )


@dataclass
class ProposedCluster:
    indices: list[int]
    uniqueness_reasoning: str = ""
    cluster_metadata: dict[str, str] = field(default_factory=dict)
    cluster_metrics: dict[str, Any] = field(default_factory=dict)
    valid: bool | None = None
    verify_reasoning: str = ""

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass
class ClusterRound:
    round_index: int
    sample_ids: list[str]
    clusters: list[ProposedCluster] = field(default_factory=list)
    status: str = "discarded"
    reason: str = ""
    raw_cluster_response: str = ""
    raw_verification_response: str = ""

    @property
    def valid_clusters(self) -> list[ProposedCluster]:
        return [c for c in self.clusters if c.valid]

    @property
    def cluster_count(self) -> int:
        return len(self.valid_clusters)

    @property
    def mean_cluster_size(self) -> float:
        valid = self.valid_clusters
        return math.fsum(c.size for c in valid) / len(valid)

    def to_transcript(self) -> dict[str, Any]:
        return {
            "round_index": self.round_index,
            "sample_ids": self.sample_ids,
            "raw_cluster_response": self.raw_cluster_response,
            "raw_verification_response": self.raw_verification_response,
            "parsed": [
                {
                    "sample_indices": c.indices,
                    "uniqueness_reasoning": c.uniqueness_reasoning,
                    "cluster_metadata": c.cluster_metadata,
                    "cluster_metrics": c.cluster_metrics,
                    "valid": c.valid,
                    "verify_reasoning": c.verify_reasoning,
                }
                for c in self.clusters
            ],
            "status": self.status if not self.reason else f"{self.status}({self.reason})",
        }


@dataclass(frozen=True)
class ClusterScore:
    diversity: float
    rounds_used: int
    rounds_discarded: int
    cluster_counts: list[int]
    mean_sizes: list[float]
    stderr: float
    mean_size_aggregation: str = "arithmetic mean of valid-cluster sizes"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------


class SchemaError(Exception):
    """Model output parsed as JSON but does not fit the declared shape."""


def _norm_key(key: str) -> str:
    return key.strip().lower().replace(" ", "_")


def _norm_obj(obj: dict) -> dict:
    return {_norm_key(k): v for k, v in obj.items()}


def _as_str_dict(value: Any, what: str) -> dict[str, str]:
    if not isinstance(value, dict) or not value:
        raise SchemaError(f"{what}: expected a non-empty object")
    out = {}
    for k, v in value.items():
        if not isinstance(k, str) or not str(v).strip():
            raise SchemaError(f"{what}: entry {k!r} is not a usable name/definition pair")
        out[k] = str(v)
    return out


def parse_criteria_generation(value: Any) -> tuple[dict[str, str], dict[str, str]]:
    """{'metadata': {...}, 'metric': {...}} with tolerant key spelling."""
    if not isinstance(value, dict):
        raise SchemaError("criteria generation: expected an object")
    obj = _norm_obj(value)
    md = obj.get("metadata")
    mt = obj.get("metric", obj.get("metrics"))
    return _as_str_dict(md, "metadata"), _as_str_dict(mt, "metric")


def _coerce_index(value: Any) -> int:
    if isinstance(value, bool):
        raise SchemaError(f"bad sample index {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().isdigit():
        return int(value.strip())
    raise SchemaError(f"bad sample index {value!r}")


def parse_clusters(value: Any, batch_size: int) -> list[ProposedCluster]:
    """Cluster list from the clustering response; indices are 1-based."""
    if isinstance(value, dict):
        value = _norm_obj(value).get("clusters")
    if not isinstance(value, list) or not value:
        raise SchemaError("clustering: expected a non-empty 'clusters' list")
    clusters = []
    for item in value:
        if not isinstance(item, dict):
            raise SchemaError("clustering: cluster entry is not an object")
        obj = _norm_obj(item)
        raw_indices = obj.get("sample_indices")
        if not isinstance(raw_indices, list) or not raw_indices:
            raise SchemaError("clustering: missing or empty 'sample indices'")
        indices = [_coerce_index(v) for v in raw_indices]
        if len(set(indices)) != len(indices):
            raise SchemaError(f"clustering: repeated index in {indices}")
        for idx in indices:
            if not 1 <= idx <= batch_size:
                raise SchemaError(f"clustering: index {idx} outside 1..{batch_size}")
        metrics = obj.get("cluster_metrics", {})
        clusters.append(
            ProposedCluster(
                indices=indices,
                uniqueness_reasoning=str(obj.get("uniqueness_reasoning", "")),
                cluster_metadata={str(k): str(v) for k, v in obj.get("cluster_metadata", {}).items()}
                if isinstance(obj.get("cluster_metadata"), dict)
                else {},
                cluster_metrics=metrics if isinstance(metrics, dict) else {},
            )
        )
    return clusters


def _coerce_valid(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip() in ("0", "1"):
        return value.strip() == "1"
    raise SchemaError(f"verification: 'valid' must be 0/1, got {value!r}")


def parse_verifications(value: Any, n_clusters: int) -> list[tuple[bool, str]]:
    """Per-cluster (valid, reasoning) aligned with the proposed clusters.

    Verdicts carrying the full set of declared cluster ids 1..n are aligned
    by id (models sometimes reorder); otherwise alignment is positional.
    """
    if isinstance(value, dict):
        obj = _norm_obj(value)
        value = obj.get("validation", obj.get("validations", obj.get("clusters")))
    if not isinstance(value, list):
        raise SchemaError("verification: expected a list of cluster verdicts")
    if len(value) != n_clusters:
        raise SchemaError(
            f"verification: got {len(value)} verdicts for {n_clusters} clusters"
        )
    verdicts = []
    declared_ids = []
    for item in value:
        if not isinstance(item, dict):
            raise SchemaError("verification: verdict entry is not an object")
        obj = _norm_obj(item)
        if "valid" not in obj:
            raise SchemaError("verification: verdict missing 'valid'")
        try:
            declared_ids.append(_coerce_index(obj.get("cluster")))
        except SchemaError:
            declared_ids.append(None)
        verdicts.append((_coerce_valid(obj["valid"]), str(obj.get("reasoning", ""))))
    if sorted(i for i in declared_ids if i is not None) == list(range(1, n_clusters + 1)):
        ordered: list[tuple[bool, str]] = [None] * n_clusters  # type: ignore[list-item]
        for cid, verdict in zip(declared_ids, verdicts):
            ordered[cid - 1] = verdict
        return ordered
    return verdicts


# ---------------------------------------------------------------------------
# Pipeline operations
# ---------------------------------------------------------------------------


def propose_criteria(corpus: Corpus, chat: ChatProvider, params: AgentParams) -> CriteriaCandidatePool:
    """Run the metadata/metric proposal rounds and merge the candidate pool.

    Each round samples fresh documents with a derived seed, asks the model
    for 3-5 metadata and metrics, and merges by name. Rounds whose output
    fails schema validation after one repair are skipped and counted.
    """
    if corpus.count < params.samples_per_criteria_round:
        raise AgentError(
            f"corpus has {corpus.count} documents, need >= {params.samples_per_criteria_round}"
        )
    pool = CriteriaCandidatePool()
    rounds_ok = 0
    for i in range(params.criteria_rounds):
        docs = corpus.sample(
            params.samples_per_criteria_round,
            derive_seed(params.seed ^ _CRITERIA_STREAM, i),
        )
        prompt = prompts.metadata_metric_generation_prompt([d.text for d in docs])
        req = ChatRequest(prompt=prompt, temperature=params.temperature, json_expected=True)
        try:
            value, _ = complete_json(chat, req)
            metadata, metrics = parse_criteria_generation(value)
        except (ProviderError, SchemaError) as e:
            log.warning("criteria round %d failed: %s", i, e)
            pool.failed_rounds += 1
            continue
        pool.add_round(metadata, metrics)
        rounds_ok += 1
    if rounds_ok == 0:
        raise AgentError(f"all {params.criteria_rounds} criteria rounds failed")
    return pool


def _summary_call(
    chat: ChatProvider,
    prompt: str,
    expected: int,
    what: str,
    temperature: float,
) -> dict[str, str]:
    """One summary prompt with a single cardinality-repair re-prompt."""
    req = ChatRequest(prompt=prompt, temperature=temperature, json_expected=True)
    value, raw = complete_json(chat, req)
    for attempt in range(2):
        try:
            entries = _as_str_dict(value, what)
            if len(entries) != expected:
                raise SchemaError(f"{what}: expected {expected} entries, got {len(entries)}")
            return entries
        except SchemaError as err:
            if attempt == 1:
                raise AgentError(f"{err}; last output: {raw[:500]}") from err
            note = f"\n\n# Correction\n\nYour previous reply was not usable ({err}). Reply again following the required format exactly.\n"
            value, raw = complete_json(
                chat, ChatRequest(prompt=prompt + note, temperature=temperature, json_expected=True)
            )
    raise AssertionError("unreachable")


def summarize_criteria(
    pool: CriteriaCandidatePool, chat: ChatProvider, params: AgentParams
) -> CriteriaSet:
    """Condense the candidate pool into the criteria used for clustering:
    one metadata summary call, one metric summary call, one criteria
    sentence call."""
    if not pool:
        raise AgentError("empty criteria candidate pool")
    k = params.criteria_size
    metadata = _summary_call(
        chat, prompts.metadata_summary_prompt(pool.metadata, k), k, "metadata summary", params.temperature
    )
    metrics = _summary_call(
        chat, prompts.metric_summary_prompt(pool.metrics, k), k, "metric summary", params.temperature
    )
    sentences = _summary_call(
        chat,
        prompts.criteria_summary_prompt(metadata, metrics),
        2 * k,
        "criteria summary",
        params.temperature,
    )
    by_fold = {name.casefold(): sentence for name, sentence in sentences.items()}

    def entry(name: str, definition: str) -> CriterionEntry:
        sentence = by_fold.get(name.casefold())
        if not sentence:
            raise AgentError(f"criteria summary missing a sentence for {name!r}")
        return CriterionEntry(name=name, definition=definition, criterion=sentence)

    return CriteriaSet(
        metadata=[entry(n, d) for n, d in metadata.items()],
        metrics=[entry(n, d) for n, d in metrics.items()],
    )


def _overlapping(clusters: list[ProposedCluster]) -> bool:
    seen: set[int] = set()
    for c in clusters:
        for idx in c.indices:
            if idx in seen:
                return True
            seen.add(idx)
    return False


def run_round(
    samples: list[Document],
    criteria: CriteriaSet,
    chat: ChatProvider,
    params: AgentParams,
    round_index: int = 0,
) -> ClusterRound:
    """One clustering round over a fixed sample batch.

    Cluster, then self-verify; singletons are auto-valid regardless of the
    verifier's verdict. Schema failures are retried up to max_round_retries
    times; transport exhaustion and overlapping valid clusters discard the
    round with a reason instead of failing the pipeline.
    """
    texts = [d.text for d in samples]
    k = len(texts)
    rnd = ClusterRound(round_index=round_index, sample_ids=[d.id for d in samples])
    last_error = ""
    for attempt in range(params.max_round_retries + 1):
        try:
            cluster_req = ChatRequest(
                prompt=prompts.clustering_prompt(criteria.interleaved(), texts),
                temperature=params.temperature,
                json_expected=True,
            )
            value, raw_clusters = complete_json(chat, cluster_req)
            rnd.raw_cluster_response = raw_clusters
            clusters = parse_clusters(value, k)

            verify_view = [
                {"cluster": i + 1, "sample indices": c.indices, "reasoning": c.uniqueness_reasoning}
                for i, c in enumerate(clusters)
            ]
            verify_req = ChatRequest(
                prompt=prompts.self_verification_prompt(texts, verify_view),
                temperature=params.verify_temperature,
                json_expected=True,
            )
            verdicts_value, raw_verify = complete_json(chat, verify_req)
            rnd.raw_verification_response = raw_verify
            verdicts = parse_verifications(verdicts_value, len(clusters))
        except (JsonExtractError, SchemaError) as e:
            last_error = str(e)
            log.warning("round %d attempt %d schema failure: %s", round_index, attempt + 1, e)
            continue
        except ProviderError as e:
            rnd.reason = f"transport: {e}"
            return rnd

        for cluster, (valid, reasoning) in zip(clusters, verdicts):
            # The verification instructions require singletons to pass.
            cluster.valid = True if cluster.size == 1 else valid
            cluster.verify_reasoning = reasoning
        rnd.clusters = clusters
        valid = [c for c in clusters if c.valid]
        if not valid:
            rnd.reason = "no valid clusters"
            return rnd
        if _overlapping(valid):
            rnd.reason = "overlap"
            return rnd
        rnd.status = "accepted"
        return rnd
    rnd.reason = f"schema: {last_error}"
    return rnd


def aggregate(rounds: list[ClusterRound]) -> ClusterScore:
    """Mean of per-round C/S over accepted rounds, with its standard error."""
    used = [r for r in rounds if r.status == "accepted"]
    if not used:
        raise AgentError("no accepted rounds to aggregate")
    counts = [r.cluster_count for r in used]
    sizes = [r.mean_cluster_size for r in used]
    values = [c / s for c, s in zip(counts, sizes)]
    mean = math.fsum(values) / len(values)
    if len(values) > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
        stderr = math.sqrt(var / len(values))
    else:
        stderr = 0.0
    return ClusterScore(
        diversity=mean,
        rounds_used=len(used),
        rounds_discarded=len(rounds) - len(used),
        cluster_counts=counts,
        mean_sizes=sizes,
        stderr=stderr,
    )


@dataclass
class MeasureResult:
    score: ClusterScore
    criteria: CriteriaSet
    rounds: list[ClusterRound]
    params: AgentParams | None = None


def measure(
    corpus: Corpus,
    chat: ChatProvider,
    params: AgentParams,
    criteria: CriteriaSet | None = None,
    out_dir: str | None = None,
) -> MeasureResult:
    """Full pipeline: propose criteria, summarize, run the clustering rounds,
    aggregate.

    Criteria are computed once per corpus; pass a cached CriteriaSet to skip
    the proposal stage. Round i samples its batch with derive_seed(seed, i):
    rounds draw independently, so a document may appear in several rounds
    but never twice within one, and the whole run is reproducible. With
    out_dir set, the criteria, per-round transcripts, and score are
    persisted for audit.
    """
    if corpus.count < max(params.samples_per_criteria_round, params.samples_per_round):
        raise AgentError("corpus smaller than one sampling batch")
    if criteria is None:
        pool = propose_criteria(corpus, chat, params)
        criteria = summarize_criteria(pool, chat, params)
    rounds = []
    for i in range(params.rounds):
        batch = corpus.sample(params.samples_per_round, derive_seed(params.seed, i))
        rounds.append(run_round(batch, criteria, chat, params, round_index=i))
    score = aggregate(rounds)
    result = MeasureResult(score=score, criteria=criteria, rounds=rounds, params=params)
    if out_dir:
        persist_measure(result, out_dir)
    return result


def persist_measure(result: MeasureResult, out_dir: str) -> list[str]:
    """Write criteria.json, transcripts.jsonl, and cluster_score.json."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "criteria.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.criteria.to_dict(), fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    written.append(path)

    path = os.path.join(out_dir, "transcripts.jsonl")
    with open(path, "w", encoding="utf-8") as fh:
        for rnd in result.rounds:
            fh.write(json.dumps(rnd.to_transcript(), ensure_ascii=False) + "\n")
    written.append(path)

    path = os.path.join(out_dir, "cluster_score.json")
    payload = result.score.to_dict()
    if result.params is not None:
        payload["params"] = asdict(result.params)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    written.append(path)
    return written
