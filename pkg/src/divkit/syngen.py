"""Topic-seeded synthetic data generation.

Seeds are hierarchical topic paths with keyword lists; a generation plan
picks topics, styles, and personas deterministically from its seed, renders
the family's prompt template, and validates every emitted sample against
the passages+quiz schema. Invalid outputs are retried once, then dropped
and counted; nothing invalid passes silently.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Iterator

from .corpus import TokenizerKind, count_tokens
from .providers import ChatProvider, ChatRequest
from .rng import SplitMix64, stream_seed
from .sample_parse import SampleParseError, SyntheticSample, parse_sample
from .syn_templates import FAMILIES, STYLES, get_template

log = logging.getLogger(__name__)

_TOPIC_STREAM = 0x746F70696373
_GEN_STREAM = 0x67656E


class SynGenError(Exception):
    pass


@dataclass(frozen=True)
class TopicSeed:
    path: str
    keywords: tuple[str, ...]

    @property
    def levels(self) -> list[str]:
        return [lv for lv in self.path.split("/") if lv]

    @property
    def topic(self) -> str:
        return self.levels[0]

    @property
    def subtopic(self) -> str:
        return self.levels[-1]


def load_topics(path: str) -> list[TopicSeed]:
    """Topic registry from a JSON object of path -> keyword list.

    Paths are deduplicated case-insensitively (first occurrence wins),
    keywords are deduplicated preserving order, entries with no usable
    keywords are rejected with a warning, and the result is ordered by path
    so downstream sampling is stable.
    """
    with open(path, "r", encoding="utf-8") as fh:
        pairs = json.load(fh, object_pairs_hook=lambda items: items)
    if not isinstance(pairs, list):
        raise SynGenError(f"{path}: registry must be a JSON object")
    seeds: list[TopicSeed] = []
    seen: set[str] = set()
    for topic_path, keywords in pairs:
        key = str(topic_path).strip()
        if not key or not [lv for lv in key.split("/") if lv]:
            log.warning("topic registry: skipping empty path")
            continue
        folded = key.casefold()
        if folded in seen:
            log.warning("topic registry: duplicate path %r skipped", key)
            continue
        if not isinstance(keywords, list):
            log.warning("topic registry: %r has non-list keywords, skipped", key)
            continue
        cleaned: list[str] = []
        for kw in keywords:
            kw = str(kw).strip()
            if kw and kw not in cleaned:
                cleaned.append(kw)
        if not cleaned:
            log.warning("topic registry: %r has no usable keywords, rejected", key)
            continue
        seen.add(folded)
        seeds.append(TopicSeed(path=key, keywords=tuple(cleaned)))
    if not seeds:
        raise SynGenError(f"{path}: empty topic registry")
    seeds.sort(key=lambda s: s.path)
    return seeds


def load_personas(path: str) -> list[str]:
    """Persona pool from JSONL rows of {persona: string}."""
    personas = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            persona = str(obj.get("persona", "")).strip()
            if persona:
                personas.append(persona)
    if not personas:
        raise SynGenError(f"{path}: empty persona pool")
    return personas


@dataclass(frozen=True)
class GenerationPlan:
    family: str
    topics: int
    generations_per_topic: int
    styles: tuple[str, ...] = STYLES
    personas_per_prompt: int = 5
    topics_per_prompt: int = 1
    seed: int = 0
    temperature: float = 0.7

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown template family {self.family!r}")
        if self.topics < 1 or self.generations_per_topic < 1:
            raise ValueError("topics and generations_per_topic must be >= 1")
        if self.family != "topic":
            if not self.styles:
                raise ValueError(f"family {self.family!r} needs a non-empty style set")
            unknown = set(self.styles) - set(STYLES)
            if unknown:
                raise ValueError(f"unknown styles {sorted(unknown)}")
        if self.family == "multi_topic_styles_persona":
            if self.topics_per_prompt < 2:
                raise ValueError("multi-topic plans need topics_per_prompt >= 2")
        elif self.topics_per_prompt != 1:
            raise ValueError(f"family {self.family!r} is single-topic")
        if self.uses_personas and self.personas_per_prompt < 1:
            raise ValueError("persona plans need personas_per_prompt >= 1")

    @property
    def uses_personas(self) -> bool:
        return self.family in ("topic_styles_persona", "multi_topic_styles_persona")


def _numbered(items: list[str]) -> str:
    return "\n".join(f"{i}. {item}" for i, item in enumerate(items, start=1))


def render_prompt(
    family: str,
    style: str | None,
    seeds: list[TopicSeed],
    personas: list[str] | None = None,
) -> str:
    """Fill the family/style template for the given seeds.

    topic is the first hierarchy level, subtopic the last, keywords join as
    a comma list. Multi-topic prompts render numbered blocks, one entry per
    seed, in every seed section.
    """
    if not seeds:
        raise SynGenError("render_prompt needs at least one topic seed")
    template = get_template(family, style)
    if len(seeds) == 1:
        s = seeds[0]
        fields = {
            "topic": s.topic,
            "subtopic": s.subtopic,
            "keyword": ", ".join(s.keywords),
        }
    else:
        fields = {
            "topic": _numbered([s.topic for s in seeds]),
            "subtopic": _numbered(
                [", ".join(s.levels[1:]) if len(s.levels) > 1 else s.subtopic for s in seeds]
            ),
            "keyword": _numbered([", ".join(s.keywords) for s in seeds]),
        }
    if "{persona}" in template:
        if not personas:
            raise SynGenError(f"template {family}/{style} requires personas")
        fields["persona"] = _numbered(personas)
    return template.format(**fields)


@dataclass
class GenerationStats:
    requested: int = 0
    emitted: int = 0
    dropped: int = 0
    retried: int = 0
    flagged: int = 0


def generate(
    plan: GenerationPlan,
    registry: list[TopicSeed],
    personas: list[str] | None,
    chat: ChatProvider,
    stats: GenerationStats | None = None,
) -> Iterator[SyntheticSample]:
    """Drive the plan: T sampled topics x G generations each.

    Style and personas are re-drawn per generation from seeded streams, so a
    fixed (plan, registry, persona pool, provider) reproduces the identical
    sample stream. Provider failures propagate after the samples already
    generated, preserving partial output for the caller.
    """
    if len(registry) < max(plan.topics, plan.topics_per_prompt):
        raise SynGenError(f"registry has {len(registry)} topics, plan needs {plan.topics}")
    if plan.uses_personas and not personas:
        raise SynGenError("plan uses personas but none were provided")
    stats = stats if stats is not None else GenerationStats()

    topic_rng = SplitMix64(stream_seed(plan.seed, _TOPIC_STREAM))
    pool = [registry[i] for i in topic_rng.sample_indices(len(registry), plan.topics)]

    counter = 0
    for primary in pool:
        for _ in range(plan.generations_per_topic):
            rng = SplitMix64(stream_seed(plan.seed ^ _GEN_STREAM, counter))
            counter += 1
            stats.requested += 1

            seeds = [primary]
            if plan.topics_per_prompt > 1:
                others = [s for s in pool if s.path != primary.path]
                picks = rng.sample_indices(len(others), min(plan.topics_per_prompt - 1, len(others)))
                seeds += [others[i] for i in picks]
            style = None
            if plan.family != "topic":
                style = plan.styles[rng.randbelow(len(plan.styles))]
            chosen_personas = None
            if plan.uses_personas:
                n = min(plan.personas_per_prompt, len(personas))
                chosen_personas = [personas[i] for i in rng.sample_indices(len(personas), n)]

            prompt = render_prompt(plan.family, style, seeds, chosen_personas)
            req = ChatRequest(prompt=prompt, temperature=plan.temperature, json_expected=True)
            sample = None
            for attempt in range(2):
                raw = chat.complete(req)
                try:
                    sample = parse_sample(raw)
                    break
                except SampleParseError as e:
                    if attempt == 0:
                        stats.retried += 1
                        log.warning("invalid sample (%s), retrying once", e)
                    else:
                        stats.dropped += 1
                        log.warning("dropping sample after retry: %s", e)
            if sample is None:
                continue
            sample.provenance = {
                "template": plan.family,
                "style": style,
                "personas": chosen_personas,
                "topic_paths": [s.path for s in seeds],
                "model_name": getattr(chat, "model_name", ""),
                "prompt_hash": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
            }
            if sample.flags:
                stats.flagged += 1
            stats.emitted += 1
            yield sample


# ---------------------------------------------------------------------------
# Token accounting
# ---------------------------------------------------------------------------


def count_sample_tokens(sample: SyntheticSample, tok: TokenizerKind) -> int:
    return sum(count_tokens(text, tok) for text in sample.text_fields())


def count_tokens_corpus(samples: list[SyntheticSample], tok: TokenizerKind) -> int:
    return sum(count_sample_tokens(s, tok) for s in samples)


@dataclass(frozen=True)
class TokenBudget:
    actual_tokens: int
    target_effective_tokens: int
    weight: float

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("weight must be positive")


def effective_weight(actual_tokens: int, target_effective_tokens: int) -> TokenBudget:
    """Sampling weight that makes actual_tokens behave like the target count."""
    if actual_tokens <= 0:
        raise SynGenError("actual token count must be positive")
    if target_effective_tokens <= 0:
        raise SynGenError("target token count must be positive")
    return TokenBudget(
        actual_tokens=actual_tokens,
        target_effective_tokens=target_effective_tokens,
        weight=target_effective_tokens / actual_tokens,
    )


# ---------------------------------------------------------------------------
# Shards and manifest
# ---------------------------------------------------------------------------


def write_shards(
    samples: Iterator[SyntheticSample],
    out_dir: str,
    plan: GenerationPlan,
    stats: GenerationStats,
    tok: TokenizerKind = TokenizerKind.UNICODE_WORDS,
    target_effective_tokens: int | None = None,
) -> dict:
    """Stream samples into one JSONL shard per (template, style), then write
    the manifest with counts, drop statistics, and token totals."""
    os.makedirs(out_dir, exist_ok=True)
    handles: dict[str, object] = {}
    tokens = 0
    try:
        for sample in samples:
            style = sample.provenance.get("style") or "plain"
            name = f"shard_{plan.family}_{style}.jsonl"
            if name not in handles:
                handles[name] = open(os.path.join(out_dir, name), "w", encoding="utf-8")
            handles[name].write(json.dumps(sample.to_dict(), ensure_ascii=False) + "\n")
            tokens += count_sample_tokens(sample, tok)
    finally:
        for fh in handles.values():
            fh.close()
    manifest = {
        "plan": asdict(plan),
        "emitted": stats.emitted,
        "dropped": stats.dropped,
        "retried": stats.retried,
        "flagged": stats.flagged,
        "tokens": tokens,
        "tokenizer": tok.value,
        "shards": sorted(handles),
    }
    if target_effective_tokens and tokens > 0:
        budget = effective_weight(tokens, target_effective_tokens)
        manifest["target_effective_tokens"] = target_effective_tokens
        manifest["sampling_weight"] = budget.weight
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
