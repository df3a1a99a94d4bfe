"""Deterministic offline stand-ins for model backends.

Everything here is a pure function of its inputs plus an explicit seed, so
pipelines driven by these mocks are bit-reproducible across runs. The
scripted chat mock covers "return this text when the prompt looks like
that"; the pipeline mock goes further and actually behaves like a judge
model, clustering samples by a fingerprint function.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Document, TokenizerKind, tokenize
from .providers import ChatRequest, LogProbSequence, extract_json
from .rng import SplitMix64


class MockScriptError(Exception):
    """Prompt matched no rule and the script has no default response."""


@dataclass
class MockRule:
    match: str
    responses: list[str]

    @classmethod
    def from_obj(cls, obj: dict) -> "MockRule":
        if "responses" in obj:
            responses = [str(r) for r in obj["responses"]]
        else:
            responses = [str(obj["response"])]
        if not responses:
            raise ValueError(f"rule {obj.get('match')!r} has no responses")
        return cls(match=str(obj["match"]), responses=responses)


@dataclass
class MockScript:
    """Ordered (matcher, response) rules plus an optional default.

    First rule whose matcher is a substring of the prompt wins. A rule may
    carry several responses, consumed in order on repeated matches (the last
    one repeats), which is how tests script per-round behavior.
    """

    rules: list[MockRule] = field(default_factory=list)
    default: str | None = None

    @classmethod
    def from_file(cls, path: str) -> "MockScript":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, list):
            return cls(rules=[MockRule.from_obj(o) for o in data])
        return cls(
            rules=[MockRule.from_obj(o) for o in data.get("rules", [])],
            default=data.get("default"),
        )


class MockChatProvider:
    """Chat provider scripted by a MockScript; records every prompt."""

    def __init__(self, script: MockScript, model_name: str = "mock-chat"):
        self.script = script
        self.model_name = model_name
        self.call_log: list[str] = []
        self._hits: dict[int, int] = {}

    def complete(self, req: ChatRequest) -> str:
        self.call_log.append(req.prompt)
        for i, rule in enumerate(self.script.rules):
            if rule.match in req.prompt:
                hit = self._hits.get(i, 0)
                self._hits[i] = hit + 1
                return rule.responses[min(hit, len(rule.responses) - 1)]
        if self.script.default is not None:
            return self.script.default
        raise MockScriptError(f"no rule matched prompt starting {req.prompt[:80]!r}")


def _stable_bucket(token: str, dim: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dim


class HashedBagEmbedding:
    """L2-normalized hashed bag-of-words; identical texts embed identically."""

    def __init__(self, dim: int = 64, model_name: str = "mock-embed"):
        self.dim = dim
        self.model_name = model_name

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            raise ValueError("embed() requires at least one text")
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in text.lower().split():
                out[row, _stable_bucket(token, self.dim)] += 1.0
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class UniformLogProb:
    """Every token gets probability 1/vocab_size; perplexity is vocab_size."""

    def __init__(self, vocab_size: int, model_name: str = "mock-uniform-lm"):
        if vocab_size < 1:
            raise ValueError("vocab_size must be >= 1")
        self.vocab_size = vocab_size
        self.model_name = model_name

    def token_logprobs(self, text: str) -> LogProbSequence:
        if not text:
            raise ValueError("token_logprobs requires non-empty text")
        tokens = text.split()
        lp = -math.log2(self.vocab_size)
        return LogProbSequence(tokens, [lp] * len(tokens))


class UnigramLogProb:
    """Unigram model fitted on a corpus; logprob(t) = log2(count(t) / total)."""

    def __init__(self, counts: dict[str, int], model_name: str = "mock-unigram-lm"):
        self.counts = dict(counts)
        self.total = sum(counts.values())
        if self.total == 0:
            raise ValueError("empty unigram model")
        self.model_name = model_name

    @classmethod
    def fit(cls, corpus: Corpus, tok: TokenizerKind = TokenizerKind.WHITESPACE) -> "UnigramLogProb":
        counts: dict[str, int] = {}
        for doc in corpus:
            for token in tokenize(doc.text, tok):
                counts[token] = counts.get(token, 0) + 1
        return cls(counts)

    def token_logprobs(self, text: str) -> LogProbSequence:
        if not text:
            raise ValueError("token_logprobs requires non-empty text")
        tokens = text.split()
        lps = []
        for t in tokens:
            c = self.counts.get(t, 0)
            if c == 0:
                raise ValueError(f"token {t!r} not in fitted vocabulary")
            lps.append(math.log2(c / self.total))
        return LogProbSequence(tokens, lps)


# ---------------------------------------------------------------------------
# Judge-pipeline mock
# ---------------------------------------------------------------------------

_NUMBERED_LINE_RE = re.compile(r"^(\d+)\.\s+(.*)$", re.MULTILINE)


def _section(prompt: str, header: str) -> str:
    """Text between `header` and the next '## ' header (or end of prompt)."""
    start = prompt.index(header) + len(header)
    rest = prompt[start:]
    nxt = rest.find("\n## ")
    return rest if nxt < 0 else rest[:nxt]


def numbered_samples(prompt: str) -> list[tuple[int, str]]:
    block = _section(prompt, "## All samples") if "## All samples" in prompt else _section(prompt, "## Samples")
    return [(int(m.group(1)), m.group(2)) for m in _NUMBERED_LINE_RE.finditer(block)]


def first_token_fingerprint(text: str) -> str:
    parts = text.split(None, 1)
    return parts[0] if parts else ""


class ClusterPipelineMock:
    """Deterministic judge: fixed criteria proposals plus fingerprint clustering.

    Dispatches on distinctive phrases of the pipeline prompts. Clustering
    groups the numbered samples by `fingerprint` (default: first whitespace
    token), and verification approves every cluster, so the resulting
    diversity score is a pure function of how many distinct fingerprints a
    round happens to sample.
    """

    def __init__(self, fingerprint=first_token_fingerprint, model_name: str = "mock-judge"):
        self.fingerprint = fingerprint
        self.model_name = model_name
        self.call_log: list[str] = []

    def complete(self, req: ChatRequest) -> str:
        self.call_log.append(req.prompt)
        p = req.prompt
        if "come up with a set of cluster metadata" in p:
            return self._criteria_generation()
        if "group a dictionary of metadata" in p:
            return self._summary(p, "Aspect")
        if "group a dictionary of metrics" in p:
            return self._summary(p, "Scale")
        if "summarize each metadata and metric concisely" in p:
            return self._criteria_sentences(p)
        if "measure the absolute diversity" in p:
            return self._clustering(p)
        if "verify whether the clustered text samples" in p:
            return self._verification(p)
        raise MockScriptError(f"pipeline mock got unrecognized prompt: {p[:80]!r}")

    def _criteria_generation(self) -> str:
        return json.dumps(
            {
                "metadata": {
                    "Sample Fingerprint": "Leading token family of the sample text.",
                    "Surface Form": "Shape of the sample body after the lead token.",
                    "Filler Register": "Vocabulary band used by the filler words.",
                },
                "metric": {
                    "Fingerprint Cohesion": "Whether samples share a lead token; 1 disjoint, 5 identical.",
                    "Filler Overlap": "Shared filler vocabulary; 1 none, 5 full overlap.",
                    "Length Band": "Token-length band of the sample; 1 very short, 5 very long.",
                },
            }
        )

    @staticmethod
    def _wanted_k(prompt: str) -> int:
        m = re.search(r"\*\*K=(\d+)\*\*", prompt)
        return int(m.group(1)) if m else 4

    def _summary(self, prompt: str, stem: str) -> str:
        k = self._wanted_k(prompt)
        out = {}
        for i in range(1, k + 1):
            suffix = " Scored 1 (weakest) to 5 (strongest)." if stem == "Scale" else ""
            out[f"{stem} {i}"] = f"{stem} {i} groups samples by facet {i}.{suffix}"
        return json.dumps(out)

    def _criteria_sentences(self, prompt: str) -> str:
        md = extract_json(_section(prompt, "## Metadata"))
        mt = extract_json(_section(prompt, "## Metric"))
        out = {name: f"Cluster text samples by {name.lower()}." for name in md}
        out.update({name: f"Cluster text samples by {name.lower()}." for name in mt})
        return json.dumps(out)

    def _clustering(self, prompt: str) -> str:
        groups: dict[str, list[int]] = {}
        for idx, text in numbered_samples(prompt):
            groups.setdefault(self.fingerprint(text), []).append(idx)
        clusters = []
        for i, (fp, indices) in enumerate(sorted(groups.items()), start=1):
            clusters.append(
                {
                    "cluster": i,
                    "sample indices": indices,
                    "uniqueness reasoning": f"samples share lead token {fp!r}",
                    "cluster_metadata": {"Sample Fingerprint": fp},
                    "cluster_metrics": {
                        "Fingerprint Cohesion": {"reasoning": "identical lead token", "score": 5}
                    },
                }
            )
        return json.dumps({"clusters": clusters})

    def _verification(self, prompt: str) -> str:
        clusters = extract_json(_section(prompt, "## Clusters"))
        return json.dumps(
            [
                {"cluster": c.get("cluster", i + 1), "valid": 1, "reasoning": "coherent group"}
                for i, c in enumerate(clusters)
            ]
        )


_FILLERS = (
    "amber basalt cedar delta ember fjord garnet harbor iris juniper krill lagoon "
    "marble nectar onyx prairie quartz russet sable tundra umber violet walnut yarrow"
).split()


def make_template_corpus(n_templates: int, n_docs: int, seed: int) -> Corpus:
    """Procedural corpus whose documents descend from n_templates templates.

    Each text starts with its template token (the fingerprint the pipeline
    mock clusters on) followed by seeded filler, so true topical diversity
    is exactly the number of distinct templates.
    """
    rng = SplitMix64(seed)
    docs = []
    for i in range(n_docs):
        t = rng.randbelow(n_templates)
        filler = " ".join(_FILLERS[rng.randbelow(len(_FILLERS))] for _ in range(6))
        docs.append(Document(id=f"doc{i:06d}", text=f"tpl{t:05d} {filler} case{i:06d}"))
    return Corpus.from_documents(docs, source=f"<templates:{n_templates}>")
