"""Corpus loading, tokenization, and seeded sampling.

A corpus is an iterable of documents with a stable order. File-backed corpora
stream from disk on every iteration so that million-sample subsets never
require materializing the whole dataset; in-memory corpora wrap a list.
"""

from __future__ import annotations

import enum
import json
import logging
import os
import re
from dataclasses import dataclass, field
from typing import Iterator

from .rng import reservoir_sample

log = logging.getLogger(__name__)


class CorpusError(Exception):
    """Unusable corpus input (missing file, zero valid records, bad sample request)."""


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"document {self.id!r} has empty text")


class TokenizerKind(enum.Enum):
    """Token notion used by length-sensitive metrics.

    UNICODE_WORDS: maximal runs of Unicode word characters, with a single
    ASCII or right-single-quote apostrophe joining two word characters
    ("don't" is one token). WHITESPACE: str.split().
    """

    UNICODE_WORDS = "unicode-words"
    WHITESPACE = "whitespace"


_WORD_RE = re.compile(r"\w+(?:['’]\w+)*", re.UNICODE)


def tokenize(text: str, tok: TokenizerKind) -> list[str]:
    if tok is TokenizerKind.WHITESPACE:
        return text.split()
    return _WORD_RE.findall(text)


def count_tokens(text: str, tok: TokenizerKind) -> int:
    return len(tokenize(text, tok))


class Corpus:
    """Stable-order collection of documents.

    Iteration yields exactly `count` documents; for file-backed corpora the
    validation decisions made at load time (skip malformed lines, skip
    duplicate ids) are re-applied deterministically on every pass.
    """

    def __init__(self, source: str, fmt: str, count: int, docs: list[Document] | None = None):
        self.source = source
        self.format = fmt
        self.count = count
        self._docs = docs

    @classmethod
    def from_documents(cls, docs: list[Document], source: str = "<memory>") -> "Corpus":
        ids = set()
        for d in docs:
            if d.id in ids:
                raise CorpusError(f"duplicate document id {d.id!r}")
            ids.add(d.id)
        return cls(source=source, fmt="memory", count=len(docs), docs=list(docs))

    def __len__(self) -> int:
        return self.count

    def __iter__(self) -> Iterator[Document]:
        if self._docs is not None:
            return iter(self._docs)
        return _iter_jsonl(self.source)

    def sample(self, n: int, seed: int) -> list[Document]:
        """n distinct documents, uniform without replacement, fixed by seed.

        Single streaming pass (reservoir), so identical (source, n, seed)
        reproduces the identical sample on any platform.
        """
        if n < 0:
            raise CorpusError(f"sample size must be non-negative, got {n}")
        if n > self.count:
            raise CorpusError(f"sample size {n} exceeds corpus size {self.count}")
        if n == 0:
            return []
        return reservoir_sample(iter(self), n, seed)


def _parse_jsonl_line(raw: str, lineno: int, basename: str) -> Document | None:
    """One JSONL record to Document, or None if the line is unusable."""
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        log.warning("%s:%d: skipping malformed JSON (%s)", basename, lineno, e.msg)
        return None
    if not isinstance(obj, dict):
        log.warning("%s:%d: skipping non-object record", basename, lineno)
        return None
    text = obj.get("text")
    if not isinstance(text, str) or not text:
        log.warning("%s:%d: skipping record without non-empty 'text'", basename, lineno)
        return None
    doc_id = obj.get("id")
    if doc_id is None:
        doc_id = f"{basename}:{lineno}"
    elif not isinstance(doc_id, str):
        doc_id = str(doc_id)
    meta_raw = obj.get("meta")
    meta: dict[str, str] = {}
    if meta_raw is not None:
        if not isinstance(meta_raw, dict):
            log.warning("%s:%d: skipping record with non-object 'meta'", basename, lineno)
            return None
        meta = {str(k): str(v) for k, v in meta_raw.items()}
    return Document(id=doc_id, text=text, meta=meta)


def _iter_jsonl(path: str) -> Iterator[Document]:
    basename = os.path.basename(path)
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            doc = _parse_jsonl_line(raw, lineno, basename)
            if doc is None:
                continue
            if doc.id in seen_ids:
                log.warning("%s:%d: skipping duplicate id %r", basename, lineno, doc.id)
                continue
            seen_ids.add(doc.id)
            yield doc


def load_corpus(path: str, fmt: str = "jsonl") -> Corpus:
    """Load a JSONL corpus: one object per line, required key "text".

    Malformed lines are skipped with a warning rather than aborting; a corpus
    with zero valid records is an error. The load pass counts records; the
    documents themselves stream from disk on demand.
    """
    if fmt != "jsonl":
        raise CorpusError(f"unsupported corpus format {fmt!r} (only 'jsonl' in v1)")
    if not os.path.isfile(path):
        raise CorpusError(f"corpus file not found: {path}")
    count = 0
    for _ in _iter_jsonl(path):
        count += 1
    if count == 0:
        raise CorpusError(f"empty corpus: no valid records in {path}")
    return Corpus(source=path, fmt="jsonl", count=count)
