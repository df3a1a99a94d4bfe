"""Model-backend interfaces: chat completion, embeddings, token log-probs.

All model access is remote and pluggable; nothing in this package runs
neural inference in-process. HTTP providers speak the OpenAI-compatible
request/response shapes. Offline tests use the deterministic mocks in
`divkit.mocks`.

Log-probability convention: providers may emit natural-log values, but the
LogProbSequence handed to callers always carries log base 2 (the perplexity
definition used downstream is base 2).
"""

from __future__ import annotations

import ast
import json
import math
import os
import random
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, replace
from typing import Any, Callable, Protocol

import numpy as np


class ProviderError(Exception):
    pass


class ProviderConfigError(ProviderError):
    """Provider unusable as configured (missing auth, unsupported capability)."""


class CapabilityError(ProviderError):
    """Backend cannot serve the requested operation."""


class PermanentRequestError(ProviderError):
    """HTTP 4xx other than 429: retrying would not help."""

    def __init__(self, status: int, detail: str):
        super().__init__(f"permanent provider error (HTTP {status}): {detail}")
        self.status = status


class TransportError(ProviderError):
    """Retries exhausted; carries the per-attempt log."""

    def __init__(self, attempts: list[str]):
        super().__init__(f"transport failed after {len(attempts)} attempts: {attempts[-1]}")
        self.attempts = attempts


class TransportFailure(Exception):
    """Raised by transports for network-level failures (always retryable)."""


class JsonExtractError(ProviderError):
    """No parseable JSON found in model output; carries the raw text."""

    def __init__(self, raw: str, reason: str = "no balanced JSON object/array found"):
        super().__init__(f"{reason} in model output ({len(raw)} chars)")
        self.raw = raw


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    temperature: float = 0.7
    max_output_tokens: int = 4096
    json_expected: bool = False

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("empty prompt")
        if self.temperature < 0:
            raise ValueError(f"negative temperature {self.temperature}")


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model_name: str
    auth_env: str = ""
    max_retries: int = 3
    backoff_base: float = 0.5
    requests_per_minute: float = 60.0
    timeout: float = 60.0
    max_in_flight: int = 4

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.requests_per_minute <= 0:
            raise ValueError("requests_per_minute must be > 0")


@dataclass(frozen=True)
class LogProbSequence:
    """Per-token log base-2 probabilities; tokens and logprobs align."""

    tokens: list[str]
    logprobs: list[float]

    def __post_init__(self):
        if len(self.tokens) != len(self.logprobs):
            raise ValueError("tokens and logprobs length mismatch")
        for lp in self.logprobs:
            if lp > 0:
                raise ValueError(f"logprob {lp} > 0")

    @classmethod
    def from_natural(cls, tokens: list[str], natural_logprobs: list[float]) -> "LogProbSequence":
        return cls(tokens, [lp / math.log(2.0) for lp in natural_logprobs])


class ChatProvider(Protocol):
    model_name: str

    def complete(self, req: ChatRequest) -> str: ...


class EmbeddingProvider(Protocol):
    model_name: str

    def embed(self, texts: list[str]) -> np.ndarray: ...


class LogProbProvider(Protocol):
    model_name: str

    def token_logprobs(self, text: str) -> LogProbSequence: ...


# ---------------------------------------------------------------------------
# JSON extraction from model output
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:[jJ][sS][oO][nN])?(.*?)```", re.DOTALL)
_TICK_FENCE_RE = re.compile(r"'''(?:[jJ][sS][oO][nN])?(.*?)'''", re.DOTALL)
_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")
# Models copying a format demonstration sometimes leave its "..." continuation
# markers in the output; lines consisting solely of an ellipsis are droppable.
_ELLIPSIS_LINE_RE = re.compile(r"^\s*\.{3,},?\s*$", re.MULTILINE)


def _loads_lenient(text: str) -> Any:
    """json.loads with mild repairs: trailing commas, stray ellipsis lines,
    python-literal style."""
    text = text.strip()
    if not text:
        raise ValueError("empty")
    try:
        return json.loads(text)
    except ValueError:
        pass
    repaired = _TRAILING_COMMA_RE.sub(r"\1", _ELLIPSIS_LINE_RE.sub("", text))
    try:
        return json.loads(repaired)
    except ValueError:
        pass
    # Some models emit single-quoted, python-flavored dicts.
    value = ast.literal_eval(text)
    if not isinstance(value, (dict, list, str, int, float, bool, type(None))):
        raise ValueError(f"not a JSON-shaped value: {type(value)}")
    return value


def _balanced_slice(text: str, start: int) -> str | None:
    """Substring from `start` spanning one balanced {...} or [...], string-aware."""
    open_ch = text[start]
    close_ch = "}" if open_ch == "{" else "]"
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == open_ch:
            depth += 1
        elif ch == close_ch:
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def extract_json(raw: str) -> Any:
    """Pull the first parseable JSON value out of model output.

    Tries, in order: fenced code blocks (``` or '''), the whole text, then
    every balanced {...}/[...] span in order of appearance. Tolerates
    trailing commas and python-literal quoting. Raises JsonExtractError
    (carrying the raw text) when nothing parses.
    """
    for fence_re in (_FENCE_RE, _TICK_FENCE_RE):
        for m in fence_re.finditer(raw):
            try:
                return _loads_lenient(m.group(1))
            except (ValueError, SyntaxError, TypeError):
                continue
    try:
        return _loads_lenient(raw)
    except (ValueError, SyntaxError, TypeError):
        pass
    decoder = json.JSONDecoder()
    for m in re.finditer(r"[\[{]", raw):
        pos = m.start()
        try:
            value, _ = decoder.raw_decode(raw, pos)
            return value
        except ValueError:
            pass
        candidate = _balanced_slice(raw, pos)
        if candidate is not None:
            try:
                return _loads_lenient(candidate)
            except (ValueError, SyntaxError, TypeError):
                continue
    raise JsonExtractError(raw)


_REPAIR_NOTE = (
    "\n\n# Correction\n\n"
    "Your previous reply could not be parsed ({error}). "
    "Reply again with only the requested JSON and no surrounding text.\n"
)


def complete_json(chat: ChatProvider, req: ChatRequest, max_repairs: int = 1) -> tuple[Any, str]:
    """complete() followed by extract_json, with one re-prompt on parse failure.

    The repair prompt appends the parse error to the original request; after
    max_repairs failures the JsonExtractError propagates (carrying the last
    raw output) rather than looping forever.
    """
    raw = chat.complete(req)
    try:
        return extract_json(raw), raw
    except JsonExtractError as err:
        last = err
    for _ in range(max_repairs):
        repair = replace(req, prompt=req.prompt + _REPAIR_NOTE.format(error=last))
        raw = chat.complete(repair)
        try:
            return extract_json(raw), raw
        except JsonExtractError as err:
            last = err
    raise last


# ---------------------------------------------------------------------------
# Rate limiting and retry
# ---------------------------------------------------------------------------


class RateLimiter:
    """Sliding-window limiter: at most `per_minute` admissions in any 60s window.

    Clock and sleep are injectable so tests can drive a simulated clock.
    Shareable across threads; admission is serialized by an internal lock.
    """

    def __init__(
        self,
        per_minute: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if per_minute <= 0:
            raise ValueError("per_minute must be > 0")
        self.per_minute = per_minute
        self._clock = clock
        self._sleep = sleep
        self._stamps: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self._clock()
                while self._stamps and now - self._stamps[0] >= 60.0:
                    self._stamps.popleft()
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                self._sleep(self._stamps[0] + 60.0 - now)


Transport = Callable[[str, dict, dict, float], tuple[int, Any]]
"""(url, headers, json_body, timeout) -> (status_code, decoded_payload)."""


def _requests_transport(url: str, headers: dict, body: dict, timeout: float) -> tuple[int, Any]:
    import requests

    try:
        resp = requests.post(url, headers=headers, json=body, timeout=timeout)
    except (requests.Timeout, requests.ConnectionError) as e:
        raise TransportFailure(f"{type(e).__name__}: {e}") from e
    except requests.RequestException as e:
        # Malformed URLs and similar are not retryable.
        raise ProviderConfigError(f"request could not be issued: {e}") from e
    try:
        payload = resp.json()
    except ValueError:
        payload = resp.text
    return resp.status_code, payload


class _HttpProviderBase:
    """Shared POST-with-retry plumbing for the OpenAI-compatible providers.

    Retry policy: exponential backoff with full jitter, retrying only on
    network failures, HTTP 429, and HTTP 5xx. Other 4xx responses are
    permanent. Every wire request (including retries) passes the rate
    limiter first.
    """

    def __init__(
        self,
        cfg: ProviderConfig,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        limiter: RateLimiter | None = None,
        jitter: random.Random | None = None,
    ):
        self.cfg = cfg
        self.model_name = cfg.model_name
        self._transport = transport or _requests_transport
        self._sleep = sleep
        self._limiter = limiter or RateLimiter(cfg.requests_per_minute)
        self._jitter = jitter or random.Random()
        self._in_flight = threading.Semaphore(cfg.max_in_flight)
        self._headers = {"Content-Type": "application/json"}
        if cfg.auth_env:
            token = os.environ.get(cfg.auth_env)
            if not token:
                raise ProviderConfigError(
                    f"auth environment variable {cfg.auth_env!r} is not set"
                )
            self._headers["Authorization"] = f"Bearer {token}"

    def _post(self, path: str, body: dict) -> Any:
        url = self.cfg.endpoint.rstrip("/") + path
        attempts: list[str] = []
        for attempt in range(self.cfg.max_retries + 1):
            self._limiter.acquire()
            with self._in_flight:
                try:
                    status, payload = self._transport(url, self._headers, body, self.cfg.timeout)
                except TransportFailure as e:
                    attempts.append(f"attempt {attempt + 1}: {e}")
                else:
                    if status == 200:
                        return payload
                    if status == 429 or status >= 500:
                        attempts.append(f"attempt {attempt + 1}: HTTP {status}")
                    else:
                        raise PermanentRequestError(status, str(payload)[:500])
            if attempt < self.cfg.max_retries:
                self._sleep(self._jitter.uniform(0, min(30.0, self.cfg.backoff_base * 2**attempt)))
        raise TransportError(attempts)


class OpenAIChatProvider(_HttpProviderBase):
    """Chat completions against an OpenAI-compatible endpoint."""

    def complete(self, req: ChatRequest) -> str:
        body: dict[str, Any] = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        if req.json_expected:
            body["response_format"] = {"type": "json_object"}
        payload = self._post("/chat/completions", body)
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise ProviderError(f"malformed chat response: {e}") from e


class OpenAIEmbeddingProvider(_HttpProviderBase):
    """Embeddings against an OpenAI-compatible endpoint."""

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            raise ValueError("embed() requires at least one text")
        payload = self._post("/embeddings", {"model": self.cfg.model_name, "input": texts})
        try:
            rows = sorted(payload["data"], key=lambda r: r["index"])
            matrix = np.asarray([r["embedding"] for r in rows], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise ProviderError(f"malformed embeddings response: {e}") from e
        if matrix.ndim != 2 or matrix.shape[0] != len(texts):
            raise ProviderError(
                f"embedding batch shape {matrix.shape} does not match {len(texts)} inputs"
            )
        return matrix


class OpenAILogProbProvider(_HttpProviderBase):
    """Prompt-token log-probs via the legacy completions endpoint.

    Uses echo + max_tokens=0 so the model scores the prompt itself; values
    arrive in natural log and are converted to base 2 at this boundary.
    Endpoints without echoed logprobs fail loudly at first use.
    """

    def token_logprobs(self, text: str) -> LogProbSequence:
        if not text:
            raise ValueError("token_logprobs requires non-empty text")
        body = {
            "model": self.cfg.model_name,
            "prompt": text,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
        }
        payload = self._post("/completions", body)
        try:
            lp = payload["choices"][0]["logprobs"]
            tokens = lp["tokens"]
            values = lp["token_logprobs"]
        except (KeyError, IndexError, TypeError) as e:
            raise CapabilityError(
                f"endpoint did not return echoed prompt logprobs: {e}"
            ) from e
        # First prompt token has no conditional probability (null in the API).
        pairs = [(t, v) for t, v in zip(tokens, values) if v is not None]
        return LogProbSequence.from_natural([t for t, _ in pairs], [v for _, v in pairs])
