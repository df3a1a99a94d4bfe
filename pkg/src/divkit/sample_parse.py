"""Parsing of generated passage+quiz samples.

Generation prompts demand a JSON object, but models frequently answer with
the rendered document instead: passages as paragraphs, a question, four
option lines in any of half a dozen marker styles, and an answer line such
as "Key: ii" or "The correct choice is: ...". Both forms parse here. The one
hard invariant is the quiz shape: exactly four options and an answer that
resolves to exactly one of them; everything else (passage count, missing
explanation) is a soft flag on the parsed sample.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from .providers import JsonExtractError, extract_json


class SampleParseError(Exception):
    """Output does not contain a usable passages+quiz sample."""


@dataclass
class Passage:
    text: str
    nuanced_content: list[str] = field(default_factory=list)


@dataclass
class MultipleChoice:
    question: str
    options: list[str]
    answer_label: str
    explanation: str = ""


@dataclass
class SyntheticSample:
    passages: list[Passage]
    mcq: MultipleChoice
    provenance: dict[str, Any] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def text_fields(self) -> list[str]:
        """Every generated text span, for token accounting."""
        return (
            [p.text for p in self.passages]
            + [self.mcq.question]
            + list(self.mcq.options)
            + ([self.mcq.explanation] if self.mcq.explanation else [])
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "passages": [
                {"nuanced_content": p.nuanced_content, "passage": p.text} for p in self.passages
            ],
            "mcq": {
                "question": self.mcq.question,
                "options": self.mcq.options,
                "answer_label": self.mcq.answer_label,
                "explanation": self.mcq.explanation,
            },
            "provenance": self.provenance,
            "flags": self.flags,
        }


def _norm_key(key: str) -> str:
    return key.strip().lower().replace(" ", "_")


_ROMAN = {"i": 1, "ii": 2, "iii": 3, "iv": 4, "v": 5}


def _label_ordinal(label: str) -> int | None:
    """Option ordinal (1-based) from a marker label like '3', 'iv', or 'B'."""
    label = label.strip().strip(".):(").strip()
    if not label:
        return None
    if label.isdigit():
        return int(label)
    low = label.lower()
    if low in _ROMAN:
        return _ROMAN[low]
    if len(label) == 1 and label.upper() in "ABCD":
        return ord(label.upper()) - ord("A") + 1
    return None


def _squash(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip().strip(".").casefold()


def resolve_answer(answer: str, options: list[str]) -> int:
    """Index of the option the answer designates.

    Resolution ladder: exact text, ordinal label, normalized text, then
    unique containment (models sometimes echo the option minus its leading
    words). Anything ambiguous or unmatched is an error.
    """
    answer = answer.strip()
    for i, opt in enumerate(options):
        if answer == opt.strip():
            return i
    ordinal = _label_ordinal(answer)
    if ordinal is not None and 1 <= ordinal <= len(options):
        return ordinal - 1
    normalized = _squash(answer)
    if normalized:
        hits = [i for i, opt in enumerate(options) if _squash(opt) == normalized]
        if len(hits) == 1:
            return hits[0]
        hits = [
            i
            for i, opt in enumerate(options)
            if _squash(opt).endswith(normalized) or normalized.endswith(_squash(opt))
        ]
        if len(hits) == 1:
            return hits[0]
    raise SampleParseError(f"answer {answer!r} does not resolve to one of {options}")


def _build_mcq(question: str, options: list[str], answer: str, explanation: str) -> MultipleChoice:
    if len(options) != 4:
        raise SampleParseError(f"expected 4 options, got {len(options)}")
    cleaned = [o.strip() for o in options]
    if any(not o for o in cleaned):
        raise SampleParseError("blank option")
    idx = resolve_answer(answer, cleaned)
    return MultipleChoice(
        question=question.strip(),
        options=cleaned,
        answer_label=cleaned[idx],
        explanation=explanation.strip(),
    )


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


def _sample_from_json(value: Any) -> SyntheticSample:
    if not isinstance(value, dict):
        raise SampleParseError("sample JSON is not an object")
    obj = {_norm_key(k): v for k, v in value.items()}
    raw_passages = obj.get("passages")
    raw_mcq = obj.get("multiple_choice_question", obj.get("mcq"))
    if raw_passages is None or raw_mcq is None:
        raise SampleParseError("missing 'passages' or 'multiple_choice_question'")
    if not isinstance(raw_passages, list) or not raw_passages:
        raise SampleParseError("'passages' must be a non-empty list")

    passages = []
    for item in raw_passages:
        if isinstance(item, str):
            passages.append(Passage(text=item))
            continue
        if not isinstance(item, dict):
            raise SampleParseError("passage entry is not an object")
        p = {_norm_key(k): v for k, v in item.items()}
        text = p.get("passage", p.get("text"))
        if not isinstance(text, str) or not text.strip():
            raise SampleParseError("passage entry without text")
        nuanced = p.get("nuanced_content_to_be_learned", p.get("nuanced_content", []))
        if not isinstance(nuanced, list):
            nuanced = [str(nuanced)]
        passages.append(Passage(text=text, nuanced_content=[str(v) for v in nuanced]))

    if not isinstance(raw_mcq, dict):
        raise SampleParseError("'multiple_choice_question' is not an object")
    q = {_norm_key(k): v for k, v in raw_mcq.items()}
    options = q.get("options")
    if not isinstance(options, list):
        raise SampleParseError("'options' missing or not a list")
    mcq = _build_mcq(
        question=str(q.get("question", "")),
        options=[str(o) for o in options],
        answer=str(q.get("answer_label", q.get("answer", ""))),
        explanation=str(
            q.get("step_by_step_answer_explanation", q.get("explanation", ""))
        ),
    )
    if not mcq.question:
        raise SampleParseError("empty question")
    flags = []
    if not 3 <= len(passages) <= 5:
        flags.append(f"passage_count:{len(passages)}")
    if not mcq.explanation:
        flags.append("no_explanation")
    return SyntheticSample(passages=passages, mcq=mcq, flags=flags)


# ---------------------------------------------------------------------------
# Rendered-text form
# ---------------------------------------------------------------------------

_ANSWER_RE = re.compile(
    r"^\s*(?:key|answer|a|selected answer|the answer is|the correct choice is|"
    r"the correct answer is|correct answer)\s*:\s*(.+)$",
    re.IGNORECASE,
)

_INTRO_RE = re.compile(
    r"^\s*(?:can you answer this|try to solve this|test your knowledge|"
    r"here is a question for you|challenge|q)\s*[:?]\s*(.*)$",
    re.IGNORECASE,
)

_OPTION_MARKER_RE = re.compile(
    r"^\s*(?:([*\-•])|\((\d{1,2})\)|(\d{1,2})[.)]|([ivxIVX]{1,4})[.)]|([A-Da-d])[.)])\s+(.*)$"
)


def _strip_option_marker(line: str) -> tuple[str | None, str]:
    m = _OPTION_MARKER_RE.match(line)
    if not m:
        return None, line.strip()
    label = m.group(2) or m.group(3) or m.group(4) or m.group(5)
    return label, m.group(6).strip()


def _sample_from_text(raw: str) -> SyntheticSample:
    lines = [ln.rstrip() for ln in raw.strip().splitlines()]
    nonempty = [(i, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not nonempty:
        raise SampleParseError("empty output")

    answer_pos = answer_text = None
    for pos, (i, ln) in enumerate(nonempty):
        m = _ANSWER_RE.match(ln)
        if m:
            answer_pos, answer_text = pos, m.group(1).strip()
            break
    if answer_pos is None:
        raise SampleParseError("no answer line found")

    question_pos = None
    for pos in range(answer_pos - 1, -1, -1):
        if nonempty[pos][1].endswith("?"):
            question_pos = pos
            break
    if question_pos is None:
        raise SampleParseError("no question line found before the answer")
    question = nonempty[question_pos][1].rstrip("?").rstrip("?") + "?"
    intro_m = _INTRO_RE.match(question)
    if intro_m and intro_m.group(1):
        question = intro_m.group(1)

    option_lines = [nonempty[pos][1] for pos in range(question_pos + 1, answer_pos)]
    options = []
    labels: list[str | None] = []
    for ln in option_lines:
        label, text = _strip_option_marker(ln)
        labels.append(label)
        options.append(text)

    # An ordinal answer refers to the printed option labels when they exist.
    if answer_text is not None and all(labels) and len(options) == 4:
        ordinal = _label_ordinal(answer_text)
        if ordinal is not None:
            by_label = {_label_ordinal(lbl): i for i, lbl in enumerate(labels)}
            if ordinal in by_label:
                answer_text = options[by_label[ordinal]]

    explanation = "\n".join(ln for _, ln in nonempty[answer_pos + 1 :])

    passages = []
    for pos in range(question_pos):
        ln = nonempty[pos][1]
        if _INTRO_RE.match(ln) and pos == question_pos - 1:
            continue
        passages.append(Passage(text=ln))
    if not passages:
        raise SampleParseError("no passage text before the question")

    mcq = _build_mcq(question, options, answer_text, explanation)
    flags = ["rendered_text"]
    if not 3 <= len(passages) <= 5:
        flags.append(f"passage_count:{len(passages)}")
    if not mcq.explanation:
        flags.append("no_explanation")
    return SyntheticSample(passages=passages, mcq=mcq, flags=flags)


def parse_sample(raw: str) -> SyntheticSample:
    """Parse one model output into a sample, trying JSON before rendered text."""
    try:
        value = extract_json(raw)
    except JsonExtractError:
        value = None
    if isinstance(value, dict):
        keys = {_norm_key(k) for k in value}
        if keys & {"passages", "multiple_choice_question", "mcq"}:
            return _sample_from_json(value)
    return _sample_from_text(raw)
