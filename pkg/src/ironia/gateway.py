"""LLM prompting, clients and the strict response grammar.

Two prompt templates ship in Spanish (default) and English: one classifies
a fragment into the four sentiment tags, the other expands a fragment while
preserving meaning. Responses to the classification prompt must start with
the tag in single quotes followed by an explanation between asterisks; the
parser enforces exactly that grammar.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Protocol, Sequence

from .corpus import Entry, Label, Mode, normalize_label
from .errors import (
    ConfigError,
    EmptyCompletionError,
    EmptyTextError,
    ExplanationParseError,
    LlmRequestError,
    MissingLabelError,
    TagParseError,
    UnknownLabelError,
)

logger = logging.getLogger(__name__)

PLACEHOLDER = "{{TEXT}}"
MAX_RESPONSE_WORDS = 500

TEMPLATE_IDS = ("classification", "enhancement")
LANGUAGES = ("es", "en")


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str
    language: str

    def render(self, text: str) -> str:
        if not text.strip():
            raise EmptyTextError("cannot render a prompt for empty text")
        return self.body.replace(PLACEHOLDER, text)


def load_template(template_id: str, language: str = "es") -> PromptTemplate:
    if template_id not in TEMPLATE_IDS:
        raise ValueError(f"unknown template id {template_id!r}")
    if language not in LANGUAGES:
        raise ValueError(f"unknown template language {language!r}")
    body = (
        resources.files("ironia")
        .joinpath(f"prompts/{template_id}_{language}.txt")
        .read_text(encoding="utf-8")
        .rstrip("\n")
    )
    return PromptTemplate(id=template_id, body=body, language=language)


def render_classification_prompt(entry: Entry, language: str = "es") -> str:
    return load_template("classification", language).render(entry.text)


def render_enhancement_prompt(entry: Entry, language: str = "es") -> str:
    return load_template("enhancement", language).render(entry.text)


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float = 0.0
    max_output_words: Optional[int] = None
    entry_id: Optional[str] = None  # correlation key for fixture-backed clients

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class Annotation:
    """Machine label plus its asterisk-delimited justification."""

    entry_id: str
    tag: Label
    explanation: str
    raw_response: str
    model_id: str
    created_at: float

    def to_dict(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "tag": self.tag.value,
            "explanation": self.explanation,
            "raw_response": self.raw_response,
            "model_id": self.model_id,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Annotation":
        return cls(
            entry_id=raw["entry_id"],
            tag=normalize_label(raw["tag"]),
            explanation=raw["explanation"],
            raw_response=raw.get("raw_response", ""),
            model_id=raw.get("model_id", "unknown"),
            created_at=float(raw.get("created_at", 0.0)),
        )


class LlmClient(Protocol):
    model_id: str

    def complete(self, request: CompletionRequest) -> str: ...


class MockLlmClient:
    """Pure, deterministic client backed by a fixture table.

    Responses are keyed by entry id or, failing that, by the SHA-256 of the
    prompt. Useful for tests and offline runs.
    """

    model_id = "mock"

    def __init__(self, fixtures: dict[str, str], default: Optional[str] = None):
        self.fixtures = dict(fixtures)
        self.default = default

    @classmethod
    def from_jsonl(cls, path: str | Path, default: Optional[str] = None) -> "MockLlmClient":
        fixtures = {}
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    row = json.loads(line)
                    fixtures[str(row["key"])] = str(row["response"])
        return cls(fixtures, default=default)

    def complete(self, request: CompletionRequest) -> str:
        if request.entry_id is not None and request.entry_id in self.fixtures:
            return self.fixtures[request.entry_id]
        digest = hashlib.sha256(request.prompt.encode("utf-8")).hexdigest()
        if digest in self.fixtures:
            return self.fixtures[digest]
        if self.default is not None:
            return self.default
        raise LlmRequestError(f"no fixture for entry {request.entry_id!r}")


class RemoteLlmClient:
    """JSON chat-completion HTTP client (configured base URL and model)."""

    def __init__(
        self,
        base_url: str,
        model_id: str,
        credential_env: str = "IRONIA_API_KEY",
        timeout: float = 60.0,
    ):
        api_key = os.environ.get(credential_env)
        if not api_key:
            raise ConfigError(
                f"remote client selected but {credential_env} is not set"
            )
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.timeout = timeout
        self._headers = {"Authorization": f"Bearer {api_key}"}
        self._client = None

    def _http(self):
        if self._client is None:
            import httpx

            self._client = httpx.Client(timeout=self.timeout)
        return self._client

    def complete(self, request: CompletionRequest) -> str:
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        try:
            response = self._http().post(
                f"{self.base_url}/chat/completions", json=payload, headers=self._headers
            )
            response.raise_for_status()
            return response.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise LlmRequestError(f"completion request failed: {exc}") from exc


# Tag grammar: response starts with the tag in single quotes (straight or
# typographic), leading whitespace tolerated.
_TAG_RE = re.compile(r"^\s*['‘’]\s*([^'‘’*]+?)\s*['‘’]")
_EXPLANATION_RE = re.compile(r"\*([^*]+)\*")


def parse_classification_response(raw: str) -> tuple[Label, str]:
    """Extract (tag, explanation) from a classification response.

    The tag is normalized to the canonical Spanish label (English variants
    accepted); the explanation is the text between the first pair of
    asterisks after the tag, returned verbatim.
    """
    match = _TAG_RE.match(raw)
    if not match:
        raise TagParseError("response does not begin with a quoted tag")
    try:
        tag = normalize_label(match.group(1), Mode.MULTICLASS)
    except UnknownLabelError as exc:
        raise TagParseError(f"unknown tag {match.group(1)!r}") from exc
    explanation = _EXPLANATION_RE.search(raw, match.end())
    if not explanation:
        raise ExplanationParseError("no asterisk-delimited explanation found")
    return tag, explanation.group(1)


def format_classification_response(tag: Label, explanation: str) -> str:
    """Emit a response in the grammar the parser accepts: 'TAG' *explanation*."""
    if "*" in explanation:
        raise ValueError("explanation must not contain asterisks")
    return f"'{tag.value}' *{explanation}*"


@dataclass(frozen=True)
class RetryPolicy:
    retries: int = 2
    backoff: float = 0.1
    max_in_flight: int = 1


@dataclass(frozen=True)
class BatchFailure:
    entry_id: str
    kind: str
    error: str

    def to_dict(self) -> dict:
        return {"entry_id": self.entry_id, "kind": self.kind, "error": self.error}


def _complete_with_retries(client: LlmClient, request: CompletionRequest, policy: RetryPolicy) -> str:
    last: Exception | None = None
    for attempt in range(policy.retries + 1):
        try:
            return client.complete(request)
        except Exception as exc:  # recorded per entry, never aborts the batch
            last = exc
            if attempt < policy.retries and policy.backoff > 0:
                time.sleep(policy.backoff * (attempt + 1))
    assert last is not None
    raise last


def annotate_batch(
    entries: Sequence[Entry],
    client: LlmClient,
    policy: RetryPolicy = RetryPolicy(),
    language: str = "es",
    now=time.time,
) -> tuple[list[Annotation], list[BatchFailure]]:
    """Classify a batch of entries; one Annotation per parsed response.

    Failed entries (unreachable client after retries, grammar violations)
    are collected instead of raised, so a single bad entry never aborts the
    batch. Results are returned in input order and
    len(annotations) + len(failures) == len(entries).
    """
    if not entries:
        raise EmptyTextError("annotate_batch requires at least one entry")
    template = load_template("classification", language)

    def work(entry: Entry):
        request = CompletionRequest(
            prompt=template.render(entry.text),
            max_output_words=MAX_RESPONSE_WORDS,
            entry_id=entry.id,
        )
        raw = _complete_with_retries(client, request, policy)
        if len(raw.split()) > MAX_RESPONSE_WORDS:
            logger.warning(
                "response for %s exceeds %d words; accepted anyway",
                entry.id,
                MAX_RESPONSE_WORDS,
            )
        tag, explanation = parse_classification_response(raw)
        return Annotation(
            entry_id=entry.id,
            tag=tag,
            explanation=explanation,
            raw_response=raw,
            model_id=client.model_id,
            created_at=now(),
        )

    annotations: list[Annotation] = []
    failures: list[BatchFailure] = []
    for entry, outcome in zip(entries, _run_batch(work, entries, policy.max_in_flight)):
        if isinstance(outcome, Exception):
            failures.append(
                BatchFailure(entry_id=entry.id, kind=type(outcome).__name__, error=str(outcome))
            )
        else:
            annotations.append(outcome)
    return annotations, failures


def _run_batch(work, items, max_in_flight: int):
    def guarded(item):
        try:
            return work(item)
        except Exception as exc:
            return exc

    if max_in_flight > 1:
        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            return list(pool.map(guarded, items))
    return [guarded(item) for item in items]


@dataclass(frozen=True)
class EnhancedText:
    """Expanded text paired with the original for audit."""

    entry_id: str
    label: Label
    original_text: str
    expanded_text: str

    def to_dict(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "label": self.label.value,
            "original_text": self.original_text,
            "expanded_text": self.expanded_text,
        }


def enhance_batch(
    entries: Sequence[Entry],
    client: LlmClient,
    policy: RetryPolicy = RetryPolicy(),
    language: str = "es",
) -> tuple[list[EnhancedText], list[BatchFailure]]:
    """Expand each labeled entry's text, keeping id and gold label."""
    for entry in entries:
        if entry.label is None:
            raise MissingLabelError(
                f"entry {entry.id!r} is unlabeled; enhancement preserves gold labels"
            )
    template = load_template("enhancement", language)

    def work(entry: Entry):
        request = CompletionRequest(prompt=template.render(entry.text), entry_id=entry.id)
        raw = _complete_with_retries(client, request, policy)
        if not raw.strip():
            raise EmptyCompletionError(f"empty completion for entry {entry.id!r}")
        return EnhancedText(
            entry_id=entry.id,
            label=entry.label,
            original_text=entry.text,
            expanded_text=raw,
        )

    results: list[EnhancedText] = []
    failures: list[BatchFailure] = []
    for entry, outcome in zip(entries, _run_batch(work, entries, policy.max_in_flight)):
        if isinstance(outcome, Exception):
            failures.append(
                BatchFailure(entry_id=entry.id, kind=type(outcome).__name__, error=str(outcome))
            )
        else:
            results.append(outcome)
    return results, failures
