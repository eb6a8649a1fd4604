"""Prompt templates, answer generators and token accounting."""
from __future__ import annotations

import enum
import logging
import math
import os
import re
import time
from dataclasses import dataclass
from typing import Protocol

import httpx

from ._http import post_json
from .exceptions import GenerationError
from .retrieval import RetrievedContext

logger = logging.getLogger(__name__)

GENERATION_KEY_ENV = "LINKRAG_GENERATION_API_KEY"
CHUNK_SEPARATOR = "\n\n"


class PromptKind(str, enum.Enum):
    BASIC = "basic"
    ROLE_BASED = "role_based"
    REASONING = "reasoning"
    HYPERLINKED = "hyperlinked"
    UNIFIED = "unified"

    def __str__(self):
        return self.value


# Trailing spaces inside these templates are intentional.
TEMPLATES = {
    PromptKind.BASIC: (
        "Answer the question based only on the following context:\n"
        "\n"
        "{context}\n"
        "\n"
        "---\n"
        "\n"
        "Answer the question based on the above context: {question}"
    ),
    PromptKind.ROLE_BASED: (
        "You are a technical assistant specializing in Rulex documentation.\n"
        "Answer the question using best practices, potential problems,\n"
        "and expert recommendations. \n"
        "If applicable, include a \"Warning\" or \"Tip\" section.\n"
        "\n"
        "CONTEXT: {context}\n"
        "QUESTION: {question}\n"
        "ANSWER:"
    ),
    PromptKind.REASONING: (
        "Answer the question based only on the following context. \n"
        "If the context does not provide sufficient information, explicitly\n"
        "state which details are missing and supplement them with \n"
        "external documentation.\n"
        "\n"
        "CONTEXT: {context}\n"
        "QUESTION: {question}\n"
        "ANSWER:"
    ),
    PromptKind.HYPERLINKED: (
        "Original context:\n"
        "{original_context}\n"
        "\n"
        "---\n"
        "\n"
        "Additional context (linked):\n"
        "{linked_context}\n"
        "\n"
        "---\n"
        "\n"
        "Question:\n"
        "{question}\n"
        "\n"
        "Please use both sections of context to answer the question \n"
        "comprehensively. Carefully consider the information from \n"
        "both the original context and the linked context."
    ),
    PromptKind.UNIFIED: (
        "CONTEXT:\n"
        "{context}\n"
        "\n"
        "QUESTION:\n"
        "{question}\n"
        "\n"
        "Please use the above context to answer the question comprehensively."
    ),
}

_PLACEHOLDER = re.compile(r"\{(context|original_context|linked_context|question)\}")


def fill_template(template: str, **values: str) -> str:
    """Single-pass substitution, so placeholder-like text in values stays literal."""
    return _PLACEHOLDER.sub(lambda m: values[m.group(1)], template)


def render_prompt(kind, context: RetrievedContext, question: str,
                  events: list | None = None) -> str:
    kind = PromptKind(kind)
    if not context.final:
        raise ValueError("cannot render a prompt for an empty context")
    chunks = context.final_chunks()
    if kind is PromptKind.HYPERLINKED:
        expanded = set(context.expanded_ids)
        original = CHUNK_SEPARATOR.join(c.text for c in chunks if c.id not in expanded)
        linked = CHUNK_SEPARATOR.join(c.text for c in chunks if c.id in expanded)
        if not linked and events is not None:
            events.append("hyperlinked prompt rendered with an empty linked block")
        return fill_template(TEMPLATES[kind], original_context=original,
                             linked_context=linked, question=question)
    text = CHUNK_SEPARATOR.join(c.text for c in chunks)
    return fill_template(TEMPLATES[kind], context=text, question=question)


def count_tokens(text: str) -> int:
    """Rough estimate: one token per four UTF-8 bytes, rounded up."""
    return math.ceil(len(text.encode("utf-8")) / 4)


@dataclass(frozen=True)
class GenerationResult:
    answer: str
    prompt_tokens: int
    completion_tokens: int
    latency: float
    estimated: bool = False
    refused: bool = False

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class Generator(Protocol):
    def generate(self, prompt: str) -> GenerationResult: ...


_STOPWORDS = frozenset("""
a an and are as at be by can do does for from how i if in into is it its my of on or
so that the their then there these this to use used using was what when where which
who why will with you your
""".split())

_QUESTION_PATTERNS = (
    re.compile(r"^QUESTION:[ \n](.+?)(?:\n\n|\nANSWER:|\Z)", re.M | re.S),
    re.compile(r"^Question:\n(.+?)(?:\n\n|\Z)", re.M | re.S),
    re.compile(r"based on the above context: (.+)\Z", re.S),
)


_BOILERPLATE = frozenset(
    line.strip()
    for template in TEMPLATES.values()
    for line in template.splitlines()
    if "{" not in line and line.strip()
)


def _strip_boilerplate(prompt: str) -> str:
    lines = []
    for line in prompt.split("\n"):
        if line.strip() in _BOILERPLATE or line.startswith("QUESTION: "):
            lines.append("")
        elif line.startswith("CONTEXT: "):
            lines.append(line[len("CONTEXT: "):])
        else:
            lines.append(line)
    return "\n".join(lines)


def content_words(text: str) -> set[str]:
    return {w for w in re.findall(r"[a-z0-9]+", text.lower())
            if len(w) > 2 and w not in _STOPWORDS}


def _split_sentences(block: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+", block.strip())
    return [p.strip() for p in parts if p.strip()]


class MockGenerator:
    """Deterministic extractive stand-in for a chat model.

    Finds the question inside the rendered prompt, ranks the prompt's
    blank-line separated blocks by content words shared with it, and answers
    with the first ``n_sentences`` sentences taken from the best blocks.
    """

    def __init__(self, n_sentences: int = 3):
        self.n_sentences = n_sentences

    @staticmethod
    def find_question(prompt: str) -> str:
        for pattern in _QUESTION_PATTERNS:
            match = pattern.search(prompt)
            if match:
                return match.group(1).strip()
        return prompt.strip().splitlines()[-1]

    def answer(self, prompt: str) -> str:
        question = self.find_question(prompt)
        wanted = content_words(question)
        blocks = []
        for position, block in enumerate(re.split(r"\n\s*\n", _strip_boilerplate(prompt))):
            block = block.strip()
            if not block or question in block:
                continue
            blocks.append((-len(wanted & content_words(block)), position, block))
        blocks.sort()
        sentences: list[str] = []
        for _, _, block in blocks:
            sentences.extend(_split_sentences(block))
            if len(sentences) >= self.n_sentences:
                break
        return " ".join(sentences[:self.n_sentences]) or "The context does not contain an answer."

    def generate(self, prompt: str) -> GenerationResult:
        if not prompt or not prompt.strip():
            raise ValueError("prompt must be non-empty")
        started = time.perf_counter()
        answer = self.answer(prompt)
        return GenerationResult(answer, count_tokens(prompt), count_tokens(answer),
                                time.perf_counter() - started, estimated=True)


class RemoteGenerator:
    """Chat-completions client (``messages`` in, ``choices[0].message`` out)."""

    def __init__(self, endpoint: str, model: str, api_key: str | None = None, *,
                 temperature: float = 0.0, retries: int = 3, backoff: float = 0.5,
                 timeout: float = 60.0, client: httpx.Client | None = None,
                 sleep=time.sleep):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(GENERATION_KEY_ENV)
        self.temperature = temperature
        self.retries = retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)
        self._sleep = sleep

    def generate(self, prompt: str) -> GenerationResult:
        if not prompt or not prompt.strip():
            raise ValueError("prompt must be non-empty")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {"model": self.model, "temperature": self.temperature,
                   "messages": [{"role": "user", "content": prompt}]}
        started = time.perf_counter()
        body = post_json(self._client, self.endpoint, payload, headers=headers,
                         retries=self.retries, backoff=self.backoff,
                         error_cls=GenerationError, sleep=self._sleep)
        latency = time.perf_counter() - started
        try:
            message = body["choices"][0]["message"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GenerationError(f"malformed chat response: {exc}") from exc
        refusal = message.get("refusal")
        answer = refusal if refusal else (message.get("content") or "")
        usage = body.get("usage") or {}
        if isinstance(usage.get("prompt_tokens"), int) and isinstance(usage.get("completion_tokens"), int):
            return GenerationResult(answer, usage["prompt_tokens"], usage["completion_tokens"],
                                    latency, estimated=False, refused=bool(refusal))
        return GenerationResult(answer, count_tokens(prompt), count_tokens(answer), latency,
                                estimated=True, refused=bool(refusal))

    def close(self):
        self._client.close()
