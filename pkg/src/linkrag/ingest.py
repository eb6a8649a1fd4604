"""HTML documentation ingestion.

Pages are split into anchor-aligned sections, every ``<a href>`` inside a
section becomes a :class:`LinkRef` carrying a twelve-word context window,
and sections are cut into overlapping character chunks whose ids follow
``<source>:<anchor_name>-<chunk_index>``.
"""
from __future__ import annotations

import json
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import urldefrag, urljoin, urlsplit

from bs4 import BeautifulSoup, NavigableString, Tag
from bs4.element import PreformattedString

from .exceptions import IngestError

logger = logging.getLogger(__name__)

PAGE_ROOT = "page-root"
CONTEXT_WORDS = 12
DEFAULT_CHUNK_SIZE = 1000
DEFAULT_OVERLAP = 150
SEPARATORS = ("\n\n", "\n", ". ", " ")

_HEADINGS = frozenset(f"h{i}" for i in range(1, 7))
_SKIP_TAGS = frozenset({"script", "style", "head", "title", "noscript", "template", "svg"})
_PARAGRAPH_TAGS = frozenset({
    "p", "pre", "section", "article", "div", "table", "ul", "ol", "dl",
    "blockquote", "figure", "main", "header", "footer", "nav", "aside",
    "form", "hr", "body", "details", "summary",
} | _HEADINGS)
_LINE_TAGS = frozenset({"li", "tr", "br", "dt", "dd", "caption", "figcaption"})
_CELL_TAGS = frozenset({"td", "th"})
_ALLOWED_SCHEMES = frozenset({"http", "https", "file"})


@dataclass(frozen=True)
class SourceDocument:
    url: str
    html: bytes


@dataclass(frozen=True)
class LinkRef:
    """An outgoing hyperlink resolved to an absolute target."""

    target_url: str
    target_anchor: str | None
    context: str
    is_internal: bool

    def to_dict(self) -> dict:
        return {
            "target_url": self.target_url,
            "target_anchor": self.target_anchor,
            "context": self.context,
            "is_internal": self.is_internal,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinkRef":
        return cls(
            target_url=data["target_url"],
            target_anchor=data.get("target_anchor"),
            context=data["context"],
            is_internal=bool(data["is_internal"]),
        )

    @property
    def href(self) -> str:
        if self.target_anchor:
            return f"{self.target_url}#{self.target_anchor}"
        return self.target_url


@dataclass
class Section:
    """Visible text of one anchored block plus the links found inside it.

    ``link_spans[i]`` is the character range of ``links[i]``'s anchor text
    within ``text``; chunking uses it to place each link in one chunk.
    """

    source_url: str
    anchor_name: str
    text: str
    links: list[LinkRef] = field(default_factory=list)
    link_spans: list[tuple[int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class Chunk:
    id: str
    source_url: str
    anchor_name: str
    chunk_index: int
    text: str
    links: tuple[LinkRef, ...] = ()

    @property
    def links_context(self) -> list[str]:
        return [link.context for link in self.links]

    def metadata(self) -> dict:
        return {
            "source": self.source_url,
            "anchor_name": self.anchor_name,
            "id": self.id,
            "links": [link.href for link in self.links],
            "links_context": self.links_context,
        }


@dataclass(frozen=True)
class LinkWarning:
    href: str
    base: str
    reason: str

    def to_json(self) -> str:
        return json.dumps({"href": self.href, "base": self.base, "reason": self.reason})


def build_chunk_id(source_url: str, anchor_name: str, chunk_index: int) -> str:
    if not anchor_name:
        raise ValueError("anchor_name must be non-empty")
    return f"{source_url}:{anchor_name}-{chunk_index}"


def normalize_link(href: str, base_url: str, corpus_root: str | None = None):
    """Resolve ``href`` against ``base_url``.

    Returns ``(absolute_url, anchor_or_None, is_internal)``. A link is
    internal when it falls under ``corpus_root``; without a root, when it
    shares scheme and host with the base page. Raises ValueError for hrefs
    that cannot be followed.
    """
    raw = (href or "").strip()
    if not raw:
        raise ValueError("empty href")
    try:
        absolute = urljoin(base_url, raw)
        url, fragment = urldefrag(absolute)
        parts = urlsplit(url)
    except ValueError as exc:
        raise ValueError(f"unparsable href: {exc}") from None
    if parts.scheme not in _ALLOWED_SCHEMES:
        raise ValueError(f"unsupported scheme {parts.scheme!r}")
    if corpus_root is not None:
        internal = url.startswith(corpus_root)
    else:
        base = urlsplit(base_url)
        internal = (parts.scheme, parts.netloc) == (base.scheme, base.netloc)
    return url, (fragment or None), internal


def extract_link_context(section_text: str, link_span: tuple[int, int],
                         n_words: int = CONTEXT_WORDS) -> str:
    """Window of at most ``n_words`` words around a link.

    The anchor text's own words count toward the budget; what is left is
    split before/after, the extra word going before when the remainder is
    odd. The window is clipped at the text boundaries, never shifted.
    """
    start, end = link_span
    words = [(m.start(), m.end()) for m in re.finditer(r"\S+", section_text)]
    if not words:
        return ""
    inside = [i for i, (ws, we) in enumerate(words) if ws < end and we > start]
    if inside:
        first, last = inside[0], inside[-1]
        if len(inside) >= n_words:
            last = first + n_words - 1
            return _join_words(section_text, words[first:last + 1])
        remaining = n_words - len(inside)
    else:
        # empty anchor text: window centred on the insertion point
        first = sum(1 for ws, _ in words if ws < start)
        last = first - 1
        remaining = n_words
    n_before = math.ceil(remaining / 2)
    n_after = remaining // 2
    lo = max(0, first - n_before)
    hi = min(len(words), last + 1 + n_after)
    return _join_words(section_text, words[lo:hi])


def _join_words(text, spans):
    return " ".join(text[s:e] for s, e in spans)


class _SectionBuilder:
    """Accumulates whitespace-normalised text and link spans for one anchor."""

    def __init__(self, anchor):
        self.anchor = anchor
        self.text = ""
        self.pending_break = 0
        self.links = []  # [href, start, end]
        self._open = []

    def add_break(self, strength):
        self.pending_break = max(self.pending_break, strength)

    def add_text(self, raw):
        chunk = re.sub(r"\s+", " ", raw)
        if not chunk.strip():
            if self.text and not self.pending_break and self.text[-1] not in " \n":
                self.text += " "
            return
        if self.pending_break:
            if self.text:
                self.text = self.text.rstrip(" ") + "\n" * self.pending_break
            self.pending_break = 0
        if not self.text or self.text[-1] in " \n":
            chunk = chunk.lstrip()
        offset = len(self.text) + (len(chunk) - len(chunk.lstrip()))
        for record in self._open:
            if record[1] is None:
                record[1] = offset
        self.text += chunk

    def open_link(self, href):
        record = [href, None, None]
        self.links.append(record)
        self._open.append(record)

    def close_link(self):
        record = self._open.pop()
        record[2] = len(self.text.rstrip())
        if record[1] is None:
            record[1] = len(self.text)


def _is_boundary(tag: Tag) -> bool:
    if not tag.get("id"):
        return False
    if tag.name == "section" or tag.name in _HEADINGS:
        return True
    first = next((c for c in tag.children if isinstance(c, Tag)), None)
    return first is not None and first.name in _HEADINGS


def _is_text(node) -> bool:
    return isinstance(node, NavigableString) and not isinstance(node, PreformattedString)


def parse_document(doc: SourceDocument, corpus_root: str | None = None,
                   warnings: list | None = None) -> list[Section]:
    """Split one HTML page into anchored sections.

    Any element with an ``id`` that opens a heading-led block (including
    ``<section id>`` and ``<hN id>``) starts a section; content outside
    every anchored block is collected under ``page-root``. Discarded links
    are appended to ``warnings`` as :class:`LinkWarning` records.
    """
    try:
        markup = doc.html.decode("utf-8-sig")
    except (UnicodeDecodeError, AttributeError) as exc:
        raise IngestError(doc.url, f"cannot decode HTML as UTF-8: {exc}") from None

    soup = BeautifulSoup(markup, "html.parser")
    root = soup.body or soup
    builders: dict[str, _SectionBuilder] = {PAGE_ROOT: _SectionBuilder(PAGE_ROOT)}

    def builder_for(anchor):
        if anchor not in builders:
            builders[anchor] = _SectionBuilder(anchor)
        return builders[anchor]

    def walk(node: Tag, anchor: str):
        current = anchor
        for child in node.children:
            if _is_text(child):
                builder_for(current).add_text(str(child))
                continue
            if not isinstance(child, Tag) or child.name in _SKIP_TAGS:
                continue
            if child.name == "a" and "headerlink" in (child.get("class") or []):
                continue
            target = current
            if _is_boundary(child):
                target = child["id"]
                builder_for(target)
                if child.name in _HEADINGS:
                    # a bare heading anchor owns the siblings that follow it
                    current = target
            visit(child, target)

    def visit(tag: Tag, anchor: str):
        builder = builder_for(anchor)
        strength = 2 if tag.name in _PARAGRAPH_TAGS else 1 if tag.name in _LINE_TAGS else 0
        if strength:
            builder.add_break(strength)
        elif tag.name in _CELL_TAGS:
            builder.add_text(" ")
        is_link = tag.name == "a" and tag.get("href") is not None
        if is_link:
            builder.open_link(tag["href"])
        walk(tag, anchor)
        if is_link:
            builder.close_link()
        if strength:
            builder_for(anchor).add_break(strength)

    walk(root, PAGE_ROOT)

    sections = []
    for anchor, builder in builders.items():
        text = builder.text.rstrip()
        if not text:
            continue
        section = Section(doc.url, anchor, text)
        for href, start, end in builder.links:
            try:
                url, target_anchor, internal = normalize_link(href, doc.url, corpus_root)
            except ValueError as exc:
                logger.debug("discarding link %r on %s: %s", href, doc.url, exc)
                if warnings is not None:
                    warnings.append(LinkWarning(href, doc.url, str(exc)))
                continue
            start = min(start, len(text))
            end = max(start, min(end, len(text)))
            context = extract_link_context(text, (start, end))
            section.links.append(LinkRef(url, target_anchor, context, internal))
            section.link_spans.append((start, end))
        sections.append(section)
    return sections


def _window_spans(lo, hi, size, overlap):
    spans = []
    stride = size - overlap
    start = lo
    while True:
        end = min(start + size, hi)
        spans.append((start, end))
        if end >= hi:
            return spans
        start += stride


def _split_spans(text, lo, hi, separators, size, overlap):
    if hi - lo <= size:
        return [(lo, hi)]
    for i, sep in enumerate(separators):
        if text.find(sep, lo, hi) != -1:
            break
    else:
        return _window_spans(lo, hi, size, overlap)
    rest = separators[i + 1:]

    pieces = []
    start = lo
    while True:
        j = text.find(sep, start, hi)
        if j == -1 or j + len(sep) >= hi:
            pieces.append((start, hi))
            break
        pieces.append((start, j + len(sep)))
        start = j + len(sep)

    spans = []
    current = []
    for piece_start, piece_end in pieces:
        if piece_end - piece_start > size:
            if current:
                spans.append((current[0][0], current[-1][1]))
                current = []
            spans.extend(_split_spans(text, piece_start, piece_end, rest, size, overlap))
            continue
        if current and piece_end - current[0][0] > size:
            spans.append((current[0][0], current[-1][1]))
            while current and (current[-1][1] - current[0][0] > overlap
                               or piece_end - current[0][0] > size):
                current.pop(0)
        current.append((piece_start, piece_end))
    if current:
        spans.append((current[0][0], current[-1][1]))
    return spans


def split_text_spans(text: str, chunk_size: int = DEFAULT_CHUNK_SIZE,
                     overlap: int = DEFAULT_OVERLAP,
                     separators: Sequence[str] = SEPARATORS) -> list[tuple[int, int]]:
    """Character ranges of the chunks of ``text``, whitespace-trimmed.

    Splits recursively on ``separators`` and falls back to a fixed window
    of stride ``chunk_size - overlap`` when no separator applies.
    """
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    if not 0 <= overlap < chunk_size:
        raise ValueError("overlap must satisfy 0 <= overlap < chunk_size")
    spans = []
    for start, end in _split_spans(text, 0, len(text), tuple(separators), chunk_size, overlap):
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start and (not spans or spans[-1] != (start, end)):
            spans.append((start, end))
    return spans


def chunk_section(section: Section, chunk_size: int = DEFAULT_CHUNK_SIZE,
                  overlap: int = DEFAULT_OVERLAP) -> list[Chunk]:
    spans = split_text_spans(section.text, chunk_size, overlap)
    if not spans:
        return []
    assigned: list[list[LinkRef]] = [[] for _ in spans]
    for link, (link_start, _) in zip(section.links, section.link_spans):
        # earliest chunk holding the anchor-text offset; overlap goes to the earlier chunk
        index = next((i for i, (_, end) in enumerate(spans) if link_start < end), len(spans) - 1)
        assigned[index].append(link)
    return [
        Chunk(
            id=build_chunk_id(section.source_url, section.anchor_name, i),
            source_url=section.source_url,
            anchor_name=section.anchor_name,
            chunk_index=i,
            text=section.text[start:end],
            links=tuple(assigned[i]),
        )
        for i, (start, end) in enumerate(spans)
    ]


def page_url(root: Path, path: Path, base_url_prefix: str | None) -> str:
    if base_url_prefix is None:
        return path.resolve().as_uri()
    relative = path.relative_to(root).as_posix()
    return f"{base_url_prefix.rstrip('/')}/{relative}"


def discover_documents(root, base_url_prefix: str | None = None) -> list[SourceDocument]:
    """Read every ``.html`` file under ``root``, sorted by resulting URL."""
    root = Path(root)
    if not root.is_dir():
        raise IngestError(str(root), "corpus root is not a directory")
    docs = []
    for path in root.rglob("*.html"):
        if not path.is_file():
            continue
        url = page_url(root, path, base_url_prefix)
        try:
            docs.append(SourceDocument(url, path.read_bytes()))
        except OSError as exc:
            raise IngestError(url, f"cannot read file: {exc}") from None
    docs.sort(key=lambda d: d.url)
    return docs


def corpus_prefix(root, base_url_prefix: str | None) -> str:
    if base_url_prefix is None:
        return Path(root).resolve().as_uri().rstrip("/") + "/"
    return base_url_prefix.rstrip("/") + "/"


def ingest_documents(docs: Iterable[SourceDocument], corpus_root: str | None = None,
                     chunk_size: int = DEFAULT_CHUNK_SIZE, overlap: int = DEFAULT_OVERLAP,
                     warnings: list | None = None, max_workers: int = 1) -> list[Chunk]:
    """Parse and chunk documents; output order is (url, anchor order, chunk_index)."""
    docs = sorted(docs, key=lambda d: d.url)

    def work(doc):
        local: list[LinkWarning] = []
        chunks = []
        for section in parse_document(doc, corpus_root, local):
            chunks.extend(chunk_section(section, chunk_size, overlap))
        return chunks, local

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            results = list(pool.map(work, docs))
    else:
        results = [work(doc) for doc in docs]

    chunks = []
    for doc_chunks, local in results:
        chunks.extend(doc_chunks)
        if warnings is not None:
            warnings.extend(local)
    return chunks


def ingest_corpus(root, base_url_prefix: str | None = None,
                  chunk_size: int = DEFAULT_CHUNK_SIZE, overlap: int = DEFAULT_OVERLAP,
                  warnings: list | None = None, max_workers: int = 1) -> list[Chunk]:
    docs = discover_documents(root, base_url_prefix)
    return ingest_documents(docs, corpus_prefix(root, base_url_prefix), chunk_size,
                            overlap, warnings, max_workers)


def write_warnings(warnings: Iterable[LinkWarning], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for warning in warnings:
            fh.write(warning.to_json() + "\n")
