"""In-memory chunk index with exact cosine search and JSONL persistence."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embedding import cosine_many
from .exceptions import IndexFormatError, IndexMismatchError
from .ingest import Chunk, LinkRef

FORMAT_NAME = "linkrag-index"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ScoredChunk:
    chunk: Chunk
    score: float

    @property
    def id(self) -> str:
        return self.chunk.id


def rank_order(ids: Sequence[str], scores: np.ndarray) -> np.ndarray:
    """Positions sorted by descending score, ties by ascending id."""
    if len(ids) == 0:
        return np.zeros(0, dtype=int)
    id_rank = np.argsort(np.asarray(ids, dtype=object), kind="stable")
    tiebreak = np.empty(len(ids), dtype=int)
    tiebreak[id_rank] = np.arange(len(ids))
    return np.lexsort((tiebreak, -np.asarray(scores)))


class CorpusIndex:
    """Chunks keyed by id with their unit embeddings.

    ``by_page`` and ``by_anchor`` are projections kept in insertion order,
    which for ingested corpora is document order.
    """

    def __init__(self, embedder_id: str, dimension: int):
        self.embedder_id = embedder_id
        self.dimension = dimension
        self.entries: dict[str, tuple[Chunk, np.ndarray]] = {}
        self.by_page: dict[str, list[str]] = {}
        self.by_anchor: dict[tuple[str, str], list[str]] = {}
        self._ids: list[str] = []
        self._matrix: np.ndarray | None = None

    def __len__(self):
        return len(self.entries)

    def __contains__(self, chunk_id):
        return chunk_id in self.entries

    @property
    def header(self) -> dict:
        return {"format": FORMAT_NAME, "version": FORMAT_VERSION,
                "embedder": self.embedder_id, "dimension": self.dimension}

    def chunk(self, chunk_id: str) -> Chunk:
        return self.entries[chunk_id][0]

    def vector(self, chunk_id: str) -> np.ndarray:
        return self.entries[chunk_id][1]

    def chunks(self) -> list[Chunk]:
        return [chunk for chunk, _ in self.entries.values()]

    def upsert(self, chunks: Sequence[Chunk], vectors, embedder_id: str | None = None) -> int:
        """Insert chunks whose id is new; existing ids are left untouched."""
        if embedder_id is not None and embedder_id != self.embedder_id:
            raise IndexMismatchError(
                f"embedder {embedder_id!r} does not match index embedder {self.embedder_id!r}")
        vectors = np.asarray(vectors, dtype=np.float64)
        if len(chunks) == 0:
            return 0
        if vectors.ndim != 2 or vectors.shape[0] != len(chunks):
            raise IndexMismatchError(f"got {len(chunks)} chunks but vectors of shape {vectors.shape}")
        if vectors.shape[1] != self.dimension:
            raise IndexMismatchError(
                f"vector dimension {vectors.shape[1]} does not match index dimension {self.dimension}")
        inserted = 0
        for chunk, vector in zip(chunks, vectors):
            if chunk.id in self.entries:
                continue
            vector = vector.copy()
            vector.setflags(write=False)
            self.entries[chunk.id] = (chunk, vector)
            self.by_page.setdefault(chunk.source_url, []).append(chunk.id)
            self.by_anchor.setdefault((chunk.source_url, chunk.anchor_name), []).append(chunk.id)
            self._ids.append(chunk.id)
            inserted += 1
        if inserted:
            self._matrix = None
        return inserted

    def add_chunks(self, chunks: Sequence[Chunk], embedder) -> int:
        """Embed ``chunks`` with ``embedder`` and upsert the new ones."""
        fresh = []
        seen = set()
        for c in chunks:
            if c.id not in self.entries and c.id not in seen:
                fresh.append(c)
                seen.add(c.id)
        if not fresh:
            return 0
        return self.upsert(fresh, embedder.embed_many([c.text for c in fresh]), embedder.identifier)

    def _scores(self, query: np.ndarray) -> np.ndarray:
        if self._matrix is None:
            self._matrix = (np.vstack([self.entries[i][1] for i in self._ids])
                            if self._ids else np.zeros((0, self.dimension)))
        return cosine_many(self._matrix, np.asarray(query, dtype=np.float64))

    def score_all(self, query: np.ndarray) -> dict[str, float]:
        return dict(zip(self._ids, self._scores(query).tolist()))

    def top_k(self, query: np.ndarray, k: int) -> list[ScoredChunk]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._ids:
            return []
        scores = self._scores(query)
        order = rank_order(self._ids, scores)[:k]
        return [ScoredChunk(self.entries[self._ids[i]][0], float(scores[i])) for i in order]

    def resolve_link(self, target_url: str, target_anchor: str | None = None) -> list[Chunk]:
        """Chunks a hyperlink points at; empty when the target is unknown."""
        if target_anchor:
            ids = self.by_anchor.get((target_url, target_anchor), [])
            chunks = [self.entries[i][0] for i in ids]
            return sorted(chunks, key=lambda c: c.chunk_index)
        return [self.entries[i][0] for i in self.by_page.get(target_url, [])]

    def save(self, path) -> None:
        save_index(self, path)


def build_index(chunks: Sequence[Chunk], embedder) -> CorpusIndex:
    """Embed ``chunks`` into a fresh index.

    The dimension is taken from the embeddings themselves, so remote
    embedders that only learn it on first use work too.
    """
    first: dict[str, Chunk] = {}
    for chunk in chunks:
        first.setdefault(chunk.id, chunk)
    unique = list(first.values())
    if not unique:
        raise ValueError("no chunks to index")
    vectors = np.asarray(embedder.embed_many([c.text for c in unique]), dtype=np.float64)
    index = CorpusIndex(embedder.identifier, vectors.shape[1])
    index.upsert(unique, vectors, embedder.identifier)
    return index


def _chunk_record(chunk: Chunk, vector: np.ndarray) -> dict:
    return {
        "id": chunk.id,
        "source_url": chunk.source_url,
        "anchor_name": chunk.anchor_name,
        "chunk_index": chunk.chunk_index,
        "text": chunk.text,
        "links": [link.to_dict() for link in chunk.links],
        "vector": vector.tolist(),
    }


def save_index(index: CorpusIndex, path) -> None:
    """Write a header line followed by one JSON record per chunk."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({**index.header, "count": len(index)}) + "\n")
        for chunk, vector in index.entries.values():
            fh.write(json.dumps(_chunk_record(chunk, vector), ensure_ascii=False) + "\n")


def _require(record: dict, key: str, kind, where: str):
    if key not in record:
        raise IndexFormatError(key, f"missing in {where}")
    value = record[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise IndexFormatError(key, f"bad type {type(value).__name__} in {where}")
    return value


def load_index(path, expected_embedder: str | None = None) -> CorpusIndex:
    path = Path(path)
    if not path.is_file():
        raise IndexFormatError("path", f"index file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines[0].strip():
        raise IndexFormatError("header", "index file is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IndexFormatError("header", f"not valid JSON: {exc}") from None
    if not isinstance(header, dict):
        raise IndexFormatError("header", "not a JSON object")
    if header.get("format") != FORMAT_NAME:
        raise IndexFormatError("format", f"expected {FORMAT_NAME!r}, got {header.get('format')!r}")
    version = _require(header, "version", int, "header")
    if version != FORMAT_VERSION:
        raise IndexFormatError("version", f"unsupported format version {version} "
                                          f"(this build reads {FORMAT_VERSION})")
    embedder_id = _require(header, "embedder", str, "header")
    if expected_embedder is not None and embedder_id != expected_embedder:
        raise IndexFormatError("embedder", f"index built with {embedder_id!r}, "
                                           f"expected {expected_embedder!r}")
    dimension = _require(header, "dimension", int, "header")
    if dimension < 1:
        raise IndexFormatError("dimension", "must be positive")
    count = _require(header, "count", int, "header")

    index = CorpusIndex(embedder_id, dimension)
    chunks, vectors = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        where = f"record on line {lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IndexFormatError("record", f"{where} is not valid JSON: {exc}") from None
        if not isinstance(record, dict):
            raise IndexFormatError("record", f"{where} is not a JSON object")
        try:
            links = tuple(LinkRef.from_dict(d) for d in _require(record, "links", list, where))
        except (KeyError, TypeError, AttributeError) as exc:
            raise IndexFormatError("links", f"malformed link in {where}: {exc}") from None
        chunk = Chunk(
            id=_require(record, "id", str, where),
            source_url=_require(record, "source_url", str, where),
            anchor_name=_require(record, "anchor_name", str, where),
            chunk_index=_require(record, "chunk_index", int, where),
            text=_require(record, "text", str, where),
            links=links,
        )
        vector = _require(record, "vector", list, where)
        if len(vector) != dimension:
            raise IndexFormatError("vector", f"{where} has length {len(vector)}, expected {dimension}")
        chunks.append(chunk)
        vectors.append(vector)
    if len(chunks) != count:
        raise IndexFormatError("count", f"header declares {count} records, found {len(chunks)}")
    if len({c.id for c in chunks}) != len(chunks):
        raise IndexFormatError("id", "duplicate chunk ids in index file")
    if chunks:
        index.upsert(chunks, np.asarray(vectors, dtype=np.float64))
    return index
