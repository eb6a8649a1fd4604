"""Flat top-k retrieval and hyperlink-guided DFS expansion.

Link-aware retrieval takes the top-k seeds, then walks each seed's outgoing
internal links depth-first. Every followed link resolves to the chunks of
its target section; those are ranked by cosine similarity between the
link's context window and the chunk, and the best ``top_m`` unvisited ones
join the context. One visited set is shared by the whole traversal.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .embedding import cosine
from .exceptions import RetrievalError
from .index import CorpusIndex, ScoredChunk, rank_order
from .ingest import Chunk, LinkRef

logger = logging.getLogger(__name__)

AUGMENT = "augment"
RERANK_TRUNCATE = "rerank_truncate"
ASSEMBLY_MODES = (AUGMENT, RERANK_TRUNCATE)


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 5
    n_links: int = 1
    depth: int = 1
    top_m: int = 1
    assembly_mode: str = AUGMENT

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        for name in ("n_links", "depth", "top_m"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        if self.assembly_mode not in ASSEMBLY_MODES:
            raise ValueError(f"assembly_mode must be one of {ASSEMBLY_MODES}, "
                             f"got {self.assembly_mode!r}")

    @property
    def expansion_enabled(self) -> bool:
        return self.n_links > 0 and self.depth > 0 and self.top_m > 0

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.n_links, self.depth, self.top_m)

    @classmethod
    def parse_triple(cls, text: str, **kwargs) -> "RetrievalConfig":
        """Build from ``"n_links,depth,top_m"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected n_links,depth,top_m, got {text!r}")
        n_links, depth, top_m = (int(p) for p in parts)
        return cls(n_links=n_links, depth=depth, top_m=top_m, **kwargs)

    def max_context_size(self) -> int:
        if self.assembly_mode == RERANK_TRUNCATE:
            return self.k
        branching = self.n_links * self.top_m
        return self.k * sum(branching ** i for i in range(self.depth + 1))


@dataclass(frozen=True)
class ExpandedChunk:
    chunk: Chunk
    via: LinkRef
    link_score: float
    parent_id: str

    @property
    def id(self) -> str:
        return self.chunk.id


@dataclass
class RetrievedContext:
    query: str
    seeds: list[ScoredChunk]
    expanded: list[ExpandedChunk] = field(default_factory=list)
    final: list[str] = field(default_factory=list)
    events: list[str] = field(default_factory=list)

    def chunk_map(self) -> dict[str, Chunk]:
        mapping = {s.chunk.id: s.chunk for s in self.seeds}
        mapping.update((e.chunk.id, e.chunk) for e in self.expanded)
        return mapping

    def final_chunks(self) -> list[Chunk]:
        mapping = self.chunk_map()
        return [mapping[i] for i in self.final]

    @property
    def seed_ids(self) -> list[str]:
        return [s.chunk.id for s in self.seeds]

    @property
    def expanded_ids(self) -> list[str]:
        return [e.chunk.id for e in self.expanded]


def retrieve_baseline(index: CorpusIndex, embedder, query: str, k: int,
                      query_vector: np.ndarray | None = None) -> RetrievedContext:
    if len(index) == 0:
        raise RetrievalError("cannot retrieve from an empty index")
    if query_vector is None:
        query_vector = embedder.embed(query)
    seeds = index.top_k(query_vector, k)
    return RetrievedContext(query=query, seeds=seeds, final=[s.chunk.id for s in seeds])


def _anchor_words(anchor: str | None) -> str:
    return re.sub(r"[-_.]+", " ", anchor or "").strip()


def rerank_link_candidates(link: LinkRef, candidates: Sequence[Chunk], top_m: int,
                           index: CorpusIndex, embedder,
                           events: list | None = None) -> list[tuple[Chunk, float]]:
    """Order candidates by cosine(link context, chunk) and keep ``top_m``.

    With an empty context the target anchor's words stand in; with neither,
    candidates keep document order (score 0.0) and a degenerate-rerank
    event is recorded.
    """
    if top_m < 1:
        raise ValueError("top_m must be >= 1")
    if not candidates:
        return []
    probe = link.context.strip() or _anchor_words(link.target_anchor)
    if not probe:
        if events is not None:
            events.append(f"degenerate-rerank: no context or anchor for link to {link.href}")
        return [(c, 0.0) for c in candidates[:top_m]]
    probe_vector = embedder.embed(probe)
    scores = np.array([cosine(probe_vector, index.vector(c.id)) for c in candidates])
    order = rank_order([c.id for c in candidates], scores)[:top_m]
    return [(candidates[i], float(scores[i])) for i in order]


def expand_links(index: CorpusIndex, embedder, seeds: Sequence[ScoredChunk],
                 config: RetrievalConfig, visited: set[str] | None = None,
                 events: list | None = None) -> list[ExpandedChunk]:
    """Depth-first link expansion from each seed, in seed order.

    ``visited`` is updated in place. At each chunk the first ``n_links``
    internal links (document order) are followed; each keeps its ``top_m``
    best unvisited targets, which are all marked visited before the walk
    descends into them one by one. ``depth`` bounds hops from the seed.
    """
    if visited is None:
        visited = {s.chunk.id for s in seeds}
    else:
        visited.update(s.chunk.id for s in seeds)
    expanded: list[ExpandedChunk] = []
    if not config.expansion_enabled:
        return expanded

    def visit(chunk: Chunk, hops: int):
        if hops >= config.depth:
            return
        links = [link for link in chunk.links if link.is_internal][:config.n_links]
        for link in links:
            candidates = [c for c in index.resolve_link(link.target_url, link.target_anchor)
                          if c.id not in visited]
            if not candidates:
                continue
            kept = rerank_link_candidates(link, candidates, config.top_m, index, embedder, events)
            visited.update(c.id for c, _ in kept)
            for target, score in kept:
                expanded.append(ExpandedChunk(target, link, score, chunk.id))
                visit(target, hops + 1)

    for seed in seeds:
        visit(seed.chunk, 0)
    return expanded


def retrieve_link_aware(index: CorpusIndex, embedder, query: str,
                        config: RetrievalConfig) -> RetrievedContext:
    query_vector = embedder.embed(query)
    context = retrieve_baseline(index, embedder, query, config.k, query_vector)
    context.expanded = expand_links(index, embedder, context.seeds, config,
                                    {s.chunk.id for s in context.seeds}, context.events)
    if config.assembly_mode == AUGMENT:
        context.final = context.seed_ids + context.expanded_ids
    else:
        ids = context.seed_ids + context.expanded_ids
        scores = np.array([cosine(query_vector, index.vector(i)) for i in ids])
        context.final = [ids[i] for i in rank_order(ids, scores)[:config.k]]
    return context


def retrieve(index: CorpusIndex, embedder, query: str,
             config: RetrievalConfig) -> RetrievedContext:
    """Baseline when expansion is disabled, link-aware otherwise."""
    if not config.expansion_enabled:
        return retrieve_baseline(index, embedder, query, config.k)
    return retrieve_link_aware(index, embedder, query, config)
