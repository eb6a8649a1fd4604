"""Estimator-style facade over ingest, index and retrieval.

``fit`` takes source documents (or pre-split chunks) and builds the index;
``predict`` maps queries to their final context id lists.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .embedding import HashingEmbedder
from .index import build_index
from .ingest import Chunk, SourceDocument, ingest_documents
from .retrieval import ASSEMBLY_MODES, RetrievalConfig, retrieve


def _check_documents(X) -> list:
    if isinstance(X, (str, bytes)):
        raise TypeError("X must be a sequence of SourceDocument or Chunk, not a string")
    items = list(X)
    if not items:
        raise ValueError("X is empty")
    kinds = {type(x) for x in items}
    if not kinds <= {SourceDocument, Chunk} or len(kinds) > 1:
        raise TypeError("X must contain only SourceDocument or only Chunk objects")
    return items


def _check_queries(X) -> list[str]:
    if isinstance(X, str):
        raise TypeError("X must be a sequence of query strings; wrap a single query in a list")
    queries = list(X)
    for q in queries:
        if not isinstance(q, str) or not q.strip():
            raise ValueError(f"queries must be non-empty strings, got {q!r}")
    return queries


class LinkAwareRetriever(BaseEstimator):
    """Link-aware retriever with scikit-learn conventions.

    Parameters mirror :class:`RetrievalConfig` plus the chunking settings.
    ``embedder`` defaults to :class:`HashingEmbedder`. Fitted attributes are
    ``index_``, ``embedder_`` and ``n_chunks_``.
    """

    def __init__(self, k=5, n_links=1, depth=1, top_m=1, assembly_mode="augment",
                 chunk_size=1000, overlap=150, corpus_root=None, embedder=None):
        self.k = k
        self.n_links = n_links
        self.depth = depth
        self.top_m = top_m
        self.assembly_mode = assembly_mode
        self.chunk_size = chunk_size
        self.overlap = overlap
        self.corpus_root = corpus_root
        self.embedder = embedder

    def _config(self) -> RetrievalConfig:
        if self.assembly_mode not in ASSEMBLY_MODES:
            raise ValueError(f"assembly_mode must be one of {ASSEMBLY_MODES}")
        return RetrievalConfig(k=self.k, n_links=self.n_links, depth=self.depth,
                               top_m=self.top_m, assembly_mode=self.assembly_mode)

    def fit(self, X, y=None):
        self._config()
        if self.chunk_size < 1 or not 0 <= self.overlap < self.chunk_size:
            raise ValueError("need chunk_size >= 1 and 0 <= overlap < chunk_size")
        items = _check_documents(X)
        embedder = self.embedder if self.embedder is not None else HashingEmbedder()
        if isinstance(items[0], SourceDocument):
            chunks = ingest_documents(items, self.corpus_root, self.chunk_size, self.overlap)
        else:
            chunks = items
        index = build_index(chunks, embedder)
        self.embedder_ = embedder
        self.index_ = index
        self.n_chunks_ = len(index)
        return self

    def retrieve(self, query: str):
        """Full :class:`RetrievedContext` for one query."""
        check_is_fitted(self, "index_")
        return retrieve(self.index_, self.embedder_, query, self._config())

    def predict(self, X) -> list[list[str]]:
        check_is_fitted(self, "index_")
        config = self._config()
        return [retrieve(self.index_, self.embedder_, q, config).final for q in _check_queries(X)]
