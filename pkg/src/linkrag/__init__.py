"""Link-aware retrieval-augmented generation over hyperlinked HTML documentation."""

__version__ = "0.1.0"

from .bench import (BenchmarkCase, BenchmarkRecord, EmbeddingScorer, ScoreTriple,
                    aggregate_report, pearson, quantile_bins, run_benchmark)
from .embedding import HashingEmbedder, RemoteEmbedder, cosine
from .estimator import LinkAwareRetriever
from .exceptions import (EmbeddingError, GenerationError, IndexFormatError, IngestError,
                         LinkRagError, RetrievalError, UndefinedCorrelationError)
from .index import CorpusIndex, build_index, load_index, save_index
from .ingest import (Chunk, LinkRef, Section, SourceDocument, build_chunk_id, chunk_section,
                     extract_link_context, ingest_corpus, ingest_documents, normalize_link,
                     parse_document)
from .llm import GenerationResult, MockGenerator, PromptKind, RemoteGenerator, render_prompt
from .retrieval import (RetrievalConfig, RetrievedContext, expand_links, rerank_link_candidates,
                        retrieve, retrieve_baseline, retrieve_link_aware)

__all__ = [
    "BenchmarkCase", "BenchmarkRecord", "Chunk", "CorpusIndex", "EmbeddingError",
    "EmbeddingScorer", "GenerationError", "GenerationResult", "HashingEmbedder",
    "IndexFormatError", "IngestError", "LinkAwareRetriever", "LinkRagError", "LinkRef",
    "MockGenerator", "PromptKind", "RemoteEmbedder", "RemoteGenerator", "RetrievalConfig",
    "RetrievalError", "RetrievedContext", "ScoreTriple", "Section", "SourceDocument",
    "UndefinedCorrelationError", "aggregate_report", "build_chunk_id", "build_index",
    "chunk_section", "cosine", "expand_links", "extract_link_context", "ingest_corpus",
    "ingest_documents", "load_index", "normalize_link", "parse_document", "pearson",
    "quantile_bins", "render_prompt", "rerank_link_candidates", "retrieve",
    "retrieve_baseline", "retrieve_link_aware", "run_benchmark", "save_index",
]
