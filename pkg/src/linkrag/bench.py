"""Benchmark harness: run the query x prompt x config grid, score, aggregate."""
from __future__ import annotations

import csv
import json
import math
import statistics
import string
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .embedding import HashingEmbedder
from .exceptions import LinkRagError, ScoringError, UndefinedCorrelationError
from .llm import PromptKind, render_prompt
from .retrieval import RetrievalConfig, retrieve

RECORDS_HEADER = "# linkrag-records v1"
TIMING_HEADER = "# linkrag-timing v1"
DEFAULT_KINDS = (PromptKind.BASIC, PromptKind.ROLE_BASED, PromptKind.REASONING,
                 PromptKind.HYPERLINKED)
DEFAULT_CONFIGS = (
    ("RAG_k5", RetrievalConfig(k=5, n_links=0, depth=0, top_m=0)),
    ("RAG_k10", RetrievalConfig(k=10, n_links=0, depth=0, top_m=0)),
    ("LARAG", RetrievalConfig(k=5, n_links=1, depth=1, top_m=1)),
)
PEARSON_NOTE = "Pearson correlations are computed per record within each configuration."

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


@dataclass(frozen=True)
class BenchmarkCase:
    query_id: str
    question: str
    reference: str


def load_suite(path) -> list[BenchmarkCase]:
    """Read a JSONL suite (``query_id``, ``question``, ``reference`` per line)."""
    cases = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                case = BenchmarkCase(str(data["query_id"]), data["question"], data["reference"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed suite record ({exc})") from None
            if not case.reference.strip():
                raise ValueError(f"{path}:{lineno}: empty reference for {case.query_id}")
            if case.query_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate query_id {case.query_id}")
            seen.add(case.query_id)
            cases.append(case)
    return cases


def write_suite(cases: Iterable[BenchmarkCase], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(asdict(case), ensure_ascii=False) + "\n")


def words(text: str) -> list[str]:
    return text.lower().translate(_PUNCT_TABLE).split()


def word_count(text: str) -> int:
    return len(words(text))


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "ScoreTriple":
        total = precision + recall
        f1 = 2 * precision * recall / total if total > 0 else 0.0
        return cls(precision, recall, f1)


class EmbeddingScorer:
    """Greedy max-similarity token matching over per-token embeddings.

    Precision averages, over prediction tokens, the best similarity to any
    reference token; recall does the converse. Similarities below zero are
    floored at zero so all scores stay in [0, 1]. The token similarity
    matrix is taken from one symmetric Gram matrix, which makes swapping
    prediction and reference swap precision and recall exactly.
    """

    def __init__(self, embedder=None):
        self.embedder = embedder or HashingEmbedder()
        self._cache: dict[str, np.ndarray] = {}

    def _vectors(self, tokens: Sequence[str]) -> np.ndarray:
        missing = [t for t in dict.fromkeys(tokens) if t not in self._cache]
        if missing:
            for token, vector in zip(missing, self.embedder.embed_many(missing)):
                self._cache[token] = vector
        return np.vstack([self._cache[t] for t in tokens])

    def score(self, prediction: str, reference: str) -> ScoreTriple:
        pred, ref = words(prediction), words(reference)
        if not pred or not ref:
            raise ScoringError("prediction and reference must both contain words")
        vocab = sorted(set(pred) | set(ref))
        position = {t: i for i, t in enumerate(vocab)}
        vectors = self._vectors(vocab)
        gram = vectors @ vectors.T
        gram = (gram + gram.T) / 2
        sim = np.maximum(gram[np.ix_([position[t] for t in pred], [position[t] for t in ref])], 0.0)
        precision = float(np.mean(sim.max(axis=1)))
        recall = float(np.mean(sim.max(axis=0)))
        return ScoreTriple.from_pr(min(precision, 1.0), min(recall, 1.0))


def score_answer(prediction: str, reference: str, scorer: EmbeddingScorer | None = None) -> ScoreTriple:
    if not prediction or not prediction.strip() or not reference or not reference.strip():
        raise ScoringError("prediction and reference must be non-empty")
    return (scorer or EmbeddingScorer()).score(prediction, reference)


def load_external_scores(path) -> dict[tuple[str, str, str], ScoreTriple]:
    """Scores computed elsewhere, keyed by (query_id, prompt_kind, config).

    Expects a CSV with ``query_id, prompt_kind, config`` and ``P, R, F1``
    (or ``precision, recall, f1``) columns.
    """
    scores = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in reader:
            try:
                p = float(row.get("P", row.get("precision")))
                r = float(row.get("R", row.get("recall")))
                f = float(row.get("F1", row.get("f1")))
                key = (row["query_id"], row["prompt_kind"], row["config"])
            except (TypeError, ValueError, KeyError) as exc:
                raise ValueError(f"{path}: malformed external score row {row!r}") from exc
            scores[key] = ScoreTriple(p, r, f)
    return scores


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise UndefinedCorrelationError("series must be one-dimensional and of equal length")
    if len(x) < 2:
        raise UndefinedCorrelationError("need at least two points")
    if x.min() == x.max() or y.min() == y.max():
        raise UndefinedCorrelationError("correlation is undefined for a constant series")
    dx = x - math.fsum(x.tolist()) / len(x)
    dy = y - math.fsum(y.tolist()) / len(y)
    sxy = math.fsum((dx * dy).tolist())
    sxx = math.fsum((dx * dx).tolist())
    syy = math.fsum((dy * dy).tolist())
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def _round_frac(x: float, precision: int) -> float:
    if not np.isfinite(x) or x == 0:
        return x
    frac, whole = math.modf(x)
    if whole == 0:
        digits = -int(math.floor(math.log10(abs(frac)))) - 1 + precision
    else:
        digits = precision
    return round(x, digits)


@dataclass(frozen=True)
class QuantileBins:
    """Quantile intervals ``(lo, hi]`` and the bin of every input value.

    ``edges`` are the raw quantiles; ``display_edges`` are rounded to
    ``precision`` decimals with the lowest one lowered by 10**-precision so
    the minimum falls inside the first left-open interval.
    """

    edges: tuple[float, ...]
    display_edges: tuple[float, ...]
    assignments: tuple[int, ...]

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    @property
    def labels(self) -> list[str]:
        e = self.display_edges
        return [f"({e[i]!r}, {e[i + 1]!r}]" for i in range(self.n_bins)]

    def sizes(self) -> list[int]:
        return [self.assignments.count(i) for i in range(self.n_bins)]


def quantile_bins(values: Sequence[float], n_bins: int = 4, precision: int = 3) -> QuantileBins:
    """Equal-frequency bins; duplicate edges collapse into fewer bins."""
    data = np.asarray(values, dtype=np.float64)
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if len(data) < n_bins:
        raise ValueError(f"need at least {n_bins} values, got {len(data)}")
    ordered = sorted(data.tolist())
    # integer-position interpolation: no float noise on edges that coincide with data points
    inner = statistics.quantiles(ordered, n=n_bins, method="inclusive") if n_bins > 1 else []
    edges = np.unique(np.array([ordered[0], *inner, ordered[-1]], dtype=np.float64))
    if len(edges) == 1:
        edges = np.array([edges[0], edges[0]])
    assignments = np.clip(np.searchsorted(edges, data, side="left") - 1, 0, len(edges) - 2)
    display = [_round_frac(float(e), precision) for e in edges]
    display[0] = display[0] - 10 ** (-precision)
    return QuantileBins(tuple(float(e) for e in edges), tuple(display),
                        tuple(int(a) for a in assignments))


@dataclass
class BenchmarkRecord:
    query_id: str
    prompt_kind: str
    config: str
    template: str
    answer: str
    retrieved_chunks: int
    prompt_tokens: int
    completion_tokens: int
    total_tokens: int
    tokens_estimated: bool
    precision: float | None
    recall: float | None
    f1: float | None
    len_ref: int
    len_pred: int
    error: str = ""
    latency: float | None = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.query_id, self.prompt_kind, self.config)

    @property
    def scores(self) -> ScoreTriple | None:
        if self.f1 is None:
            return None
        return ScoreTriple(self.precision, self.recall, self.f1)


RECORD_COLUMNS = [f.name for f in fields(BenchmarkRecord) if f.name != "latency"]


def _config_items(configs) -> list[tuple[str, RetrievalConfig]]:
    items = list(configs.items()) if isinstance(configs, dict) else list(configs)
    labels = [label for label, _ in items]
    if len(set(labels)) != len(labels):
        raise ValueError("configuration labels must be unique")
    return items


def template_for(kind: PromptKind, config: RetrievalConfig) -> PromptKind:
    """Runs without link expansion get the single-block counterpart of the hyperlinked prompt."""
    if kind is PromptKind.HYPERLINKED and not config.expansion_enabled:
        return PromptKind.UNIFIED
    return kind


def iter_benchmark(cases: Sequence[BenchmarkCase], kinds, configs, index, embedder, generator, *,
                   scorer: EmbeddingScorer | None = None, external_scores: dict | None = None,
                   max_workers: int = 1, clock=time.perf_counter) -> Iterator[BenchmarkRecord]:
    """Yield one record per (case, kind, config) in completion order."""
    kinds = [PromptKind(k) for k in kinds]
    configs = _config_items(configs)
    if external_scores is None and scorer is None:
        scorer = EmbeddingScorer()
    jobs = [(case, kind, label, config) for case in cases for kind in kinds for label, config in configs]

    def run_one(job) -> BenchmarkRecord:
        case, kind, label, config = job
        template = template_for(kind, config)
        record = BenchmarkRecord(
            query_id=case.query_id, prompt_kind=kind.value, config=label,
            template=template.value, answer="", retrieved_chunks=0, prompt_tokens=0,
            completion_tokens=0, total_tokens=0, tokens_estimated=False, precision=None,
            recall=None, f1=None, len_ref=word_count(case.reference), len_pred=0)
        started = clock()
        try:
            context = retrieve(index, embedder, case.question, config)
            record.retrieved_chunks = len(context.final)
            prompt = render_prompt(template, context, case.question)
            result = generator.generate(prompt)
        except Exception as exc:  # noqa: BLE001 - a failed record must not stop the grid
            record.latency = clock() - started
            record.error = f"{type(exc).__name__}: {exc}"
            return record
        record.latency = clock() - started
        record.answer = result.answer
        record.prompt_tokens = result.prompt_tokens
        record.completion_tokens = result.completion_tokens
        record.total_tokens = result.total_tokens
        record.tokens_estimated = result.estimated
        record.len_pred = word_count(result.answer)
        try:
            if external_scores is not None:
                triple = external_scores.get(record.key)
                if triple is None:
                    raise ScoringError(f"no external score for {record.key}")
            else:
                triple = score_answer(result.answer, case.reference, scorer)
        except (LinkRagError, ValueError) as exc:
            record.error = f"{type(exc).__name__}: {exc}"
            return record
        record.precision, record.recall, record.f1 = triple.precision, triple.recall, triple.f1
        return record

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            yield from pool.map(run_one, jobs)
    else:
        for job in jobs:
            yield run_one(job)


def sort_records(records: Iterable[BenchmarkRecord]) -> list[BenchmarkRecord]:
    return sorted(records, key=lambda r: r.key)


def run_benchmark(cases, kinds, configs, index, embedder, generator, **kwargs) -> list[BenchmarkRecord]:
    """Every (case, kind, config) combination, sorted by (query_id, prompt_kind, config)."""
    return sort_records(iter_benchmark(cases, kinds, configs, index, embedder, generator, **kwargs))


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def timing_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".timing.csv")


def write_records(records: Sequence[BenchmarkRecord], path, timing: bool = True) -> None:
    """Write the records CSV plus a latency sidecar.

    The main file holds only run-independent fields, so mock runs reproduce
    it byte for byte; wall-clock latencies and the run timestamp go to
    ``<path>.timing.csv``.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(RECORDS_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for record in records:
            writer.writerow([_cell(getattr(record, c)) for c in RECORD_COLUMNS])
    if timing:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        with open(timing_path(path), "w", newline="", encoding="utf-8") as fh:
            fh.write(f"{TIMING_HEADER} written {stamp}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["query_id", "prompt_kind", "config", "latency"])
            for record in records:
                writer.writerow([record.query_id, record.prompt_kind, record.config,
                                 _cell(record.latency)])


_INT_COLUMNS = {"retrieved_chunks", "prompt_tokens", "completion_tokens", "total_tokens",
                "len_ref", "len_pred"}
_FLOAT_COLUMNS = {"precision", "recall", "f1"}


def _parse_row(row: dict) -> BenchmarkRecord:
    values = {}
    for column in RECORD_COLUMNS:
        raw = row[column]
        if column in _INT_COLUMNS:
            values[column] = int(raw)
        elif column in _FLOAT_COLUMNS:
            values[column] = float(raw) if raw != "" else None
        elif column == "tokens_estimated":
            values[column] = raw == "true"
        else:
            values[column] = raw
    return BenchmarkRecord(**values)


def read_records(path) -> list[BenchmarkRecord]:
    """Load a records CSV, joining latencies from the sidecar when present."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if first.strip() != RECORDS_HEADER:
            raise ValueError(f"{path}: missing {RECORDS_HEADER!r} header line")
        reader = csv.DictReader(fh)
        missing = set(RECORD_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        try:
            records = [_parse_row(row) for row in reader]
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{path}: malformed record ({exc})") from None
    sidecar = timing_path(path)
    if sidecar.exists():
        with open(sidecar, newline="", encoding="utf-8") as fh:
            fh.readline()
            latencies = {(r["query_id"], r["prompt_kind"], r["config"]): r["latency"]
                         for r in csv.DictReader(fh)}
        for record in records:
            raw = latencies.get(record.key, "")
            record.latency = float(raw) if raw else None
    return records


def _mean(values):
    values = [v for v in values if v is not None]
    return math.fsum(values) / len(values) if values else None


def _safe_pearson(xs, ys):
    try:
        return pearson(xs, ys)
    except UndefinedCorrelationError:
        return None


def _group(records, attr):
    groups: dict[str, list[BenchmarkRecord]] = {}
    for record in records:
        groups.setdefault(getattr(record, attr), []).append(record)
    return groups


def _means(records):
    scored = [r for r in records if r.f1 is not None]
    return {
        "n": len(records),
        "scored": len(scored),
        "chunks": _mean([r.retrieved_chunks for r in records]),
        "tokens": _mean([r.total_tokens for r in records if r.total_tokens]),
        "latency": _mean([r.latency for r in records]),
        "precision": _mean([r.precision for r in scored]),
        "recall": _mean([r.recall for r in scored]),
        "f1": _mean([r.f1 for r in scored]),
    }


def aggregate_report(records: Sequence[BenchmarkRecord], n_bins: int = 4) -> dict:
    """Per-config and per-prompt means, correlations and length-bin F1.

    Undefined correlations (constant series, fewer than two points) are
    reported as ``None`` cells.
    """
    if not records:
        raise ValueError("no records to aggregate")
    by_config = _group(records, "config")
    by_prompt = _group(records, "prompt_kind")
    scored = [r for r in records if r.f1 is not None]

    report = {
        "note": PEARSON_NOTE,
        "total_records": len(records),
        "by_config": {label: _means(group) for label, group in by_config.items()},
        "by_prompt": {kind: _means(group) for kind, group in by_prompt.items()},
        "global": _means(records),
        "cost_correlation": {},
        "length_correlation": {},
        "length_bins": None,
    }
    for label, group in by_config.items():
        g = [r for r in group if r.f1 is not None]
        timed = [r for r in g if r.latency is not None]
        report["cost_correlation"][label] = {
            "f1_tokens": _safe_pearson([r.f1 for r in g], [r.total_tokens for r in g]),
            "f1_latency": _safe_pearson([r.f1 for r in timed], [r.latency for r in timed]),
        }
        report["length_correlation"][label] = {
            "f1_len_ref": _safe_pearson([r.f1 for r in g], [r.len_ref for r in g]),
            "f1_len_pred": _safe_pearson([r.f1 for r in g], [r.len_pred for r in g]),
        }

    series = {"len_ref": [r.len_ref for r in scored], "len_pred": [r.len_pred for r in scored],
              "f1": [r.f1 for r in scored]}
    report["length_matrix"] = {a: {b: (1.0 if a == b else _safe_pearson(series[a], series[b]))
                                   for b in series} for a in series}

    if len(scored) >= n_bins:
        bins = quantile_bins([r.len_ref for r in scored], n_bins)
        table = {}
        for label in by_config:
            row = []
            for b in range(bins.n_bins):
                row.append(_mean([r.f1 for r, a in zip(scored, bins.assignments)
                                  if a == b and r.config == label]))
            table[label] = row
        report["length_bins"] = {"labels": bins.labels, "mean_f1": table}
    return report


def _fmt(value, digits=4):
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def _table(title, header, rows):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)] if rows else [len(h) for h in header]
    lines = [title, "  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def format_report(report: dict) -> str:
    blocks = [f"{RECORDS_HEADER} report ({report['total_records']} records)"]
    metrics = ("tokens", "chunks", "latency", "precision", "recall", "f1")
    blocks.append(_table(
        "Aggregate results by configuration",
        ["config", "n", "total tokens", "retrieved chunks", "time (s)", "P", "R", "F1"],
        [[label, m["n"]] + [_fmt(m[k], 2 if k in ("tokens", "chunks", "latency") else 4) for k in metrics]
         for label, m in report["by_config"].items()]))
    blocks.append(_table(
        "Metrics per prompt",
        ["prompt", "n", "total tokens", "time (s)", "F1", "P", "R"],
        [[kind, m["n"], _fmt(m["tokens"], 2), _fmt(m["latency"], 2), _fmt(m["f1"]),
          _fmt(m["precision"]), _fmt(m["recall"])] for kind, m in report["by_prompt"].items()]))
    g = report["global"]
    blocks.append(_table("Global means", ["P", "R", "F1"],
                         [[_fmt(g["precision"]), _fmt(g["recall"]), _fmt(g["f1"])]]))
    blocks.append(_table(
        "Correlation between F1 and cost",
        ["config", "corr(F1, total tokens)", "corr(F1, exec. time)"],
        [[label, _fmt(c["f1_tokens"], 3), _fmt(c["f1_latency"], 3)]
         for label, c in report["cost_correlation"].items()]))
    blocks.append(_table(
        "Correlation between F1 and reference/answer length",
        ["config", "corr(F1, len_ref)", "corr(F1, len_pred)"],
        [[label, _fmt(c["f1_len_ref"], 3), _fmt(c["f1_len_pred"], 3)]
         for label, c in report["length_correlation"].items()]))
    matrix = report["length_matrix"]
    blocks.append(_table("Correlation matrix", [""] + list(matrix),
                         [[a] + [_fmt(matrix[a][b], 6) for b in matrix] for a in matrix]))
    bins = report["length_bins"]
    if bins:
        labels = list(bins["mean_f1"])
        blocks.append(_table(
            "Mean F1 by reference-length bins", ["len_ref bins"] + labels,
            [[bins["labels"][i]] + [_fmt(bins["mean_f1"][c][i]) for c in labels]
             for i in range(len(bins["labels"]))]))
    blocks.append(report["note"])
    return "\n\n".join(blocks) + "\n"
