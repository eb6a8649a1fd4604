import hashlib
import math
from fractions import Fraction

import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkrag.bench import (DEFAULT_CONFIGS, DEFAULT_KINDS, BenchmarkCase, BenchmarkRecord,
                           EmbeddingScorer, ScoreTriple, aggregate_report, format_report,
                           load_external_scores, load_suite, pearson, quantile_bins,
                           read_records, run_benchmark, score_answer, template_for, timing_path,
                           word_count, words, write_records, write_suite)
from linkrag.exceptions import ScoringError, UndefinedCorrelationError
from linkrag.llm import MockGenerator, PromptKind
from linkrag.retrieval import RetrievalConfig

SCORER = EmbeddingScorer()
word_lists = st.lists(st.sampled_from("the flow project role backup key server quarry run 8443".split()),
                      min_size=1, max_size=12).map(" ".join)


def test_f1_identity():
    assert ScoreTriple.from_pr(0.5, 1.0).f1 == pytest.approx(2 / 3, abs=1e-15)
    assert ScoreTriple.from_pr(0.0, 0.0).f1 == 0.0


def test_identical_texts_score_one():
    triple = score_answer("Open the project.", "open the PROJECT", SCORER)
    assert (triple.precision, triple.recall, triple.f1) == pytest.approx((1, 1, 1), abs=1e-12)


def test_empty_inputs_raise():
    for pred, ref in (("", "x"), ("x", " "), ("...", "x")):
        with pytest.raises(ScoringError):
            score_answer(pred, ref, SCORER)


def test_greedy_matching_matches_bruteforce(embedder):
    prediction = "schedule the daily flow"
    reference = "operators can schedule flows every day"
    pred, ref = words(prediction), words(reference)
    assert (len(pred), len(ref)) == (4, 6)
    sim = [[max(0.0, math.fsum(a * b for a, b in zip(embedder.embed(p), embedder.embed(r))))
            for r in ref] for p in pred]
    precision = sum(max(row) for row in sim) / len(pred)
    recall = sum(max(sim[i][j] for i in range(len(pred))) for j in range(len(ref))) / len(ref)
    triple = score_answer(prediction, reference, SCORER)
    assert triple.precision == pytest.approx(precision, abs=1e-12)
    assert triple.recall == pytest.approx(recall, abs=1e-12)


@given(word_lists, word_lists)
def test_swapping_roles_swaps_p_and_r(a, b):
    ab, ba = SCORER.score(a, b), SCORER.score(b, a)
    assert (ab.precision, ab.recall) == (ba.recall, ba.precision)
    assert 0 <= ab.f1 <= 1
    if ab.precision + ab.recall > 0:
        assert abs(ab.f1 - 2 * ab.precision * ab.recall / (ab.precision + ab.recall)) <= 1e-12


def test_word_counts():
    assert words("Open the Project, then run it!") == ["open", "the", "project", "then", "run", "it"]
    assert word_count("") == 0


def closed_form_pearson(xs, ys):
    n = len(xs)
    mx, my = Fraction(sum(map(Fraction, xs)), n), Fraction(sum(map(Fraction, ys)), n)
    sxy = sum((Fraction(x) - mx) * (Fraction(y) - my) for x, y in zip(xs, ys))
    sxx = sum((Fraction(x) - mx) ** 2 for x in xs)
    syy = sum((Fraction(y) - my) ** 2 for y in ys)
    return float(sxy) / math.sqrt(float(sxx * syy))


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-15)
    assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0, abs=1e-15)
    assert pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8, abs=1e-12)


@given(st.lists(st.integers(-1000, 1000), min_size=5, max_size=5),
       st.lists(st.integers(-1000, 1000), min_size=5, max_size=5))
def test_pearson_matches_closed_form(xs, ys):
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        with pytest.raises(UndefinedCorrelationError):
            pearson(xs, ys)
        return
    assert abs(pearson(xs, ys) - closed_form_pearson(xs, ys)) <= 1e-12


def test_pearson_undefined():
    for xs, ys in (([1, 1, 1], [1, 2, 3]), ([1], [2]), ([1, 2], [1, 2, 3])):
        with pytest.raises(UndefinedCorrelationError):
            pearson(xs, ys)


def exact_edges(values, n_bins):
    """Linear-interpolation quantiles in exact rational arithmetic."""
    x = sorted(Fraction(v) for v in values)
    edges = []
    for i in range(n_bins + 1):
        h = Fraction((len(x) - 1) * i, n_bins)
        lo = int(h)
        edges.append(x[lo] if lo == h else x[lo] + (h - lo) * (x[lo + 1] - x[lo]))
    return sorted(set(edges))


def cut_oracle(values, n_bins):
    """Exact edges, then the pandas interval convention for labels and codes."""
    edges = [float(e) for e in exact_edges(values, n_bins)]
    cut = pd.cut(pd.Series(values, dtype=float), edges, include_lowest=True, precision=3)
    return [str(c) for c in cut.cat.categories], cut.cat.codes.tolist(), edges


def qcut_oracle(values, n_bins):
    cut = pd.qcut(pd.Series(values, dtype=float), n_bins, duplicates="drop", precision=3)
    return [str(c) for c in cut.cat.categories], cut.cat.codes.tolist()


def test_quantile_bins_one_to_eight():
    bins = quantile_bins(range(1, 9), 4)
    assert bins.sizes() == [2, 2, 2, 2]
    assert bins.labels == qcut_oracle(list(range(1, 9)), 4)[0]
    assert list(bins.assignments) == qcut_oracle(list(range(1, 9)), 4)[1]
    assert bins.labels[0] == "(0.999, 2.75]"


def test_lowest_edge_convention():
    values = [54, 120, 234.75, 234.75, 300, 410, 520, 990]
    bins = quantile_bins(values, 4)
    assert bins.display_edges[0] == 53.999
    assert bins.labels[0].startswith("(53.999, ")
    assert bins.labels == qcut_oracle(values, 4)[0]


@settings(max_examples=100)
@given(st.lists(st.integers(0, 30), min_size=4, max_size=40).filter(lambda v: len(set(v)) > 1),
       st.integers(1, 4))
def test_quantile_bins_match_exact_oracle(values, n_bins):
    bins = quantile_bins(values, n_bins)
    labels, codes, edges = cut_oracle(values, n_bins)
    assert list(bins.edges) == pytest.approx(edges, rel=1e-15)
    assert bins.labels == labels
    assert list(bins.assignments) == codes
    assert sum(bins.sizes()) == len(values)


@given(st.lists(st.integers(0, 10**6), min_size=8, max_size=60, unique=True))
def test_distinct_values_give_balanced_bins(values):
    sizes = quantile_bins(values, 4).sizes()
    assert max(sizes) - min(sizes) <= 1


def test_ties_straddling_edge_follow_sorted_oracle():
    values = [1, 2, 3, 3, 3, 3, 7, 8]
    bins = quantile_bins(values, 4)
    # right-closed intervals: a value equal to an upper edge belongs to that bin
    ordered = sorted(values)
    for value, assigned in zip(values, bins.assignments):
        lo, hi = bins.edges[assigned], bins.edges[assigned + 1]
        assert (lo < value <= hi) or (assigned == 0 and value == ordered[0])


def test_quantile_bins_too_few_values():
    with pytest.raises(ValueError):
        quantile_bins([1, 2], 4)
    # a constant series collapses to one closed bin instead of none
    single = quantile_bins([5, 5, 5, 5], 4)
    assert single.n_bins == 1 and single.sizes() == [4] and single.labels == ["(4.999, 5.0]"]


def test_template_pairing():
    flat = RetrievalConfig(n_links=0, depth=0, top_m=0)
    assert template_for(PromptKind.HYPERLINKED, flat) is PromptKind.UNIFIED
    assert template_for(PromptKind.HYPERLINKED, RetrievalConfig()) is PromptKind.HYPERLINKED
    assert template_for(PromptKind.BASIC, flat) is PromptKind.BASIC


def small_grid(synthetic_index, embedder, suite, **kwargs):
    cases = suite[:2]
    kinds = [PromptKind.BASIC, PromptKind.HYPERLINKED]
    configs = [("LARAG", RetrievalConfig())]
    return run_benchmark(cases, kinds, configs, synthetic_index, embedder, MockGenerator(), **kwargs)


def csv_digest(records, path):
    write_records(records, path)
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_smoke_grid_is_deterministic(tmp_path, synthetic_index, embedder, suite):
    first = small_grid(synthetic_index, embedder, suite)
    second = small_grid(synthetic_index, embedder, suite, max_workers=4)
    assert len(first) == 4
    assert [r.key for r in first] == sorted(r.key for r in first)
    assert csv_digest(first, tmp_path / "a.csv") == csv_digest(second, tmp_path / "b.csv")
    for record in first:
        assert record.error == "" and 0 < record.f1 < 1
        assert record.len_ref == word_count(suite[int(record.query_id[1:]) - 1].reference)
        assert record.total_tokens == record.prompt_tokens + record.completion_tokens


def test_full_grid_count(synthetic_index, embedder, suite):
    records = run_benchmark(suite, DEFAULT_KINDS, DEFAULT_CONFIGS, synthetic_index, embedder,
                            MockGenerator())
    assert len(records) == 240
    assert len({r.key for r in records}) == 240
    assert {r.template for r in records if r.config != "LARAG" and r.prompt_kind == "hyperlinked"} == {"unified"}


def test_empty_suite(synthetic_index, embedder):
    assert run_benchmark([], DEFAULT_KINDS, DEFAULT_CONFIGS, synthetic_index, embedder, MockGenerator()) == []


class FailingGenerator:
    def generate(self, prompt):
        raise RuntimeError("model offline")


def test_failures_are_recorded(synthetic_index, embedder, suite):
    records = run_benchmark(suite[:3], DEFAULT_KINDS, DEFAULT_CONFIGS, synthetic_index, embedder,
                            FailingGenerator())
    assert len(records) == 36
    assert all(r.error == "RuntimeError: model offline" and r.f1 is None for r in records)
    assert all(r.retrieved_chunks > 0 for r in records)


def test_external_scores(tmp_path, synthetic_index, embedder, suite):
    path = tmp_path / "scores.csv"
    path.write_text("query_id,prompt_kind,config,P,R,F1\n"
                    "Q01,basic,LARAG,0.9,0.8,0.847\n"
                    "Q01,hyperlinked,LARAG,0.5,0.5,0.5\n")
    scores = load_external_scores(path)
    records = small_grid(synthetic_index, embedder, suite, external_scores=scores)
    by_key = {r.key: r for r in records}
    assert by_key[("Q01", "basic", "LARAG")].f1 == 0.847
    assert by_key[("Q02", "basic", "LARAG")].f1 is None
    assert "no external score" in by_key[("Q02", "basic", "LARAG")].error


def test_records_roundtrip_with_sidecar(tmp_path, synthetic_index, embedder, suite):
    records = small_grid(synthetic_index, embedder, suite)
    path = tmp_path / "r.csv"
    write_records(records, path)
    assert path.read_text().startswith("# linkrag-records v1\n")
    assert "latency" not in path.read_text().splitlines()[1]
    assert timing_path(path).exists()
    loaded = read_records(path)
    assert loaded == records
    timing_path(path).unlink()
    assert all(r.latency is None for r in read_records(path))


def test_read_records_rejects_garbage(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_records(tmp_path / "x.csv")


def rec(config, kind, f1, tokens, latency, len_ref, len_pred, qid="Q1", chunks=5):
    return BenchmarkRecord(qid, kind, config, kind, "a", chunks, tokens, 0, tokens, True, f1, f1, f1,
                           len_ref, len_pred, "", latency)


def test_single_record_report():
    report = aggregate_report([rec("A", "basic", 0.5, 100, 1.0, 10, 5)], n_bins=1)
    means = report["by_config"]["A"]
    assert (means["f1"], means["tokens"], means["latency"], means["chunks"]) == (0.5, 100, 1.0, 5)
    assert report["cost_correlation"]["A"]["f1_tokens"] is None


def test_six_record_report_by_hand():
    records = [
        rec("A", "basic", 0.2, 100, 1.0, 10, 4, "Q1", 5),
        rec("A", "basic", 0.4, 200, 2.0, 20, 8, "Q2", 5),
        rec("A", "reasoning", 0.6, 300, 3.0, 30, 6, "Q3", 5),
        rec("B", "basic", 0.5, 150, 1.5, 10, 5, "Q1", 8),
        rec("B", "reasoning", 0.7, 250, 2.5, 20, 7, "Q2", 9),
        rec("B", "reasoning", 0.9, 350, 4.0, 30, 3, "Q3", 10),
    ]
    report = aggregate_report(records, n_bins=3)
    a, b = report["by_config"]["A"], report["by_config"]["B"]
    assert a["f1"] == pytest.approx(0.4) and a["tokens"] == pytest.approx(200)
    assert b["chunks"] == pytest.approx(9) and b["latency"] == pytest.approx(8 / 3)
    assert report["by_prompt"]["basic"]["f1"] == pytest.approx((0.2 + 0.4 + 0.5) / 3)
    assert report["cost_correlation"]["A"]["f1_tokens"] == pytest.approx(1.0)
    assert report["length_correlation"]["B"]["f1_len_pred"] == pytest.approx(
        closed_form_pearson([5, 7, 9], [5, 7, 3]))
    assert sum(m["n"] for m in report["by_config"].values()) == len(records)
    assert sum(m["n"] for m in report["by_prompt"].values()) == len(records)
    assert report["length_bins"]["mean_f1"]["A"] == pytest.approx([0.2, 0.4, 0.6])
    assert "per record" in report["note"]
    text = format_report(report)
    assert "Aggregate results by configuration" in text and "n/a" not in text.split("Correlation")[0]


def test_empty_report_rejected():
    with pytest.raises(ValueError):
        aggregate_report([])


def test_suite_io(tmp_path, suite):
    path = tmp_path / "s.jsonl"
    write_suite(suite, path)
    assert load_suite(path) == suite
    path.write_text('{"query_id": "a", "question": "q", "reference": "r"}\n'
                    '{"query_id": "a", "question": "q", "reference": "r"}\n')
    with pytest.raises(ValueError):
        load_suite(path)
    path.write_text('{"query_id": "a", "question": "q", "reference": " "}\n')
    with pytest.raises(ValueError):
        load_suite(path)
    assert [c.query_id for c in suite] == [f"Q{i:02d}" for i in range(1, 21)]
    assert all(isinstance(c, BenchmarkCase) and c.reference for c in suite)
