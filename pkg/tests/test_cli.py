import json

import pytest

from linkrag.bench import read_records
from linkrag.cli import main, parse_config_spec
from linkrag.corpus import planted_link_corpus
from linkrag.embedding import HashingEmbedder


def run(capsys, *argv, env=None):
    code = main(list(argv), env or {})
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def seeded(tmp_path, capsys):
    code, _, _ = run(capsys, "seed-corpus", str(tmp_path))
    assert code == 0
    index = tmp_path / "idx.jsonl"
    flags = ["--corpus-root", str(tmp_path / "corpus"), "--base-url-prefix",
             "https://docs.quarry.example/v1/", "--index-path", str(index)]
    code, out, _ = run(capsys, "ingest", *flags)
    assert code == 0, out
    return tmp_path, index, out


def test_ingest_counts_and_determinism(seeded, capsys):
    tmp_path, index, out = seeded
    assert "indexed 60 chunks from 20 pages" in out
    assert "warnings: 0" in out
    first = index.read_bytes()
    assert run(capsys, "ingest", "--corpus-root", str(tmp_path / "corpus"), "--base-url-prefix",
               "https://docs.quarry.example/v1/", "--index-path", str(index))[0] == 0
    assert index.read_bytes() == first


def test_ingest_from_env_and_config_file(seeded, capsys, tmp_path):
    root, index, _ = seeded
    other = tmp_path / "other.jsonl"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"corpus_root": str(root / "corpus"), "index_path": str(other),
                               "base_url_prefix": "https://docs.quarry.example/v1/"}))
    assert run(capsys, "ingest", env={"LINKRAG_CONFIG_FILE": str(cfg)})[0] == 0
    assert other.read_bytes() == index.read_bytes()


def test_ingest_without_root_fails(capsys, tmp_path):
    code, _, err = run(capsys, "ingest", "--index-path", str(tmp_path / "i.jsonl"))
    assert code == 1 and err.count("\n") == 1 and "corpus root" in err


@pytest.fixture
def planted(tmp_path, capsys):
    docs, cases = planted_link_corpus(5, embedder=HashingEmbedder())
    root = tmp_path / "planted"
    for doc in docs:
        path = root / doc.url.rsplit("/", 1)[1]
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(doc.html)
    index = tmp_path / "planted.jsonl"
    assert run(capsys, "ingest", "--corpus-root", str(root), "--base-url-prefix",
               "https://planted.example/docs/", "--index-path", str(index))[0] == 0
    return index, cases


def test_query_trace_shows_expansion(planted, capsys):
    index, cases = planted
    case = cases[0]
    gold = f"{case.gold_url}:setup-0"
    code, out, _ = run(capsys, "query", case.query, "--config", "1,1,1", "--index-path", str(index))
    assert code == 0
    assert "expanded" in out and gold in out and f"from {case.source_url}" in out
    assert "prompt=hyperlinked" in out
    code, out, _ = run(capsys, "query", case.query, "--config", "0,0,0", "--index-path", str(index))
    assert code == 0
    assert "expanded" not in out and gold not in out
    assert "prompt=unified" in out


def test_inspect(planted, capsys):
    index, cases = planted
    chunk_id = f"{cases[0].source_url}:overview-0"
    code, out, _ = run(capsys, "inspect", "--id", chunk_id, "--index-path", str(index))
    payload = json.loads(out)
    assert code == 0 and payload["id"] == chunk_id and payload["internal"] == [True]
    code, _, err = run(capsys, "inspect", "--id", "nope", "--index-path", str(index))
    assert code == 1 and "no chunk" in err


def test_bench_deterministic_and_report(seeded, capsys):
    root, index, _ = seeded
    outs = []
    for name in ("a.csv", "b.csv"):
        out = root / name
        code, text, err = run(capsys, "bench", "--suite", str(root / "suite.jsonl"), "--out", str(out),
                              "--kinds", "basic,hyperlinked", "--configs", "RAG_k5=5:0,0,0",
                              "LARAG=5:1,1,1", "--index-path", str(index))
        assert code == 0, err
        assert "wrote 80 records" in text
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = read_records(root / "a.csv")
    assert len(rows) == 80 and {r.config for r in rows} == {"RAG_k5", "LARAG"}
    code, text, _ = run(capsys, "report", str(root / "a.csv"), "--json")
    assert code == 0 and json.loads(text)
    code, text, _ = run(capsys, "report", str(root / "a.csv"))
    assert code == 0 and "LARAG" in text


def test_bench_failure_keeps_partial_output(seeded, capsys, monkeypatch):
    root, index, _ = seeded
    import linkrag.cli as cli

    calls = []

    class Boom:
        def generate(self, prompt):
            calls.append(prompt)
            if len(calls) > 3:
                raise KeyboardInterrupt
            from linkrag.llm import MockGenerator
            return MockGenerator().generate(prompt)

    monkeypatch.setattr(cli, "make_generator", lambda config: Boom())
    out = root / "partial.csv"
    code, _, err = run(capsys, "bench", "--suite", str(root / "suite.jsonl"), "--out", str(out),
                       "--kinds", "basic", "--configs", "RAG_k5=5:0,0,0", "--index-path", str(index))
    assert code == 1 and "partial results" in err and "interrupted" in err
    assert len(read_records(out)) == 3


def test_report_on_empty_file(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code, _, err = run(capsys, "report", str(empty))
    assert code == 1 and err.startswith("linkrag report: error:")


@pytest.mark.parametrize("argv", [["query", "q", "--k", "zero"], ["bench"], ["nope"]])
def test_bad_flags_one_line(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv, {})
    assert info.value.code == 2
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "error:" in err


def test_bad_config_value_one_line(capsys, tmp_path):
    code, _, err = run(capsys, "query", "q", "--config", "1,1", "--index-path", str(tmp_path / "x"))
    assert code == 1 and err.count("\n") == 1
    code, _, err = run(capsys, "query", "q", "--index-path", str(tmp_path / "missing.jsonl"))
    assert code == 1 and err.count("\n") == 1


def test_parse_config_spec():
    label, config = parse_config_spec("LARAG_m2=5:1,1,2:rerank_truncate")
    assert label == "LARAG_m2" and config.triple == (1, 1, 2) and config.assembly_mode == "rerank_truncate"
    for bad in ("x", "=5:1,1,1", "a=5", "a=5:1,1"):
        with pytest.raises(ValueError):
            parse_config_spec(bad)
