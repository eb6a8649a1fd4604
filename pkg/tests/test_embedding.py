import hashlib
import json
import math
import re

import httpx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from linkrag.embedding import HashingEmbedder, RemoteEmbedder, cosine, cosine_many
from linkrag.exceptions import EmbeddingError


def reference_hashing(text, dimension=256):
    """Independent restatement of the documented construction."""
    vector = [0.0] * dimension
    for token in re.findall(r"[a-z0-9]+", text.lower()):
        data = token.encode()
        slot = int(hashlib.blake2b(data, digest_size=8, person=b"lrag-idx").hexdigest(), 16) % dimension
        bit = hashlib.blake2b(data, digest_size=1, person=b"lrag-sgn").digest()[0] & 1
        vector[slot] += 1.0 if bit else -1.0
    norm = math.sqrt(sum(v * v for v in vector))
    return [v / norm for v in vector]


def corpus_strings(chunks, n=1000):
    sentences = [s for c in chunks for s in re.split(r"(?<=[.!?])\s+|\n\n", c.text) if s.strip()]
    windows = [" ".join(sentences[i:i + w]) for w in range(2, 7) for i in range(len(sentences) - w + 1)]
    return list(dict.fromkeys(sentences + windows))[:n]


def test_hashing_matches_reference(embedder):
    text = "Quarry requires at least 16 GB of RAM and 4 CPU cores."
    assert np.allclose(embedder.embed(text), reference_hashing(text), atol=1e-15)


def test_deterministic_and_unit(embedder):
    a, b = embedder.embed("Open the project"), embedder.embed("Open the project")
    assert np.array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1) < 1e-6
    assert embedder.identifier == "hashing-bow-v1-d256"


def test_case_and_punctuation_insensitive(embedder):
    assert np.array_equal(embedder.embed("Open, the PROJECT!"), embedder.embed("open the project"))


def test_empty_text_rejected(embedder):
    for text in ("", "   ", "\n"):
        with pytest.raises(ValueError):
            embedder.embed(text)


def test_symbol_only_text_still_unit(embedder):
    assert abs(np.linalg.norm(embedder.embed("¶ -- !!")) - 1) < 1e-12


@given(st.text(min_size=1).filter(str.strip))
def test_any_text_is_unit(text):
    v = HashingEmbedder().embed(text)
    assert abs(np.linalg.norm(v) - 1) < 1e-6


def test_distinct_corpus_strings_are_separated(embedder, synthetic_chunks):
    strings = corpus_strings(synthetic_chunks)
    assert len(strings) == 1000
    m = embedder.embed_many(strings)
    sims = (m @ m.T)[np.triu_indices(len(strings), 1)]
    assert (sims < 0.99).mean() >= 0.99


def test_cosine_examples():
    v = np.array([0.6, 0.8])
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-15)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    assert cosine(v, np.array([0.8, 0.6])) == pytest.approx(0.96, abs=1e-15)
    with pytest.raises(ValueError):
        cosine(np.ones(2), np.ones(3))


unit_vectors = arrays(np.float64, 8, elements=st.floats(-1, 1)).filter(
    lambda a: np.linalg.norm(a) > 1e-3).map(lambda a: a / np.linalg.norm(a))


@given(unit_vectors, unit_vectors)
def test_cosine_bounded_and_exactly_symmetric(a, b):
    assert abs(cosine(a, b)) <= 1 + 1e-9
    assert cosine(a, b) == cosine(b, a)


@given(st.lists(unit_vectors, min_size=1, max_size=6), unit_vectors)
def test_cosine_many_bit_identical(rows, q):
    matrix = np.vstack(rows)
    assert cosine_many(matrix, q).tolist() == [cosine(r, q) for r in rows]


class Recorder:
    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        status, body, headers = self.responses.pop(0)
        return httpx.Response(status, json=body, headers=headers or {})


def ok_body(batch, dim=3):
    data = [{"index": i, "embedding": [float(i + 1)] + [1.0] * (dim - 1)} for i in range(len(batch))]
    return {"data": list(reversed(data))}


def remote(recorder, **kwargs):
    client = httpx.Client(transport=httpx.MockTransport(recorder))
    sleeps = []
    embedder = RemoteEmbedder("https://emb.example/v1/embeddings", "m1", api_key="k",
                              client=client, sleep=sleeps.append, **kwargs)
    return embedder, sleeps


def test_remote_batches_and_normalises():
    texts = [f"t{i}" for i in range(5)]
    rec = Recorder([(200, ok_body(texts[:2]), None), (200, ok_body(texts[2:4]), None),
                    (200, ok_body(texts[4:]), None)])
    embedder, _ = remote(rec, batch_size=2)
    vectors = embedder.embed_many(texts)
    assert vectors.shape == (5, 3)
    assert np.allclose(np.linalg.norm(vectors, axis=1), 1)
    sent = [json.loads(r.content) for r in rec.requests]
    assert [s["input"] for s in sent] == [["t0", "t1"], ["t2", "t3"], ["t4"]]
    assert all(s["model"] == "m1" for s in sent)
    assert rec.requests[0].headers["authorization"] == "Bearer k"
    # responses are reordered by index
    assert vectors[0][0] < vectors[1][0]
    assert embedder.dimension == 3


def test_remote_retries_transient_then_succeeds():
    rec = Recorder([(503, {"error": "busy"}, None), (429, {}, {"Retry-After": "7"}),
                    (200, ok_body(["x"]), None)])
    embedder, sleeps = remote(rec, backoff=0.5)
    embedder.embed("x")
    assert sleeps == [0.5, 7.0]


def test_remote_gives_up_with_metadata():
    rec = Recorder([(500, {}, None)] * 4)
    embedder, sleeps = remote(rec, retries=3, backoff=1.0)
    with pytest.raises(EmbeddingError) as info:
        embedder.embed("x")
    assert (info.value.status, info.value.attempts) == (500, 4)
    assert sleeps == [1.0, 2.0, 4.0]


def test_remote_auth_failure_not_retried():
    rec = Recorder([(401, {"error": "bad key"}, None)])
    embedder, sleeps = remote(rec)
    with pytest.raises(EmbeddingError) as info:
        embedder.embed("x")
    assert info.value.status == 401 and info.value.attempts == 1 and sleeps == []


def test_remote_transport_error_retried():
    calls = []

    def handler(request):
        calls.append(request)
        if len(calls) == 1:
            raise httpx.ConnectError("refused", request=request)
        return httpx.Response(200, json=ok_body(["x"]))

    embedder = RemoteEmbedder("https://e/x", "m", api_key="", sleep=lambda s: None,
                              client=httpx.Client(transport=httpx.MockTransport(handler)))
    embedder.embed("x")
    assert len(calls) == 2


def test_remote_malformed_response():
    rec = Recorder([(200, {"nope": []}, None)])
    embedder, _ = remote(rec)
    with pytest.raises(EmbeddingError):
        embedder.embed("x")


def test_remote_key_from_environment(monkeypatch):
    monkeypatch.setenv("LINKRAG_EMBEDDING_API_KEY", "from-env")
    rec = Recorder([(200, ok_body(["x"]), None)])
    client = httpx.Client(transport=httpx.MockTransport(rec))
    RemoteEmbedder("https://e/x", "m", client=client).embed("x")
    assert rec.requests[0].headers["authorization"] == "Bearer from-env"
