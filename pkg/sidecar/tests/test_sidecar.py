import hashlib
import socket
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from embed_sidecar.server import SidecarConfig, create_app


class FakeEncoder:
    """Deterministic stand-in for a sentence-transformers model.

    Encodes a text as the (unnormalized) mean of per-token pseudo-random
    vectors, so similarity is driven by token overlap and the app factory's
    injection path is exercised without downloading model weights.
    """

    def __init__(self, dimension=32):
        self.dimension = dimension

    def get_sentence_embedding_dimension(self):
        return self.dimension

    def _token_vector(self, token):
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        v = rng.normal(size=self.dimension)
        return v / np.linalg.norm(v)

    def encode(self, texts):
        out = []
        for text in texts:
            tokens = text.split() or [text]
            out.append(np.mean([self._token_vector(t) for t in tokens], axis=0))
        return np.array(out)


@pytest.fixture()
def client():
    app = create_app(SidecarConfig(model_name="fake", max_batch=8), encoder=FakeEncoder())
    return TestClient(app)


class TestHealth:
    def test_503_before_model_load(self):
        app = create_app(SidecarConfig(model_name="fake"), loader=lambda name: FakeEncoder())
        # No lifespan context entered yet, so the model is not loaded.
        assert TestClient(app).get("/health").status_code == 503

    def test_200_after_load_with_dimension(self):
        app = create_app(SidecarConfig(model_name="fake"), loader=lambda name: FakeEncoder())
        with TestClient(app) as client:
            resp = client.get("/health")
            assert resp.status_code == 200
            assert resp.json() == {"status": "ok", "dimension": 32}

    def test_embed_503_before_load(self):
        app = create_app(SidecarConfig(model_name="fake"), loader=lambda name: FakeEncoder())
        assert TestClient(app).post("/embed", json={"texts": ["x"]}).status_code == 503


class TestEmbed:
    def test_count_and_dimension(self, client):
        resp = client.post("/embed", json={"texts": ["alpha beta", "gamma", "delta"]})
        assert resp.status_code == 200
        body = resp.json()
        vectors = np.asarray(body["vectors"])
        assert vectors.shape == (3, 32)
        assert body["dimension"] == client.get("/health").json()["dimension"]
        assert body["model"] == "fake"

    def test_unit_norms(self, client):
        vectors = np.asarray(
            client.post("/embed", json={"texts": ["a b c", "d", "e f"]}).json()["vectors"]
        )
        assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0, atol=1e-5)

    def test_identical_texts_identical_vectors(self, client):
        vectors = client.post("/embed", json={"texts": ["same text", "same text"]}).json()[
            "vectors"
        ]
        assert vectors[0] == vectors[1]

    def test_order_preserving(self, client):
        fwd = client.post("/embed", json={"texts": ["one", "two"]}).json()["vectors"]
        rev = client.post("/embed", json={"texts": ["two", "one"]}).json()["vectors"]
        assert fwd[0] == rev[1] and fwd[1] == rev[0]

    def test_stateless_across_requests(self, client):
        first = client.post("/embed", json={"texts": ["repeatable"]}).json()
        client.post("/embed", json={"texts": ["other", "stuff"]})
        second = client.post("/embed", json={"texts": ["repeatable"]}).json()
        assert first == second

    def test_empty_batch_400(self, client):
        assert client.post("/embed", json={"texts": []}).status_code == 400

    def test_oversized_batch_400(self, client):
        texts = [f"t{i}" for i in range(9)]  # cap is 8 in the fixture
        assert client.post("/embed", json={"texts": texts}).status_code == 400

    def test_malformed_payload_rejected(self, client):
        assert client.post("/embed", json={"nope": 1}).status_code == 422


class TestPipelineAgainstLiveServer:
    """Run the full weaklab pipeline against the sidecar over real HTTP."""

    @pytest.fixture()
    def base_url(self):
        import uvicorn

        app = create_app(SidecarConfig(model_name="fake"), encoder=FakeEncoder())
        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
        )
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        deadline = time.time() + 15
        while not server.started:
            if time.time() > deadline:
                pytest.fail("sidecar did not start")
            time.sleep(0.05)
        yield f"http://127.0.0.1:{port}"
        server.should_exit = True
        thread.join(timeout=10)

    def test_end_to_end_fifty_documents(self, base_url):
        from weaklab.classifier import TrainConfig, one_hot, train
        from weaklab.corpus import extract_ngrams
        from weaklab.embedding import RemoteProvider, embed_batch
        from weaklab.expansion import expand_labels
        from weaklab.pseudo import pseudo_label_corpus
        from weaklab.synthetic import make_benchmark

        corpus, _ = make_benchmark(seed=0, n_unlabelled=50, n_test=10)
        provider = RemoteProvider(base_url)
        assert provider.dimension == 32
        index = extract_ngrams(corpus)
        vocabs, _ = expand_labels(corpus.label_set, index, provider)
        assert all(len(v.entries) >= 1 for v in vocabs)
        examples, _ = pseudo_label_corpus(corpus, index, vocabs, "single-label")
        assert examples
        docmap = {d.id: d for d in corpus.documents}
        X = embed_batch(provider, [docmap[e.document_id].text for e in examples])
        y = np.array([next(iter(e.assigned_labels)) for e in examples])
        model = train(X, one_hot(y, 3), "softmax", TrainConfig(seed=0, epochs=10))
        preds = model.predict(X)
        assert preds.shape == y.shape
