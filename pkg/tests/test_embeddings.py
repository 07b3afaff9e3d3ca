import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from wordgroup.embeddings import (
    BuiltinNgramProvider,
    ExternalServiceProvider,
    ProviderError,
    cosine,
    hash_feature,
    ngram_features,
)


def test_cosine_hand_values():
    assert cosine([1, 1, 0], [1, 0, 0]) == pytest.approx(1 / math.sqrt(2))
    assert cosine([1, 2], [2, 4]) == pytest.approx(1.0)
    assert cosine([1, 0], [-1, 0]) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        cosine([0, 0], [1, 0])
    with pytest.raises(ValueError):
        cosine([1, 0], [1, 0, 0])


def test_ngram_features():
    assert ngram_features("a b c") == ["u\x1fa", "u\x1fb", "u\x1fc", "b\x1fa\x1fb", "b\x1fb\x1fc"]


def test_builtin_reversal_oracle():
    # "a b c" and "c b a" share 3 unigrams and no bigrams: 5 features each,
    # so with distinct buckets the cosine is 3/5.
    p = BuiltinNgramProvider()
    slots = [hash_feature(f, p.dimension)[0] for f in ngram_features("a b c") + ngram_features("c b a")]
    assert len(set(slots)) == len(slots) - 3
    assert cosine(p.embed("a b c"), p.embed("c b a")) == pytest.approx(0.6)
    assert cosine(p.embed("a b c"), p.embed("a b c")) == pytest.approx(1.0)


def test_builtin_deterministic_and_normalised():
    a, b = BuiltinNgramProvider(), BuiltinNgramProvider()
    v = a.embed("राम ने रावण को मारा")
    assert np.array_equal(v, b.embed("राम ने रावण को मारा"))
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert v.shape == (4096,)
    with pytest.raises(ValueError):
        a.embed("   ")


class _Stub(BaseHTTPRequestHandler):
    dim = 3
    status = 200
    calls = 0

    def do_POST(self):
        type(self).calls += 1
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if type(self).status != 200:
            self.send_response(type(self).status)
            self.end_headers()
            return
        vecs = [[float(len(t)), 1.0, 0.0][: self.dim] + [0.0] * max(0, self.dim - 3) for t in body["texts"]]
        data = json.dumps({"vectors": vecs}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub():
    handler = type("H", (_Stub,), {"dim": 3, "status": 200, "calls": 0})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    t = threading.Thread(target=server.serve_forever, daemon=True)
    t.start()
    yield handler, f"http://127.0.0.1:{server.server_port}/embed"
    server.shutdown()


def test_external_success_batched(stub):
    handler, url = stub
    p = ExternalServiceProvider(url, 3, batch_size=2, max_in_flight=3)
    vecs = p.embed_many(["a", "bb", "ccc", "dddd", "e"])
    assert [v[0] for v in vecs] == [1, 2, 3, 4, 1]
    assert handler.calls == 3


def test_external_wrong_dimension(stub):
    _, url = stub
    with pytest.raises(ProviderError, match="dimension"):
        ExternalServiceProvider(url, 5, retries=0).embed_many(["a"])


def test_external_4xx_not_retried(stub):
    handler, url = stub
    handler.status = 400
    with pytest.raises(ProviderError):
        ExternalServiceProvider(url, 3, retries=3, backoff=0).embed_many(["a"])
    assert handler.calls == 1


def test_external_5xx_retried(stub):
    handler, url = stub
    handler.status = 503
    with pytest.raises(ProviderError, match="unreachable"):
        ExternalServiceProvider(url, 3, retries=2, backoff=0).embed_many(["a"])
    assert handler.calls == 3


def test_external_unreachable():
    p = ExternalServiceProvider("http://127.0.0.1:9/none", 3, retries=1, backoff=0, timeout=2)
    with pytest.raises(ProviderError):
        p.embed_many(["a"])


def test_from_env(monkeypatch):
    monkeypatch.delenv("LWG_EMBED_ENDPOINT", raising=False)
    with pytest.raises(ProviderError):
        ExternalServiceProvider.from_env()
    monkeypatch.setenv("LWG_EMBED_ENDPOINT", "http://x")
    monkeypatch.setenv("LWG_EMBED_DIM", "768")
    p = ExternalServiceProvider.from_env()
    assert (p.endpoint, p.dimension) == ("http://x", 768)
