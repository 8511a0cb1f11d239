from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from ccq.corpus import CodeCommentPair, Dataset, Label, Provenance


def gaussian_blobs(n=600, d=16, sep=2.0, minority=0.1, seed=0):
    """Two isotropic unit-variance blobs with centers `sep` sigma apart.

    The majority class (share 1 - minority) is labeled 1, the minority 0.
    """
    rng = np.random.default_rng(seed)
    n_min = int(round(n * minority))
    n_maj = n - n_min
    offset = np.full(d, sep / np.sqrt(d))
    X = np.vstack([rng.normal(0, 1, (n_maj, d)), rng.normal(0, 1, (n_min, d)) + offset])
    y = np.concatenate([np.ones(n_maj, dtype=np.int64), np.zeros(n_min, dtype=np.int64)])
    perm = rng.permutation(n)
    return X[perm], y[perm]


def make_pairs(labels, prefix="p"):
    """One synthetic labeled pair per entry of `labels` (ints 0/1)."""
    pairs = []
    for i, value in enumerate(labels):
        pairs.append(
            CodeCommentPair(
                id=f"{prefix}{i}",
                code=f"int x{i} = {i};",
                comment=f"store value {i}" if value else f"number {i}",
                label=Label(value),
            )
        )
    return tuple(pairs)


def make_dataset(labels, prefix="p", provenance=Provenance.SEED):
    return Dataset(pairs=make_pairs(labels, prefix=prefix), provenance=provenance)


class ScriptedHandler(BaseHTTPRequestHandler):
    """Replays a queue of (status, headers, body) responses."""

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length).decode("utf-8")
        self.server.requests.append(
            {"path": self.path, "body": json.loads(body) if body else None, "headers": dict(self.headers)}
        )
        if self.server.script:
            status, headers, payload = self.server.script.pop(0)
        else:
            status, headers, payload = 500, {}, {"error": "script exhausted"}
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        for key, value in headers.items():
            self.send_header(key, value)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


class StubServer:
    def __init__(self):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), ScriptedHandler)
        self.httpd.script = []
        self.httpd.requests = []
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    @property
    def requests(self):
        return self.httpd.requests

    def enqueue(self, status, payload, headers=None):
        self.httpd.script.append((status, headers or {}, payload))

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()


@pytest.fixture(autouse=True)
def _fast_retries(monkeypatch):
    # Keep transport retry backoff out of the test runtime budget.
    monkeypatch.setattr("ccq.embedding.RETRY_BACKOFF_SECONDS", (0.01, 0.01, 0.01))
