import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from sentiquad import (
    GenerationRequest,
    HttpBackend,
    OracleBackend,
    PerturbBackend,
    PerturbConfig,
    Task,
    build_input,
    build_target,
    recover_quads,
    score,
)
from sentiquad.backends import (
    BackendConnectionError,
    BackendProtocolError,
    DECOY_SPANS,
    UnknownInputError,
)

from synthdata import make_dataset, make_vocab


@pytest.fixture(scope="module")
def dataset():
    rng = random.Random(101)
    vocab = make_vocab(rng)
    return vocab, make_dataset(rng, vocab, 60)


def _inputs(examples, transfer=False):
    return tuple(build_input(ex.sentence, ex.task, transfer=transfer)
                 for ex in examples)


def test_generation_request_requires_inputs():
    with pytest.raises(ValueError):
        GenerationRequest((), Task.ASQP)


def test_oracle_backend_replays_gold(dataset):
    vocab, examples = dataset
    backend = OracleBackend(examples, vocab=vocab)
    outputs = backend.generate(GenerationRequest(_inputs(examples), Task.ASQP))
    assert outputs == [build_target(ex, vocab=vocab).text for ex in examples]


def test_oracle_backend_unknown_input(dataset):
    vocab, examples = dataset
    backend = OracleBackend(examples, vocab=vocab)
    with pytest.raises(UnknownInputError):
        backend.generate(GenerationRequest(("never seen this",), Task.ASQP))


def test_oracle_end_to_end_is_perfect(dataset):
    vocab, examples = dataset
    backend = OracleBackend(examples, vocab=vocab)
    outputs = backend.generate(GenerationRequest(_inputs(examples), Task.ASQP))
    recovered = [
        recover_quads(text, ex.task, vocab=vocab, sentence=ex.sentence)
        for text, ex in zip(outputs, examples)
    ]
    report = score([r.keys() for r in recovered],
                   [ex.quad_keys() for ex in examples])
    assert report.precision == report.recall == report.f1 == 1.0


def test_perturb_rho_zero_matches_oracle(dataset):
    vocab, examples = dataset
    oracle = OracleBackend(examples, vocab=vocab)
    perturb = PerturbBackend(examples, PerturbConfig(rho=0.0, seed=5), vocab=vocab)
    request = GenerationRequest(_inputs(examples), Task.ASQP)
    assert perturb.generate(request) == oracle.generate(request)


def test_perturb_rho_one_zeroes_f1(dataset):
    vocab, examples = dataset
    backend = PerturbBackend(examples, PerturbConfig(rho=1.0, seed=5), vocab=vocab)
    outputs = backend.generate(GenerationRequest(_inputs(examples), Task.ASQP))
    recovered = [
        recover_quads(text, ex.task, vocab=vocab, sentence=ex.sentence)
        for text, ex in zip(outputs, examples)
    ]
    report = score([r.keys() for r in recovered],
                   [ex.quad_keys() for ex in examples])
    assert report.tp == 0
    assert report.f1 == 0.0


def test_perturb_deterministic_under_seed(dataset):
    vocab, examples = dataset
    request = GenerationRequest(_inputs(examples), Task.ASQP)
    first = PerturbBackend(examples, PerturbConfig(rho=0.4, seed=11), vocab=vocab)
    second = PerturbBackend(examples, PerturbConfig(rho=0.4, seed=11), vocab=vocab)
    third = PerturbBackend(examples, PerturbConfig(rho=0.4, seed=12), vocab=vocab)
    assert first.generate(request) == second.generate(request)
    assert first.generate(request) != third.generate(request)


def test_perturb_decoys_never_match_real_spans(dataset):
    vocab, examples = dataset
    for ex in examples:
        for quad in ex.quads:
            assert quad.opinion not in DECOY_SPANS
            assert quad.aspect not in DECOY_SPANS


def test_perturb_config_validation():
    with pytest.raises(ValueError):
        PerturbConfig(rho=1.5)
    with pytest.raises(ValueError):
        PerturbConfig(rho=0.5, element_weights={"category": 0.5})
    with pytest.raises(ValueError):
        PerturbConfig(rho=0.5, element_weights={"category": 0.5, "bogus": 0.5})
    PerturbConfig(rho=0.5, element_weights={"category": 0.5, "polarity": 0.5})


class _Handler(BaseHTTPRequestHandler):
    behavior = "echo"
    calls: list = []
    failures_left = 0

    def do_POST(self):  # noqa: N802 (http.server API)
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).calls.append(body)
        if self.path != "/generate":
            self._respond(404, {})
            return
        if type(self).behavior == "flaky" and type(self).failures_left > 0:
            type(self).failures_left -= 1
            self._respond(500, {"error": "transient"})
            return
        if type(self).behavior == "short":
            self._respond(200, {"outputs": body["inputs"][:-1]})
            return
        if type(self).behavior == "not-json":
            self.send_response(200)
            self.send_header("Content-Type", "text/plain")
            self.end_headers()
            self.wfile.write(b"plain text")
            return
        self._respond(200, {"outputs": [f"echo: {t}" for t in body["inputs"]]})

    def _respond(self, status, payload):
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Handler.behavior = "echo"
    _Handler.calls = []
    _Handler.failures_left = 0
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_http_backend_roundtrip(http_server):
    backend = HttpBackend(http_server, max_batch=2)
    request = GenerationRequest(("a", "b", "c", "d", "e"), Task.ASQP)
    outputs = backend.generate(request)
    assert outputs == [f"echo: {t}" for t in request.inputs]
    # bounded batches: 2 + 2 + 1
    assert [len(call["inputs"]) for call in _Handler.calls] == [2, 2, 1]
    assert all(call["decoding"] == "greedy" for call in _Handler.calls)
    assert all(call["task"] == "asqp" for call in _Handler.calls)


def test_http_backend_retries_transient_errors(http_server):
    _Handler.behavior = "flaky"
    _Handler.failures_left = 2
    backend = HttpBackend(http_server, max_attempts=3, backoff=0.0)
    outputs = backend.generate(GenerationRequest(("a",), Task.ASQP))
    assert outputs == ["echo: a"]
    assert len(_Handler.calls) == 3


def test_http_backend_exhausts_retry_budget(http_server):
    _Handler.behavior = "flaky"
    _Handler.failures_left = 99
    backend = HttpBackend(http_server, max_attempts=2, backoff=0.0)
    with pytest.raises(BackendProtocolError):
        backend.generate(GenerationRequest(("a",), Task.ASQP))
    assert len(_Handler.calls) == 2


def test_http_backend_arity_mismatch(http_server):
    _Handler.behavior = "short"
    backend = HttpBackend(http_server)
    with pytest.raises(BackendProtocolError, match="arity"):
        backend.generate(GenerationRequest(("a", "b"), Task.ASQP))


def test_http_backend_rejects_non_json(http_server):
    _Handler.behavior = "not-json"
    backend = HttpBackend(http_server)
    with pytest.raises(BackendProtocolError):
        backend.generate(GenerationRequest(("a",), Task.ASQP))


def test_http_backend_connection_error():
    backend = HttpBackend("http://127.0.0.1:9", max_attempts=2, backoff=0.0,
                          timeout=0.5)
    with pytest.raises(BackendConnectionError):
        backend.generate(GenerationRequest(("a",), Task.ASQP))
