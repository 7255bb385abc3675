import pytest
from fastapi.testclient import TestClient

from quadserve import create_app


@pytest.fixture(scope="module")
def client(tiny_checkpoint):
    # an untrained model is enough to check the protocol
    return TestClient(create_app(tiny_checkpoint, max_new_tokens=16))


def test_arity_preserved(client):
    response = client.post("/generate", json={
        "inputs": ["the pizza is tasty", "the waiter is rude"],
        "task": "asqp",
        "decoding": "greedy",
    })
    assert response.status_code == 200
    body = response.json()
    assert set(body) == {"outputs"}
    assert len(body["outputs"]) == 2
    assert all(isinstance(text, str) for text in body["outputs"])


def test_malformed_json_is_400(client):
    response = client.post("/generate", content=b"{not json",
                           headers={"Content-Type": "application/json"})
    assert response.status_code == 400


def test_non_greedy_decoding_is_400(client):
    response = client.post("/generate", json={
        "inputs": ["the pizza is tasty"], "task": "asqp", "decoding": "beam",
    })
    assert response.status_code == 400


def test_bad_inputs_are_400(client):
    for inputs in ([], [1, 2], "not a list", None):
        response = client.post("/generate", json={
            "inputs": inputs, "task": "asqp", "decoding": "greedy",
        })
        assert response.status_code == 400, inputs


def test_greedy_is_deterministic(client):
    payload = {"inputs": ["the pizza is tasty"], "task": "asqp",
               "decoding": "greedy"}
    first = client.post("/generate", json=payload).json()["outputs"]
    second = client.post("/generate", json=payload).json()["outputs"]
    assert first == second


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}
