"""Pluggable generation backends: batch text in, batch text out.

Three implementations share the contract that outputs are position-aligned
with inputs:

* OracleBackend replays gold targets, so the full pipeline can be
  verified end to end without any model (F1 is exactly 1.0).
* PerturbBackend corrupts gold quads at a configured rate before
  re-linearizing, which gives the scorer an input with a known expected
  F1 of 1 - rate (corrupted elements are guaranteed not to match gold).
* HttpBackend talks to a remote greedy-decoding service over a one-POST
  wire protocol with bounded batches and a retry budget.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Protocol, Sequence

import requests

from .core import (
    CategoryVocab,
    Example,
    Polarity,
    SentimentQuad,
    SentiquadError,
    Task,
)
from .linearize import ProjectionMode, build_input, build_target

ENDPOINT_ENV_VAR = "SENTIQUAD_ENDPOINT"

#: Synthetic spans used when corrupting aspect/opinion terms. Disjoint from
#: any plausible review vocabulary, so a corruption never matches gold.
DECOY_SPANS = tuple(f"decoyspan{i}" for i in range(16))

_CORRUPTIBLE = {
    Task.ASQP: ("category", "aspect", "opinion", "polarity"),
    Task.ASTE: ("aspect", "opinion", "polarity"),
    Task.TASD: ("category", "aspect", "polarity"),
}


class BackendError(SentiquadError):
    """Base class for generation backend failures."""


class UnknownInputError(BackendError):
    """An oracle-style backend received an input it has no target for."""


class BackendProtocolError(BackendError):
    """The remote service violated the wire protocol."""


class BackendConnectionError(BackendError):
    """The remote service stayed unreachable after the retry budget."""


@dataclass(frozen=True)
class GenerationRequest:
    """A batch of model inputs for one task."""

    inputs: tuple[str, ...]
    task: Task

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs:
            raise ValueError("generation request requires at least one input")


class GeneratorBackend(Protocol):
    def generate(self, request: GenerationRequest) -> list[str]:
        """Return one output string per input, order-aligned."""
        ...


def _replay_table(
    examples: Iterable[Example],
    mode: ProjectionMode,
    vocab: CategoryVocab | None,
    lexicon: Mapping[Polarity, str] | None,
    transfer: bool,
    quads_for: dict | None = None,
) -> dict[str, str]:
    table: dict[str, str] = {}
    for ex in examples:
        if quads_for is not None:
            ex = replace(ex, quads=quads_for[id(ex)])
        key = build_input(ex.sentence, ex.task, transfer=transfer)
        target = build_target(ex, mode=mode, vocab=vocab, lexicon=lexicon).text
        if key in table and table[key] != target:
            raise ValueError(
                f"conflicting targets for duplicate input: {key!r}"
            )
        table[key] = target
    return table


class OracleBackend:
    """Replays the gold target for every known input string."""

    def __init__(
        self,
        examples: Sequence[Example],
        mode: ProjectionMode = ProjectionMode.NATURAL,
        vocab: CategoryVocab | None = None,
        lexicon: Mapping[Polarity, str] | None = None,
        transfer: bool = False,
    ):
        self._targets = _replay_table(examples, mode, vocab, lexicon, transfer)

    def generate(self, request: GenerationRequest) -> list[str]:
        outputs = []
        for text in request.inputs:
            try:
                outputs.append(self._targets[text])
            except KeyError:
                raise UnknownInputError(f"no gold target for input: {text!r}") from None
        return outputs


@dataclass(frozen=True)
class PerturbConfig:
    """Corruption settings: per-quad rate, seed, and element weights."""

    rho: float
    seed: int = 0
    element_weights: Mapping[str, float] = field(
        default_factory=lambda: {
            "category": 0.25, "aspect": 0.25, "opinion": 0.25, "polarity": 0.25,
        }
    )

    def __post_init__(self) -> None:
        if not 0 <= self.rho <= 1:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        unknown = set(self.element_weights) - {"category", "aspect", "opinion", "polarity"}
        if unknown:
            raise ValueError(f"unknown corruption elements: {sorted(unknown)}")
        total = sum(self.element_weights.values())
        if not (self.element_weights and abs(total - 1.0) < 1e-9):
            raise ValueError("element weights must sum to 1")
        if any(w < 0 for w in self.element_weights.values()):
            raise ValueError("element weights must be non-negative")


class PerturbBackend:
    """Replays gold targets after corrupting quads at a configured rate.

    Each quad is independently corrupted with probability ``rho`` by
    replacing exactly one element with a guaranteed-different value:
    another vocabulary category, one of the other two polarities, or a
    decoy span for aspect/opinion. Deterministic under the config seed.
    """

    def __init__(
        self,
        examples: Sequence[Example],
        config: PerturbConfig,
        mode: ProjectionMode = ProjectionMode.NATURAL,
        vocab: CategoryVocab | None = None,
        lexicon: Mapping[Polarity, str] | None = None,
        transfer: bool = False,
    ):
        rng = random.Random(config.seed)
        corrupted = {
            id(ex): tuple(
                self._corrupt(q, ex.task, config, vocab, rng)
                if rng.random() < config.rho
                else q
                for q in ex.quads
            )
            for ex in examples
        }
        self._targets = _replay_table(
            examples, mode, vocab, lexicon, transfer, quads_for=corrupted
        )

    @staticmethod
    def _corrupt(
        quad: SentimentQuad,
        task: Task,
        config: PerturbConfig,
        vocab: CategoryVocab | None,
        rng: random.Random,
    ) -> SentimentQuad:
        elements = [
            e for e in _CORRUPTIBLE[task] if config.element_weights.get(e, 0) > 0
        ]
        if not elements:
            raise ValueError(f"no corruptible elements for {task.token} under these weights")
        weights = [config.element_weights[e] for e in elements]
        element = rng.choices(elements, weights=weights)[0]
        if element == "category":
            if vocab is None or len(vocab) < 2:
                raise ValueError("category corruption requires a vocabulary of >= 2 entries")
            choices = [c for c in vocab if c != quad.category]
            return replace(quad, category=rng.choice(choices))
        if element == "polarity":
            choices = [p for p in Polarity if p is not quad.polarity]
            return replace(quad, polarity=rng.choice(choices))
        current = getattr(quad, element)
        decoys = [d for d in DECOY_SPANS if d != current]
        return replace(quad, **{element: rng.choice(decoys)})

    def generate(self, request: GenerationRequest) -> list[str]:
        outputs = []
        for text in request.inputs:
            try:
                outputs.append(self._targets[text])
            except KeyError:
                raise UnknownInputError(f"no target for input: {text!r}") from None
        return outputs


class HttpBackend:
    """Client for the POST /generate wire protocol.

    Requests are sent in batches of at most ``max_batch`` inputs; each
    batch is one POST. Connection errors, timeouts, and 5xx responses are
    retried with exponential backoff up to ``max_attempts``; other non-200
    responses and arity mismatches are protocol errors. A semaphore caps
    the number of in-flight requests when batches are issued concurrently.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 60.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        max_batch: int = 32,
        max_in_flight: int = 4,
        session: requests.Session | None = None,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        self._endpoint = endpoint.rstrip("/") + "/generate"
        self._timeout = timeout
        self._max_attempts = max_attempts
        self._backoff = backoff
        self._max_batch = max_batch
        self._session = session or requests.Session()
        self._in_flight = threading.Semaphore(max_in_flight)

    def generate(self, request: GenerationRequest) -> list[str]:
        outputs: list[str] = []
        inputs = list(request.inputs)
        for start in range(0, len(inputs), self._max_batch):
            batch = inputs[start:start + self._max_batch]
            outputs.extend(self._post_batch(batch, request.task))
        return outputs

    def _post_batch(self, batch: list[str], task: Task) -> list[str]:
        payload = {"inputs": batch, "task": task.label, "decoding": "greedy"}
        last_error: Exception | None = None
        for attempt in range(self._max_attempts):
            if attempt:
                time.sleep(self._backoff * 2 ** (attempt - 1))
            try:
                with self._in_flight:
                    response = self._session.post(
                        self._endpoint, json=payload, timeout=self._timeout
                    )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = BackendProtocolError(
                    f"server error {response.status_code} from {self._endpoint}"
                )
                continue
            if response.status_code != 200:
                raise BackendProtocolError(
                    f"unexpected status {response.status_code} from {self._endpoint}"
                )
            return self._parse_outputs(response, len(batch))
        if isinstance(last_error, BackendProtocolError):
            raise last_error
        raise BackendConnectionError(
            f"{self._endpoint} unreachable after {self._max_attempts} attempts: {last_error}"
        )

    @staticmethod
    def _parse_outputs(response: requests.Response, expected: int) -> list[str]:
        try:
            body = response.json()
        except ValueError:
            raise BackendProtocolError("response body is not JSON") from None
        outputs = body.get("outputs") if isinstance(body, dict) else None
        if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
            raise BackendProtocolError('response must carry {"outputs": [str, ...]}')
        if len(outputs) != expected:
            raise BackendProtocolError(
                f"arity mismatch: sent {expected} inputs, got {len(outputs)} outputs"
            )
        return outputs
