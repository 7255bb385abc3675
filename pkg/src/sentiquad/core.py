"""Core domain types shared by every stage of the quad-prediction pipeline.

A sentiment quad is a (category, aspect term, opinion term, polarity) tuple.
Aspect terms may be implicit, which is represented by ``None`` here; the
surface form ("it") is purely a rendering concern and lives in the
linearizer. All text fields are stored in canonical form (lowercase,
whitespace-collapsed), which makes quad equality and exact-match scoring
well defined.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator


class SentiquadError(Exception):
    """Base class for errors raised by this package."""


class UnknownCategoryError(SentiquadError):
    """A category label is not part of the closed category vocabulary."""


def canonicalize(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace runs.

    Total and idempotent; the empty string maps to itself.
    """
    return " ".join(text.split()).lower()


class Polarity(enum.Enum):
    """The three sentiment classes; values are the on-disk labels."""

    POS = "positive"
    NEU = "neutral"
    NEG = "negative"

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "Polarity":
        try:
            return cls(canonicalize(label))
        except ValueError:
            raise ValueError(f"unknown polarity label: {label!r}") from None


class Task(enum.Enum):
    """Which tuple the pipeline predicts.

    ASQP predicts full quads. ASTE drops the category (rendered as the
    pronoun "it") and forbids implicit aspects. TASD drops the opinion
    term (rendered as the polarity word).
    """

    ASQP = "asqp"
    ASTE = "aste"
    TASD = "tasd"

    @property
    def label(self) -> str:
        return self.value

    @property
    def token(self) -> str:
        """Uppercase task identifier appended to inputs in transfer mode."""
        return self.name

    @classmethod
    def from_label(cls, label: str) -> "Task":
        try:
            return cls(canonicalize(label))
        except ValueError:
            raise ValueError(f"unknown task label: {label!r}") from None


SPLITS = ("train", "dev", "test")


class CategoryVocab:
    """Ordered, closed set of aspect category names.

    Order is significant: the 1-based position of a category defines the
    index used by the symbolic category rendering (``AC1``, ``AC2``, ...).
    Entries are canonicalized; duplicates and empty entries are rejected.
    """

    def __init__(self, categories: Iterable[str]):
        entries: list[str] = []
        seen: set[str] = set()
        for raw in categories:
            name = canonicalize(raw)
            if not name:
                raise ValueError("category names must be non-empty")
            if name in seen:
                raise ValueError(f"duplicate category: {name!r}")
            seen.add(name)
            entries.append(name)
        if not entries:
            raise ValueError("category vocabulary must not be empty")
        self._entries = tuple(entries)
        self._index = {name: i for i, name in enumerate(self._entries)}

    @classmethod
    def from_file(cls, path: str | Path) -> "CategoryVocab":
        """Load a vocabulary file: one category per line, order significant."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line for line in lines if line.strip())

    @classmethod
    def from_examples(cls, examples: Iterable["Example"]) -> "CategoryVocab":
        """Collect categories in first-appearance order over a dataset."""
        ordered: list[str] = []
        seen: set[str] = set()
        for ex in examples:
            for quad in ex.quads:
                if quad.category is not None and quad.category not in seen:
                    seen.add(quad.category)
                    ordered.append(quad.category)
        return cls(ordered)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self._entries) + "\n", encoding="utf-8")

    @property
    def categories(self) -> tuple[str, ...]:
        return self._entries

    def index(self, category: str) -> int:
        """0-based position of a category; raises UnknownCategoryError."""
        name = canonicalize(category)
        try:
            return self._index[name]
        except KeyError:
            raise UnknownCategoryError(f"category not in vocabulary: {name!r}") from None

    def symbol(self, category: str) -> str:
        """Symbolic token for a category, e.g. the 3rd entry maps to "AC3"."""
        return f"AC{self.index(category) + 1}"

    def at_index(self, position: int) -> str:
        """Category at a 1-based symbolic index; raises UnknownCategoryError."""
        if not 1 <= position <= len(self._entries):
            raise UnknownCategoryError(f"no category at index {position}")
        return self._entries[position - 1]

    def __contains__(self, category: object) -> bool:
        return isinstance(category, str) and canonicalize(category) in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, i: int) -> str:
        return self._entries[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CategoryVocab) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"CategoryVocab({list(self._entries)!r})"


@dataclass(frozen=True)
class SentimentQuad:
    """One (category, aspect, opinion, polarity) annotation.

    ``aspect=None`` means the aspect is implicit. ``category`` and
    ``opinion`` are nullable so that the reduced tuples of the TASD and
    ASTE tasks share this type. Text fields are canonicalized on
    construction, so two quads differing only in case or stray whitespace
    compare (and hash) equal.
    """

    category: str | None
    aspect: str | None
    opinion: str | None
    polarity: Polarity

    def __post_init__(self) -> None:
        for name in ("category", "aspect", "opinion"):
            value = getattr(self, name)
            if value is None:
                continue
            if not isinstance(value, str):
                raise TypeError(f"{name} must be a string or None")
            value = canonicalize(value)
            if not value:
                raise ValueError(f"{name} must be non-empty when present")
            object.__setattr__(self, name, value)
        if isinstance(self.polarity, str):
            object.__setattr__(self, "polarity", Polarity.from_label(self.polarity))
        elif not isinstance(self.polarity, Polarity):
            raise TypeError("polarity must be a Polarity or its label")

    def key(self) -> tuple:
        """Hashable element tuple used for exact-match comparison."""
        return (self.category, self.aspect, self.opinion, self.polarity)


def _reduce_quad(quad: SentimentQuad, task: Task) -> SentimentQuad:
    """Project a quad onto the elements a task actually predicts."""
    if task is Task.ASQP:
        if quad.category is None:
            raise ValueError("ASQP quads require a category")
        if quad.opinion is None:
            raise ValueError("ASQP quads require an opinion term")
        return quad
    if task is Task.ASTE:
        if quad.aspect is None:
            raise ValueError("ASTE quads require an explicit aspect term")
        if quad.opinion is None:
            raise ValueError("ASTE quads require an opinion term")
        return replace(quad, category=None) if quad.category is not None else quad
    # TASD
    if quad.category is None:
        raise ValueError("TASD quads require a category")
    return replace(quad, opinion=None) if quad.opinion is not None else quad


@dataclass(frozen=True)
class Example:
    """A sentence paired with its gold quad set and task tag.

    Quads are deduplicated while preserving annotation order (targets are
    rendered in gold order) and reduced to the elements of ``task``.
    """

    sentence: str
    quads: tuple[SentimentQuad, ...]
    task: Task = Task.ASQP
    split: str | None = None

    def __post_init__(self) -> None:
        sentence = canonicalize(self.sentence)
        if not sentence:
            raise ValueError("sentence must be non-empty")
        object.__setattr__(self, "sentence", sentence)
        if isinstance(self.task, str):
            object.__setattr__(self, "task", Task.from_label(self.task))
        reduced = [_reduce_quad(q, self.task) for q in self.quads]
        object.__setattr__(self, "quads", tuple(dict.fromkeys(reduced)))
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")

    def as_task(self, task: Task) -> "Example":
        """Re-tag the example for another task, reducing quads accordingly."""
        if task is self.task:
            return self
        return Example(self.sentence, self.quads, task=task, split=self.split)

    def quad_keys(self) -> set[tuple]:
        return {q.key() for q in self.quads}
