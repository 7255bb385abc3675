"""Dataset ingestion, merging, splitting, statistics, sampling, and mixing.

The canonical on-disk format is JSONL, one example per line:

    {"sentence": str,
     "quads": [{"category": str|null, "aspect": str|null,
                "opinion": str|null, "polarity": "positive"|"neutral"|"negative"}],
     "task": "asqp"|"aste"|"tasd"}

plus an optional "split" key. A delimited importer handles the
"<sentence>####<tuple list>" line format common in released research data;
tuple element order varies across releases, so it is configuration.
"""

from __future__ import annotations

import ast
import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import (
    CategoryVocab,
    Example,
    Polarity,
    SentimentQuad,
    SentiquadError,
    Task,
    canonicalize,
)
from .linearize import ProjectionMode, build_input, build_target


class DatasetFormatError(SentiquadError):
    """A dataset file violates the expected schema; carries the line number."""

    def __init__(self, path: str | Path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class MissingPolarityError(SentiquadError):
    """A polarity class has no occurrences when deriving a lexicon."""


def _quad_from_json(obj: dict, path: str | Path, line_no: int) -> SentimentQuad:
    for field in ("category", "aspect", "opinion", "polarity"):
        if field not in obj:
            raise DatasetFormatError(path, line_no, f"quad missing field {field!r}")
    polarity = obj["polarity"]
    if not isinstance(polarity, str):
        raise DatasetFormatError(path, line_no, "polarity must be a string label")
    try:
        return SentimentQuad(
            category=obj["category"],
            aspect=obj["aspect"],
            opinion=obj["opinion"],
            polarity=Polarity.from_label(polarity),
        )
    except (TypeError, ValueError) as exc:
        raise DatasetFormatError(path, line_no, str(exc)) from None


def read_examples(path: str | Path) -> list[Example]:
    """Read the canonical JSONL format; raises DatasetFormatError with line numbers."""
    examples = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(path, line_no, f"invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise DatasetFormatError(path, line_no, "line must be a JSON object")
            for field in ("sentence", "quads", "task"):
                if field not in obj:
                    raise DatasetFormatError(path, line_no, f"missing field {field!r}")
            if not isinstance(obj["quads"], list):
                raise DatasetFormatError(path, line_no, "quads must be a list")
            quads = []
            for q in obj["quads"]:
                if not isinstance(q, dict):
                    raise DatasetFormatError(path, line_no, "each quad must be a JSON object")
                quads.append(_quad_from_json(q, path, line_no))
            try:
                examples.append(
                    Example(
                        sentence=obj["sentence"],
                        quads=tuple(quads),
                        task=Task.from_label(obj["task"]),
                        split=obj.get("split"),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise DatasetFormatError(path, line_no, str(exc)) from None
    return examples


def example_to_json(example: Example) -> dict:
    obj = {
        "sentence": example.sentence,
        "quads": [
            {
                "category": q.category,
                "aspect": q.aspect,
                "opinion": q.opinion,
                "polarity": q.polarity.label,
            }
            for q in example.quads
        ],
        "task": example.task.label,
    }
    if example.split is not None:
        obj["split"] = example.split
    return obj


def write_examples(examples: Iterable[Example], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(json.dumps(example_to_json(example), ensure_ascii=False))
            handle.write("\n")


# Tuple element orders for the delimited importer, per task.
DEFAULT_ORDERS = {Task.ASQP: "caop", Task.ASTE: "aop", Task.TASD: "cap"}
_ORDER_FIELDS = {"c": "category", "a": "aspect", "o": "opinion", "p": "polarity"}


def _validate_order(order: str, task: Task) -> str:
    if sorted(order) != sorted(DEFAULT_ORDERS[task]):
        raise ValueError(
            f"order for {task.token} must be a permutation of {DEFAULT_ORDERS[task]!r}"
        )
    return order


def import_delimited(
    path: str | Path, task: Task, order: str | None = None
) -> list[Example]:
    """Import "<sentence>####<list of element tuples>" lines.

    ``order`` gives the tuple element order as a permutation of "caop"
    letters (restricted to the task's elements); aspect "null" maps to an
    implicit aspect.
    """
    order = _validate_order(order or DEFAULT_ORDERS[task], task)
    examples = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            sentence, sep, payload = line.partition("####")
            if not sep:
                raise DatasetFormatError(path, line_no, "missing '####' delimiter")
            try:
                tuples = ast.literal_eval(payload.strip())
            except (ValueError, SyntaxError) as exc:
                raise DatasetFormatError(path, line_no, f"unparseable tuple list: {exc}") from None
            if not isinstance(tuples, (list, tuple)):
                raise DatasetFormatError(path, line_no, "expected a list of tuples")
            quads = []
            for item in tuples:
                if not isinstance(item, (list, tuple)) or len(item) != len(order):
                    raise DatasetFormatError(
                        path, line_no,
                        f"expected {len(order)}-element tuples for {task.token}",
                    )
                fields: dict = {"category": None, "aspect": None, "opinion": None}
                for letter, value in zip(order, item):
                    if not isinstance(value, str):
                        raise DatasetFormatError(path, line_no, "tuple elements must be strings")
                    fields[_ORDER_FIELDS[letter]] = value
                if fields["aspect"] is not None and canonicalize(fields["aspect"]) == "null":
                    fields["aspect"] = None
                try:
                    polarity = Polarity.from_label(fields.pop("polarity"))
                    quads.append(SentimentQuad(polarity=polarity, **fields))
                except (TypeError, ValueError, KeyError) as exc:
                    raise DatasetFormatError(path, line_no, str(exc)) from None
            try:
                examples.append(Example(sentence=sentence, quads=tuple(quads), task=task))
            except (TypeError, ValueError) as exc:
                raise DatasetFormatError(path, line_no, str(exc)) from None
    return examples


@dataclass(frozen=True)
class MergeConflict:
    """An aspect anchor whose join admits more than one (category, opinion) pairing."""

    sentence: str
    aspect: str | None
    polarity: Polarity
    categories: tuple[str, ...]
    opinions: tuple[str, ...]

    @property
    def combinations(self) -> tuple[tuple[str, str], ...]:
        return tuple(product(self.categories, self.opinions))


def merge_annotations(
    src_opinion: Sequence[Example],
    src_category: Sequence[Example],
) -> tuple[list[Example], list[MergeConflict]]:
    """Join (aspect, opinion, polarity) and (category, aspect, polarity) sources.

    Tuples are joined per sentence on the (aspect, polarity) anchor. A
    unique pairing emits a full quad; an anchor with multiple candidate
    pairings emits a MergeConflict and no quad. Sentences present in only
    one source contribute nothing.
    """
    by_sentence: dict[str, list[SentimentQuad]] = {}
    for ex in src_category:
        by_sentence.setdefault(ex.sentence, []).extend(ex.quads)

    merged: list[Example] = []
    conflicts: list[MergeConflict] = []
    for ex in src_opinion:
        cat_quads = by_sentence.get(ex.sentence)
        if cat_quads is None:
            continue
        anchors: dict[tuple, list[str]] = {}
        for q in ex.quads:
            anchors.setdefault((q.aspect, q.polarity), []).append(q.opinion)
        quads = []
        for (aspect, polarity), opinions in anchors.items():
            categories = [
                q.category for q in cat_quads
                if q.aspect == aspect and q.polarity == polarity
            ]
            if not categories:
                continue
            unique_opinions = list(dict.fromkeys(opinions))
            unique_categories = list(dict.fromkeys(categories))
            if len(unique_opinions) == 1 and len(unique_categories) == 1:
                quads.append(
                    SentimentQuad(
                        category=unique_categories[0],
                        aspect=aspect,
                        opinion=unique_opinions[0],
                        polarity=polarity,
                    )
                )
            else:
                conflicts.append(
                    MergeConflict(
                        sentence=ex.sentence,
                        aspect=aspect,
                        polarity=polarity,
                        categories=tuple(unique_categories),
                        opinions=tuple(unique_opinions),
                    )
                )
        if quads:
            merged.append(
                Example(ex.sentence, tuple(quads), task=Task.ASQP, split=ex.split)
            )
    return merged, conflicts


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def split_train_dev(
    examples: Sequence[Example], dev_ratio: float, seed: int
) -> tuple[list[Example], list[Example]]:
    """Seeded shuffle, then carve off round(dev_ratio * n) dev examples."""
    if not 0 < dev_ratio < 1:
        raise ValueError(f"dev_ratio must be in (0, 1), got {dev_ratio}")
    shuffled = list(examples)
    random.Random(seed).shuffle(shuffled)
    n_dev = _round_half_up(dev_ratio * len(shuffled))
    return shuffled[n_dev:], shuffled[:n_dev]


@dataclass(frozen=True)
class SplitStats:
    """Counts for one split: sentences and quads per polarity."""

    n_sentences: int
    n_pos: int
    n_neu: int
    n_neg: int

    @property
    def n_quads(self) -> int:
        return self.n_pos + self.n_neu + self.n_neg

    def as_dict(self) -> dict:
        return {
            "n_sentences": self.n_sentences,
            "n_pos": self.n_pos,
            "n_neu": self.n_neu,
            "n_neg": self.n_neg,
        }


@dataclass(frozen=True)
class DatasetStats:
    """Per-split dataset statistics, in input order."""

    splits: tuple[tuple[str, SplitStats], ...]

    def __getitem__(self, split: str) -> SplitStats:
        for name, stats in self.splits:
            if name == split:
                return stats
        raise KeyError(split)

    def as_dict(self) -> dict:
        return {name: stats.as_dict() for name, stats in self.splits}


def compute_stats(split_examples: Mapping[str, Sequence[Example]]) -> DatasetStats:
    rows = []
    for split, examples in split_examples.items():
        polarity_counts = Counter(
            q.polarity for ex in examples for q in ex.quads
        )
        rows.append(
            (
                split,
                SplitStats(
                    n_sentences=len(examples),
                    n_pos=polarity_counts[Polarity.POS],
                    n_neu=polarity_counts[Polarity.NEU],
                    n_neg=polarity_counts[Polarity.NEG],
                ),
            )
        )
    return DatasetStats(tuple(rows))


def sample_fraction(
    examples: Sequence[Example], ratio: float, seed: int
) -> list[Example]:
    """Seeded uniform sample without replacement of round(ratio * n) examples."""
    if not 0 < ratio <= 1:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    return sample_count(examples, _round_half_up(ratio * len(examples)), seed)


def sample_count(examples: Sequence[Example], count: int, seed: int) -> list[Example]:
    """Seeded uniform sample without replacement of exactly ``count`` examples."""
    if not 0 <= count <= len(examples):
        raise ValueError(
            f"count must be between 0 and {len(examples)}, got {count}"
        )
    return random.Random(seed).sample(list(examples), count)


def mix_tasks(
    datasets: Sequence[tuple[Sequence[Example], Task]],
    mode: ProjectionMode = ProjectionMode.NATURAL,
    vocab: CategoryVocab | None = None,
    lexicon: Mapping[Polarity, str] | None = None,
    seed: int = 0,
) -> list[tuple[str, str, Task]]:
    """Render several task datasets as suffixed (input, target, task) pairs.

    Every example is rendered under its dataset's task with the transfer
    suffix on; the pools are concatenated and shuffled with the seed.
    """
    pairs: list[tuple[str, str, Task]] = []
    for examples, task in datasets:
        for ex in examples:
            ex = ex.as_task(task)
            pairs.append(
                (
                    build_input(ex.sentence, task, transfer=True),
                    build_target(ex, mode=mode, vocab=vocab, lexicon=lexicon).text,
                    task,
                )
            )
    random.Random(seed).shuffle(pairs)
    return pairs


def derive_polarity_lexicon(
    train_examples: Iterable[Example],
) -> dict[Polarity, str]:
    """Most common co-occurring opinion term per polarity (ties: smallest)."""
    counts: dict[Polarity, Counter] = {p: Counter() for p in Polarity}
    for ex in train_examples:
        for q in ex.quads:
            if q.opinion is not None:
                counts[q.polarity][q.opinion] += 1
    lexicon = {}
    for polarity, counter in counts.items():
        if not counter:
            raise MissingPolarityError(
                f"no quads with polarity {polarity.label!r} in the training data"
            )
        best_count = max(counter.values())
        lexicon[polarity] = min(w for w, c in counter.items() if c == best_count)
    return lexicon
