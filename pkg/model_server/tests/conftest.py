"""Fixtures: a toy ASQP corpus and a tiny offline checkpoint.

The toy corpus is written in the toolkit's public JSONL schema and turned
into training pairs by shelling out to the toolkit CLI, so this package
touches the primary component only through its external interfaces.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from quadserve import init_checkpoint, read_pairs

ASPECT_CATEGORIES = {
    "pizza": "food quality",
    "pasta": "food quality",
    "soup": "food quality",
    "waiter": "service general",
    "staff": "service general",
    "decor": "ambience general",
    "music": "ambience general",
    "tea": "drinks quality",
}

OPINION_POLARITIES = [
    ("tasty", "positive"),
    ("bland", "negative"),
    ("fine", "neutral"),
]


def toy_examples() -> list[dict]:
    examples = []
    for aspect, category in ASPECT_CATEGORIES.items():
        for opinion, polarity in OPINION_POLARITIES:
            examples.append({
                "sentence": f"the {aspect} is {opinion}",
                "quads": [{
                    "category": category,
                    "aspect": aspect,
                    "opinion": opinion,
                    "polarity": polarity,
                }],
                "task": "asqp",
            })
    return examples


def write_jsonl(rows: list[dict], path: Path) -> Path:
    path.write_text(
        "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows),
        encoding="utf-8",
    )
    return path


def run_toolkit(*argv: str) -> subprocess.CompletedProcess:
    result = subprocess.run(
        [sys.executable, "-m", "sentiquad", *argv],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    return result


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """Dev examples JSONL, a <=200-line training pairs TSV, and a vocab file."""
    root = tmp_path_factory.mktemp("corpus")
    distinct = toy_examples()
    dev_path = write_jsonl(distinct, root / "dev.jsonl")
    train_path = write_jsonl(distinct * 8, root / "train.jsonl")  # 192 lines
    vocab_path = root / "vocab.txt"
    vocab_path.write_text(
        "\n".join(sorted({ex["quads"][0]["category"] for ex in distinct})) + "\n",
        encoding="utf-8",
    )
    pairs_path = root / "pairs.tsv"
    run_toolkit("build-targets", "--in", str(train_path), "--out", str(pairs_path),
                "--vocab", str(vocab_path))
    assert len(pairs_path.read_text().splitlines()) == 192
    return {
        "dev": dev_path,
        "train": train_path,
        "pairs": pairs_path,
        "vocab": vocab_path,
    }


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory, toy_corpus):
    corpus = [text for pair in read_pairs(toy_corpus["pairs"]) for text in pair]
    return init_checkpoint(tmp_path_factory.mktemp("ckpt") / "tiny", corpus, seed=0)
