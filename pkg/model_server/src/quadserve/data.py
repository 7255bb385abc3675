"""Reading (input, target) training pairs.

Accepts the two formats produced by the toolkit's ``build-targets``
command: two-column TSV and JSONL with "input"/"target" keys. The format
is inferred from the file extension unless given explicitly.
"""

from __future__ import annotations

import json
from pathlib import Path


class MalformedPairsError(Exception):
    """The pairs file is empty or a line does not hold an (input, target) pair."""


def read_pairs(path: str | Path, fmt: str | None = None) -> list[tuple[str, str]]:
    path = Path(path)
    if fmt is None:
        fmt = "jsonl" if path.suffix == ".jsonl" else "tsv"
    if fmt not in ("tsv", "jsonl"):
        raise ValueError(f"unknown pairs format: {fmt!r}")
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if fmt == "jsonl":
                try:
                    obj = json.loads(line)
                    pairs.append((obj["input"], obj["target"]))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise MalformedPairsError(f"{path}:{line_no}: {exc}") from None
            else:
                columns = line.split("\t")
                if len(columns) < 2 or not columns[0] or not columns[1]:
                    raise MalformedPairsError(
                        f"{path}:{line_no}: expected two tab-separated columns"
                    )
                pairs.append((columns[0], columns[1]))
    if not pairs:
        raise MalformedPairsError(f"{path}: no training pairs found")
    return pairs
