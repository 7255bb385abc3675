import json

import pytest

from quadserve import MalformedPairsError, read_pairs


def test_read_tsv(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("a source\ta target\nanother\tone more\n", encoding="utf-8")
    assert read_pairs(path) == [("a source", "a target"), ("another", "one more")]


def test_read_jsonl(tmp_path):
    path = tmp_path / "pairs.jsonl"
    rows = [{"input": "in one", "target": "out one", "task": "asqp"},
            {"input": "in two", "target": "out two", "task": "aste"}]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    assert read_pairs(path) == [("in one", "out one"), ("in two", "out two")]


def test_empty_file_is_an_error(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(MalformedPairsError):
        read_pairs(path)


def test_malformed_line_reports_position(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("good\tpair\nmissing column\n", encoding="utf-8")
    with pytest.raises(MalformedPairsError, match=":2"):
        read_pairs(path)
    path = tmp_path / "pairs.jsonl"
    path.write_text('{"input": "x"}\n', encoding="utf-8")
    with pytest.raises(MalformedPairsError):
        read_pairs(path)


def test_unknown_format(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("a\tb\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_pairs(path, fmt="csv")
