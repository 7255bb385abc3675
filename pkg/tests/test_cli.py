import json
import random
import subprocess
import sys

import pytest

from sentiquad import Task, write_examples
from sentiquad.cli import build_parser, main

from synthdata import make_dataset, make_vocab


@pytest.fixture
def workspace(tmp_path):
    rng = random.Random(73)
    vocab = make_vocab(rng)
    examples = make_dataset(rng, vocab, 50)
    data = tmp_path / "gold.jsonl"
    write_examples(examples, data)
    vocab_path = tmp_path / "vocab.txt"
    vocab.to_file(vocab_path)
    return tmp_path, data, vocab_path, examples


def run(argv, capsys):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_help_exits_zero():
    parser = build_parser()
    subcommands = parser._subparsers._group_actions[0].choices
    for name in subcommands:
        with pytest.raises(SystemExit) as exc:
            parser.parse_args([name, "--help"])
        assert exc.value.code == 0


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["no-such-command"])
    assert exc.value.code == 2


def test_data_error_exits_one(capsys, tmp_path):
    code, _, err = run(["e2e", "--data", tmp_path / "missing.jsonl"], capsys)
    assert code == 1
    assert "error:" in err


def test_build_targets_and_parse(workspace, capsys, tmp_path):
    _, data, vocab_path, examples = workspace
    pairs = tmp_path / "pairs.tsv"
    code, _, err = run(
        ["build-targets", "--in", data, "--out", pairs, "--vocab", vocab_path],
        capsys,
    )
    assert code == 0
    lines = pairs.read_text(encoding="utf-8").splitlines()
    assert len(lines) == len(examples)
    source, target = lines[0].split("\t")
    assert source == examples[0].sentence

    generations = tmp_path / "gen.txt"
    generations.write_text(
        "\n".join(line.split("\t")[1] for line in lines) + "\n", encoding="utf-8"
    )
    parsed_out = tmp_path / "parsed.jsonl"
    code, _, _ = run(
        ["parse", "--in", generations, "--out", parsed_out,
         "--task", "asqp", "--vocab", vocab_path],
        capsys,
    )
    assert code == 0
    rows = [json.loads(line) for line in parsed_out.read_text().splitlines()]
    assert len(rows) == len(examples)
    assert all(not row["failures"] for row in rows)
    assert sum(len(row["quads"]) for row in rows) == \
        sum(len(ex.quads) for ex in examples)


def test_build_targets_jsonl_with_suffix(workspace, capsys, tmp_path):
    _, data, vocab_path, examples = workspace
    pairs = tmp_path / "pairs.jsonl"
    code, _, _ = run(
        ["build-targets", "--in", data, "--out", pairs, "--vocab", vocab_path,
         "--format", "jsonl", "--transfer-suffix"],
        capsys,
    )
    assert code == 0
    rows = [json.loads(line) for line in pairs.read_text().splitlines()]
    assert all(row["input"].endswith(" ASQP") for row in rows)
    assert all(row["task"] == "asqp" for row in rows)


def test_e2e_oracle_perfect(workspace, capsys, tmp_path):
    _, data, vocab_path, _ = workspace
    report_path = tmp_path / "report.json"
    code, _, err = run(
        ["e2e", "--data", data, "--backend", "oracle", "--vocab", vocab_path,
         "--out", report_path],
        capsys,
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["precision"] == report["recall"] == report["f1"] == 1.0
    assert report["parse_failures"] == 0
    assert "f1=1.0000" in err


def test_e2e_reports_are_byte_identical(workspace, capsys, tmp_path):
    _, data, vocab_path, _ = workspace
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for out in (out1, out2):
        code, _, _ = run(
            ["e2e", "--data", data, "--backend", "perturb", "--rho", "0.3",
             "--seed", "17", "--vocab", vocab_path, "--jobs", "2", "--out", out],
            capsys,
        )
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_e2e_perturb_scores_below_oracle(workspace, capsys, tmp_path):
    _, data, vocab_path, _ = workspace
    out = tmp_path / "report.json"
    code, _, _ = run(
        ["e2e", "--data", data, "--backend", "perturb", "--rho", "0.5",
         "--seed", "3", "--vocab", vocab_path, "--out", out],
        capsys,
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["f1"] < 1.0


def test_evaluate_identical_files(workspace, capsys):
    _, data, _, _ = workspace
    code, out, _ = run(["evaluate", "--pred", data, "--gold", data], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["f1"] == 1.0


def test_stats_table(workspace, capsys):
    _, data, _, examples = workspace
    code, out, err = run(["stats", "--train", data], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["splits"]["train"]["n_sentences"] == len(examples)
    assert "#S" in err and "Train" in err


def test_split_and_sample(workspace, capsys, tmp_path):
    _, data, _, examples = workspace
    train_out, dev_out = tmp_path / "train.jsonl", tmp_path / "dev.jsonl"
    code, _, _ = run(
        ["split", "--in", data, "--train-out", train_out, "--dev-out", dev_out,
         "--dev-ratio", "0.2", "--seed", "5"],
        capsys,
    )
    assert code == 0
    assert len(train_out.read_text().splitlines()) == 40
    assert len(dev_out.read_text().splitlines()) == 10

    sampled = tmp_path / "sampled.jsonl"
    code, _, _ = run(
        ["sample", "--in", data, "--out", sampled, "--count", "7", "--seed", "5"],
        capsys,
    )
    assert code == 0
    assert len(sampled.read_text().splitlines()) == 7

    code, _, err = run(["sample", "--in", data, "--out", sampled], capsys)
    assert code == 1
    assert "ratio" in err


def test_import_merge_pipeline(capsys, tmp_path):
    raw = tmp_path / "aste.txt"
    raw.write_text("The pasta is over-cooked!####"
                   "[['pasta', 'over-cooked', 'negative']]\n", encoding="utf-8")
    aste = tmp_path / "aste.jsonl"
    code, _, _ = run(["import", "--in", raw, "--out", aste, "--task", "aste"],
                     capsys)
    assert code == 0

    raw2 = tmp_path / "tasd.txt"
    raw2.write_text("The pasta is over-cooked!####"
                    "[['food quality', 'pasta', 'negative']]\n", encoding="utf-8")
    tasd = tmp_path / "tasd.jsonl"
    code, _, _ = run(["import", "--in", raw2, "--out", tasd, "--task", "tasd"],
                     capsys)
    assert code == 0

    merged = tmp_path / "merged.jsonl"
    conflicts = tmp_path / "conflicts.jsonl"
    code, _, err = run(
        ["merge", "--opinion", aste, "--category", tasd, "--out", merged,
         "--conflicts-out", conflicts],
        capsys,
    )
    assert code == 0
    row = json.loads(merged.read_text().splitlines()[0])
    assert row["quads"][0]["category"] == "food quality"
    assert row["quads"][0]["opinion"] == "over-cooked"
    assert conflicts.read_text() == ""


def test_transfer_mix(workspace, capsys, tmp_path):
    tmp, data, vocab_path, _ = workspace
    rng = random.Random(79)
    vocab = make_vocab(rng)
    aste = tmp / "aste.jsonl"
    write_examples(make_dataset(rng, vocab, 8, task=Task.ASTE), aste)
    out = tmp_path / "mix.jsonl"
    code, _, _ = run(
        ["transfer-mix", "--data", data, "--data", aste, "--out", out,
         "--vocab", vocab_path, "--format", "jsonl", "--seed", "2"],
        capsys,
    )
    assert code == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 58
    for row in rows:
        assert row["input"].endswith(" " + Task.from_label(row["task"]).token)


def test_analyze_errors_smoke(workspace, capsys, tmp_path):
    _, data, vocab_path, examples = workspace
    # corrupt one generation so the report has content
    from sentiquad import build_target, CategoryVocab
    vocab = CategoryVocab.from_file(vocab_path)
    targets = [build_target(ex, vocab=vocab).text for ex in examples]
    targets[0] = "garbage that will not parse"
    gen = tmp_path / "gen.txt"
    gen.write_text("\n".join(targets) + "\n", encoding="utf-8")
    out = tmp_path / "errors.json"
    code, _, _ = run(
        ["analyze-errors", "--gold", data, "--generated", gen,
         "--vocab", vocab_path, "--out", out],
        capsys,
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["score_f1"] < 1.0
    assert report["n_examples"] == len(examples)
    assert len(report["per_example"]) == 1
    assert report["per_example"][0]["failures"]


def test_derive_lexicon_flag(capsys, tmp_path):
    from sentiquad import Example, Polarity, SentimentQuad

    def ex(aspect, opinion, polarity):
        return Example(f"the {aspect} was {opinion}", (
            SentimentQuad("food quality", aspect, opinion, polarity),
        ))

    examples = [ex("pasta", "lovely", Polarity.POS),
                ex("bread", "lovely", Polarity.POS),
                ex("soup", "odd", Polarity.NEU),
                ex("tea", "awful", Polarity.NEG)]
    data = tmp_path / "gold.jsonl"
    write_examples(examples, data)
    pairs = tmp_path / "pairs.tsv"
    code, _, _ = run(
        ["build-targets", "--in", data, "--out", pairs, "--derive-lexicon"],
        capsys,
    )
    assert code == 0
    first = pairs.read_text().splitlines()[0].split("\t")[1]
    assert " is lovely because " in first

    out = tmp_path / "report.json"
    code, _, _ = run(
        ["e2e", "--data", data, "--backend", "oracle", "--derive-lexicon",
         "--out", out],
        capsys,
    )
    assert code == 0
    assert json.loads(out.read_text())["f1"] == 1.0


def test_config_file_defaults(workspace, capsys, tmp_path):
    _, data, vocab_path, _ = workspace
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "data": str(data), "vocab": str(vocab_path), "backend": "perturb",
        "rho": 1.0, "seed": 4,
    }), encoding="utf-8")
    out = tmp_path / "report.json"
    code, _, _ = run(["--config", config, "e2e", "--out", out], capsys)
    assert code == 0
    assert json.loads(out.read_text())["f1"] == 0.0
    # explicit flag beats the config value
    code, _, _ = run(
        ["--config", config, "e2e", "--backend", "oracle", "--out", out], capsys
    )
    assert code == 0
    assert json.loads(out.read_text())["f1"] == 1.0


def test_module_entry_point(workspace, tmp_path):
    _, data, vocab_path, _ = workspace
    result = subprocess.run(
        [sys.executable, "-m", "sentiquad", "e2e", "--data", str(data),
         "--vocab", str(vocab_path)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    assert json.loads(result.stdout)["f1"] == 1.0
