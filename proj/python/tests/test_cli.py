import json
import os
import shutil
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("ABSYNTH_CLI") or shutil.which("absynth")
pytestmark = pytest.mark.skipif(not CLI or not Path(CLI).exists(), reason="absynth executable not built")


def run(*args, stdin=None):
    return subprocess.run([CLI, *map(str, args)], input=stdin, capture_output=True, text=True, timeout=240)


def test_oracle_prints_golden(root):
    r = run("oracle", "--grammar", root / "grammars/pyexpr.asdl", "--root-type", "stmt", "--format", "pyexpr",
            "--data", root / "tests/data/read_csv.jsonl")
    assert r.returncode == 0, r.stderr
    golden = (root / "tests/golden/read_csv_actions.txt").read_text().split()
    assert r.stdout.split() == golden


def test_train_parse_eval(root, tmp_path):
    grammar = ["--grammar", root / "grammars/pyexpr.asdl", "--root-type", "stmt", "--format", "pyexpr"]
    data = tmp_path / "train.jsonl"
    names = ["foo", "bar", "baz", "qux", "zap", "lim"]
    data.write_text("".join(json.dumps({"utterance": f"call the function {n}", "mr": f"{n}()"}) + "\n"
                            for n in names))
    ckpt = tmp_path / "m.json"
    log = tmp_path / "log.csv"
    r = run("train", *grammar, "--data", data, "--ckpt", ckpt, "--log", log, "--epochs", 40, "--lr", 0.005,
            "--batch-size", 2, "--seed", 1, "--embed-dim", 32, "--hidden-dim", 64, "--field-dim", 16, "--action-dim", 16,
            "--dropout", 0, "--cutoff", 1)
    assert r.returncode == 0, r.stderr
    assert log.read_text().startswith("epoch,loss,train_em")
    assert ckpt.exists()

    r = run("parse", *grammar, "--ckpt", ckpt, "--beam", 3, stdin="call the function foo\n")
    assert r.returncode == 0, r.stderr
    assert r.stdout.strip() == "foo()"

    # Tiny budget: nothing can complete.
    r = run("parse", *grammar, "--ckpt", ckpt, "--max-actions", 1, stdin="call the function foo\n")
    assert r.returncode == 0, r.stderr
    assert r.stdout.strip() == "<FAIL>"

    preds = tmp_path / "preds.txt"
    preds.write_text("foo()\nbar()\nbaz()\n<FAIL>\nzap()\nwrong()\n")
    r = run("eval", *grammar, "--data", data, "--predictions", preds)
    assert r.returncode == 0, r.stderr
    summary = json.loads(r.stdout)
    assert summary["total"] == 6 and summary["exact_match"] == pytest.approx(4 / 6)

    r = run("parse", "--grammar", root / "grammars/lambda.asdl", "--root-type", "expr", "--format", "lambda",
            "--ckpt", ckpt, stdin="x\n")
    assert r.returncode == 3


def test_usage_and_data_errors(root, tmp_path):
    assert run("train").returncode == 1
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"utterance": "a", "mr": "foo()"}\nnot json\n')
    r = run("oracle", "--grammar", root / "grammars/pyexpr.asdl", "--root-type", "stmt", "--format", "pyexpr",
            "--data", bad)
    assert r.returncode == 2
    assert "2" in r.stderr
