#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the command-line front end and its exit codes.
"""

import json

import pytest

from src.common.errors import NumericError
from src.data.dataset import save_dataset
from src.main import main
from src.retrieval.knowledge_base import KnowledgeBase, KnowledgeEntry
from src.text.vocabulary import PAD

SMALL_MODEL = [
    "--seq-len", "6", "--embed-dim", "8", "--window", "2", "--filters", "4",
    "--blocks", "1", "--epochs", "2", "--batch-size", "2",
]


@pytest.fixture
def workspace(tmp_path, tiny_kb, tiny_triples):
    """Knowledge base, triples and index on disk."""
    paths = {
        "kb": tmp_path / "kb.jsonl",
        "train": tmp_path / "train.jsonl",
        "index": tmp_path / "index.json",
        "model": tmp_path / "model.ckpt",
    }
    tiny_kb.save(str(paths["kb"]))
    save_dataset(tiny_triples, str(paths["train"]))
    assert main(["index", "--kb", str(paths["kb"]), "--out", str(paths["index"])]) == 0
    return {name: str(path) for name, path in paths.items()}


def _train(ws, *extra, out=None):
    return main([
        "--seed", "5", "train", "--variant", "atcnn1", "--kb", ws["kb"], "--train", ws["train"],
        "--valid", ws["train"], "--out", out or ws["model"],
    ] + SMALL_MODEL + list(extra))


@pytest.fixture
def trained(workspace):
    assert _train(workspace) == 0
    return workspace


def test_synth_writes_corpus_and_splits(tmp_path, capsys):
    out_dir = tmp_path / "synth"
    code = main(["--seed", "3", "synth", "--entries", "12", "--queries", "10", "--out-dir", str(out_dir)])
    assert code == 0
    for name in ("kb.jsonl", "dataset.jsonl", "train.jsonl", "valid.jsonl", "test.jsonl"):
        assert (out_dir / name).exists()
    assert "Splits: train 6, valid 2, test 2" in capsys.readouterr().out


def test_index_command(tmp_path, workspace, capsys):
    again = tmp_path / "again.json"
    assert main(["index", "--kb", workspace["kb"], "--out", str(again)]) == 0
    assert "Indexed 4 documents" in capsys.readouterr().out
    assert again.read_bytes() == open(workspace["index"], "rb").read()

    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    assert main(["index", "--kb", str(empty), "--out", str(tmp_path / "e.json")]) == 0
    assert "Indexed 0 documents" in capsys.readouterr().out


def test_index_exit_codes(tmp_path, capsys):
    dup = tmp_path / "dup.jsonl"
    dup.write_text(
        '{"id": "same", "title": "a", "answer": "b"}\n{"id": "same", "title": "c", "answer": "d"}\n',
        encoding="utf-8",
    )
    assert main(["index", "--kb", str(dup), "--out", str(tmp_path / "i.json")]) == 2
    assert "same" in capsys.readouterr().err
    assert main(["index", "--kb", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path / "i.json")]) == 1


def test_train_writes_outputs_deterministically(tmp_path, capsys, trained):
    out = capsys.readouterr()
    assert "model.variant=atcnn1" in out.err
    assert "train.max_epochs=2" in out.err
    assert "Checkpoint:" in out.out

    history = json.loads(open(trained["model"] + ".history.json", encoding="utf-8").read())
    assert [record["epoch"] for record in history] == [1, 2]
    assert open(trained["model"] + ".vocab.tsv", encoding="utf-8").readline().startswith(PAD)

    second = str(tmp_path / "second.ckpt")
    assert _train(trained, out=second) == 0
    assert open(second, "rb").read() == open(trained["model"], "rb").read()


def test_train_exit_codes(tmp_path, workspace, monkeypatch, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"query": "q", "kb_id": "nowhere", "label": 1}\n', encoding="utf-8")
    args = ["train", "--kb", workspace["kb"], "--valid", workspace["train"], "--out", str(tmp_path / "m.ckpt")]
    assert main(args + ["--train", str(bad)]) == 2
    assert "nowhere" in capsys.readouterr().err
    assert main(args + ["--train", str(tmp_path / "missing.jsonl")]) == 1

    def broken(*a, **kw):
        raise NumericError("loss is not finite")

    monkeypatch.setattr("src.train.trainer.gradients", broken)
    assert main(args + ["--train", workspace["train"]] + SMALL_MODEL) == 3
    assert "epoch 1" in capsys.readouterr().err


def test_train_reads_config_file(tmp_path, workspace, capsys):
    config = tmp_path / "train.conf"
    config.write_text("# small run\nepochs=1\nfilters=3\npos-weight=auto\n", encoding="utf-8")
    args = [
        "--config", str(config), "train", "--kb", workspace["kb"], "--train", workspace["train"],
        "--valid", workspace["train"], "--out", str(tmp_path / "m.ckpt"), "--seq-len", "6", "--embed-dim", "8",
    ]
    assert main(args) == 0
    err = capsys.readouterr().err
    assert "train.max_epochs=1" in err
    assert "model.filters=3" in err
    assert "train.pos_weight=0.6666666666666666" in err

    config.write_text("colour=red\n", encoding="utf-8")
    assert main(args) == 2


def test_eval_fixed_threshold_and_baseline(tmp_path, trained, capsys):
    capsys.readouterr()
    base = ["eval", "--model", trained["model"], "--kb", trained["kb"], "--index", trained["index"],
            "--test", trained["train"]]
    assert main(base + ["--threshold", "1.0"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[1].split() == ["ATCNN1", "1.00", "0.000", "0.000", "0.000"]

    report = tmp_path / "report.json"
    assert main(base + ["--baseline", "word-average", "--step", "0.1", "--json-out", str(report)]) == 0
    out = capsys.readouterr().out
    assert "WordAverage" in out
    data = json.loads(report.read_text(encoding="utf-8"))
    assert [r["method"] for r in data] == ["ATCNN1", "WordAverage"]
    assert len(data[0]["rows"]) == 11

    assert main(base + ["--threshold", "high"]) == 2
    assert main(base + ["--threshold", "1.5"]) == 2


def test_eval_rejects_index_of_another_knowledge_base(tmp_path, trained, capsys):
    other_kb = tmp_path / "other.jsonl"
    KnowledgeBase([KnowledgeEntry("kb1", "something else", "entirely")]).save(str(other_kb))
    other_index = tmp_path / "other.json"
    assert main(["index", "--kb", str(other_kb), "--out", str(other_index)]) == 0
    capsys.readouterr()
    code = main(["eval", "--model", trained["model"], "--kb", trained["kb"], "--index", str(other_index),
                 "--test", trained["train"]])
    assert code == 2
    assert "vocabulary hash mismatch" in capsys.readouterr().err


def test_query_command(trained, capsys):
    capsys.readouterr()
    base = ["query", "--model", trained["model"], "--kb", trained["kb"], "--index", trained["index"]]
    assert main(base + ["--threshold", "0", "cancel", "my", "order"]) == 0
    out = capsys.readouterr().out
    assert "kb1" in out
    assert "Answer (" in out

    assert main(base + ["--threshold", "1", "cancel", "my", "order"]) == 0
    assert "no confident answer" in capsys.readouterr().out

    assert main(base + ["   "]) == 2
    assert "usage" in capsys.readouterr().err


def test_gradcheck_command(monkeypatch, capsys):
    assert main(["gradcheck", "--variant", "tcnn", "--batches", "1", "--max-entries", "4"]) == 0
    out = capsys.readouterr().out
    assert "[tcnn]" in out
    assert "All gradients within" in out

    monkeypatch.setattr("src.main.check_gradients", lambda *a, **kw: {"embeddings": 1.0})
    assert main(["gradcheck", "--variant", "atcnn2"]) == 3
    assert "atcnn2:embeddings" in capsys.readouterr().err


def test_bench_command(trained, capsys):
    capsys.readouterr()
    assert main(["bench", "--model", trained["model"], "--repetitions", "1", "--probes", "2"]) == 0
    assert "ATCNN1 per-triple latency" in capsys.readouterr().out
    assert main(["bench", "--model", trained["model"], "--repetitions", "1", "--kb", trained["kb"]]) == 0
    assert main(["bench", "--model", trained["model"], "--repetitions", "0"]) == 2


def test_usage_errors_exit_with_two():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["train", "--variant", "bcnn"])
    assert info.value.code == 2
