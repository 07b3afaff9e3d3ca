import json
import os
import subprocess
import sys

import pytest

from conftest import DATA
from wordgroup.cli import run, write_output


def _run(*argv):
    return run([str(a) for a in argv])


@pytest.fixture
def grouped_file(tmp_path):
    out = tmp_path / "g.jsonl"
    assert _run("group", "--in", DATA / "gold_groups.conllu", "--out", out, "--jobs", 1) == 0
    return out


def test_group_output(grouped_file, tmp_path):
    recs = [json.loads(l) for l in grouped_file.read_text(encoding="utf-8").splitlines()]
    assert len(recs) == 29
    assert recs[0]["rendered"] == "हॉल_में लोग बैठे_थे ।"
    stats = tmp_path / "s.tsv"
    assert _run("group", "--in", DATA / "gold_groups.conllu", "--out", tmp_path / "g2.jsonl",
                "--delimiter", "+", "--stats", stats) == 0
    assert "हॉल+में" in (tmp_path / "g2.jsonl").read_text(encoding="utf-8")
    header, row = stats.read_text(encoding="utf-8").splitlines()
    lang, words, groups, _ = row.split("\t")
    assert lang == "hin" and int(groups) < int(words)


def test_group_jobs_equivalent(tmp_path):
    # enough sentences to go through the process pool
    text = (DATA / "gold_groups.conllu").read_text(encoding="utf-8").strip() + "\n\n"
    big = tmp_path / "big.conllu"
    big.write_text(text * 10, encoding="utf-8")
    assert _run("group", "--in", big, "--out", tmp_path / "a", "--jobs", 1) == 0
    assert _run("group", "--in", big, "--out", tmp_path / "b", "--jobs", 2) == 0
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_shuffle_reproducible(grouped_file, tmp_path):
    for name in ("a", "b"):
        assert _run("shuffle", "--in", grouped_file, "--setting", "w5", "--preserve-groups",
                    "--seed", 11, "--out", tmp_path / name) == 0
    a = (tmp_path / "a").read_bytes()
    assert a == (tmp_path / "b").read_bytes()
    rec = json.loads(a.decode().splitlines()[0])
    assert sorted(rec["permuted"]) == sorted(rec["original"])
    assert rec["spec"]["setting"] == "w5" and rec["spec"]["preserve_groups"] is True
    assert _run("shuffle", "--in", grouped_file, "--seed", 12, "--out", tmp_path / "c") == 0
    assert (tmp_path / "c").read_bytes() != a


def test_chunk_and_prompt(grouped_file, tmp_path):
    assert _run("chunk", "--in", grouped_file, "--mode", "grouped", "--width", 4, "--out", tmp_path / "c.jsonl") == 0
    first = json.loads((tmp_path / "c.jsonl").read_text(encoding="utf-8").splitlines()[0])
    # groups of 2,1,2,1 words: the first chunk closes once it reaches 4 words
    assert first["chunks"] == ["हॉल में लोग बैठे थे", "।"]
    outdir = tmp_path / "prompts"
    assert _run("prompt", "--shots", DATA / "figure6_shots.jsonl", "--test", DATA / "figure6_test.jsonl",
                "--tgt-lang", "Bengali", "--out", outdir) == 0
    assert (outdir / "figure6_001.txt").read_bytes() == (DATA / "figure6_prompt.txt").read_bytes()
    assert _run("prompt", "--shots", DATA / "figure5_shots.jsonl", "--test", tmp_path / "c.jsonl",
                "--tgt-lang", "Bengali", "--out", tmp_path / "p2") == 0
    assert (tmp_path / "p2" / "hall_002.txt").read_text(encoding="utf-8").endswith(
        "Hindi: ।\nBengali: <mask>\n")


def test_simeval_builtin(grouped_file, tmp_path):
    recs = [json.loads(l) for l in grouped_file.read_text(encoding="utf-8").splitlines()]
    (tmp_path / "hin.txt").write_text("".join(" ".join(r["tokens"]) + "\n" for r in recs), encoding="utf-8")
    (tmp_path / "eng.txt").write_text("x y\n" * len(recs), encoding="utf-8")
    out = tmp_path / "sim.tsv"
    assert _run("simeval", "--grouped", grouped_file, "--parallel", f"hin={tmp_path / 'hin.txt'}",
                "--parallel", f"eng={tmp_path / 'eng.txt'}", "--n-seeds", 2, "--out", out) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("setting\tgrouped\thin (self)\teng")
    assert len(lines) == 9


def test_simeval_service_error(grouped_file, tmp_path):
    recs = [json.loads(l) for l in grouped_file.read_text(encoding="utf-8").splitlines()]
    (tmp_path / "hin.txt").write_text("".join(" ".join(r["tokens"]) + "\n" for r in recs), encoding="utf-8")
    code = _run("simeval", "--grouped", grouped_file, "--parallel", f"hin={tmp_path / 'hin.txt'}",
                "--provider", "external", "--endpoint", "http://127.0.0.1:9/x", "--dim", 4,
                "--retries", 0, "--out", tmp_path / "sim.tsv")
    assert code == 3
    assert not (tmp_path / "sim.tsv").exists()
    assert (tmp_path / "sim.tsv.partial").exists()


def test_chrf_and_buckets(tmp_path):
    gold = json.loads((DATA / "chrf_golden.json").read_text(encoding="utf-8"))
    (tmp_path / "h").write_text("".join(p["hyp"] + "\n" for p in gold["pairs"]), encoding="utf-8")
    (tmp_path / "r").write_text("".join(p["ref"] + "\n" for p in gold["pairs"]), encoding="utf-8")
    assert _run("chrf", "--hyp", tmp_path / "h", "--ref", tmp_path / "r", "--out", tmp_path / "c") == 0
    name, score, sig = (tmp_path / "c").read_text().strip().split("\t")
    assert name == "chrF2++" and abs(float(score) - gold["corpus"]) < 0.01 and "nc:6|nw:2" in sig
    assert _run("chrf", "--hyp", tmp_path / "h", "--ref", tmp_path / "r", "--sentence-level",
                "--out", tmp_path / "s.tsv") == 0
    assert _run("buckets", "--external-scores", tmp_path / "s.tsv", "--source", tmp_path / "r",
                "--min-instances", 1, "--out", tmp_path / "b.tsv") == 0
    rows = (tmp_path / "b.tsv").read_text().splitlines()
    assert rows[0] == "bucket_lo\tbucket_hi\tcount\tmean_score"
    assert sum(int(r.split("\t")[2]) for r in rows[1:]) == 10


def test_stats(tmp_path, grouped_file):
    (tmp_path / "h.txt").write_text("a b c\nd e\n", encoding="utf-8")
    assert _run("stats", "--plain", f"eng={tmp_path / 'h.txt'}", "--grouped", f"hin={grouped_file}",
                "--out", tmp_path / "o") == 0
    lines = (tmp_path / "o").read_text().splitlines()
    assert lines[1].startswith("eng\t5\t5\t0.00")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nosuch"],
        ["group"],
        ["shuffle", "--in", "x", "--setting", "w0"],
        ["stats"],
        ["group", "--in", "x", "--jobs", "0"],
        ["simeval", "--grouped", "g", "--parallel", "bad"],
    ],
)
def test_usage_errors(argv, tmp_path, monkeypatch):
    (tmp_path / "x").write_text("")
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 1


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.conllu"
    bad.write_text("1\ta\t_\tX\n", encoding="utf-8")
    assert _run("group", "--in", bad, "--out", tmp_path / "o") == 2
    assert not (tmp_path / "o").exists()
    assert _run("group", "--in", tmp_path / "missing", "--out", tmp_path / "o") == 2
    (tmp_path / "h").write_text("a\nb\n")
    (tmp_path / "r").write_text("a\n")
    assert _run("chrf", "--hyp", tmp_path / "h", "--ref", tmp_path / "r") == 2


def test_config_file_and_override(grouped_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# shuffle settings\nin = {grouped_file}\nsetting = w10\nseed = 5\npreserve-groups = true\n")
    assert _run("shuffle", "--config", cfg, "--out", tmp_path / "a") == 0
    rec = json.loads((tmp_path / "a").read_text(encoding="utf-8").splitlines()[0])
    assert rec["spec"] == {"setting": "w10", "preserve_groups": True, "seed": 5, "sentence_seed": rec["spec"]["sentence_seed"]}
    assert _run("shuffle", "--config", cfg, "--seed", 6, "--out", tmp_path / "b") == 0
    rec = json.loads((tmp_path / "b").read_text(encoding="utf-8").splitlines()[0])
    assert rec["spec"]["seed"] == 6
    cfg.write_text("bogus = 1\n")
    assert _run("shuffle", "--config", cfg, "--in", grouped_file) == 1


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    write_output(str(target), "one\n")
    write_output(str(target), "two\n")
    assert target.read_text() == "two\n"
    assert os.listdir(target.parent) == ["f.txt"]


def test_help_shows_defaults():
    proc = subprocess.run([sys.executable, "-m", "wordgroup.cli", "simeval", "--help"],
                          capture_output=True, text=True, check=True)
    text = " ".join(proc.stdout.split())
    assert "(default: 5)" in text
    assert "(default: full,w5,w10,filtered20)" in text
    assert "default: None" not in text
    proc = subprocess.run([sys.executable, "-m", "wordgroup.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "wordgroup" in proc.stdout
