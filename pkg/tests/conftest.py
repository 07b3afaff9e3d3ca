from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from wordgroup.corpus import AnnotatedSentence, Token, parse_conllu
from wordgroup.rules import default_rules

DATA = Path(__file__).parent / "testdata"

POS_TAGS = ["NN", "NNP", "VM", "VAUX", "PSP", "RP", "JJ", "PRP", "NNPC", "NNC", "QC", "SYM"]
DEPRELS = ["lwg_psp", "lwg_vaux", "lwg_vaux_cont", "lwg_rp", "pof", "pof_cn", "k1", "k2", "nmod", "rsym"]


def gold_comments(text: str) -> dict[str, dict[str, str]]:
    """``# key = value`` comment lines per sentence block, keyed by sent_id."""
    out: dict[str, dict[str, str]] = {}
    for block in text.strip().split("\n\n"):
        meta = {}
        for line in block.split("\n"):
            if line.startswith("#"):
                k, _, v = line[1:].partition("=")
                meta[k.strip()] = v.strip()
        out[meta["sent_id"]] = meta
    return out


@pytest.fixture(scope="session")
def gold_text() -> str:
    return (DATA / "gold_groups.conllu").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def gold_sentences(gold_text):
    return parse_conllu(gold_text)


@pytest.fixture(scope="session")
def gold_meta(gold_text):
    return gold_comments(gold_text)


@pytest.fixture(scope="session")
def rules():
    return default_rules()


def random_tree(rng: random.Random, n: int, sid: str = "r") -> AnnotatedSentence:
    """Random projective-ish tree: every token but the root points at an earlier or later token."""
    root = rng.randrange(1, n + 1)
    tokens = []
    for i in range(1, n + 1):
        if i == root:
            head = 0
        else:
            # prefer near neighbours so rules fire often
            choices = [j for j in (i - 1, i + 1, i - 2, i + 2) if 1 <= j <= n]
            head = rng.choice(choices) if rng.random() < 0.8 else rng.choice([j for j in range(1, n + 1) if j != i])
        tokens.append(Token(i, f"w{i}", rng.choice(POS_TAGS), head, rng.choice(DEPRELS)))
    return AnnotatedSentence(sid, tuple(tokens))


@st.composite
def annotated_sentences(draw, min_size=1, max_size=14):
    n = draw(st.integers(min_size, max_size))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tree(random.Random(seed), n)


def synthetic_corpus(n_sentences: int, seed: int = 0, min_len: int = 4, max_len: int = 30):
    """Random annotated sentences over a small vocabulary, grouped with the default rules.

    Returns (grouped sentences, ParallelCorpus with a source and a pseudo-target column).
    """
    from wordgroup.corpus import ParallelCorpus
    from wordgroup.grouping import group_sentence

    rng = random.Random(seed)
    vocab = [f"श{k}" for k in range(400)]
    rules = default_rules()
    grouped = []
    for k in range(n_sentences):
        tree = random_tree(rng, rng.randint(min_len, max_len), str(k + 1))
        toks = tuple(
            Token(t.index, rng.choice(vocab), t.pos, t.head, t.deprel) for t in tree.tokens
        )
        grouped.append(group_sentence(AnnotatedSentence(str(k + 1), toks), rules))
    rows = [(" ".join(g.words), " ".join(w.replace("श", "t") for w in reversed(g.words))) for g in grouped]
    return grouped, ParallelCorpus(["hin", "eng"], rows)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(pytest, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
