"""Reading annotated (CoNLL-U) and plain-text corpora."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

_WS = re.compile(r"\s")


class ParseError(ValueError):
    """Malformed input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    pos: str
    head: int
    deprel: str

    def __post_init__(self):
        if not self.form or _WS.search(self.form):
            raise ValueError(f"token form must be non-empty and whitespace-free: {self.form!r}")
        if self.head == self.index:
            raise ValueError(f"token {self.index} is its own head")


@dataclass(frozen=True)
class AnnotatedSentence:
    id: str
    tokens: tuple[Token, ...]
    raw_text: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        n = len(self.tokens)
        for i, tok in enumerate(self.tokens, start=1):
            if tok.index != i:
                raise ValueError(f"sentence {self.id}: token indices must be 1..n, got {tok.index} at {i}")
            if not 0 <= tok.head <= n:
                raise ValueError(f"sentence {self.id}: head {tok.head} of token {i} out of range")

    @property
    def words(self) -> list[str]:
        return [t.form for t in self.tokens]

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class RawSentence:
    id: str
    words: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        for w in self.words:
            if not w or _WS.search(w):
                raise ValueError(f"word must be non-empty and whitespace-free: {w!r}")

    def __len__(self):
        return len(self.words)


Sentence = Union[AnnotatedSentence, RawSentence]


@dataclass
class ParallelCorpus:
    languages: list[str]
    rows: list[tuple[str, ...]] = field(default_factory=list)

    def column(self, language: str) -> list[str]:
        i = self.languages.index(language)
        return [row[i] for row in self.rows]

    def __len__(self):
        return len(self.rows)


def _int_field(value: str, name: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"non-integer {name} {value!r}", lineno) from None


def parse_conllu(text: str) -> list[AnnotatedSentence]:
    """Parse a CoNLL-U document.

    POS is read from XPOS (the treebank tagset the grouping rules use), falling
    back to UPOS when XPOS is ``_``. Multiword ranges (``1-2``) and empty nodes
    (``1.1``) are skipped.
    """
    sentences = []
    tokens: list[Token] = []
    sent_id = None
    raw_text = None
    block_start = 1

    def flush():
        nonlocal tokens, sent_id, raw_text
        if tokens:
            sid = sent_id if sent_id is not None else str(len(sentences) + 1)
            try:
                sentences.append(AnnotatedSentence(sid, tuple(tokens), raw_text))
            except ValueError as e:
                raise ParseError(str(e), block_start) from None
        tokens, sent_id, raw_text = [], None, None

    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            flush()
            block_start = lineno + 1
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            key = key.strip()
            if sep and key == "sent_id":
                sent_id = value.strip()
            elif sep and key == "text":
                raw_text = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) < 8:
            raise ParseError(f"expected at least 8 tab-separated columns, got {len(cols)}", lineno)
        if "-" in cols[0] or "." in cols[0]:
            continue
        index = _int_field(cols[0], "ID", lineno)
        head = _int_field(cols[6], "HEAD", lineno)
        pos = cols[4] if cols[4] != "_" else cols[3]
        if index != len(tokens) + 1:
            raise ParseError(f"token ID {index} out of sequence", lineno)
        try:
            tokens.append(Token(index, cols[1], pos, head, cols[7]))
        except ValueError as e:
            raise ParseError(str(e), lineno) from None
    flush()
    return sentences


def parse_plain(text: str) -> list[RawSentence]:
    """One sentence per line; ids are 1-based line numbers of non-empty lines."""
    out = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        words = line.split()
        if words:
            out.append(RawSentence(str(lineno), tuple(words)))
    return out


def _read_lines(path: Path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line.rstrip("\r") for line in lines]


def load_parallel(paths: Mapping[str, str | Path]) -> ParallelCorpus:
    """Align files line by line. Every file must have the same line count."""
    if not paths:
        raise ValueError("no input files given")
    columns = {lang: _read_lines(Path(p)) for lang, p in paths.items()}
    counts = {lang: len(lines) for lang, lines in columns.items()}
    if len(set(counts.values())) > 1:
        detail = ", ".join(f"{lang}={n}" for lang, n in counts.items())
        raise ParseError(f"line count mismatch across parallel files: {detail}")
    languages = list(columns)
    rows = list(zip(*(columns[lang] for lang in languages)))
    return ParallelCorpus(languages, rows)


def word_count(sentence: Sentence | str) -> int:
    if isinstance(sentence, str):
        return len(sentence.split())
    return len(sentence)
