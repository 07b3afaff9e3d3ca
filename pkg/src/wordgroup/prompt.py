"""Few-shot chunked translation prompts and external score files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

from .corpus import ParseError

DEFAULT_MASK = "<mask>"


@dataclass(frozen=True)
class Shot:
    src_chunks: tuple[str, ...]
    tgt_chunks: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "src_chunks", tuple(self.src_chunks))
        object.__setattr__(self, "tgt_chunks", tuple(self.tgt_chunks))


@dataclass
class PromptDocument:
    source_lang: str
    target_lang: str
    shots: list[Shot]
    test_chunk: str
    test_chunks_done: list[tuple[str, str]] = field(default_factory=list)
    mask_token: str = DEFAULT_MASK


def _header(doc: PromptDocument) -> str:
    return f"Translate from {doc.source_lang} to {doc.target_lang}:"


def _clean(chunk: str) -> str:
    return " ".join(chunk.split())


def build_prompt(doc: PromptDocument) -> str:
    """Render the independent-translation prompt.

    Blocks (one per shot, then the test block) are separated by a blank line;
    each starts with the ``Translate from S to T:`` header and a blank line.
    """
    if not doc.mask_token:
        raise ValueError("mask token must be non-empty")
    src, tgt = doc.source_lang, doc.target_lang
    blocks = []
    for k, shot in enumerate(doc.shots):
        if len(shot.src_chunks) != len(shot.tgt_chunks):
            raise ValueError(
                f"shot {k}: {len(shot.src_chunks)} source chunks but {len(shot.tgt_chunks)} target chunks"
            )
        lines = []
        for s, t in zip(shot.src_chunks, shot.tgt_chunks):
            lines += [f"{src}: {_clean(s)}", f"{tgt}: {_clean(t)}"]
        blocks.append(_header(doc) + "\n\n" + "\n".join(lines))
    lines = []
    for s, t in doc.test_chunks_done:
        lines += [f"{src}: {_clean(s)}", f"{tgt}: {_clean(t)}"]
    lines += [f"{src}: {_clean(doc.test_chunk)}", f"{tgt}: {doc.mask_token}"]
    blocks.append(_header(doc) + "\n\n" + "\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def parse_prompt(text: str, source_lang: str, target_lang: str) -> list[tuple[list[str], list[str]]]:
    """Recover (source chunks, target chunks) per block from a rendered prompt."""
    blocks = []
    src_p, tgt_p = f"{source_lang}: ", f"{target_lang}: "
    header = f"Translate from {source_lang} to {target_lang}:"
    for line in text.split("\n"):
        if line == header:
            blocks.append(([], []))
        elif line.startswith(src_p) and blocks:
            blocks[-1][0].append(line[len(src_p):])
        elif line.startswith(tgt_p) and blocks:
            blocks[-1][1].append(line[len(tgt_p):])
    return blocks


def load_shots(lines: Iterable[str]) -> list[Shot]:
    shots = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            shots.append(Shot(tuple(d["src_chunks"]), tuple(d["tgt_chunks"])))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ParseError(f"bad shot record: {e}", lineno) from None
    return shots


def chunk_prompts(
    shots: Sequence[Shot],
    src_chunks: Sequence[str],
    source_lang: str,
    target_lang: str,
    mask_token: str = DEFAULT_MASK,
    done: Sequence[str] = (),
) -> list[str]:
    """One prompt per source chunk of a test sentence.

    ``done`` holds already-available translations of the leading chunks;
    chunk ``k`` gets the pairs for chunks ``0..k-1`` that have one.
    """
    out = []
    for k, chunk in enumerate(src_chunks):
        prefix = list(zip(src_chunks[:k], done[:k]))
        doc = PromptDocument(source_lang, target_lang, list(shots), chunk, prefix, mask_token)
        out.append(build_prompt(doc))
    return out


@dataclass(frozen=True)
class ExternalScore:
    id: str
    metric: str
    score: float


def ingest_external_scores(source: str | Path | IO[str]) -> list[ExternalScore]:
    """Read ``id<TAB>metric<TAB>score`` rows produced by an external scorer."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            return ingest_external_scores(f)
    rows = []
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", lineno)
        sid, metric, raw = parts
        if lineno == 1 and raw.strip().lower() == "score":
            continue
        try:
            score = float(raw)
        except ValueError:
            raise ParseError(f"score is not a number: {raw!r}", lineno) from None
        rows.append(ExternalScore(sid.strip(), metric.strip(), score))
    return rows
