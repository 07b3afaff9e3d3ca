"""Shuffled-sentence similarity experiment (grouped vs ungrouped shuffling)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import ParallelCorpus
from .embeddings import EmbeddingProvider, ProviderError, cosine
from .grouping import GroupedSentence
from .perturb import LENGTH_FILTERED, ShuffleSpec, filter_corpus, sentence_seed, shuffle

log = logging.getLogger(__name__)

DEFAULT_SETTINGS = ("full", "w5", "w10", "filtered20")
DEFAULT_N_SEEDS = 5


@dataclass
class SimilarityTable:
    settings: list[str]
    languages: list[str]
    source_language: str
    n_seeds: int
    cells: dict[tuple[str, bool], dict[str, float]] = field(default_factory=dict)
    n_sentences: dict[str, int] = field(default_factory=dict)

    def column_label(self, lang: str) -> str:
        return f"{lang} (self)" if lang == self.source_language else lang

    def to_tsv(self) -> str:
        lines = ["\t".join(["setting", "grouped", *(self.column_label(l) for l in self.languages), "n_sentences", "n_seeds"])]
        for setting in self.settings:
            for grouped in (False, True):
                row = self.cells.get((setting, grouped))
                if row is None:
                    continue
                vals = [f"{row[l]:.4f}" for l in self.languages]
                lines.append("\t".join([setting, "grouped" if grouped else "ungrouped", *vals,
                                        str(self.n_sentences[setting]), str(self.n_seeds)]))
        return "\n".join(lines) + "\n"


def _shuffled_text(g: GroupedSentence, spec: ShuffleSpec) -> str:
    units = g.group_words() if spec.preserve_groups else [[w] for w in g.words]
    permuted = shuffle(units, spec).permuted
    return " ".join(w for unit in permuted for w in unit)


def similarity_experiment(
    corpus: ParallelCorpus,
    grouped: Sequence[GroupedSentence] | Mapping[int, GroupedSentence],
    specs: Sequence[ShuffleSpec | str],
    provider: EmbeddingProvider,
    seeds: Sequence[int],
    source_language: str = "hin",
    partial_path: str | Path | None = None,
) -> SimilarityTable:
    """Mean cosine similarity between shuffled source sentences and every column.

    For each setting and for grouped/ungrouped shuffling, every source row is
    shuffled once per seed (the per-row seed mixes the base seed with the
    sentence id). The shuffled text is compared with the parallel sentence in
    each language; for the source language itself the comparison is with the
    unshuffled sentence. If the provider fails, completed cells are written to
    ``partial_path`` before the error propagates.
    """
    if source_language not in corpus.languages:
        raise ValueError(f"source language {source_language!r} not in corpus {corpus.languages}")
    if not seeds:
        raise ValueError("need at least one seed")
    groups = [grouped[i] for i in range(len(corpus))] if isinstance(grouped, Mapping) else list(grouped)
    if len(groups) != len(corpus):
        raise ValueError(f"{len(groups)} grouped sentences for {len(corpus)} corpus rows")
    src_col = corpus.column(source_language)
    for i, (g, line) in enumerate(zip(groups, src_col)):
        if g.words != line.split():
            raise ValueError(f"row {i + 1}: grouped sentence does not match the {source_language} text")

    specs = [ShuffleSpec.parse(s) if isinstance(s, str) else s for s in specs]
    table = SimilarityTable([s.label for s in specs], list(corpus.languages), source_language, len(seeds))
    reference_cache: dict[tuple[str, int], np.ndarray] = {}

    def references(lang: str, rows: list[int]) -> list[np.ndarray]:
        todo = [i for i in rows if (lang, i) not in reference_cache]
        if todo:
            texts = [" ".join(groups[i].words) if lang == source_language else corpus.rows[i][corpus.languages.index(lang)]
                     for i in todo]
            for i, vec in zip(todo, provider.embed_many(texts)):
                reference_cache[(lang, i)] = vec
        return [reference_cache[(lang, i)] for i in rows]

    try:
        for spec in specs:
            rows = list(range(len(corpus)))
            if spec.setting == LENGTH_FILTERED:
                rows = filter_corpus(rows, spec.size, key=lambda i: groups[i])
            table.n_sentences[spec.label] = len(rows)
            if not rows:
                log.warning("setting %s keeps no sentences", spec.label)
                continue
            for preserve in (False, True):
                samples = [(i, s) for i in rows for s in seeds]
                texts = [
                    _shuffled_text(groups[i], spec.replace(preserve_groups=preserve, seed=sentence_seed(s, groups[i].id)))
                    for i, s in samples
                ]
                vecs = provider.embed_many(texts)
                cell = {}
                for lang in corpus.languages:
                    refs = dict(zip(rows, references(lang, rows)))
                    sims = [cosine(v, refs[i]) for v, (i, _) in zip(vecs, samples)]
                    cell[lang] = float(np.mean(sims))
                table.cells[(spec.label, preserve)] = cell
                log.info("cell %s/%s done", spec.label, "grouped" if preserve else "ungrouped")
    except ProviderError:
        if partial_path is not None:
            Path(partial_path).write_text(table.to_tsv(), encoding="utf-8")
        raise
    return table
