"""chrF / chrF++ scoring.

Matches the common reference scorer with signature
``nrefs:1|case:mixed|eff:yes|nc:6|nw:2|space:no``: character n-grams are
taken from the text with all whitespace removed, word n-grams from
whitespace tokens with one leading or trailing ASCII punctuation mark split
off. Per-order precision and recall are averaged over the orders where both
sides have n-grams ("effective order"), then combined into F-beta.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

_PUNCT = frozenset(string.punctuation)


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 2
    beta: float = 2.0
    effective_order: bool = True
    lowercase: bool = False

    def __post_init__(self):
        if self.char_order < 1:
            raise ValueError("char_order must be >= 1")
        if self.word_order < 0:
            raise ValueError("word_order must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")

    @property
    def signature(self) -> str:
        return (
            f"nrefs:1|case:{'lc' if self.lowercase else 'mixed'}|eff:{'yes' if self.effective_order else 'no'}"
            f"|nc:{self.char_order}|nw:{self.word_order}|space:no"
        )


CHRFPP = ChrfConfig()


def char_ngrams(text: str, n: int) -> Counter:
    s = "".join(text.split())
    return Counter(s[i : i + n] for i in range(len(s) - n + 1))


def split_punct(text: str) -> list[str]:
    words = []
    for w in text.split():
        if len(w) > 1 and w[-1] in _PUNCT:
            words += [w[:-1], w[-1]]
        elif len(w) > 1 and w[0] in _PUNCT:
            words += [w[0], w[1:]]
        else:
            words.append(w)
    return words


def word_ngrams(words: Sequence[str], n: int) -> Counter:
    return Counter(" ".join(words[i : i + n]) for i in range(len(words) - n + 1))


def ngram_stats(hypothesis: str, reference: str, cfg: ChrfConfig = CHRFPP) -> list[tuple[int, int, int]]:
    """Per order: (hypothesis n-grams, reference n-grams, matches)."""
    if cfg.lowercase:
        hypothesis, reference = hypothesis.lower(), reference.lower()
    pairs = [(char_ngrams(hypothesis, n), char_ngrams(reference, n)) for n in range(1, cfg.char_order + 1)]
    if cfg.word_order:
        hw, rw = split_punct(hypothesis), split_punct(reference)
        pairs += [(word_ngrams(hw, n), word_ngrams(rw, n)) for n in range(1, cfg.word_order + 1)]
    stats = []
    for hyp, ref in pairs:
        match = sum(min(c, ref[g]) for g, c in hyp.items() if g in ref)
        # hypothesis n-grams are not counted when the reference has none of that order
        stats.append((sum(hyp.values()) if ref else 0, sum(ref.values()), match))
    return stats


def f_score(stats: Iterable[tuple[int, int, int]], cfg: ChrfConfig = CHRFPP) -> float:
    stats = list(stats)
    factor = cfg.beta**2
    if not cfg.effective_order:
        eps = 1e-16
        total = 0.0
        for n_hyp, n_ref, n_match in stats:
            prec = n_match / n_hyp if n_hyp else eps
            rec = n_match / n_ref if n_ref else eps
            denom = factor * prec + rec
            total += (1 + factor) * prec * rec / denom if denom > 0 else eps
        return 100 * total / len(stats)
    prec_sum = rec_sum = 0.0
    k = 0
    for n_hyp, n_ref, n_match in stats:
        if n_hyp > 0 and n_ref > 0:
            prec_sum += n_match / n_hyp
            rec_sum += n_match / n_ref
            k += 1
    if k == 0:
        return 0.0
    prec, rec = prec_sum / k, rec_sum / k
    if prec + rec == 0:
        return 0.0
    return 100 * (1 + factor) * prec * rec / (factor * prec + rec)


def chrfpp(hypothesis: str, reference: str, cfg: ChrfConfig = CHRFPP) -> float:
    """Sentence-level chrF++ in [0, 100]."""
    if not reference.strip():
        raise ValueError("reference must be non-empty")
    return f_score(ngram_stats(hypothesis, reference, cfg), cfg)


def corpus_chrfpp(hypotheses: Sequence[str], references: Sequence[str], cfg: ChrfConfig = CHRFPP) -> float:
    """Corpus-level score from n-gram statistics summed over all segments."""
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if not references:
        raise ValueError("empty corpus")
    order = cfg.char_order + cfg.word_order
    totals = [[0, 0, 0] for _ in range(order)]
    for hyp, ref in zip(hypotheses, references):
        for acc, st in zip(totals, ngram_stats(hyp, ref, cfg)):
            for j in range(3):
                acc[j] += st[j]
    return f_score([tuple(t) for t in totals], cfg)
