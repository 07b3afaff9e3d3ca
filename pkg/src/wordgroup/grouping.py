"""Fusing annotated tokens into contiguous word groups."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from .corpus import AnnotatedSentence, ParseError, RawSentence, Sentence, Token
from .rules import DEFAULT_DELIMITER, RuleSet, rule_matches


@dataclass(frozen=True)
class GroupedSentence:
    """A sentence partitioned into ordered, contiguous groups of 1-based token indices.

    ``provenance[k]`` lists the relations whose merges formed group ``k``, in
    merge order; it is empty for singletons.
    """

    sentence: Sentence
    groups: tuple[tuple[int, ...], ...]
    provenance: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        prov = tuple(tuple(p) for p in self.provenance) or tuple(() for _ in groups)
        object.__setattr__(self, "provenance", prov)
        if len(prov) != len(groups):
            raise ValueError("provenance must have one entry per group")
        expected = 1
        for g in groups:
            if not g:
                raise ValueError("empty group")
            if list(g) != list(range(expected, expected + len(g))):
                raise ValueError(f"groups must be contiguous, ordered and cover 1..n: {groups}")
            expected += len(g)
        if expected - 1 != len(self.sentence):
            raise ValueError(f"groups cover {expected - 1} of {len(self.sentence)} tokens")

    @property
    def id(self) -> str:
        return self.sentence.id

    @property
    def words(self) -> list[str]:
        return list(self.sentence.words)

    def __len__(self):
        return len(self.groups)

    def group_words(self) -> list[list[str]]:
        words = self.sentence.words
        return [[words[i - 1] for i in g] for g in self.groups]

    def units(self, delimiter: str = DEFAULT_DELIMITER) -> list[str]:
        return [delimiter.join(ws) for ws in self.group_words()]

    @classmethod
    def singletons(cls, sentence: Sentence) -> "GroupedSentence":
        return cls(sentence, tuple((i,) for i in range(1, len(sentence) + 1)))


def _check_annotated(sentence: AnnotatedSentence) -> None:
    if not isinstance(sentence, AnnotatedSentence):
        raise TypeError(f"grouping needs an annotated sentence, got {type(sentence).__name__}")
    if not sentence.tokens:
        return
    for tok in sentence.tokens:
        if tok.deprel in ("", "_"):
            raise ValueError(f"sentence {sentence.id}: token {tok.index} has no dependency relation")
    if not any(tok.head == 0 for tok in sentence.tokens):
        raise ValueError(f"sentence {sentence.id}: no root token (head = 0)")


def candidate_pairs(sentence: AnnotatedSentence, rules: RuleSet) -> list[list[tuple[Token, Token]]]:
    """Per rule, the (dependent, head) pairs it matches, leftmost pair first."""
    tokens = sentence.tokens
    out = []
    for rule in rules:
        pairs = [
            (tok, tokens[tok.head - 1])
            for tok in tokens
            if tok.head > 0 and rule_matches(rule, tok, tokens[tok.head - 1])
        ]
        pairs.sort(key=lambda p: (min(p[0].index, p[1].index), max(p[0].index, p[1].index)))
        out.append(pairs)
    return out


def group_sentence(sentence: AnnotatedSentence, rules: RuleSet) -> GroupedSentence:
    """Merge adjacent groups linked by a rule-matching relation until nothing changes.

    Rules are tried in file order and, within a rule, the leftmost pair first.
    After every merge the scan restarts from the first rule. A rule without the
    ``chain`` flag only joins two singleton groups.
    """
    _check_annotated(sentence)
    n = len(sentence)
    # spans[k] = [first, last] token index of group k; groups stay contiguous
    spans = [[i, i] for i in range(1, n + 1)]
    prov: list[list[str]] = [[] for _ in range(n)]
    owner = [-1] + list(range(n))  # owner[token index] -> group position, rebuilt after each merge
    candidates = candidate_pairs(sentence, rules)

    def eligible(rule, dep, head):
        a, b = owner[dep.index], owner[head.index]
        if abs(a - b) != 1:
            return None
        if not rule.chain and (spans[a][0] != spans[a][1] or spans[b][0] != spans[b][1]):
            return None
        return min(a, b)

    while True:
        for rule, pairs in zip(rules, candidates):
            hit = next((k for dep, head in pairs if (k := eligible(rule, dep, head)) is not None), None)
            if hit is not None:
                break
        else:
            break
        spans[hit] = [spans[hit][0], spans[hit + 1][1]]
        prov[hit] = prov[hit] + prov[hit + 1] + [rule.deprel]
        del spans[hit + 1]
        del prov[hit + 1]
        for k in range(hit, len(spans)):
            for i in range(spans[k][0], spans[k][1] + 1):
                owner[i] = k

    groups = tuple(tuple(range(lo, hi + 1)) for lo, hi in spans)
    return GroupedSentence(sentence, groups, tuple(tuple(p) for p in prov))


def group_corpus(sentences: Iterable[AnnotatedSentence], rules: RuleSet) -> list[GroupedSentence]:
    return [group_sentence(s, rules) for s in sentences]


def render_grouped(g: GroupedSentence, delimiter: str = DEFAULT_DELIMITER) -> str:
    return " ".join(g.units(delimiter))


@dataclass(frozen=True)
class CountReport:
    language: str
    total_words: int
    total_groups: int
    reduction_pct: float

    def tsv_row(self) -> str:
        return f"{self.language}\t{self.total_words}\t{self.total_groups}\t{self.reduction_pct:.2f}"


TSV_HEADER = "language\twords\tgroups\treduction_pct"


def corpus_stats(corpora: Mapping[str, Sequence[RawSentence | AnnotatedSentence | GroupedSentence]]) -> list[CountReport]:
    """Word and group totals per language, ascending by unit count.

    Ungrouped corpora report their word count as the group count.
    """
    if not corpora:
        raise ValueError("no corpora given")
    reports = []
    for lang, sentences in corpora.items():
        words = groups = 0
        for s in sentences:
            if isinstance(s, GroupedSentence):
                words += len(s.sentence)
                groups += len(s.groups)
            else:
                words += len(s)
                groups += len(s)
        pct = 100.0 * (words - groups) / words if words else 0.0
        reports.append(CountReport(lang, words, groups, pct))
    reports.sort(key=lambda r: (r.total_groups, r.language))
    return reports


def stats_tsv(reports: Iterable[CountReport]) -> str:
    return "\n".join([TSV_HEADER, *(r.tsv_row() for r in reports)]) + "\n"


# JSONL persistence


def grouped_to_dict(g: GroupedSentence, delimiter: str = DEFAULT_DELIMITER) -> dict:
    d = {
        "id": g.id,
        "tokens": g.words,
        "groups": [list(x) for x in g.groups],
        "rendered": render_grouped(g, delimiter),
    }
    if any(g.provenance):
        d["provenance"] = [list(p) for p in g.provenance]
    s = g.sentence
    if isinstance(s, AnnotatedSentence):
        d["pos"] = [t.pos for t in s.tokens]
        d["head"] = [t.head for t in s.tokens]
        d["deprel"] = [t.deprel for t in s.tokens]
        if s.raw_text is not None:
            d["text"] = s.raw_text
    return d


def grouped_from_dict(d: dict) -> GroupedSentence:
    forms = d["tokens"]
    if "pos" in d:
        tokens = tuple(
            Token(i, form, pos, head, rel)
            for i, (form, pos, head, rel) in enumerate(zip(forms, d["pos"], d["head"], d["deprel"]), start=1)
        )
        sentence: Sentence = AnnotatedSentence(str(d["id"]), tokens, d.get("text"))
    else:
        sentence = RawSentence(str(d["id"]), tuple(forms))
    return GroupedSentence(sentence, tuple(tuple(g) for g in d["groups"]), tuple(tuple(p) for p in d.get("provenance", ())))


def write_grouped(sentences: Iterable[GroupedSentence], sink: IO[str], delimiter: str = DEFAULT_DELIMITER) -> None:
    for g in sentences:
        sink.write(json.dumps(grouped_to_dict(g, delimiter), ensure_ascii=False))
        sink.write("\n")


def read_grouped(source: IO[str] | Iterable[str]) -> list[GroupedSentence]:
    out = []
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            out.append(grouped_from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad grouped record: {e}", lineno) from None
    return out
