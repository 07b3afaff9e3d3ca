"""Semantically cohesive word grouping for dependency-annotated Hindi."""

from .chrf import ChrfConfig, chrfpp, corpus_chrfpp
from .chunking import ChunkPlan, chunk_fixed, chunk_grouped
from .corpus import AnnotatedSentence, ParallelCorpus, ParseError, RawSentence, Token, load_parallel, parse_conllu, parse_plain
from .grouping import (
    CountReport,
    GroupedSentence,
    corpus_stats,
    group_sentence,
    read_grouped,
    render_grouped,
    write_grouped,
)
from .rules import GroupingRule, RuleSet, default_rules, load_rules, rule_matches

__version__ = "0.1.0"

__all__ = [
    "AnnotatedSentence",
    "ChrfConfig",
    "ChunkPlan",
    "CountReport",
    "GroupedSentence",
    "GroupingRule",
    "ParallelCorpus",
    "ParseError",
    "RawSentence",
    "RuleSet",
    "Token",
    "chrfpp",
    "chunk_fixed",
    "chunk_grouped",
    "corpus_chrfpp",
    "corpus_stats",
    "default_rules",
    "group_sentence",
    "load_parallel",
    "load_rules",
    "parse_conllu",
    "parse_plain",
    "read_grouped",
    "render_grouped",
    "rule_matches",
    "write_grouped",
]
