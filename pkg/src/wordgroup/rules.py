"""Grouping rules and the rules file format.

A rules file holds one rule per line::

    dep_pos_csv | head_pos_csv | deprel | flags_csv

``any`` is a POS wildcard. Blank lines and lines starting with ``#`` are
ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .corpus import ParseError, Token

WILDCARD = "any"
CHAIN = "chain"
ADJACENT_ONLY = "adjacent_only"
KNOWN_FLAGS = frozenset({CHAIN, ADJACENT_ONLY})
DEFAULT_DELIMITER = "_"


class RuleError(ParseError):
    pass


@dataclass(frozen=True)
class GroupingRule:
    dep_pos: frozenset[str]
    head_pos: frozenset[str]
    deprel: str
    flags: frozenset[str] = frozenset({ADJACENT_ONLY})

    def __post_init__(self):
        if not self.deprel:
            raise ValueError("rule deprel must be non-empty")
        if not self.dep_pos or not self.head_pos:
            raise ValueError("rule POS sets must be non-empty")
        unknown = set(self.flags) - KNOWN_FLAGS
        if unknown:
            raise ValueError(f"unknown rule flags: {sorted(unknown)}")
        # Adjacency is always enforced; the flag is accepted for readability.
        object.__setattr__(self, "flags", frozenset(self.flags) | {ADJACENT_ONLY})

    @property
    def chain(self) -> bool:
        return CHAIN in self.flags

    def dep_allows(self, pos: str) -> bool:
        return WILDCARD in self.dep_pos or pos in self.dep_pos

    def head_allows(self, pos: str) -> bool:
        return WILDCARD in self.head_pos or pos in self.head_pos

    def to_line(self) -> str:
        def fmt(tags):
            return WILDCARD if WILDCARD in tags else ",".join(sorted(tags))

        return " | ".join([fmt(self.dep_pos), fmt(self.head_pos), self.deprel, ",".join(sorted(self.flags))])


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[GroupingRule, ...] = ()
    delimiter: str = DEFAULT_DELIMITER

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.delimiter or any(c.isspace() for c in self.delimiter):
            raise ValueError(f"delimiter must be non-empty and whitespace-free: {self.delimiter!r}")

    def with_delimiter(self, delimiter: str) -> "RuleSet":
        return RuleSet(self.rules, delimiter)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


def rule_matches(rule: GroupingRule, dependent: Token, head: Token) -> bool:
    return (
        dependent.deprel == rule.deprel
        and dependent.head == head.index
        and rule.dep_allows(dependent.pos)
        and rule.head_allows(head.pos)
    )


def _pos_set(field_text: str, what: str, lineno: int) -> frozenset[str]:
    tags = frozenset(t.strip() for t in field_text.split(",") if t.strip())
    if not tags:
        raise RuleError(f"empty {what} POS set", lineno)
    return tags


def load_rules(text: str, delimiter: str = DEFAULT_DELIMITER) -> RuleSet:
    rules = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) == 3:
            parts.append("")
        if len(parts) != 4:
            raise RuleError(f"expected 4 '|'-separated fields, got {len(parts)}", lineno)
        dep, head, deprel, flag_text = parts
        if not deprel:
            raise RuleError("empty dependency relation", lineno)
        flags = frozenset(f.strip() for f in flag_text.split(",") if f.strip())
        unknown = flags - KNOWN_FLAGS
        if unknown:
            raise RuleError(f"unknown flag(s): {', '.join(sorted(unknown))}", lineno)
        rules.append(GroupingRule(_pos_set(dep, "dependent", lineno), _pos_set(head, "head", lineno), deprel, flags))
    return RuleSet(tuple(rules), delimiter)


def default_rules_text() -> str:
    return resources.files("wordgroup").joinpath("data/hindi.rules").read_text(encoding="utf-8")


def default_rules(delimiter: str = DEFAULT_DELIMITER) -> RuleSet:
    """The shipped Hindi rule table."""
    return load_rules(default_rules_text(), delimiter)
