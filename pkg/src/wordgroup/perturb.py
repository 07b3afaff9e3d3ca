"""Seeded sentence shuffling, with or without word groups kept intact.

Randomness comes from xoshiro256** seeded through splitmix64, so a given
(units, seed, setting) always yields the same permutation on any platform.
Bounded draws use rejection sampling (no modulo bias).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Generic, Iterable, Sequence, TypeVar

from .corpus import Sentence
from .grouping import GroupedSentence
from .rules import DEFAULT_DELIMITER

T = TypeVar("T")
MASK64 = (1 << 64) - 1

FULL = "full"
WINDOW = "window"
LENGTH_FILTERED = "filtered"


def splitmix64(state: int) -> tuple[int, int]:
    """Return (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** 1.0."""

    def __init__(self, seed: int):
        seed &= MASK64
        s = []
        for _ in range(4):
            seed, out = splitmix64(seed)
            s.append(out)
        self.s = s

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) % bound
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % bound


def fisher_yates(order: list, rng: Xoshiro256, lo: int = 0, hi: int | None = None) -> None:
    """Shuffle order[lo:hi] in place (Durstenfeld, descending index)."""
    hi = len(order) if hi is None else hi
    for i in range(hi - 1, lo, -1):
        j = lo + rng.below(i - lo + 1)
        order[i], order[j] = order[j], order[i]


def stable_hash64(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "big")


def sentence_seed(seed: int, sentence_id: str) -> int:
    return (seed ^ stable_hash64(sentence_id)) & MASK64


@dataclass(frozen=True)
class ShuffleSpec:
    setting: str = FULL
    size: int | None = None
    preserve_groups: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.setting not in (FULL, WINDOW, LENGTH_FILTERED):
            raise ValueError(f"unknown shuffle setting {self.setting!r}")
        if self.setting == FULL and self.size is not None:
            raise ValueError("full shuffling takes no size")
        if self.setting != FULL and (self.size is None or self.size < 1):
            raise ValueError(f"{self.setting} needs a size >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def parse(cls, name: str, preserve_groups: bool = False, seed: int = 0) -> "ShuffleSpec":
        """``full``, ``wN`` (window of N units) or ``filteredN`` (sentences under N words)."""
        name = name.strip().lower()
        if name == FULL:
            return cls(FULL, None, preserve_groups, seed)
        for prefix, setting in (("filtered", LENGTH_FILTERED), ("w", WINDOW)):
            if name.startswith(prefix) and name[len(prefix):].isdigit():
                return cls(setting, int(name[len(prefix):]), preserve_groups, seed)
        raise ValueError(f"unrecognised shuffle setting {name!r}")

    @property
    def label(self) -> str:
        if self.setting == FULL:
            return FULL
        if self.setting == WINDOW:
            return f"w{self.size}"
        return f"filtered{self.size}"

    def replace(self, **changes) -> "ShuffleSpec":
        d = dict(setting=self.setting, size=self.size, preserve_groups=self.preserve_groups, seed=self.seed)
        d.update(changes)
        return ShuffleSpec(**d)

    def to_dict(self) -> dict:
        return {"setting": self.label, "preserve_groups": self.preserve_groups, "seed": self.seed}


@dataclass(frozen=True)
class ShuffledSentence(Generic[T]):
    original: tuple
    permuted: tuple
    spec: ShuffleSpec
    permutation: tuple[int, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "original": list(self.original),
            "permuted": list(self.permuted),
            "permutation": list(self.permutation),
            "spec": self.spec.to_dict(),
        }


def units_of(sentence: Sentence | GroupedSentence, preserve_groups: bool, delimiter: str = DEFAULT_DELIMITER) -> list[str]:
    """Shuffling units: whitespace words, or one delimiter-joined string per group."""
    if preserve_groups:
        if not isinstance(sentence, GroupedSentence):
            raise TypeError("preserve_groups needs a GroupedSentence")
        return sentence.units(delimiter)
    if isinstance(sentence, GroupedSentence):
        return sentence.words
    return list(sentence.words)


def permutation_for(n: int, spec: ShuffleSpec) -> list[int]:
    """``perm[k]`` is the original position of the unit placed at position ``k``."""
    rng = Xoshiro256(spec.seed)
    order = list(range(n))
    if spec.setting == WINDOW:
        for lo in range(0, n, spec.size):
            fisher_yates(order, rng, lo, min(lo + spec.size, n))
    else:
        fisher_yates(order, rng)
    return order


def shuffle(units: Sequence[T], spec: ShuffleSpec) -> ShuffledSentence[T]:
    """Permute ``units`` per ``spec``.

    Windows are anchored at the first unit and count units, so with preserved
    groups a window of 5 spans 5 groups. A length-filtered spec shuffles like
    ``full``; the filtering itself happens in :func:`filter_corpus`.
    """
    units = tuple(units)
    perm = permutation_for(len(units), spec)
    return ShuffledSentence(units, tuple(units[k] for k in perm), spec, tuple(perm))


def filter_corpus(rows: Iterable[T], max_words: int, key=None) -> list[T]:
    """Keep rows whose (ungrouped) word count is strictly below ``max_words``.

    ``key`` maps a row to its source-language text or sentence; by default the
    row itself is used.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    key = key or (lambda r: r)
    kept = []
    for row in rows:
        item = key(row)
        if isinstance(item, str):
            n = len(item.split())
        elif isinstance(item, GroupedSentence):
            n = len(item.sentence)
        else:
            n = len(item)
        if n < max_words:
            kept.append(row)
    return kept
