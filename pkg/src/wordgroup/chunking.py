"""Splitting sentences into translation chunks.

Fixed mode cuts every ``w`` words. Grouped mode packs whole word groups
greedily, so no group is ever split across two chunks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .grouping import GroupedSentence

FIXED = "fixed"
GROUPED = "grouped"
DEFAULT_WIDTH = 4


@dataclass(frozen=True)
class ChunkPlan:
    """``units`` cut at ``boundaries`` (ascending, exclusive end positions).

    For fixed plans a unit is one word; for grouped plans a unit is one group
    given as its list of words.
    """

    units: tuple
    boundaries: tuple[int, ...]
    mode: str
    width: int

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        prev = 0
        for b in self.boundaries:
            if b <= prev:
                raise ValueError(f"boundaries must be strictly ascending and positive: {self.boundaries}")
            prev = b
        if prev != len(self.units):
            raise ValueError("last boundary must equal the number of units")

    def chunks(self) -> list[tuple]:
        out, start = [], 0
        for b in self.boundaries:
            out.append(self.units[start:b])
            start = b
        return out

    def chunk_words(self) -> list[list[str]]:
        if self.mode == FIXED:
            return [list(c) for c in self.chunks()]
        return [[w for unit in c for w in unit] for c in self.chunks()]

    def chunk_texts(self) -> list[str]:
        """Chunks as natural text: words joined by single spaces, no group delimiters."""
        return [" ".join(ws) for ws in self.chunk_words()]

    def to_dict(self) -> dict:
        return {"mode": self.mode, "width": self.width, "boundaries": list(self.boundaries), "chunks": self.chunk_texts()}


def chunk_fixed(words: Sequence[str], w: int = DEFAULT_WIDTH) -> ChunkPlan:
    if w < 1:
        raise ValueError("chunk width must be >= 1")
    if not words:
        raise ValueError("cannot chunk an empty sentence")
    n = len(words)
    boundaries = list(range(w, n, w)) + [n]
    return ChunkPlan(tuple(words), tuple(boundaries), FIXED, w)


def chunk_grouped(groups: Sequence[Sequence[str]] | GroupedSentence, target_w: int = DEFAULT_WIDTH) -> ChunkPlan:
    """Greedy packing: keep adding whole groups while the chunk has fewer than ``target_w`` words.

    A group longer than ``target_w`` ends up alone in an oversized chunk.
    """
    if target_w < 1:
        raise ValueError("chunk width must be >= 1")
    if isinstance(groups, GroupedSentence):
        groups = groups.group_words()
    units = tuple(tuple(g) for g in groups)
    if not units or any(not g for g in units):
        raise ValueError("need at least one non-empty group")
    boundaries = []
    size = 0
    for k, g in enumerate(units):
        size += len(g)
        if size >= target_w:
            boundaries.append(k + 1)
            size = 0
    if not boundaries or boundaries[-1] != len(units):
        boundaries.append(len(units))
    return ChunkPlan(units, tuple(boundaries), GROUPED, target_w)
