"""Length-bucketed score reporting."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable


@dataclass
class Bucket:
    lo: int
    hi: int  # exclusive
    scores: list[float]

    @property
    def count(self) -> int:
        return len(self.scores)

    @property
    def mean_score(self) -> float:
        return statistics.fmean(self.scores) if self.scores else float("nan")


@dataclass
class LengthBuckets:
    width: int
    buckets: list[Bucket]

    @property
    def edges(self) -> list[int]:
        return [b.lo for b in self.buckets] + [self.buckets[-1].hi] if self.buckets else []

    @property
    def counts(self) -> list[int]:
        return [b.count for b in self.buckets]

    def to_tsv(self) -> str:
        lines = ["bucket_lo\tbucket_hi\tcount\tmean_score"]
        lines += [f"{b.lo}\t{b.hi}\t{b.count}\t{b.mean_score:.4f}" for b in self.buckets]
        return "\n".join(lines) + "\n"


def bucket_width(lengths: Iterable[int]) -> int:
    """Population standard deviation of the lengths, rounded up, at least 1."""
    sd = statistics.pstdev(list(lengths))
    return max(1, math.ceil(sd))


def bucket_scores(pairs: Iterable[tuple[int, float]], min_instances: int = 20) -> LengthBuckets:
    """Group (source length, score) pairs into equal-width length buckets.

    Buckets start at the shortest length; the last one ends just past the
    longest. Any bucket holding fewer than ``min_instances`` pairs is folded
    into its lower neighbour, or into the next bucket when it is the first,
    until every remaining bucket is large enough or only one is left.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no (length, score) pairs")
    if min_instances < 1:
        raise ValueError("min_instances must be >= 1")
    lengths = [n for n, _ in pairs]
    width = bucket_width(lengths)
    lo, top = min(lengths), max(lengths) + 1
    buckets = [Bucket(a, min(a + width, top), []) for a in range(lo, top, width)]
    for n, score in pairs:
        buckets[(n - lo) // width].scores.append(float(score))

    while len(buckets) > 1:
        small = next((k for k, b in enumerate(buckets) if b.count < min_instances), None)
        if small is None:
            break
        if small == 0:
            a, b = buckets[0], buckets[1]
        else:
            a, b = buckets[small - 1], buckets[small]
        merged = Bucket(a.lo, b.hi, a.scores + b.scores)
        k = 0 if small == 0 else small - 1
        buckets[k : k + 2] = [merged]
    return LengthBuckets(width, buckets)
