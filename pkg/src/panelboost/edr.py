"""Edit Distance on Real sequence and similarity-based feature ranking.

Two values "match" when they differ by at most epsilon; everything else
costs one edit. Distances are computed on z-normalized series so a single
tolerance works across heterogeneous indicators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

DEFAULT_EPSILON = 0.25
DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class EdrParams:
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class RankEntry:
    indicator_code: str
    distance: int
    rank: int


@dataclass(frozen=True)
class FeatureRanking:
    """Candidates ordered by (distance asc, code asc), ranks from 1."""

    entries: tuple[RankEntry, ...]

    def __post_init__(self):
        for i, e in enumerate(self.entries):
            if e.rank != i + 1:
                raise ValueError("ranks must be consecutive from 1")
            if i and e.distance < self.entries[i - 1].distance:
                raise ValueError("distances must be non-decreasing with rank")

    def codes(self) -> list[str]:
        return [e.indicator_code for e in self.entries]

    def top(self, k: int) -> "FeatureRanking":
        return FeatureRanking(self.entries[:k])


def edr_distance(a, b, epsilon: float) -> int:
    """Edit distance between two real sequences under an epsilon match.

    D(i,0)=i, D(0,j)=j,
    D(i,j) = min(D(i-1,j-1) + match, D(i-1,j) + 1, D(i,j-1) + 1)
    with match = 0 iff |a_i - b_j| <= epsilon.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    prev = np.arange(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur = np.empty(m + 1, dtype=np.int64)
        cur[0] = i
        match = (np.abs(a[i - 1] - b) > epsilon).astype(np.int64)
        for j in range(1, m + 1):
            cur[j] = min(prev[j - 1] + match[j - 1], prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return int(prev[m])


def rank_features(
    target,
    candidates: dict[str, "np.ndarray | list[float]"],
    params: EdrParams = EdrParams(),
    k: int | None = None,
) -> FeatureRanking:
    """Rank candidate sequences by distance to the target, truncated to k.

    All sequences must cover the same year range; ties break on the
    lexicographically smaller code so the ordering is deterministic.
    """
    target = np.asarray(target, dtype=float)
    if k is None:
        k = len(candidates)
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > len(candidates):
        raise DataError(
            f"k={k} exceeds the number of candidates ({len(candidates)})"
        )
    scored = []
    for code in sorted(candidates):
        seq = np.asarray(candidates[code], dtype=float)
        if len(seq) != len(target):
            raise DataError(
                f"candidate {code} has length {len(seq)}, target has {len(target)}"
            )
        scored.append((edr_distance(target, seq, params.epsilon), code))
    scored.sort()
    entries = tuple(
        RankEntry(code, dist, rank)
        for rank, (dist, code) in enumerate(scored[:k], start=1)
    )
    return FeatureRanking(entries)
