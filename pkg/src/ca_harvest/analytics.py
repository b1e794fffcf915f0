"""Community-level analyses: participation rankings, rank correlation,
cross-tabs against external label sets, and quantile binning along
sociodemographic axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ca_harvest.embeddings import cosine_similarity
from ca_harvest.errors import (
    DataFormatError,
    DegenerateInputError,
    MissingDataError,
)
from ca_harvest.labels import TIE_ORDER, ParticipationLabel
from ca_harvest.pipeline import Prediction

DEFAULT_MIN_COMMENTS = 100
DEFAULT_BINS = 5


@dataclass(frozen=True)
class CommunityStats:
    community: str
    n_comments: int
    keyword_fraction: float
    participation_fraction: float
    level_fractions: dict[ParticipationLabel, float]


def community_stats(
    rows: Iterable[tuple[str, bool, ParticipationLabel]]
) -> list[CommunityStats]:
    """Aggregate per-community fractions from (community, has_keywords,
    final label) rows. Every comment counts as classified; comments
    that never produced a snippet enter as None upstream.
    """
    n: dict[str, int] = {}
    keyword: dict[str, int] = {}
    labels: dict[str, dict[ParticipationLabel, int]] = {}
    for community, has_keywords, label in rows:
        n[community] = n.get(community, 0) + 1
        keyword[community] = keyword.get(community, 0) + (1 if has_keywords else 0)
        per = labels.setdefault(community, {})
        per[label] = per.get(label, 0) + 1

    stats = []
    for community in sorted(n):
        total = n[community]
        per = labels[community]
        level_fractions = {
            label: per.get(label, 0) / total for label in TIE_ORDER
        }
        participation = sum(
            count for label, count in per.items() if label.is_participation
        )
        stats.append(
            CommunityStats(
                community=community,
                n_comments=total,
                keyword_fraction=keyword[community] / total,
                participation_fraction=participation / total,
                level_fractions=level_fractions,
            )
        )
    return stats


def rank_communities(
    stats: Iterable[CommunityStats],
    criterion: str = "participation",
    min_comments: int = DEFAULT_MIN_COMMENTS,
) -> list[tuple[int, CommunityStats]]:
    """Rank qualifying communities (>= min_comments) by descending
    fraction; ties break lexicographically by community name.
    """
    if criterion == "participation":
        key = lambda s: s.participation_fraction
    elif criterion == "keyword":
        key = lambda s: s.keyword_fraction
    else:
        raise ValueError(f"unknown ranking criterion {criterion!r}")
    qualifying = [s for s in stats if s.n_comments >= min_comments]
    qualifying.sort(key=lambda s: (-key(s), s.community))
    return [(rank, s) for rank, s in enumerate(qualifying, start=1)]


def _average_ranks(values: Sequence[float]) -> list[float]:
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        # Average of the 1-based ranks i+1 .. j+1.
        rank = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = rank
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties.

    Pearson correlation of the rank vectors. Rank means are (n+1)/2
    identically (average ranking preserves the rank sum), which keeps
    the monotone and antitone cases exactly +/-1.0.
    """
    if len(x) != len(y):
        raise DataFormatError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise DegenerateInputError("rank correlation needs at least two points")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    mean = (n + 1) / 2
    sxx = 0.0
    syy = 0.0
    sxy = 0.0
    for a, b in zip(rx, ry):
        dx = a - mean
        dy = b - mean
        sxx += dx * dx
        syy += dy * dy
        sxy += dx * dy
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError(
            "rank correlation undefined: a rank vector has zero variance"
        )
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class CrosstabRow:
    category: str
    participation: int
    none: int

    @property
    def total(self) -> int:
        return self.participation + self.none

    @property
    def participation_fraction(self) -> float:
        return self.participation / self.total

    @property
    def none_fraction(self) -> float:
        return self.none / self.total


def crosstab(
    predictions: Iterable[Prediction], external: Mapping[str, str]
) -> list[CrosstabRow]:
    """Count predictions per external category, split by the binary
    participation view. Rows sorted by category name; only categories
    that actually occur appear.
    """
    counts: dict[str, list[int]] = {}
    for prediction in predictions:
        try:
            category = external[prediction.sample_id]
        except KeyError:
            raise MissingDataError(
                f"no external category for sample {prediction.sample_id!r}"
            ) from None
        pair = counts.setdefault(category, [0, 0])
        if prediction.final.is_participation:
            pair[0] += 1
        else:
            pair[1] += 1
    return [
        CrosstabRow(category=category, participation=pair[0], none=pair[1])
        for category, pair in sorted(counts.items())
    ]


def dimension_score(community_vector, axis_vector) -> float:
    """Cosine of the community vector against a sociodemographic axis."""
    return cosine_similarity(community_vector, axis_vector)


@dataclass(frozen=True)
class QuantileBin:
    bin_index: int
    lo: float
    hi: float
    n_communities: int
    mean_fraction: float | None
    communities: tuple[str, ...]


def quantile_bins(
    scores: Sequence[tuple[str, float]],
    k: int,
    fractions: Mapping[str, float],
) -> list[QuantileBin]:
    """Bin communities by sample quantiles of their axis scores.

    Edges are the i/k linear sample quantiles. Bins are left-closed,
    right-open; the last bin is closed. Every community lands in
    exactly one bin; per-bin means are over the supplied participation
    fractions.
    """
    if k < 2:
        raise ValueError("quantile binning needs k >= 2")
    if len(scores) < k:
        raise DegenerateInputError(
            f"{len(scores)} communities cannot fill {k} bins"
        )
    values = np.asarray([score for _, score in scores], dtype=np.float64)
    if len(set(values.tolist())) < k:
        raise DegenerateInputError(
            f"only {len(set(values.tolist()))} distinct scores for {k} bins"
        )
    for community, _ in scores:
        if community not in fractions:
            raise MissingDataError(f"no participation fraction for {community!r}")

    edges = np.quantile(values, [i / k for i in range(1, k)])
    assigned: list[list[tuple[str, float]]] = [[] for _ in range(k)]
    for (community, score) in scores:
        idx = int(np.searchsorted(edges, score, side="right"))
        assigned[min(idx, k - 1)].append((community, score))

    lo_edge = float(values.min())
    hi_edge = float(values.max())
    bins = []
    for i in range(k):
        members = assigned[i]
        lo = lo_edge if i == 0 else float(edges[i - 1])
        hi = hi_edge if i == k - 1 else float(edges[i])
        if members:
            mean_fraction = sum(fractions[c] for c, _ in members) / len(members)
        else:
            mean_fraction = None
        bins.append(
            QuantileBin(
                bin_index=i,
                lo=lo,
                hi=hi,
                n_communities=len(members),
                mean_fraction=mean_fraction,
                communities=tuple(c for c, _ in members),
            )
        )
    return bins
