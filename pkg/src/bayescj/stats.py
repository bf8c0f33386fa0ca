"""Rank-comparison statistics for evaluating estimated orderings.

Normalised Kendall distance counts how many of the C(N, 2) item pairs
two orderings disagree on; the Wilcoxon rank-sum test compares two
samples of such distances across trials, exactly for small samples and
by normal approximation otherwise.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np
from scipy.stats import mannwhitneyu, rankdata

EXACT_WILCOXON_LIMIT = 20


def _as_order(ranking) -> list[int]:
    order = getattr(ranking, "order", ranking)
    return [int(x) for x in order]


def _count_inversions(seq: list[int]) -> int:
    """Merge-sort inversion count, O(n log n)."""
    if len(seq) <= 1:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    seq[:] = merged + left[i:] + right[j:]
    return count


def kendall_tau_normalized(truth, estimate) -> float:
    """Fraction of item pairs the two orderings place in opposite order.

    0 for identical orderings, 1 for a full reversal.  Accepts rankings
    or plain id sequences; both must order the same item set.
    """
    truth_order = _as_order(truth)
    est_order = _as_order(estimate)
    if sorted(truth_order) != sorted(est_order):
        raise ValueError("orderings must cover the same item set")
    n = len(truth_order)
    if n < 2:
        return 0.0
    position = {item: pos for pos, item in enumerate(truth_order)}
    relabelled = [position[item] for item in est_order]
    return _count_inversions(relabelled) / comb(n, 2)


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float], alternative: str = "less") -> float:
    """One-tailed rank-sum p-value for "values in a are smaller".

    With 20 or fewer pooled values the null distribution is enumerated
    exactly over all rank splits (midranks for ties); larger samples use
    the tie-corrected normal approximation with continuity correction.
    """
    if alternative not in ("less", "greater"):
        raise ValueError(f"alternative must be 'less' or 'greater', got {alternative!r}")
    if alternative == "greater":
        return wilcoxon_rank_sum(b, a, "less")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    if len(a) + len(b) <= EXACT_WILCOXON_LIMIT:
        return _exact_rank_sum_p(a, b)
    return float(mannwhitneyu(a, b, alternative="less", method="asymptotic").pvalue)


def _exact_rank_sum_p(a: np.ndarray, b: np.ndarray) -> float:
    """P(rank sum of a group this small or smaller) over all label splits."""
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)  # midranks; exactly representable halves
    observed = float(ranks[: len(a)].sum())
    at_most = 0
    total = 0
    for subset in combinations(range(len(pooled)), len(a)):
        total += 1
        if float(ranks[list(subset)].sum()) <= observed:
            at_most += 1
    return at_most / total


def bonferroni_alpha(comparisons: int, family_alpha: float = 0.05) -> float:
    """Per-test significance level keeping the family-wise rate at 5%."""
    if comparisons < 1:
        raise ValueError(f"need at least one comparison, got {comparisons}")
    return family_alpha / comparisons
