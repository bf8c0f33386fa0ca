"""Rank distributions and overall orderings from pairwise win probabilities.

An item's rank is one plus the number of rivals judged better, so under
independent pairwise posteriors the rank is one plus a Poisson-binomial
count with success probabilities ``P(j preferred to i)``.  The pmf comes
from iterative convolution, exact up to float rounding, in O(N^2) per item.

Two aggregations combine criteria into a single ordering:

* rank mixture — per-criterion rank pmfs blended by the criterion weights,
  so the mixture expected rank is the weighted mean of per-criterion
  expected ranks;
* preference mixture — the pairwise win probabilities themselves blended
  by weight, then ranks rebuilt from the blended matrix.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .posteriors import PreferenceMatrix, _win_prob


@dataclass(frozen=True)
class RankDistribution:
    """Probability mass over ranks 1..N for one item."""

    item: int
    pmf: np.ndarray

    @property
    def n_items(self) -> int:
        return len(self.pmf)

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, len(self.pmf) + 1)

    @property
    def expected_rank(self) -> float:
        return float(np.dot(self.support, self.pmf))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def prob_rank_at_most(self, rank: int) -> float:
        """P(rank <= given), with ranks counted from 1 (best)."""
        if rank < 1:
            return 0.0
        rank = min(rank, len(self.pmf))
        return float(self.pmf[:rank].sum())

    def mode(self) -> int:
        return int(np.argmax(self.pmf)) + 1


@dataclass(frozen=True)
class Ranking:
    """Items ordered best first by expected rank (ties broken by item id)."""

    order: tuple[int, ...]
    expected_ranks: np.ndarray
    criterion: int | None = None
    distributions: tuple[RankDistribution, ...] | None = field(default=None, repr=False)

    @property
    def n_items(self) -> int:
        return len(self.order)

    def position(self, item: int) -> int:
        """1-based position of the item in the ordering."""
        return self.order.index(item) + 1

    def distribution(self, item: int) -> RankDistribution:
        if self.distributions is None:
            raise ValueError("ranking was built without full rank distributions")
        return self.distributions[item]


def poisson_binomial_pmf(probs: np.ndarray) -> np.ndarray:
    """pmf of a sum of independent Bernoulli(p_k), by direct convolution."""
    probs = np.asarray(probs, dtype=float)
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for q in probs:
        pmf[1:] = pmf[1:] * (1.0 - q) + pmf[:-1] * q
        pmf[0] *= 1.0 - q
    return pmf


def rank_distribution(win_matrix: np.ndarray, item: int) -> RankDistribution:
    """Exact rank pmf for one item given an ordered win-probability matrix.

    ``win_matrix[a, b]`` is P(a preferred to b).  The count of rivals that
    beat the item reads down its column.
    """
    beats_me = np.delete(win_matrix[:, item], item)
    return RankDistribution(item, poisson_binomial_pmf(beats_me))


def _order(expected: np.ndarray) -> tuple[int, ...]:
    # stable sort: equal expected ranks fall back to item-id order
    return tuple(int(i) for i in np.argsort(expected, kind="stable"))


def expected_ranks_from_matrix(win_matrix: np.ndarray) -> np.ndarray:
    """E[rank_i] = 1 + sum_j P(j preferred to i); totals N(N+1)/2."""
    col = win_matrix.sum(axis=0) - np.diag(win_matrix)
    return 1.0 + col


def expected_ranking(
    matrix: PreferenceMatrix,
    criterion: int = 0,
    full: bool = True,
) -> Ranking:
    """Ranking on one criterion; ``full=False`` skips the per-item pmfs."""
    w = matrix.win_matrix(criterion)
    expected = expected_ranks_from_matrix(w)
    dists = None
    if full:
        dists = tuple(rank_distribution(w, i) for i in range(matrix.n_items))
    return Ranking(_order(expected), expected, criterion, dists)


def _resolve_weights(matrix: PreferenceMatrix, weights) -> np.ndarray:
    lam = matrix.weights if weights is None else np.asarray(weights, dtype=float)
    if len(lam) != matrix.n_criteria:
        raise ValueError(
            f"expected {matrix.n_criteria} weights, got {len(lam)}"
        )
    if np.any(lam < 0) or abs(float(lam.sum()) - 1.0) > 1e-9:
        raise ValueError(f"mixture weights must be non-negative and sum to 1, got {lam.tolist()}")
    return lam


# -- rank-mixture aggregation ------------------------------------------


def mcr_combine(
    distributions: Sequence[RankDistribution],
    weights: Sequence[float],
) -> RankDistribution:
    """Blend per-criterion rank pmfs for one item: P(r=a) = sum_d w_d P_d(r=a)."""
    if len(distributions) != len(weights):
        raise ValueError("one weight per distribution is required")
    items = {d.item for d in distributions}
    if len(items) != 1:
        raise ValueError(f"distributions describe different items: {sorted(items)}")
    lam = np.asarray(weights, dtype=float)
    pmf = np.zeros_like(distributions[0].pmf)
    for w, dist in zip(lam, distributions):
        pmf += w * dist.pmf
    return RankDistribution(distributions[0].item, pmf)


def mcr_ranking(matrix: PreferenceMatrix, weights=None, full: bool = True) -> Ranking:
    """Multi-criteria ranking by weighted mixture of per-criterion rank pmfs.

    Expected ranks blend linearly, E[r_i] = sum_d w_d E_d[r_i], so a
    degenerate weight vector reproduces the single-criterion ranking
    bit for bit.
    """
    lam = _resolve_weights(matrix, weights)
    win = matrix.win_matrices()
    per_criterion_expected = np.stack(
        [expected_ranks_from_matrix(win[d]) for d in range(matrix.n_criteria)]
    )
    expected = lam @ per_criterion_expected
    mixed = None
    if full:
        per_criterion = [
            [rank_distribution(win[d], i) for i in range(matrix.n_items)]
            for d in range(matrix.n_criteria)
        ]
        mixed = tuple(
            mcr_combine([per_criterion[d][i] for d in range(matrix.n_criteria)], lam)
            for i in range(matrix.n_items)
        )
    return Ranking(_order(expected), expected, None, mixed)


# -- preference-mixture aggregation ------------------------------------


@dataclass(frozen=True)
class MixturePreference:
    """Weighted Beta mixture over "first item preferred" for one pair."""

    weights: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray

    def cdf(self, x) -> np.ndarray | float:
        """Mixture CDF: F(x) = sum_d w_d F_Beta(x; a_d, b_d)."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("preference probabilities live on [0, 1]")
        parts = betainc(
            self.alphas[:, None], self.betas[:, None], np.atleast_1d(x)[None, :]
        )
        out = self.weights @ parts
        if x.ndim == 0:
            return float(out[0])
        return out

    def win_probability(self) -> float:
        """P(first item preferred): weighted blend of component win probabilities."""
        parts = np.asarray(_win_prob(self.alphas, self.betas))
        return float(np.dot(self.weights, parts))

    def sample_wins(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Monte Carlo draws of "first item wins" from the mixture.

        Each draw picks a component by weight, draws p from its Beta, and
        calls a win when p >= 0.5.
        """
        z = rng.random(size)
        edges = np.cumsum(self.weights)
        comp = np.clip(np.searchsorted(edges, z, side="right"), 0, len(self.weights) - 1)
        p = rng.beta(self.alphas[comp], self.betas[comp])
        return p >= 0.5


def mixture_preference(matrix: PreferenceMatrix, i: int, j: int, weights=None) -> MixturePreference:
    """The pair (i, j)'s cross-criteria preference mixture, oriented i-first."""
    lam = _resolve_weights(matrix, weights)
    posts = [matrix.posterior(i, j, d) for d in range(matrix.n_criteria)]
    return MixturePreference(
        lam,
        np.array([p.alpha for p in posts]),
        np.array([p.beta for p in posts]),
    )


def mcp_cdf(matrix: PreferenceMatrix, i: int, j: int, x, weights=None):
    """CDF of the blended preference distribution for "i preferred to j"."""
    return mixture_preference(matrix, i, j, weights).cdf(x)


def mcp_win_matrix(matrix: PreferenceMatrix, weights=None) -> np.ndarray:
    """Ordered matrix of blended win probabilities, P(i over j) = sum_d w_d P_d.

    Each orientation is blended independently, so a degenerate weight
    vector reproduces the single-criterion win matrix bit for bit.
    """
    lam = _resolve_weights(matrix, weights)
    stack = matrix.win_matrices()
    mixed = np.einsum("d,dij->ij", lam, stack)
    np.fill_diagonal(mixed, 0.5)
    return mixed


def mcp_ranking(
    matrix: PreferenceMatrix,
    weights=None,
    mode: str = "exact",
    samples: int = 100_000,
    seed: int | None = None,
    full: bool = True,
) -> Ranking:
    """Multi-criteria ranking from blended win probabilities.

    ``mode="exact"`` blends the analytic per-criterion win probabilities.
    ``mode="monte_carlo"`` estimates each pair's blended win probability as
    the fraction of mixture draws that land at or above 0.5, using
    ``samples`` draws per pair from the given seed.
    """
    if mode == "exact":
        w = mcp_win_matrix(matrix, weights)
    elif mode == "monte_carlo":
        if samples < 1:
            raise ValueError(f"monte_carlo mode needs at least one sample, got {samples}")
        lam = _resolve_weights(matrix, weights)
        rng = np.random.default_rng(seed)
        n = matrix.n_items
        w = np.full((n, n), 0.5)
        for i, j in matrix.pairs():
            mix = mixture_preference(matrix, i, j, lam)
            p = float(mix.sample_wins(rng, samples).mean())
            w[i, j] = p
            w[j, i] = 1.0 - p
    else:
        raise ValueError(f"unknown mode {mode!r}; expected 'exact' or 'monte_carlo'")
    expected = expected_ranks_from_matrix(w)
    dists = None
    if full:
        dists = tuple(rank_distribution(w, i) for i in range(matrix.n_items))
    return Ranking(_order(expected), expected, None, dists)


# -- exports ------------------------------------------------------------


def ranking_to_rows(ranking: Ranking) -> list[dict]:
    """One row per item in rank order: id, expected rank, full rank pmf."""
    rows = []
    for item in ranking.order:
        row: dict = {"item_id": item, "expected_rank": float(ranking.expected_ranks[item])}
        if ranking.distributions is not None:
            pmf = ranking.distributions[item].pmf
            for a, p in enumerate(pmf, start=1):
                row[f"rank_{a}_prob"] = float(p)
        rows.append(row)
    return rows


def ranking_to_json(ranking: Ranking) -> str:
    return json.dumps({"order": list(ranking.order), "items": ranking_to_rows(ranking)})


def ranking_to_csv(ranking: Ranking) -> str:
    rows = ranking_to_rows(ranking)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def radar_data(matrix: PreferenceMatrix) -> dict:
    """Per-item expected ranks on every criterion, for radar-style display."""
    axes = [{"criterion": c.id, "name": c.name, "weight": c.weight} for c in matrix.criteria]
    per_criterion = np.stack(
        [
            expected_ranks_from_matrix(matrix.win_matrix(d))
            for d in range(matrix.n_criteria)
        ]
    )
    items = [
        {
            "item_id": it.id,
            "label": it.label,
            "expected_ranks": [float(per_criterion[d, it.id]) for d in range(matrix.n_criteria)],
        }
        for it in matrix.items
    ]
    return {"axes": axes, "items": items}
