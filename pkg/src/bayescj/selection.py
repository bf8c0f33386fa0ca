"""Pair-selection strategies and the sequential judging loop.

Selection decides which pair the next judgement is spent on:

* entropy — pick the pair whose preference posterior carries the most
  differential entropy (summed over criteria when there are several),
  i.e. the judgement expected to teach the most;
* random — uniform over pairs, repeats allowed;
* nrp — "no repeating pairs": a shuffled round-robin pool that refills
  only once every pair has been shown.

Moderated pairs are settled by fiat and are never selected by any
strategy.  The judging loop itself is strictly sequential: every
judgement reshapes the posterior the next selection looks at.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import betaln, digamma

from .posteriors import Criterion, Item, PreferenceMatrix, init_assessment
from .ranking import Ranking, expected_ranking, mcp_ranking

STRATEGIES = ("entropy", "random", "nrp")


def beta_entropy(alpha, beta):
    """Differential entropy of Beta(alpha, beta), in nats.

    H = ln B(a, b) - (a-1) psi(a) - (b-1) psi(b) + (a+b-2) psi(a+b).

    Exactly 0 at Beta(1, 1) and negative everywhere else on the
    integer-count lattice; more observations at a fixed win ratio mean a
    tighter posterior and lower entropy.  Accepts scalars or arrays.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    h = (
        betaln(alpha, beta)
        - (alpha - 1.0) * digamma(alpha)
        - (beta - 1.0) * digamma(beta)
        + (alpha + beta - 2.0) * digamma(alpha + beta)
    )
    if h.ndim == 0:
        return float(h)
    return h


def pair_entropies(matrix: PreferenceMatrix, weighted: bool = False) -> np.ndarray:
    """Total entropy per pair: plain sum over criteria, or weight-blended."""
    h = beta_entropy(matrix.alpha, matrix.beta)  # (D, P)
    if weighted:
        return matrix.weights @ h
    return h.sum(axis=0)


def select_entropy(matrix: PreferenceMatrix, weighted: bool = False) -> tuple[int, int]:
    """The selectable pair with maximal total entropy.

    Ties resolve to the earliest pair in canonical order, so a fresh
    assessment always starts at (0, 1).  The weighted variant blends
    per-criterion entropies by the criterion weights instead of summing.
    """
    totals = pair_entropies(matrix, weighted)
    blocked = matrix.pair_moderated()
    if blocked.all():
        raise ValueError("no selectable pairs: every pair has been moderated")
    totals = np.where(blocked, -np.inf, totals)
    k = int(np.argmax(totals))
    return list(matrix.pairs())[k]


def select_random(
    pairs: Sequence[tuple[int, int]],
    rng: np.random.Generator | int | None,
) -> tuple[int, int]:
    """Uniform draw over the given pairs; repeats across calls are expected."""
    if len(pairs) == 0:
        raise ValueError("no selectable pairs")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return tuple(pairs[int(rng.integers(len(pairs)))])


@dataclass
class SelectionState:
    """Mutable strategy state carried across one assessment's selections.

    Only the nrp strategy really needs it (the current round's unused
    pool); entropy and random are stateless apart from the rng.
    """

    strategy: str
    rng: np.random.Generator
    pool: list[tuple[int, int]] = field(default_factory=list)
    weighted_entropy: bool = False

    @classmethod
    def create(cls, strategy: str, seed=None, weighted_entropy: bool = False) -> "SelectionState":
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
        return cls(strategy, np.random.default_rng(seed), weighted_entropy=weighted_entropy)

    def next_pair(self, matrix: PreferenceMatrix) -> tuple[int, int]:
        if self.strategy == "entropy":
            return select_entropy(matrix, self.weighted_entropy)
        selectable = matrix.selectable_pairs()
        if not selectable:
            raise ValueError("no selectable pairs: every pair has been moderated")
        if self.strategy == "random":
            return select_random(selectable, self.rng)
        return self._next_from_pool(matrix, selectable)

    def _next_from_pool(self, matrix, selectable) -> tuple[int, int]:
        while True:
            if not self.pool:
                self.pool = list(selectable)
                self.rng.shuffle(self.pool)
            candidate = tuple(self.pool.pop())
            k = matrix.pair_index(*candidate)
            if not matrix.pair_moderated()[k]:
                return candidate


def select_nrp(state: SelectionState, matrix: PreferenceMatrix) -> tuple[int, int]:
    """Next pair from the no-repeating-pairs pool, refilling when empty."""
    selectable = matrix.selectable_pairs()
    if not selectable:
        raise ValueError("no selectable pairs: every pair has been moderated")
    return state._next_from_pool(matrix, selectable)


# -- session loop -------------------------------------------------------


@dataclass
class SessionResult:
    """Everything a finished (or aborted) judging session produced."""

    log: list[dict]
    trajectory: list[Ranking]
    matrix: PreferenceMatrix
    aborted: bool = False
    error: str | None = None

    @property
    def final_ranking(self) -> Ranking:
        return self.trajectory[-1]


def default_ranking_fn(matrix: PreferenceMatrix) -> Ranking:
    """Holistic snapshot ranking: plain single-criterion, else blended."""
    if matrix.n_criteria == 1:
        return expected_ranking(matrix, 0, full=False)
    return mcp_ranking(matrix, full=False)


def run_session(
    items: Sequence[Item],
    criteria: Sequence[Criterion],
    strategy: str,
    decision_source: Callable[[int, int, int], int],
    K: int,
    seed=None,
    prior: tuple[float, float] = (1.0, 1.0),
    weighted_entropy: bool = False,
    ranking_fn: Callable[[PreferenceMatrix], Ranking] | None = None,
    source_label: str = "simulated",
) -> SessionResult:
    """Run the full judging loop with a budget of N * K pair selections.

    Each iteration selects one pair and obtains one judgement per
    criterion for it from ``decision_source(i, j, criterion_id)``, then
    records the post-update ranking.  With a deterministic decision
    source and a fixed seed the log and trajectory are bit-reproducible.
    If the decision source raises, the partial log and trajectory are
    preserved on the result with ``aborted=True``.
    """
    if K < 1:
        raise ValueError(f"budget multiplier K must be >= 1, got {K}")
    matrix = init_assessment(items, criteria, prior)
    state = SelectionState.create(strategy, seed, weighted_entropy)
    rank_of = ranking_fn if ranking_fn is not None else default_ranking_fn
    budget = matrix.n_items * K
    log: list[dict] = []
    trajectory: list[Ranking] = []
    for _ in range(budget):
        i, j = state.next_pair(matrix)
        try:
            for criterion in matrix.criteria:
                winner = decision_source(i, j, criterion.id)
                matrix.record(criterion.id, i, j, winner)
                log.append(
                    {
                        "seq": len(log),
                        "pair": [i, j],
                        "criterion": criterion.id,
                        "winner": int(winner),
                        "source": source_label,
                        "timestamp": None,
                    }
                )
        except Exception as exc:  # noqa: BLE001 - abort contract keeps partial state
            trajectory.append(rank_of(matrix))
            return SessionResult(log, trajectory, matrix, aborted=True, error=str(exc))
        trajectory.append(rank_of(matrix))
    return SessionResult(log, trajectory, matrix)


def replay_log(
    items: Sequence[Item],
    criteria: Sequence[Criterion],
    log: Sequence[dict],
    prior: tuple[float, float] = (1.0, 1.0),
) -> PreferenceMatrix:
    """Rebuild the preference state by folding a judgement log over the prior.

    Moderator entries carry ``pseudo_wins`` and replay as bulk
    pseudo-counts; everything else replays as a unit judgement.
    """
    matrix = init_assessment(items, criteria, prior)
    for entry in log:
        i, j = (int(entry["pair"][0]), int(entry["pair"][1]))
        criterion = int(entry["criterion"])
        winner = int(entry["winner"])
        if entry.get("source") == "moderator":
            matrix.add_pseudo_wins(criterion, i, j, winner, float(entry["pseudo_wins"]))
        else:
            matrix.record(criterion, i, j, winner)
    return matrix
