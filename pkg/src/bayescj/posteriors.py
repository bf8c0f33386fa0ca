"""Beta-posterior preference state for pairwise comparative judgement.

Every unordered item pair, on every criterion, carries a Beta(alpha, beta)
posterior over the proportion of judgements preferring one item to the other.
Judgements are Bernoulli outcomes, so the posterior update is conjugate:
the winner's shape parameter goes up by one per decision.

Pairs are stored once, in canonical (low id, high id) orientation, with
``alpha`` counting wins for the lower-id item.  All queries go through
orientation-normalising accessors, so callers never see the convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.special import betainc

WEIGHT_SUM_TOL = 1e-9
DEFAULT_PRIOR = (1.0, 1.0)


@dataclass(frozen=True)
class Item:
    """One thing being ranked. Ids must be dense 0..N-1 within an assessment."""

    id: int
    label: str = ""
    external_key: str | None = None


@dataclass(frozen=True)
class Criterion:
    """One judging dimension with its contribution to the overall mark."""

    id: int
    name: str
    weight: float = 1.0


@dataclass(frozen=True)
class PreferencePosterior:
    """Beta(alpha, beta) over "first item preferred" for one ordered pair.

    ``n_observations`` counts unit-weight judgements only; moderator
    pseudo-counts raise ``alpha``/``beta`` without touching it.
    """

    alpha: float
    beta: float
    n_observations: int = 0

    def swapped(self) -> "PreferencePosterior":
        """The same posterior seen from the other item's side."""
        return PreferencePosterior(self.beta, self.alpha, self.n_observations)


def _win_prob(alpha, beta):
    """P(first item preferred) = P(p > 0.5) under Beta(alpha, beta).

    Works on scalars or arrays.  Computed so that swapping alpha and beta
    yields the exact floating-point complement: both orientations derive
    from the single value I_0.5(hi, lo), using the reflection identity
    1 - I_x(a, b) = I_{1-x}(b, a).
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    hi = np.maximum(alpha, beta)
    lo = np.minimum(alpha, beta)
    q = betainc(hi, lo, 0.5)  # tail mass on the losing side; q <= 0.5
    p = np.where(alpha > beta, 1.0 - q, q)
    p = np.where(alpha == beta, 0.5, p)
    if p.ndim == 0:
        return float(p)
    return p


def prob_preferred(posterior: PreferencePosterior) -> float:
    """Probability that the posterior's first item wins a comparison.

    This is one minus the Beta CDF at 0.5.  Exactly 0.5 at the symmetric
    prior, and ``prob_preferred(p) + prob_preferred(p.swapped()) == 1.0``
    holds exactly in floating point.
    """
    return _win_prob(posterior.alpha, posterior.beta)


def validate_criteria(criteria: Sequence[Criterion]) -> None:
    if len(criteria) < 1:
        raise ValueError("at least one criterion is required")
    ids = [c.id for c in criteria]
    if sorted(ids) != list(range(len(criteria))):
        raise ValueError(f"criterion ids must be dense 0..{len(criteria) - 1}, got {ids}")
    weights = np.array([c.weight for c in criteria], dtype=float)
    if np.any(weights < 0.0) or np.any(weights > 1.0):
        raise ValueError(f"criterion weights must lie in [0, 1], got {weights.tolist()}")
    total = float(weights.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"criterion weights must sum to 1, got {total!r}")


def validate_items(items: Sequence[Item]) -> None:
    if len(items) < 2:
        raise ValueError("at least two items are required")
    ids = [it.id for it in items]
    if sorted(ids) != list(range(len(items))):
        raise ValueError(f"item ids must be dense 0..{len(items) - 1}, got {ids}")
    keys = [it.external_key for it in items if it.external_key is not None]
    if len(keys) != len(set(keys)):
        raise ValueError("duplicate external_key among items")


class PreferenceMatrix:
    """All pairwise preference posteriors of one assessment.

    Holds exactly one posterior per unordered pair per criterion, stored as
    shape arrays of size (criteria, pairs).  Pair k enumerates the upper
    triangle in lexicographic order: (0,1), (0,2), ..., (1,2), ...

    Reads are pure; mutation (``record``, ``add_pseudo_wins``) must be
    serialised per assessment by the caller.
    """

    def __init__(
        self,
        items: Sequence[Item],
        criteria: Sequence[Criterion],
        prior: tuple[float, float] = DEFAULT_PRIOR,
    ):
        validate_items(items)
        validate_criteria(criteria)
        if prior[0] <= 0 or prior[1] <= 0:
            raise ValueError(f"prior shapes must be positive, got {prior}")
        self.items = list(items)
        self.criteria = list(criteria)
        self.prior = (float(prior[0]), float(prior[1]))
        n = len(items)
        d = len(criteria)
        self._n_items = n
        self._pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        self._pair_index = {pair: k for k, pair in enumerate(self._pairs)}
        p = len(self._pairs)
        self.alpha = np.full((d, p), self.prior[0], dtype=float)
        self.beta = np.full((d, p), self.prior[1], dtype=float)
        self.n_obs = np.zeros((d, p), dtype=np.int64)
        self.moderated = np.zeros((d, p), dtype=bool)
        self.moderation_log: list = []

    # -- shape queries -------------------------------------------------

    @property
    def n_items(self) -> int:
        return self._n_items

    @property
    def n_criteria(self) -> int:
        return len(self.criteria)

    @property
    def n_pairs(self) -> int:
        return len(self._pairs)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.criteria], dtype=float)

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Canonical (i, j), i < j, in selection tie-break order."""
        return iter(self._pairs)

    def pair_index(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError(f"pair must consist of two distinct items, got ({i}, {j})")
        key = (i, j) if i < j else (j, i)
        try:
            return self._pair_index[key]
        except KeyError:
            raise KeyError(f"unknown pair ({i}, {j})") from None

    # -- posterior access ----------------------------------------------

    def posterior(self, i: int, j: int, criterion: int = 0) -> PreferencePosterior:
        """Posterior for "i preferred to j", whichever way the pair is stored."""
        k = self.pair_index(i, j)
        a = float(self.alpha[criterion, k])
        b = float(self.beta[criterion, k])
        n = int(self.n_obs[criterion, k])
        if i < j:
            return PreferencePosterior(a, b, n)
        return PreferencePosterior(b, a, n)

    def win_probability(self, i: int, j: int, criterion: int = 0) -> float:
        post = self.posterior(i, j, criterion)
        return prob_preferred(post)

    def win_matrix(self, criterion: int) -> np.ndarray:
        """Ordered matrix W with W[i, j] = P(i preferred to j); diagonal 0.5.

        W[i, j] + W[j, i] == 1.0 exactly for every off-diagonal pair.
        """
        a = self.alpha[criterion]
        b = self.beta[criterion]
        hi = np.maximum(a, b)
        lo = np.minimum(a, b)
        q = betainc(hi, lo, 0.5)
        p_low = np.where(a == b, 0.5, np.where(a > b, 1.0 - q, q))
        p_high = np.where(a == b, 0.5, np.where(a > b, q, 1.0 - q))
        w = np.full((self._n_items, self._n_items), 0.5)
        rows = np.array([ij[0] for ij in self._pairs], dtype=np.intp)
        cols = np.array([ij[1] for ij in self._pairs], dtype=np.intp)
        w[rows, cols] = p_low
        w[cols, rows] = p_high
        return w

    def win_matrices(self) -> np.ndarray:
        """Stack of win_matrix over criteria, shape (D, N, N)."""
        return np.stack([self.win_matrix(d) for d in range(self.n_criteria)])

    # -- mutation ------------------------------------------------------

    def record(self, criterion: int, i: int, j: int, winner: int) -> None:
        """Fold one judgement into the pair's posterior."""
        if winner not in (i, j):
            raise ValueError(f"winner {winner} is not in pair ({i}, {j})")
        k = self.pair_index(i, j)
        low = min(i, j)
        if winner == low:
            self.alpha[criterion, k] += 1.0
        else:
            self.beta[criterion, k] += 1.0
        self.n_obs[criterion, k] += 1

    def add_pseudo_wins(self, criterion: int, i: int, j: int, winner: int, count: float) -> None:
        """Bulk pseudo-count intervention; does not touch n_observations."""
        if winner not in (i, j):
            raise ValueError(f"winner {winner} is not in pair ({i}, {j})")
        if count <= 0:
            raise ValueError(f"pseudo-win count must be positive, got {count}")
        k = self.pair_index(i, j)
        if winner == min(i, j):
            self.alpha[criterion, k] += float(count)
        else:
            self.beta[criterion, k] += float(count)
        self.moderated[criterion, k] = True

    # -- selection support ---------------------------------------------

    def pair_moderated(self) -> np.ndarray:
        """Boolean mask over pairs: True when any criterion was moderated."""
        return self.moderated.any(axis=0)

    def selectable_pairs(self) -> list[tuple[int, int]]:
        mask = self.pair_moderated()
        return [pair for k, pair in enumerate(self._pairs) if not mask[k]]

    # -- lifecycle -----------------------------------------------------

    def copy(self) -> "PreferenceMatrix":
        dup = PreferenceMatrix(self.items, self.criteria, self.prior)
        dup.alpha = self.alpha.copy()
        dup.beta = self.beta.copy()
        dup.n_obs = self.n_obs.copy()
        dup.moderated = self.moderated.copy()
        dup.moderation_log = list(self.moderation_log)
        return dup

    def same_state(self, other: "PreferenceMatrix") -> bool:
        """Bit-exact state equality (shape parameters compared as doubles)."""
        return (
            self._n_items == other._n_items
            and self.n_criteria == other.n_criteria
            and np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.n_obs, other.n_obs)
            and np.array_equal(self.moderated, other.moderated)
        )

    # -- serialisation -------------------------------------------------

    def snapshot(self, assessment_id: str = "") -> dict:
        """Full-state snapshot. Doubles survive a JSON round trip bit-exactly."""
        posteriors = []
        for d in range(self.n_criteria):
            for k, (i, j) in enumerate(self._pairs):
                posteriors.append(
                    {
                        "i": i,
                        "j": j,
                        "d": d,
                        "alpha": float(self.alpha[d, k]),
                        "beta": float(self.beta[d, k]),
                        "n": int(self.n_obs[d, k]),
                        "moderated": bool(self.moderated[d, k]),
                    }
                )
        return {
            "assessment_id": assessment_id,
            "prior": list(self.prior),
            "items": [
                {"id": it.id, "label": it.label, "external_key": it.external_key}
                for it in self.items
            ],
            "criteria": [
                {"id": c.id, "name": c.name, "weight": c.weight} for c in self.criteria
            ],
            "posteriors": posteriors,
        }

    def to_json(self, assessment_id: str = "") -> str:
        return json.dumps(self.snapshot(assessment_id))

    @classmethod
    def from_snapshot(cls, snap: dict) -> "PreferenceMatrix":
        items = [
            Item(int(e["id"]), e.get("label", ""), e.get("external_key"))
            for e in snap["items"]
        ]
        criteria = [
            Criterion(int(e["id"]), e["name"], float(e["weight"]))
            for e in snap["criteria"]
        ]
        prior = tuple(snap.get("prior", DEFAULT_PRIOR))
        matrix = cls(items, criteria, prior)  # type: ignore[arg-type]
        for entry in snap["posteriors"]:
            k = matrix.pair_index(int(entry["i"]), int(entry["j"]))
            d = int(entry["d"])
            matrix.alpha[d, k] = float(entry["alpha"])
            matrix.beta[d, k] = float(entry["beta"])
            matrix.n_obs[d, k] = int(entry["n"])
            matrix.moderated[d, k] = bool(entry.get("moderated", False))
        return matrix

    @classmethod
    def from_json(cls, text: str) -> "PreferenceMatrix":
        return cls.from_snapshot(json.loads(text))


def _item_id(item) -> int:
    return item.id if isinstance(item, Item) else int(item)


def _criterion_id(criterion) -> int:
    return criterion.id if isinstance(criterion, Criterion) else int(criterion)


def init_assessment(
    items: Iterable[Item],
    criteria: Iterable[Criterion],
    prior: tuple[float, float] = DEFAULT_PRIOR,
) -> PreferenceMatrix:
    """Fresh assessment: every pair on every criterion at the flat prior."""
    return PreferenceMatrix(list(items), list(criteria), prior)


def record_judgement(matrix: PreferenceMatrix, criterion, pair, winner) -> PreferenceMatrix:
    """Record one pairwise decision; returns the (mutated) matrix."""
    i, j = (_item_id(pair[0]), _item_id(pair[1]))
    matrix.record(_criterion_id(criterion), i, j, _item_id(winner))
    return matrix
