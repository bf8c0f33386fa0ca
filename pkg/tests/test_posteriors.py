"""Tests for Beta preference posteriors and the pairwise belief store."""

from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import beta as beta_dist

from bayescj import (
    Criterion,
    Item,
    PreferenceMatrix,
    PreferencePosterior,
    init_assessment,
    prob_preferred,
    record_judgement,
)
from bayescj.posteriors import validate_criteria, validate_items


def _quad_prob_above_half(a: float, b: float) -> float:
    """Numerically integrate the Beta(a, b) density over [0.5, 1]."""
    val, _ = integrate.quad(
        lambda x: beta_dist.pdf(x, a, b), 0.5, 1.0, epsabs=1e-13, epsrel=1e-13
    )
    return val


# ---------------------------------------------------------------------------
# PreferencePosterior basics
# ---------------------------------------------------------------------------


def test_prior_is_flat_and_uninformative():
    post = PreferencePosterior(1.0, 1.0)
    assert post.alpha == 1.0
    assert post.beta == 1.0
    assert prob_preferred(post) == 0.5


def test_swapped_exchanges_parameters():
    post = PreferencePosterior(4.0, 2.0, n_observations=4)
    sw = post.swapped()
    assert (sw.alpha, sw.beta) == (2.0, 4.0)
    assert sw.n_observations == 4


def test_prob_preferred_single_win():
    # One observed win on top of the flat prior: P(p > 1/2 | Beta(2,1)) = 3/4.
    assert prob_preferred(PreferencePosterior(2.0, 1.0)) == 0.75


@pytest.mark.parametrize(
    "a,b",
    [(2.0, 1.0), (1.0, 2.0), (5.0, 1.0), (3.0, 3.0), (7.5, 2.5), (1.0, 1.0)],
)
def test_prob_preferred_matches_quadrature(a, b):
    expected = _quad_prob_above_half(a, b)
    assert prob_preferred(PreferencePosterior(a, b)) == pytest.approx(expected, abs=1e-12)


@given(
    a=st.floats(min_value=1.0, max_value=60.0),
    b=st.floats(min_value=1.0, max_value=60.0),
)
@settings(max_examples=300)
def test_prob_preferred_complement_is_exact(a, b):
    """Swapping the shape parameters must complement the probability exactly.

    This is a bit-level identity, not an approximation: both orientations are
    computed from the same regularized incomplete beta evaluation.
    """
    p = prob_preferred(PreferencePosterior(a, b))
    q = prob_preferred(PreferencePosterior(b, a))
    assert 0.0 <= p <= 1.0
    assert p + q == 1.0


def test_prob_preferred_symmetric_shapes_give_half():
    for a in (1.0, 2.0, 3.5, 10.0):
        assert prob_preferred(PreferencePosterior(a, a)) == 0.5


# ---------------------------------------------------------------------------
# Item / Criterion validation
# ---------------------------------------------------------------------------


def test_validate_items_requires_dense_ids():
    with pytest.raises(ValueError):
        validate_items([Item(0), Item(2)])


def test_validate_items_rejects_duplicate_external_keys():
    with pytest.raises(ValueError):
        validate_items([Item(0, external_key="a"), Item(1, external_key="a")])


def test_validate_criteria_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        validate_criteria([Criterion(0, "x", 0.3), Criterion(1, "y", 0.3)])


def test_validate_criteria_rejects_negative_weight():
    with pytest.raises(ValueError):
        validate_criteria([Criterion(0, "x", -0.2), Criterion(1, "y", 1.2)])


def test_single_criterion_default_weight_is_valid():
    validate_criteria([Criterion(0, "overall")])


# ---------------------------------------------------------------------------
# PreferenceMatrix construction and updates
# ---------------------------------------------------------------------------


def _small_matrix(n=4, d=2, prior=(1.0, 1.0)) -> PreferenceMatrix:
    items = [Item(i, label=f"item-{i}") for i in range(n)]
    criteria = [Criterion(k, f"c{k}", 1.0 / d) for k in range(d)]
    return init_assessment(items, criteria, prior=prior)


def test_matrix_shapes_and_pair_count():
    m = _small_matrix(n=5, d=3)
    pairs = list(m.pairs())
    assert len(pairs) == 10
    assert m.alpha.shape == (3, 10)
    assert m.beta.shape == (3, 10)
    assert pairs == sorted(pairs)
    assert all(i < j for i, j in pairs)


def test_pair_index_orientation_free():
    m = _small_matrix()
    assert m.pair_index(1, 3) == m.pair_index(3, 1)
    with pytest.raises(ValueError):
        m.pair_index(2, 2)


def test_record_updates_canonical_orientation():
    m = _small_matrix()
    m.record(0, 2, 1, winner=2)  # reversed presentation order
    post = m.posterior(1, 2, criterion=0)
    # alpha tracks wins for the lower id: item 1 lost, so beta moved.
    assert (post.alpha, post.beta) == (1.0, 2.0)
    assert post.n_observations == 1
    # The swapped view is returned when the pair is queried the other way up.
    rev = m.posterior(2, 1, criterion=0)
    assert (rev.alpha, rev.beta) == (2.0, 1.0)


def test_record_rejects_foreign_winner():
    m = _small_matrix()
    with pytest.raises(ValueError):
        m.record(0, 0, 1, winner=3)


def test_record_judgement_wrapper_returns_updated_matrix():
    m = _small_matrix()
    out = record_judgement(m, 0, (0, 1), winner=0)
    assert out is m
    assert out.posterior(0, 1).n_observations == 1
    assert out.posterior(0, 1).alpha == 2.0


def test_record_judgement_accepts_objects():
    items = [Item(i) for i in range(3)]
    crits = [Criterion(0, "overall")]
    m = init_assessment(items, crits)
    record_judgement(m, crits[0], (items[2], items[0]), winner=items[2])
    assert m.posterior(0, 2).beta == 2.0


def test_win_matrix_rows_are_exact_complements():
    rng = np.random.default_rng(7)
    m = _small_matrix(n=6, d=1)
    for _ in range(40):
        i, j = rng.choice(6, size=2, replace=False)
        m.record(0, int(i), int(j), winner=int(rng.choice([i, j])))
    w = m.win_matrix(0)
    assert w.shape == (6, 6)
    assert np.all(np.diag(w) == 0.5)
    # Exact float complement across the diagonal, every entry.
    assert np.all(w + w.T == 1.0)


def test_win_matrix_matches_posterior_queries():
    m = _small_matrix(n=4, d=2)
    m.record(1, 0, 3, winner=3)
    m.record(1, 0, 3, winner=3)
    w = m.win_matrix(1)
    assert w[0, 3] == prob_preferred(m.posterior(0, 3, criterion=1))
    assert w[3, 0] == prob_preferred(m.posterior(3, 0, criterion=1))


def test_win_matrices_stacks_per_criterion():
    m = _small_matrix(n=3, d=2)
    m.record(0, 0, 1, winner=0)
    stack = m.win_matrices()
    assert stack.shape == (2, 3, 3)
    assert np.array_equal(stack[0], m.win_matrix(0))
    assert np.array_equal(stack[1], m.win_matrix(1))


def test_informative_prior_shifts_all_pairs():
    m = _small_matrix(n=3, d=1, prior=(2.0, 2.0))
    post = m.posterior(0, 2)
    assert (post.alpha, post.beta) == (2.0, 2.0)
    assert post.n_observations == 0


# ---------------------------------------------------------------------------
# Moderation bookkeeping
# ---------------------------------------------------------------------------


def test_add_pseudo_wins_marks_pair_moderated():
    m = _small_matrix(n=3, d=2)
    m.add_pseudo_wins(0, 0, 1, winner=0, count=1000.0)
    post = m.posterior(0, 1, criterion=0)
    assert post.alpha == 1001.0
    assert post.beta == 1.0
    # Pseudo-observations do not count as real judgements.
    assert post.n_observations == 0
    mod = m.pair_moderated()
    assert mod[m.pair_index(0, 1)]
    assert not mod[m.pair_index(0, 2)]


def test_selectable_pairs_excludes_moderated():
    m = _small_matrix(n=3, d=1)
    m.add_pseudo_wins(0, 1, 2, winner=1, count=10.0)
    assert (1, 2) not in m.selectable_pairs()
    assert (0, 1) in m.selectable_pairs()
    assert (0, 2) in m.selectable_pairs()


# ---------------------------------------------------------------------------
# Copy / equality / serialization round trips
# ---------------------------------------------------------------------------


def test_copy_is_independent():
    m = _small_matrix()
    c = m.copy()
    c.record(0, 0, 1, winner=0)
    assert m.posterior(0, 1).n_observations == 0
    assert not m.same_state(c)


def test_same_state_is_bit_exact():
    a = _small_matrix()
    b = _small_matrix()
    assert a.same_state(b)
    a.record(1, 2, 3, winner=3)
    assert not a.same_state(b)
    b.record(1, 2, 3, winner=3)
    assert a.same_state(b)


def test_snapshot_round_trip_preserves_everything():
    m = _small_matrix(n=5, d=3, prior=(1.5, 1.5))
    rng = np.random.default_rng(11)
    for _ in range(30):
        i, j = rng.choice(5, size=2, replace=False)
        m.record(int(rng.integers(3)), int(i), int(j), winner=int(i))
    m.add_pseudo_wins(2, 0, 4, winner=4, count=1000.0)

    snap = m.snapshot(assessment_id="abc")
    assert snap["assessment_id"] == "abc"
    restored = PreferenceMatrix.from_snapshot(snap)
    assert restored.same_state(m)


def test_json_round_trip_is_valid_json_and_bit_exact():
    m = _small_matrix(n=4, d=2)
    m.record(0, 0, 1, winner=1)
    m.record(1, 2, 3, winner=2)
    blob = m.to_json(assessment_id="x1")
    doc = json.loads(blob)
    assert doc["assessment_id"] == "x1"
    assert {p["i"] < p["j"] for p in doc["posteriors"]} == {True}
    restored = PreferenceMatrix.from_json(blob)
    assert restored.same_state(m)


def test_snapshot_records_items_and_criteria():
    items = [Item(0, label="essay A", external_key="EK-0"), Item(1, label="essay B")]
    criteria = [Criterion(0, "clarity", 0.25), Criterion(1, "depth", 0.75)]
    m = init_assessment(items, criteria)
    snap = m.snapshot()
    assert snap["items"][0]["external_key"] == "EK-0"
    assert snap["criteria"][1] == {"id": 1, "name": "depth", "weight": 0.75}
    assert snap["prior"] == [1.0, 1.0]


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=25))
@settings(max_examples=60)
def test_random_update_streams_round_trip(moves):
    m = _small_matrix(n=4, d=2)
    for i, j in moves:
        if i == j:
            continue
        m.record(0, i, j, winner=i)
    restored = PreferenceMatrix.from_json(m.to_json())
    assert restored.same_state(m)
