"""
A holistic assessment from first judgement to moderated ranking
===============================================================

Ten scripts, one "overall" criterion, a noisy simulated judge, and a
budget of ten comparisons per item.  We watch the Beta posteriors
accumulate evidence, read off the ranking with its per-item rank
distributions, then let a moderator settle the contested pairs and
measure how much closer to the truth that lands us.
"""

import numpy as np

from bayescj import (
    Criterion,
    Item,
    ModerationRecord,
    eap_metric,
    expected_ranking,
    flag_low_agreement,
    generate_marks,
    kendall_tau_normalized,
    moderate_pair,
    run_session,
    simulate_decision,
    true_ranking,
)

rng = np.random.default_rng(5)
weights = np.array([1.0])

# Ground truth the judge can only perceive through noise: ten items
# marked on a 0-5 scale, sigma=1.0 perceptual blur.
marks = generate_marks(10, ["overall"], "relaxed", seed=5)
truth = true_ranking(marks, weights)
print("true order (best first):", truth.order)


# The decision source is the human stand-in: each item's perceived
# quality is a normal draw around its true mark, higher draw wins.
def decide(i, j, _criterion):
    winner = simulate_decision(marks[i], marks[j], None, rng, weights)
    return i if winner is marks[i] else j


items = [Item(i, label=f"script {i}") for i in range(10)]
session = run_session(
    items, [Criterion(0, "overall")], "entropy", decide, K=10, seed=5
)
print(f"\nran {len(session.log)} judgements "
      f"({session.matrix.n_pairs} pairs, entropy-selected)")

# The ranking is read straight off the posterior win probabilities:
# every item's rank is 1 + a sum of independent "beats me" coin flips,
# so we get a full probability mass function per item, not just a point.
ranking = expected_ranking(session.matrix, 0)
print("\nestimated order:", ranking.order)
print("distance from truth:",
      round(kendall_tau_normalized(truth, ranking), 4))

best = ranking.order[0]
pmf = ranking.distributions[best].pmf
print(f"\nitem {best} rank pmf (first five ranks):",
      np.round(pmf[:5], 3))

# Reliability per pair: expected agreement below 50% means the posterior
# still straddles the fence on that comparison.
flagged = flag_low_agreement(session.matrix, 50.0)
print(f"\n{len(flagged)} contested pairs (expected agreement < 50%):")
for score in flagged[:5]:
    print(f"  pair {score.pair}  EAP {score.eap_pct:5.1f}%  "
          f"after {score.n_observations} judgements")

# A moderator reviews each contested pair against the source material
# (here: the hidden true marks) and records a verdict.  Moderation is
# prior surgery — a bulk pseudo-count win — not another observation.
matrix = session.matrix
for score in flagged:
    i, j = score.pair
    better = i if marks[i].overall(weights) >= marks[j].overall(weights) else j
    moderate_pair(matrix, ModerationRecord(pair=(i, j), criterion=0,
                                           chosen_winner=better))
    print(f"  moderated {score.pair}: item {better} wins, "
          f"EAP now {eap_metric(matrix.posterior(i, j, 0)):.1f}%")

after = expected_ranking(matrix, 0)
print("\norder after moderation:", after.order)
print("distance from truth:",
      round(kendall_tau_normalized(truth, after), 4))
