"""
Three rubric criteria, one ranking: blending judgements with weights
====================================================================

Essays are judged separately on fluency, structure, and ideas, each
with its own bank of Beta posteriors.  The overall ranking depends on
how the criteria are weighted; we compare the two blending rules
(rank-side vs preference-side mixing), show that putting all weight on
one criterion collapses both to that criterion's own ranking, and sweep
the weight simplex with a low-discrepancy sequence to see how stable
the winner is.
"""

import numpy as np

from bayescj import (
    Criterion,
    Item,
    expected_ranking,
    generate_marks,
    halton_simplex_weights,
    mcp_ranking,
    mcr_ranking,
    radar_data,
    run_session,
    simulate_decision,
)

NAMES = ["fluency", "structure", "ideas"]
rng = np.random.default_rng(21)

marks = generate_marks(8, NAMES, "relaxed", seed=21)


# Judged per criterion: one pair on screen, three independent verdicts.
def decide(i, j, criterion):
    winner = simulate_decision(marks[i], marks[j], criterion, rng)
    return i if winner is marks[i] else j


items = [Item(i, label=f"essay {i}") for i in range(8)]
criteria = [Criterion(d, NAMES[d], 1 / 3) for d in range(3)]
session = run_session(items, criteria, "entropy", decide, K=8, seed=21)
matrix = session.matrix
print(f"{len(session.log)} judgements recorded "
      f"({matrix.n_criteria} per screen)\n")

# Per-criterion rankings rarely agree with each other.
for d, name in enumerate(NAMES):
    print(f"{name:>10}: {expected_ranking(matrix, d).order}")

# Equal weights, both blending rules.  Rank-side mixing averages the
# per-criterion rank pmfs; preference-side mixing averages the Beta
# CDFs first and derives ranks from the blended win probabilities.
equal = np.full(3, 1 / 3)
print("\nequal-weight blends:")
print("  rank-side mix      :", mcr_ranking(matrix, equal).order)
print("  preference-side mix:", mcp_ranking(matrix, equal).order)

# Degenerate weights are a built-in sanity check: (1, 0, 0) must equal
# the fluency-only ranking exactly, for both rules.
lam = np.array([1.0, 0.0, 0.0])
fluency_only = expected_ranking(matrix, 0)
assert mcr_ranking(matrix, lam).order == fluency_only.order
assert mcp_ranking(matrix, lam).order == fluency_only.order
print("\n(1,0,0) weights reproduce the fluency ranking exactly")

# Sweep the simplex: 64 Halton points cover weight space evenly, so a
# handful of runs tells us how sensitive the top spot is to weighting.
sweep = halton_simplex_weights(3, 64)
winners = {}
for lam in sweep:
    top = mcp_ranking(matrix, lam).order[0]
    winners[top] = winners.get(top, 0) + 1
print("\ntop-ranked essay across 64 weightings:")
for item, count in sorted(winners.items(), key=lambda kv: -kv[1]):
    print(f"  essay {item}: {count}/64 weight vectors")

# The radar export gives each item's expected rank per criterion —
# the shape a dashboard would draw as one polygon per essay.
radar = radar_data(matrix)
axes = [axis["name"] for axis in radar["axes"]]
print(f"\nradar axes: {axes}")
for entry in radar["items"][:3]:
    ranks = [round(r, 2) for r in entry["expected_ranks"]]
    print(f"  {entry['label'] or entry['item_id']}: {ranks}")
