"""Low-discrepancy weight vectors on the probability simplex.

Halton points (radical-inverse digits in coprime prime bases) cover the
unit cube far more evenly than random draws; sorting a (D-1)-dimensional
point together with implicit end points 0 and 1 and taking adjacent gaps
maps it onto the D-simplex, preserving the even coverage.  Used to sweep
criterion-weight vectors without committing to any particular weighting.
"""

from __future__ import annotations

import numpy as np


def _first_primes(count: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return primes


def radical_inverse(index: int, base: int) -> float:
    """Digit-reversed fraction of ``index`` in the given base; index >= 1."""
    result = 0.0
    fraction = 1.0 / base
    while index > 0:
        result += (index % base) * fraction
        index //= base
        fraction /= base
    return result


def halton_sequence(count: int, dims: int, skip: int = 0) -> np.ndarray:
    """``count`` Halton points in [0, 1)^dims, starting after ``skip`` points.

    The sequence starts at index 1, so the first base-2 coordinate is 0.5
    and the first base-3 coordinate is 1/3.
    """
    if dims < 1:
        raise ValueError(f"need at least one dimension, got {dims}")
    if count < 0 or skip < 0:
        raise ValueError("count and skip must be non-negative")
    bases = _first_primes(dims)
    return np.array(
        [
            [radical_inverse(index, base) for base in bases]
            for index in range(skip + 1, skip + count + 1)
        ]
    )


def simplex_from_unit(point: np.ndarray) -> np.ndarray:
    """Map a point of [0,1]^(D-1) to D simplex weights by sorted-gap transform."""
    cuts = np.concatenate([[0.0], np.sort(np.asarray(point, dtype=float)), [1.0]])
    return np.diff(cuts)


def halton_simplex_weights(n_criteria: int, count: int, skip: int = 0) -> np.ndarray:
    """``count`` weight vectors over ``n_criteria`` criteria, evenly spread.

    Every row is non-negative and sums to one; the sequence is fully
    deterministic, and ``skip`` drops exactly that many leading vectors.
    """
    if n_criteria < 2:
        raise ValueError(f"need at least two criteria, got {n_criteria}")
    points = halton_sequence(count, n_criteria - 1, skip)
    return np.array([simplex_from_unit(p) for p in points])
