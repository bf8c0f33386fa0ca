"""Per-pair agreement metrics, stopping rules, and moderator interventions.

Two complementary agreement readings come from each pair's Beta posterior
over the preference probability p:

* mode agreement — how far the posterior mode sits from the fence at 0.5,
  scaled so 0.5 maps to 0% and either boundary to 100%;
* expected agreement — the posterior expectation of the same scaled
  distance, E[|p - 0.5|] / 0.5, which unlike the mode keeps paying
  attention to posterior spread.

Both are percentages in [0, 100], symmetric in the pair's orientation.
A metric value t corresponds to the preference lying outside the
symmetric "null" interval [0.5 - t/200, 0.5 + t/200]; the bounds helpers
convert both ways.

Contentious pairs (low expected agreement) can be escalated to a
moderator, whose verdict lands as a bulk pseudo-count on the winning
side — decisive for the ranking, and the pair leaves the selection pool.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .posteriors import PreferenceMatrix, PreferencePosterior

DEFAULT_FLAG_THRESHOLD = 50.0
DEFAULT_PSEUDO_WINS = 1000.0


@dataclass(frozen=True)
class AgreementScore:
    """Agreement metrics for one pair on one criterion."""

    pair: tuple[int, int]
    criterion: int
    map_pct: float
    eap_pct: float
    n_observations: int


@dataclass(frozen=True)
class NullSpace:
    """Symmetric interval around 0.5 that an agreement value excludes."""

    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class ModerationRecord:
    """A moderator's verdict on one contentious pair."""

    pair: tuple[int, int]
    criterion: int
    chosen_winner: int
    pseudo_wins: float = DEFAULT_PSEUDO_WINS
    timestamp: str | None = None
    note: str = ""


@dataclass(frozen=True)
class StoppingReport:
    """Outcome of a stop-or-continue check against an agreement threshold."""

    stop: bool
    metric: str
    threshold: float
    aggregation: str
    value: float
    per_criterion: tuple[float, ...]
    failing: tuple[AgreementScore, ...] = field(repr=False, default=())


def _map_pct(alpha, beta):
    """Vectorised mode agreement; symmetric prior pinned to 0 by convention."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    hi = np.maximum(alpha, beta)
    lo = np.minimum(alpha, beta)
    denom = hi + lo - 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        pct = np.where(denom > 0.0, (hi - lo) / denom * 100.0, 0.0)
    return np.clip(pct, 0.0, 100.0)


def map_metric(posterior: PreferencePosterior) -> float:
    """Mode agreement percentage: |mode - 0.5| / 0.5 * 100.

    The mode is (alpha - 1) / (alpha + beta - 2).  At the flat Beta(1, 1)
    posterior there is no interior mode and the value is defined as 0
    (a uniform posterior carries no agreement at all).  Orientation-free:
    swapping alpha and beta gives the identical value.
    """
    return float(_map_pct(posterior.alpha, posterior.beta))


def _eap_pct(alpha, beta):
    """Vectorised expected agreement, 200 * E[|p - 0.5|] under Beta(a, b).

    Splitting the integral at 0.5 gives the exact identity

        E|p - 0.5| = F - 0.5 + mu * (1 - 2 * I_plus)

    with F = I_0.5(a, b) the CDF at 0.5, mu = a / (a + b) the mean, and
    I_plus = I_0.5(a + 1, b) from the partial expectation of a Beta.
    Evaluated at sorted shapes so orientation symmetry is exact.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    hi = np.maximum(alpha, beta)
    lo = np.minimum(alpha, beta)
    f_half = betainc(hi, lo, 0.5)
    mu = hi / (hi + lo)
    i_plus = betainc(hi + 1.0, lo, 0.5)
    expectation = f_half - 0.5 + mu * (1.0 - 2.0 * i_plus)
    return np.clip(200.0 * expectation, 0.0, 100.0)


def eap_metric(posterior: PreferencePosterior) -> float:
    """Expected agreement percentage: E[|p - 0.5|] / 0.5 * 100.

    50% at the flat prior; rises toward 100% only as the posterior truly
    concentrates away from 0.5, so it is a far more conservative
    stopping signal than the mode-based metric.  Orientation-free.
    """
    return float(_eap_pct(posterior.alpha, posterior.beta))


def agreement_score(matrix: PreferenceMatrix, i: int, j: int, criterion: int = 0) -> AgreementScore:
    post = matrix.posterior(min(i, j), max(i, j), criterion)
    return AgreementScore(
        (min(i, j), max(i, j)),
        criterion,
        map_metric(post),
        eap_metric(post),
        post.n_observations,
    )


def null_space_bounds(metric_pct: float) -> NullSpace:
    """Interval [l, u] around 0.5 that an agreement value t places p outside.

    l = 0.5 - t/200 and u = 0.5 + t/200, so t=50 gives [0.25, 0.75] and
    t=95 gives [0.025, 0.975].
    """
    if not 0.0 <= metric_pct <= 100.0:
        raise ValueError(f"agreement percentage must lie in [0, 100], got {metric_pct}")
    lower = (100.0 - metric_pct) / 200.0
    upper = (100.0 + metric_pct) / 200.0
    return NullSpace(lower, upper)


def threshold_from_bounds(bounds: NullSpace) -> float:
    """Inverse of null_space_bounds: the agreement value is (u - l) * 100."""
    return (bounds.upper - bounds.lower) * 100.0


_METRICS = {"map": _map_pct, "eap": _eap_pct}


def stopping_check(
    matrix: PreferenceMatrix,
    metric: str = "eap",
    threshold: float = 70.0,
    aggregation: str = "min",
) -> StoppingReport:
    """Decide whether judging can stop: aggregated agreement >= threshold.

    The metric is aggregated over pairs within each criterion (worst case
    with ``aggregation="min"``, average with ``"mean"``), then the worst
    criterion decides.  The report carries every (pair, criterion) still
    under the threshold.
    """
    if not 0.0 <= threshold <= 100.0:
        raise ValueError(f"threshold must lie in [0, 100], got {threshold}")
    if metric not in _METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected 'map' or 'eap'")
    if aggregation not in ("min", "mean"):
        raise ValueError(f"unknown aggregation {aggregation!r}; expected 'min' or 'mean'")
    values = _METRICS[metric](matrix.alpha, matrix.beta)  # (D, P)
    per_criterion = values.min(axis=1) if aggregation == "min" else values.mean(axis=1)
    overall = float(per_criterion.min())
    failing = []
    map_all = _map_pct(matrix.alpha, matrix.beta)
    eap_all = _eap_pct(matrix.alpha, matrix.beta)
    for d in range(matrix.n_criteria):
        for k, (i, j) in enumerate(matrix.pairs()):
            if values[d, k] < threshold:
                failing.append(
                    AgreementScore(
                        (i, j), d, float(map_all[d, k]), float(eap_all[d, k]),
                        int(matrix.n_obs[d, k]),
                    )
                )
    return StoppingReport(
        stop=overall >= threshold,
        metric=metric,
        threshold=float(threshold),
        aggregation=aggregation,
        value=overall,
        per_criterion=tuple(float(v) for v in per_criterion),
        failing=tuple(failing),
    )


def flag_low_agreement(
    matrix: PreferenceMatrix,
    eap_threshold: float = DEFAULT_FLAG_THRESHOLD,
) -> list[AgreementScore]:
    """Pairs whose expected agreement falls strictly below the threshold.

    Already-moderated pairs are settled and stay out of the queue.
    Results come back most contentious first (ascending expected
    agreement, ties in canonical pair order).
    """
    if not 0.0 <= eap_threshold <= 100.0:
        raise ValueError(f"threshold must lie in [0, 100], got {eap_threshold}")
    eap_all = _eap_pct(matrix.alpha, matrix.beta)
    map_all = _map_pct(matrix.alpha, matrix.beta)
    flagged = []
    for d in range(matrix.n_criteria):
        for k, (i, j) in enumerate(matrix.pairs()):
            if matrix.moderated[d, k]:
                continue
            if eap_all[d, k] < eap_threshold:
                flagged.append(
                    AgreementScore(
                        (i, j), d, float(map_all[d, k]), float(eap_all[d, k]),
                        int(matrix.n_obs[d, k]),
                    )
                )
    flagged.sort(key=lambda s: (s.eap_pct, s.pair, s.criterion))
    return flagged


def moderate_pair(matrix: PreferenceMatrix, record: ModerationRecord) -> PreferenceMatrix:
    """Apply a moderator verdict as a bulk pseudo-count win.

    The winner's shape parameter grows by ``pseudo_wins`` (1000 by
    default), which drives the pair's win probability to effective
    certainty and retires it from pair selection.  The judgement count
    is untouched — moderation is prior surgery, not an observation.
    """
    i, j = record.pair
    matrix.add_pseudo_wins(record.criterion, i, j, record.chosen_winner, record.pseudo_wins)
    matrix.moderation_log.append(record)
    return matrix


# -- exports ------------------------------------------------------------


def reliability_rows(
    matrix: PreferenceMatrix,
    eap_threshold: float = DEFAULT_FLAG_THRESHOLD,
) -> list[dict]:
    """One row per (pair, criterion) with both metrics and status flags."""
    eap_all = _eap_pct(matrix.alpha, matrix.beta)
    map_all = _map_pct(matrix.alpha, matrix.beta)
    rows = []
    for d in range(matrix.n_criteria):
        for k, (i, j) in enumerate(matrix.pairs()):
            moderated = bool(matrix.moderated[d, k])
            eap = float(eap_all[d, k])
            rows.append(
                {
                    "i": i,
                    "j": j,
                    "d": d,
                    "map": float(map_all[d, k]),
                    "eap": eap,
                    "n": int(matrix.n_obs[d, k]),
                    "flagged": bool(eap < eap_threshold and not moderated),
                    "moderated": moderated,
                }
            )
    return rows


def reliability_report(
    matrix: PreferenceMatrix,
    eap_threshold: float = DEFAULT_FLAG_THRESHOLD,
) -> dict:
    return {"pairs": reliability_rows(matrix, eap_threshold)}


def reliability_json(matrix: PreferenceMatrix, eap_threshold: float = DEFAULT_FLAG_THRESHOLD) -> str:
    return json.dumps(reliability_report(matrix, eap_threshold))


def reliability_csv(matrix: PreferenceMatrix, eap_threshold: float = DEFAULT_FLAG_THRESHOLD) -> str:
    rows = reliability_rows(matrix, eap_threshold)
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=["i", "j", "d", "map", "eap", "n", "flagged", "moderated"],
        lineterminator="\n",
    )
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def moderation_queue(
    matrix: PreferenceMatrix,
    eap_threshold: float = DEFAULT_FLAG_THRESHOLD,
) -> list[dict]:
    """Flagged pairs as plain dicts, most contentious first."""
    return [
        {
            "i": score.pair[0],
            "j": score.pair[1],
            "d": score.criterion,
            "map": score.map_pct,
            "eap": score.eap_pct,
            "n": score.n_observations,
        }
        for score in flag_low_agreement(matrix, eap_threshold)
    ]
