"""Bradley-Terry baseline: latent scores from pairwise win counts.

Each item gets a positive score gamma_i with P(i beats j) =
gamma_i / (gamma_i + gamma_j).  The log-likelihood of a win-count matrix
is maximised by minorisation-maximisation (MM): each sweep divides an
item's total wins by a weighted sum of its match-up rates, which
provably never decreases the likelihood.  Scores are reported in the
sum-to-one gauge.

Also here: the scale-separation reliability (SSR) index — the classical
"how much of the observed score spread is real" summary, computed on the
log-score scale with standard errors from the observed Fisher
information.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class BtmFit:
    """A fitted Bradley-Terry model in the sum-to-one gauge."""

    gamma: np.ndarray
    standard_errors: np.ndarray
    converged: bool
    iterations: int
    loglik: float
    loglik_trace: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def n_items(self) -> int:
        return len(self.gamma)

    @property
    def order(self) -> tuple[int, ...]:
        """Item ids best first: descending score, ties by item id."""
        return tuple(int(i) for i in np.argsort(-self.gamma, kind="stable"))

    def win_probability(self, i: int, j: int) -> float:
        return float(self.gamma[i] / (self.gamma[i] + self.gamma[j]))


def _check_win_counts(win_counts: np.ndarray) -> np.ndarray:
    w = np.asarray(win_counts, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"win counts must be a square matrix, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("win counts must be non-negative")
    if np.any(np.diag(w) != 0):
        raise ValueError("items cannot beat themselves: diagonal must be zero")
    return w


def btm_loglik(gamma: np.ndarray, win_counts: np.ndarray) -> float:
    """Log-likelihood sum_{i != j} w_ij * (ln g_i - ln(g_i + g_j)).

    Invariant under positive rescaling of gamma.
    """
    g = np.asarray(gamma, dtype=float)
    w = _check_win_counts(win_counts)
    if np.any(g <= 0):
        raise ValueError("scores must be strictly positive")
    if len(g) != w.shape[0]:
        raise ValueError(f"{len(g)} scores for {w.shape[0]} items")
    gsum = g[:, None] + g[None, :]
    return float(np.sum(w * (np.log(g)[:, None] - np.log(gsum))))


def _connected(n_ij: np.ndarray) -> bool:
    """Is the comparison graph (edges where any games were played) connected?"""
    n = n_ij.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for u in np.nonzero(n_ij[v] > 0)[0]:
            if not seen[u]:
                seen[u] = True
                stack.append(int(u))
    return bool(seen.all())


def btm_fit(
    win_counts: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> BtmFit:
    """Maximum-likelihood scores by MM iteration.

    Stops when the largest score movement drops below ``tol`` (then
    ``converged`` is true) or after ``max_iter`` sweeps.  Items that never
    won anything sit at exactly zero — the likelihood has no interior
    maximum for them.  A disconnected comparison graph has no common
    scale and is an error.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    w = _check_win_counts(win_counts)
    n = w.shape[0]
    n_ij = w + w.T
    if n < 2 or not _connected(n_ij):
        raise ValueError("comparison graph is disconnected: no common scale exists")
    wins = w.sum(axis=1)
    gamma = np.full(n, 1.0 / n)
    trace = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gsum = gamma[:, None] + gamma[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            rates = np.where(n_ij > 0, n_ij / gsum, 0.0)
        new = np.where(wins > 0, wins / rates.sum(axis=1), 0.0)
        new = new / new.sum()
        trace.append(_loglik_trace_value(new, w))
        delta = float(np.max(np.abs(new - gamma)))
        gamma = new
        if delta < tol:
            converged = True
            break
    se = _standard_errors(gamma, n_ij)
    return BtmFit(
        gamma=gamma,
        standard_errors=se,
        converged=converged,
        iterations=iterations,
        loglik=trace[-1],
        loglik_trace=np.array(trace),
    )


def _loglik_trace_value(g: np.ndarray, w: np.ndarray) -> float:
    """btm_loglik with the 0 * ln(0) = 0 convention for boundary scores."""
    gsum = g[:, None] + g[None, :]
    ratio = g[:, None] / np.where(gsum > 0, gsum, 1.0)
    return float(np.sum(xlogy(w, ratio)))


def _standard_errors(gamma: np.ndarray, n_ij: np.ndarray) -> np.ndarray:
    """Log-scale standard errors from the diagonal observed Fisher information.

    On theta = ln(gamma), the information for item i is
    sum_j n_ij * p_ij * (1 - p_ij); items pinned at a boundary get an
    infinite standard error.
    """
    gsum = gamma[:, None] + gamma[None, :]
    p = gamma[:, None] / np.where(gsum > 0, gsum, 1.0)
    info = (n_ij * p * (1.0 - p)).sum(axis=1)
    se = np.full(len(gamma), np.inf)
    pos = info > 0
    se[pos] = 1.0 / np.sqrt(info[pos])
    return se


def ssr(fit: BtmFit) -> float:
    """Scale-separation reliability of a fit, in [0, 1].

    The observed spread of log-scores overstates the true spread by the
    estimation error, so SSR = (S2_obs - MSE) / S2_obs with S2_obs the
    sample variance of the log-scores and MSE the mean squared standard
    error.  Items without a finite log-score or standard error carry no
    scale information and are left out; with fewer than two usable items
    (or no observed spread) the index is 0.
    """
    if not fit.converged:
        raise ValueError("reliability of an unconverged fit is undefined")
    with np.errstate(divide="ignore"):
        theta = np.log(fit.gamma)
    usable = np.isfinite(theta) & np.isfinite(fit.standard_errors)
    if usable.sum() < 2:
        return 0.0
    s2_obs = float(np.var(theta[usable], ddof=1))
    if s2_obs == 0.0:
        return 0.0
    mse = float(np.mean(fit.standard_errors[usable] ** 2))
    return float(np.clip((s2_obs - mse) / s2_obs, 0.0, 1.0))


def win_counts_from_log(log, n_items: int) -> np.ndarray:
    """Pool a judgement log (all criteria together) into a win-count matrix."""
    w = np.zeros((n_items, n_items))
    for entry in log:
        if entry.get("source") == "moderator":
            continue
        i, j = (int(entry["pair"][0]), int(entry["pair"][1]))
        winner = int(entry["winner"])
        loser = j if winner == i else i
        w[winner, loser] += 1.0
    return w


def btm_export(fit: BtmFit) -> dict:
    """JSON-ready summary of a fit, with non-finite errors as null."""
    return {
        "gamma": [float(g) for g in fit.gamma],
        "stderr": [float(s) if np.isfinite(s) else None for s in fit.standard_errors],
        "ssr": ssr(fit) if fit.converged else None,
        "iterations": fit.iterations,
        "converged": fit.converged,
    }
