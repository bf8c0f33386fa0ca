"""Desk-scale experiment harness for judging-strategy comparisons.

A trial takes a set of items with known per-criterion marks, hides the
marks behind a noisy simulated assessor, runs a judging session under
one strategy, and scores the estimated ordering against the true one
with normalised Kendall distance.  The grid runner sweeps item count,
budget multiplier, strategy, and (optionally QMC-sampled) criterion
weights over repeated trials, then aggregates medians and pairwise
rank-sum significance counts.

Strategy names combine an aggregation scheme with a selection rule,
e.g. ``mcp-entropy``: ``bcj`` judges a single holistic criterion, while
``mcr``/``mcp`` judge every criterion and blend ranks or preferences.
"""

from __future__ import annotations

import csv
import io
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .btm import btm_fit, ssr, win_counts_from_log
from .posteriors import Criterion, Item
from .qmc import halton_simplex_weights
from .ranking import Ranking, expected_ranking, mcp_ranking, mcr_ranking
from .selection import run_session
from .stats import bonferroni_alpha, kendall_tau_normalized, wilcoxon_rank_sum

ID_COLUMN_NAMES = {"id", "item", "key", "external_key"}

GRID_STRATEGIES = (
    "bcj-entropy",
    "mcr-entropy",
    "mcr-random",
    "mcr-nrp",
    "mcp-entropy",
    "mcp-random",
    "mcp-nrp",
)


@dataclass(frozen=True)
class SimulatorProfile:
    """Noise model and mark scale for the simulated assessor."""

    name: str
    sigma: float
    scale: tuple[float, float]


PROFILES = {
    "relaxed": SimulatorProfile("relaxed", 0.5, (0.0, 5.0)),
    "strict": SimulatorProfile("strict", 3.0, (0.0, 100.0)),
}


@dataclass(frozen=True)
class MarkedItem:
    """An item with known ground-truth marks, one per criterion."""

    external_key: str
    marks: np.ndarray
    sigma: np.ndarray
    scale: tuple[float, float]
    criterion_names: tuple[str, ...]

    @property
    def n_criteria(self) -> int:
        return len(self.marks)

    def overall(self, weights: np.ndarray) -> float:
        """Weight-blended holistic mark."""
        return float(np.dot(weights, self.marks))


def _validate_marks(marks: np.ndarray, scale: tuple[float, float], where: str) -> None:
    lo, hi = scale
    if np.any(marks < lo) or np.any(marks > hi):
        raise ValueError(f"{where}: mark outside the declared {lo}-{hi} scale")


def ingest_marks(source, profile: str | SimulatorProfile = "relaxed") -> list[MarkedItem]:
    """Parse a marks CSV into items carrying the profile's noise and scale.

    The header names the criteria; an optional leading id/item/key column
    supplies external keys, otherwise row numbers do.  Marks must be
    numeric and within the profile's scale.
    """
    prof = PROFILES[profile] if isinstance(profile, str) else profile
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
    else:
        text = str(source)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise ValueError("marks file needs a header row and at least one item row")
    header = [cell.strip() for cell in rows[0]]
    has_key = header[0].lower() in ID_COLUMN_NAMES
    names = tuple(header[1:] if has_key else header)
    if not names:
        raise ValueError("marks file names no criteria")
    items = []
    for line_no, row in enumerate(rows[1:], start=2):
        cells = [cell.strip() for cell in row]
        key = cells[0] if has_key else f"item-{line_no - 2}"
        mark_cells = cells[1:] if has_key else cells
        if len(mark_cells) != len(names):
            raise ValueError(
                f"line {line_no}: {len(mark_cells)} marks for {len(names)} criteria"
            )
        try:
            marks = np.array([float(cell) for cell in mark_cells])
        except ValueError as exc:
            raise ValueError(f"line {line_no}: non-numeric mark ({exc})") from None
        _validate_marks(marks, prof.scale, f"line {line_no}")
        items.append(
            MarkedItem(key, marks, np.full(len(names), prof.sigma), prof.scale, names)
        )
    return items


def generate_marks(
    n_items: int,
    criterion_names: Sequence[str],
    profile: str | SimulatorProfile = "relaxed",
    distribution: str = "uniform",
    seed=None,
) -> list[MarkedItem]:
    """Synthetic ground-truth marks, uniform or clipped-normal over the scale."""
    prof = PROFILES[profile] if isinstance(profile, str) else profile
    if n_items < 1:
        raise ValueError("need at least one item")
    lo, hi = prof.scale
    rng = np.random.default_rng(seed)
    shape = (n_items, len(criterion_names))
    if distribution == "uniform":
        marks = rng.uniform(lo, hi, shape)
    elif distribution == "normal":
        mid, spread = (lo + hi) / 2.0, (hi - lo) / 6.0
        marks = np.clip(rng.normal(mid, spread, shape), lo, hi)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    names = tuple(criterion_names)
    return [
        MarkedItem(
            f"item-{i}", marks[i], np.full(len(names), prof.sigma), prof.scale, names
        )
        for i in range(n_items)
    ]


def marks_to_csv(items: Sequence[MarkedItem]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", *items[0].criterion_names])
    for item in items:
        writer.writerow([item.external_key, *[repr(float(m)) for m in item.marks]])
    return buf.getvalue()


def stratified_subsample(
    items: Sequence[MarkedItem],
    n: int,
    seed=None,
    weights: np.ndarray | None = None,
) -> list[MarkedItem]:
    """Draw n items covering the whole mark range.

    Items are binned into n equal-width strata by overall mark and one is
    drawn per stratum; an empty stratum borrows from the nearest
    non-empty one, so degenerate mark distributions still yield n
    distinct items.
    """
    if not 1 <= n <= len(items):
        raise ValueError(f"cannot draw {n} items from {len(items)}")
    d = items[0].n_criteria
    lam = np.full(d, 1.0 / d) if weights is None else np.asarray(weights, dtype=float)
    overall = np.array([item.overall(lam) for item in items])
    lo, hi = float(overall.min()), float(overall.max())
    if hi > lo:
        strata = np.minimum((overall - lo) / (hi - lo) * n, n - 1).astype(int)
    else:
        strata = np.zeros(len(items), dtype=int)
    pools: list[list[int]] = [[] for _ in range(n)]
    for idx, s in enumerate(strata):
        pools[s].append(idx)
    rng = np.random.default_rng(seed)
    chosen = []
    for s in range(n):
        donor = min(
            (t for t in range(n) if pools[t]),
            key=lambda t: (abs(t - s), t),
        )
        pick = pools[donor].pop(int(rng.integers(len(pools[donor]))))
        chosen.append(items[pick])
    return chosen


def simulate_decision(
    first: MarkedItem,
    second: MarkedItem,
    criterion: int | None,
    rng: np.random.Generator,
    weights: np.ndarray | None = None,
) -> MarkedItem:
    """One noisy judgement: each item's perceived quality is a normal draw
    around its true mark, and the higher draw wins (first wins ties).

    ``criterion=None`` judges holistically on the weight-blended mark.
    """
    if criterion is None:
        d = first.n_criteria
        lam = np.full(d, 1.0 / d) if weights is None else np.asarray(weights, dtype=float)
        mu_a, mu_b = first.overall(lam), second.overall(lam)
        sd_a = float(np.dot(lam, first.sigma))
        sd_b = float(np.dot(lam, second.sigma))
    else:
        mu_a, mu_b = float(first.marks[criterion]), float(second.marks[criterion])
        sd_a, sd_b = float(first.sigma[criterion]), float(second.sigma[criterion])
    x_a = rng.normal(mu_a, sd_a)
    x_b = rng.normal(mu_b, sd_b)
    return first if x_a >= x_b else second


def true_ranking(items: Sequence[MarkedItem], weights: np.ndarray) -> Ranking:
    """Ground-truth ordering by descending overall mark (ids = positions)."""
    overall = np.array([item.overall(weights) for item in items])
    order = tuple(int(i) for i in np.argsort(-overall, kind="stable"))
    expected = np.empty(len(items))
    expected[list(order)] = np.arange(1, len(items) + 1)
    return Ranking(order, expected)


# -- single trial -------------------------------------------------------


@dataclass(frozen=True)
class TauTrajectory:
    """Estimate-vs-truth distance after each judging iteration."""

    values: np.ndarray

    @property
    def final(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class TrialResult:
    n: int
    k: int
    strategy: str
    weight_index: int
    trial: int
    final_tau: float | None
    trajectory: TauTrajectory | None
    ssr: float | None
    error: str | None = None
    final_order: tuple[int, ...] | None = None
    log: list[dict] | None = field(default=None, repr=False, compare=False)


def split_strategy(strategy: str) -> tuple[str, str]:
    """Split e.g. 'mcp-entropy' into aggregation and selection parts."""
    aggregation, _, sel = strategy.partition("-")
    if aggregation not in ("bcj", "mcr", "mcp") or sel not in ("entropy", "random", "nrp"):
        raise ValueError(
            f"unknown strategy {strategy!r}; expected <bcj|mcr|mcp>-<entropy|random|nrp>"
        )
    return aggregation, sel


def _trial_seed(base_seed: int, n: int, k: int, strategy: str, weight_index: int, trial: int):
    """Order-independent per-trial seeding: every cell derives its own stream."""
    return np.random.SeedSequence(
        (base_seed, n, k, zlib.crc32(strategy.encode()), weight_index, trial)
    )


def run_trial(
    marks: Sequence[MarkedItem],
    n: int,
    k: int,
    strategy: str,
    weights: np.ndarray,
    base_seed: int = 0,
    weight_index: int = 0,
    trial: int = 0,
) -> TrialResult:
    """One subsample -> session -> distance measurement."""
    aggregation, selection = split_strategy(strategy)
    lam = np.asarray(weights, dtype=float)
    seed_root = _trial_seed(base_seed, n, k, strategy, weight_index, trial)
    sub_seed, session_seed, decision_seed = seed_root.spawn(3)
    subset = stratified_subsample(marks, n, sub_seed, lam)
    truth = true_ranking(subset, lam)
    decision_rng = np.random.default_rng(decision_seed)
    d = subset[0].n_criteria

    if aggregation == "bcj":
        criteria = [Criterion(0, "overall", 1.0)]

        def decide(i: int, j: int, _criterion: int) -> int:
            winner = simulate_decision(subset[i], subset[j], None, decision_rng, lam)
            return i if winner is subset[i] else j

        def rank_now(matrix) -> Ranking:
            return expected_ranking(matrix, 0, full=False)

    else:
        names = subset[0].criterion_names
        criteria = [Criterion(q, names[q], float(lam[q])) for q in range(d)]

        def decide(i: int, j: int, criterion: int) -> int:
            winner = simulate_decision(subset[i], subset[j], criterion, decision_rng)
            return i if winner is subset[i] else j

        if aggregation == "mcr":

            def rank_now(matrix) -> Ranking:
                return mcr_ranking(matrix, lam, full=False)

        else:

            def rank_now(matrix) -> Ranking:
                return mcp_ranking(matrix, lam, full=False)

    items = [Item(idx, label=subset[idx].external_key) for idx in range(n)]
    session = run_session(
        items, criteria, selection, decide, k,
        seed=session_seed, ranking_fn=rank_now,
    )
    taus = np.array([kendall_tau_normalized(truth, r) for r in session.trajectory])
    trial_ssr = None
    try:
        fit = btm_fit(win_counts_from_log(session.log, n))
        if fit.converged:
            trial_ssr = ssr(fit)
    except ValueError:
        trial_ssr = None
    return TrialResult(
        n=n,
        k=k,
        strategy=strategy,
        weight_index=weight_index,
        trial=trial,
        final_tau=float(taus[-1]),
        trajectory=TauTrajectory(taus),
        ssr=trial_ssr,
        final_order=tuple(int(i) for i in session.final_ranking.order),
        log=list(session.log),
    )


# -- grid ---------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentGrid:
    """The sweep: item counts x budgets x strategies x weights x trials."""

    n_values: tuple[int, ...]
    k_values: tuple[int, ...]
    strategies: tuple[str, ...] = GRID_STRATEGIES
    trials: int = 50
    base_seed: int = 0
    weight_vectors: np.ndarray | None = None
    qmc_weight_count: int = 0

    def __post_init__(self):
        if any(n < 2 for n in self.n_values):
            raise ValueError("every N must be at least 2")
        if any(k < 1 for k in self.k_values):
            raise ValueError("every K must be at least 1")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        for strategy in self.strategies:
            split_strategy(strategy)

    def weights_for(self, n_criteria: int, cell_index: int) -> np.ndarray:
        """The weight vectors used in one (N, K) cell, shape (W, D).

        A QMC sweep draws a fresh block of the Halton simplex sequence per
        cell; the same block is shared by every strategy in the cell so
        strategy comparisons are paired.
        """
        if self.weight_vectors is not None:
            return np.atleast_2d(np.asarray(self.weight_vectors, dtype=float))
        if self.qmc_weight_count > 0 and n_criteria >= 2:
            return halton_simplex_weights(
                n_criteria, self.qmc_weight_count, skip=cell_index * self.qmc_weight_count
            )
        return np.full((1, n_criteria), 1.0 / n_criteria)


@dataclass
class ResultsStore:
    """All trial outcomes of a grid run plus the derived aggregates."""

    results: list[TrialResult] = field(default_factory=list)

    def add(self, result: TrialResult) -> None:
        self.results.append(result)

    def cell(self, n: int, k: int, strategy: str) -> list[TrialResult]:
        return [
            r for r in self.results if (r.n, r.k, r.strategy) == (n, k, strategy)
        ]

    def cell_taus(self, n: int, k: int, strategy: str) -> np.ndarray:
        return np.array(
            [r.final_tau for r in self.cell(n, k, strategy) if r.final_tau is not None]
        )

    def median_tau(self, n: int, k: int, strategy: str) -> float:
        taus = self.cell_taus(n, k, strategy)
        return float(np.median(taus)) if len(taus) else float("nan")

    def mean_ssr(self, n: int, k: int, strategy: str) -> float:
        ssrs = [r.ssr for r in self.cell(n, k, strategy) if r.ssr is not None]
        return float(np.mean(ssrs)) if ssrs else float("nan")

    def strategies(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.results:
            seen.setdefault(r.strategy, None)
        return list(seen)

    def loss_counts(self, n: int, k: int, alpha: float | None = None) -> dict[str, int]:
        """How often each strategy is significantly outperformed in this cell.

        Strategy s loses to t when a one-tailed rank-sum test finds t's
        distances smaller at the Bonferroni-corrected level.
        """
        names = self.strategies()
        if alpha is None:
            alpha = bonferroni_alpha(len(names))
        losses = {s: 0 for s in names}
        for s in names:
            tau_s = self.cell_taus(n, k, s)
            if len(tau_s) == 0:
                continue
            for t in names:
                if t == s:
                    continue
                tau_t = self.cell_taus(n, k, t)
                if len(tau_t) == 0:
                    continue
                if wilcoxon_rank_sum(tau_t, tau_s, "less") < alpha:
                    losses[s] += 1
        return losses

    def comparison_matrix(self, n: int, k: int) -> dict:
        """Pairwise one-tailed p-values: entry [s][t] tests "t beats s"."""
        names = self.strategies()
        p = {
            s: {
                t: (
                    None
                    if t == s
                    or len(self.cell_taus(n, k, s)) == 0
                    or len(self.cell_taus(n, k, t)) == 0
                    else wilcoxon_rank_sum(self.cell_taus(n, k, t), self.cell_taus(n, k, s), "less")
                )
                for t in names
            }
            for s in names
        }
        return {"n": n, "k": k, "strategies": names, "p_values": p}

    # -- persistence ----------------------------------------------------

    def summary_rows(self) -> list[dict]:
        rows = []
        cells = sorted({(r.n, r.k) for r in self.results})
        for n, k in cells:
            losses = self.loss_counts(n, k)
            for strategy in self.strategies():
                if not self.cell(n, k, strategy):
                    continue
                rows.append(
                    {
                        "N": n,
                        "K": k,
                        "strategy": strategy,
                        "median_tau": self.median_tau(n, k, strategy),
                        "losses": losses[strategy],
                        "ssr_mean": self.mean_ssr(n, k, strategy),
                    }
                )
        return rows

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf,
            fieldnames=["N", "K", "strategy", "median_tau", "losses", "ssr_mean"],
            lineterminator="\n",
        )
        writer.writeheader()
        writer.writerows(self.summary_rows())
        return buf.getvalue()

    def write(self, out_dir: str | Path, logs: bool = False) -> None:
        """Directory layout: one JSONL per cell, a summary CSV, and the
        per-(N, K) comparison matrices.  With ``logs=True`` each trial's
        judgement log is also written under ``logs/`` so a ranking can be
        recomputed from the log alone."""
        out = Path(out_dir)
        cells_dir = out / "cells"
        cells_dir.mkdir(parents=True, exist_ok=True)
        cells = sorted({(r.n, r.k, r.strategy) for r in self.results})
        for n, k, strategy in cells:
            path = cells_dir / f"n{n}_k{k}_{strategy}.jsonl"
            with path.open("w") as fh:
                for r in self.cell(n, k, strategy):
                    fh.write(json.dumps(_trial_record(r)) + "\n")
        if logs:
            logs_dir = out / "logs"
            logs_dir.mkdir(exist_ok=True)
            for r in self.results:
                if r.log is None:
                    continue
                name = f"n{r.n}_k{r.k}_{r.strategy}_w{r.weight_index}_t{r.trial}.jsonl"
                with (logs_dir / name).open("w") as fh:
                    for entry in r.log:
                        fh.write(json.dumps(entry) + "\n")
        (out / "summary.csv").write_text(self.summary_csv())
        for n, k in sorted({(r.n, r.k) for r in self.results}):
            matrix = self.comparison_matrix(n, k)
            (out / f"comparison_n{n}_k{k}.csv").write_text(_comparison_csv(matrix))

    @classmethod
    def load(cls, out_dir: str | Path) -> "ResultsStore":
        store = cls()
        for path in sorted((Path(out_dir) / "cells").glob("*.jsonl")):
            for line in path.read_text().splitlines():
                store.add(_trial_from_record(json.loads(line)))
        return store


def _trial_record(r: TrialResult) -> dict:
    return {
        "n": r.n,
        "k": r.k,
        "strategy": r.strategy,
        "weight_index": r.weight_index,
        "trial": r.trial,
        "final_tau": r.final_tau,
        "trajectory": None if r.trajectory is None else [float(v) for v in r.trajectory.values],
        "ssr": r.ssr,
        "error": r.error,
        "final_order": None if r.final_order is None else list(r.final_order),
    }


def _trial_from_record(rec: dict) -> TrialResult:
    trajectory = rec.get("trajectory")
    return TrialResult(
        n=rec["n"],
        k=rec["k"],
        strategy=rec["strategy"],
        weight_index=rec["weight_index"],
        trial=rec["trial"],
        final_tau=rec["final_tau"],
        trajectory=None if trajectory is None else TauTrajectory(np.array(trajectory)),
        ssr=rec["ssr"],
        error=rec.get("error"),
        final_order=None if rec.get("final_order") is None else tuple(rec["final_order"]),
    )


def _comparison_csv(matrix: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = matrix["strategies"]
    writer.writerow(["strategy", *names])
    for s in names:
        writer.writerow(
            [s, *["" if matrix["p_values"][s][t] is None else repr(matrix["p_values"][s][t]) for t in names]]
        )
    return buf.getvalue()


def run_experiment_grid(
    grid: ExperimentGrid,
    marks: Sequence[MarkedItem],
    out_dir: str | Path | None = None,
    emit_logs: bool = False,
) -> ResultsStore:
    """Sweep the whole grid; a failing trial is recorded, not fatal.

    Fully deterministic given the grid's base seed — trial seeds are
    derived per (N, K, strategy, weight, trial) coordinate, so execution
    order never matters.
    """
    store = ResultsStore()
    d = marks[0].n_criteria
    for cell_index, (n, k) in enumerate(
        (n, k) for n in grid.n_values for k in grid.k_values
    ):
        weight_block = grid.weights_for(d, cell_index)
        for strategy in grid.strategies:
            for weight_index, lam in enumerate(weight_block):
                for trial in range(grid.trials):
                    try:
                        result = run_trial(
                            marks, n, k, strategy, lam,
                            base_seed=grid.base_seed,
                            weight_index=weight_index,
                            trial=trial,
                        )
                    except Exception as exc:  # noqa: BLE001 - cell isolation contract
                        result = TrialResult(
                            n=n, k=k, strategy=strategy,
                            weight_index=weight_index, trial=trial,
                            final_tau=None, trajectory=None, ssr=None,
                            error=str(exc),
                        )
                    store.add(result)
    if out_dir is not None:
        store.write(out_dir, logs=emit_logs)
    return store
