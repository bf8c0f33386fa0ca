"""Bayesian comparative judgement: rank items from pairwise preferences.

Each unordered item pair carries a Beta posterior over "which is
better"; judgements update it conjugately, rank distributions follow by
exact convolution, entropy picks the next pair worth judging, and
agreement metrics decide when to stop or escalate to a moderator.
Multi-criteria assessments blend per-criterion ranks or preferences by
criterion weight.  A simulation harness benchmarks selection strategies
against ground-truth marks, with a Bradley-Terry baseline.
"""

from .btm import BtmFit, btm_export, btm_fit, btm_loglik, ssr, win_counts_from_log
from .harness import (
    GRID_STRATEGIES,
    PROFILES,
    ExperimentGrid,
    MarkedItem,
    ResultsStore,
    SimulatorProfile,
    TauTrajectory,
    TrialResult,
    generate_marks,
    ingest_marks,
    run_experiment_grid,
    run_trial,
    simulate_decision,
    stratified_subsample,
    true_ranking,
)
from .posteriors import (
    Criterion,
    Item,
    PreferenceMatrix,
    PreferencePosterior,
    init_assessment,
    prob_preferred,
    record_judgement,
)
from .qmc import halton_sequence, halton_simplex_weights, radical_inverse
from .ranking import (
    MixturePreference,
    RankDistribution,
    Ranking,
    expected_ranking,
    mcp_cdf,
    mcp_ranking,
    mcp_win_matrix,
    mcr_combine,
    mcr_ranking,
    mixture_preference,
    poisson_binomial_pmf,
    radar_data,
    rank_distribution,
    ranking_to_csv,
    ranking_to_json,
)
from .reliability import (
    AgreementScore,
    ModerationRecord,
    NullSpace,
    StoppingReport,
    eap_metric,
    flag_low_agreement,
    map_metric,
    moderate_pair,
    moderation_queue,
    null_space_bounds,
    reliability_csv,
    reliability_report,
    stopping_check,
    threshold_from_bounds,
)
from .selection import (
    SelectionState,
    SessionResult,
    beta_entropy,
    replay_log,
    run_session,
    select_entropy,
    select_nrp,
    select_random,
)
from .stats import bonferroni_alpha, kendall_tau_normalized, wilcoxon_rank_sum

__version__ = "0.1.0"

__all__ = [
    "AgreementScore",
    "BtmFit",
    "Criterion",
    "ExperimentGrid",
    "GRID_STRATEGIES",
    "Item",
    "MarkedItem",
    "MixturePreference",
    "ModerationRecord",
    "NullSpace",
    "PROFILES",
    "PreferenceMatrix",
    "PreferencePosterior",
    "RankDistribution",
    "Ranking",
    "ResultsStore",
    "SelectionState",
    "SessionResult",
    "SimulatorProfile",
    "StoppingReport",
    "TauTrajectory",
    "TrialResult",
    "beta_entropy",
    "bonferroni_alpha",
    "btm_export",
    "btm_fit",
    "btm_loglik",
    "eap_metric",
    "expected_ranking",
    "flag_low_agreement",
    "generate_marks",
    "halton_sequence",
    "halton_simplex_weights",
    "ingest_marks",
    "init_assessment",
    "kendall_tau_normalized",
    "map_metric",
    "mcp_cdf",
    "mcp_ranking",
    "mcp_win_matrix",
    "mcr_combine",
    "mcr_ranking",
    "mixture_preference",
    "moderate_pair",
    "moderation_queue",
    "null_space_bounds",
    "poisson_binomial_pmf",
    "prob_preferred",
    "radar_data",
    "radical_inverse",
    "rank_distribution",
    "ranking_to_csv",
    "ranking_to_json",
    "record_judgement",
    "reliability_csv",
    "reliability_report",
    "replay_log",
    "run_experiment_grid",
    "run_session",
    "run_trial",
    "select_entropy",
    "select_nrp",
    "select_random",
    "simulate_decision",
    "ssr",
    "stopping_check",
    "stratified_subsample",
    "threshold_from_bounds",
    "true_ranking",
    "win_counts_from_log",
    "wilcoxon_rank_sum",
]
