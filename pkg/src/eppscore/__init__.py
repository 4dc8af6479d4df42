"""Elo-based predictive power (EPP) scores for machine-learning models.

Scores are fitted by maximum likelihood on pairwise match outcomes built
from per-split performance tables; differences of scores are log-odds of
one model outscoring another, and sigmoid(score) is the probability of
beating an average model, which is comparable across datasets.
"""

from .analysis import (
    ComparisonTable,
    EmbeddingPoint,
    LeaderboardRow,
    SpreadKind,
    TunabilityRow,
    TunabilityTarget,
    aggregate_across_datasets,
    cross_dataset_compare,
    embed,
    leaderboard,
    tunability_report,
    win_matrix,
)
from .baselines import (
    EloConfig,
    NoiseKind,
    SyntheticSpec,
    recovery_error,
    recovery_from_truth,
    sequential_elo,
    simulate_scores,
)
from .errors import (
    AnalysisWarning,
    ConfigError,
    ConstantInputError,
    DegenerateVarianceError,
    EppError,
    FitWarning,
    PairedSplitsMismatchError,
    SeparationError,
    TableParseError,
    UndefinedWinRateError,
)
from .inference import (
    TestMethod,
    TestResult,
    lr_test_difference,
    mann_whitney,
    prob_vs_average,
    spearman,
    stars_for,
    wald_test_difference,
    wald_test_vs_average,
    win_probability,
)
from .match_engine import (
    PairingMode,
    PairwiseCounts,
    TiePolicy,
    build_matches,
    empirical_win_rate,
)
from .perf_table import (
    HyperparamTable,
    PerformanceTable,
    ScoreRecord,
    parse_hyperparams_csv,
    parse_scores_csv,
    parse_scores_json,
    validate,
)
from .solver import (
    EppScores,
    FitAlgorithm,
    FitConfig,
    SeparationFlag,
    detect_separation,
    fit_epp,
    gradient,
    log_likelihood,
    two_model_closed_form,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisWarning",
    "ComparisonTable",
    "ConfigError",
    "ConstantInputError",
    "DegenerateVarianceError",
    "EloConfig",
    "EmbeddingPoint",
    "EppError",
    "EppScores",
    "FitAlgorithm",
    "FitConfig",
    "FitWarning",
    "HyperparamTable",
    "LeaderboardRow",
    "NoiseKind",
    "PairedSplitsMismatchError",
    "PairingMode",
    "PairwiseCounts",
    "PerformanceTable",
    "ScoreRecord",
    "SeparationError",
    "SeparationFlag",
    "SpreadKind",
    "SyntheticSpec",
    "TableParseError",
    "TestMethod",
    "TestResult",
    "TiePolicy",
    "TunabilityRow",
    "TunabilityTarget",
    "UndefinedWinRateError",
    "aggregate_across_datasets",
    "build_matches",
    "cross_dataset_compare",
    "detect_separation",
    "embed",
    "empirical_win_rate",
    "fit_epp",
    "gradient",
    "leaderboard",
    "log_likelihood",
    "lr_test_difference",
    "mann_whitney",
    "parse_hyperparams_csv",
    "parse_scores_csv",
    "parse_scores_json",
    "prob_vs_average",
    "recovery_error",
    "recovery_from_truth",
    "sequential_elo",
    "simulate_scores",
    "spearman",
    "stars_for",
    "tunability_report",
    "two_model_closed_form",
    "validate",
    "wald_test_difference",
    "wald_test_vs_average",
    "win_matrix",
    "win_probability",
]
