"""Probabilities and significance tests on fitted scores.

A caveat applies to every p-value here: matches built from overlapping
train/test splits are not independent observations, so treat the tests as
well-behaved approximations rather than exact guarantees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConstantInputError, DegenerateVarianceError
from .match_engine import PairwiseCounts
from .solver import EppScores, FitConfig, fit_epp, log_likelihood
from .special import chi2_sf_1df, norm_cdf, sigmoid, t_sf_two_sided


class TestMethod(str, Enum):
    __test__ = False  # not a pytest class, despite the name

    WALD = "wald"
    LRT = "lrt"
    SPEARMAN = "spearman"
    MANN_WHITNEY = "mann_whitney"


def stars_for(p_value: float) -> str:
    """Significance stars: `*` iff p <= 0.05, `**` iff <= 0.01, `***` iff <= 0.001."""
    if p_value <= 0.001:
        return "***"
    if p_value <= 0.01:
        return "**"
    if p_value <= 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class, despite the name

    statistic: float
    p_value: float
    method: TestMethod
    stars: str

    @classmethod
    def build(cls, statistic: float, p_value: float, method: TestMethod):
        return cls(
            statistic=float(statistic),
            p_value=float(p_value),
            method=method,
            stars=stars_for(p_value),
        )

    def to_json_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "method": self.method.value,
            "stars": self.stars,
        }


def win_probability(beta_i: float, beta_j: float) -> float:
    """Modeled probability that model i outscores model j: sigmoid(beta_i - beta_j)."""
    return float(sigmoid(float(beta_i) - float(beta_j)))


def prob_vs_average(beta_i: float) -> float:
    """Probability of beating a hypothetical average model (beta = 0).

    This is the quantity that stays comparable across datasets.
    """
    return win_probability(beta_i, 0.0)


def wald_test_difference(scores: EppScores, i, j) -> TestResult:
    """Two-sided Wald test of equal strengths for models i and j."""
    ii = scores.model_index(i) if isinstance(i, str) else int(i)
    jj = scores.model_index(j) if isinstance(j, str) else int(j)
    diff = float(scores.beta[ii] - scores.beta[jj])
    cov = scores.covariance
    var = float(cov[ii, ii] + cov[jj, jj] - 2.0 * cov[ii, jj])
    return _wald_from_diff(diff, var)


def wald_test_vs_average(scores: EppScores, i) -> TestResult:
    """Wald test of beta_i = 0, i.e. against the average model.

    The virtual average model contributes no variance (its covariance row
    is zero), so the standard error is just sqrt(cov[i, i]).
    """
    ii = scores.model_index(i) if isinstance(i, str) else int(i)
    return _wald_from_diff(float(scores.beta[ii]), float(scores.covariance[ii, ii]))


def _wald_from_diff(diff: float, var: float) -> TestResult:
    if var <= 0.0:
        if diff == 0.0:
            return TestResult.build(0.0, 1.0, TestMethod.WALD)
        raise DegenerateVarianceError(
            f"zero variance for a nonzero difference {diff!r}"
        )
    z = diff / math.sqrt(var)
    p = 2.0 * norm_cdf(-abs(z))
    return TestResult.build(z, min(p, 1.0), TestMethod.WALD)


def _merge_counts(counts: PairwiseCounts, ii: int, jj: int):
    """Collapse models ii and jj into one; self-matches between them drop out
    of the merged ledger but are accounted for separately at p = 1/2."""
    keep = [k for k in range(counts.n_models) if k != jj]
    w = counts.w[np.ix_(keep, keep)].copy()
    n = counts.n[np.ix_(keep, keep)].copy()
    pos = keep.index(ii)
    for mpos, k in enumerate(keep):
        if k == ii:
            continue
        w[pos, mpos] = counts.w[ii, k] + counts.w[jj, k]
        w[mpos, pos] = counts.w[k, ii] + counts.w[k, jj]
        n[pos, mpos] = counts.n[ii, k] + counts.n[jj, k]
        n[mpos, pos] = n[pos, mpos]
    w[pos, pos] = 0.0
    n[pos, pos] = 0.0
    merged = PairwiseCounts(
        dataset_id=counts.dataset_id,
        models=tuple(counts.models[k] for k in keep),
        w=w,
        n=n,
    )
    dropped = float(counts.n[ii, jj])
    return merged, dropped


def lr_test_difference(
    counts: PairwiseCounts, i, j, cfg: FitConfig | None = None
) -> TestResult:
    """Likelihood-ratio test of equal strengths for models i and j.

    The restricted model merges the two models into one; the matches they
    played against each other then have probability 1/2 exactly and
    contribute -n_ij * log 2 to the restricted likelihood.
    """
    cfg = cfg or FitConfig()
    ii = counts.model_index(i) if isinstance(i, str) else int(i)
    jj = counts.model_index(j) if isinstance(j, str) else int(j)
    if ii == jj:
        raise ValueError("i and j must differ")
    full = fit_epp(counts, cfg)
    ll_full = log_likelihood(counts, full.beta)
    merged, dropped = _merge_counts(counts, ii, jj)
    restricted = fit_epp(merged, cfg)
    ll_restricted = log_likelihood(merged, restricted.beta) - dropped * math.log(2.0)
    statistic = max(2.0 * (ll_full - ll_restricted), 0.0)
    return TestResult.build(statistic, chi2_sf_1df(statistic), TestMethod.LRT)


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    sorted_vals = values[order]
    pos = 0
    while pos < len(values):
        end = pos
        while end + 1 < len(values) and sorted_vals[end + 1] == sorted_vals[pos]:
            end += 1
        ranks[order[pos : end + 1]] = 0.5 * (pos + end) + 1.0
        pos = end + 1
    return ranks


def spearman(x, y) -> TestResult:
    """Spearman rank correlation with a two-sided t-approximation p-value.

    Ties receive mid-ranks; rho is the Pearson correlation of the ranks.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D vectors of equal length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ConstantInputError("correlation undefined for a constant vector")
    rx = _midranks(x)
    ry = _midranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    rho = float(rx @ ry / math.sqrt((rx @ rx) * (ry @ ry)))
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = t_sf_two_sided(t, n - 2)
    return TestResult.build(rho, p, TestMethod.SPEARMAN)


def mann_whitney(a, b) -> TestResult:
    """Mann-Whitney U test (U of the first sample), two-sided.

    Uses mid-ranks for ties and the normal approximation with tie and
    continuity corrections. With every value tied the p-value is 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or len(a) == 0 or len(b) == 0:
        raise ValueError("a and b must be nonempty 1-D vectors")
    na, nb = len(a), len(b)
    combined = np.concatenate([a, b])
    ranks = _midranks(combined)
    u_a = float(ranks[:na].sum() - na * (na + 1) / 2.0)
    total = na + nb
    _, tie_counts = np.unique(combined, return_counts=True)
    tie_term = float(((tie_counts**3 - tie_counts).sum()) / (total * (total - 1)))
    var = na * nb / 12.0 * ((total + 1) - tie_term)
    mean = na * nb / 2.0
    if var <= 0.0:
        return TestResult.build(u_a, 1.0, TestMethod.MANN_WHITNEY)
    shift = u_a - mean
    z = (shift - 0.5 * np.sign(shift)) / math.sqrt(var)
    p = min(2.0 * norm_cdf(-abs(z)), 1.0)
    return TestResult.build(u_a, p, TestMethod.MANN_WHITNEY)
