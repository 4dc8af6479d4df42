"""Pairwise match construction from per-split scores.

A match compares two models' scores; the higher score wins. Matches are
aggregated immediately into per-dataset win/count matrices, never stored
row by row: the downstream fit depends only on these sufficient statistics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PairedSplitsMismatchError, UndefinedWinRateError
from .perf_table import PerformanceTable

_CHUNK_ELEMS = 4_000_000  # cap on temporary comparison-array size


class PairingMode(str, Enum):
    """CROSS compares every split pair (s^2 matches); PAIRED identical splits only (s)."""

    CROSS = "cross"
    PAIRED = "paired"


class TiePolicy(str, Enum):
    """HALF credits each side half a win on equal scores; DROP discards the match."""

    HALF = "half"
    DROP = "drop"


@dataclass
class PairwiseCounts:
    """Aggregated match ledger for one dataset.

    ``w[i, j]`` holds (possibly fractional) wins of model i over model j out
    of ``n[i, j]`` matches; both matrices have zero diagonals and satisfy
    ``w + w.T == n`` elementwise.
    """

    dataset_id: str
    models: tuple[str, ...]
    w: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.n = np.asarray(self.n, dtype=float)
        m = len(self.models)
        if self.w.shape != (m, m) or self.n.shape != (m, m):
            raise ValueError("w and n must be m x m for m models")

    @property
    def n_models(self) -> int:
        return len(self.models)

    def model_index(self, model_id: str) -> int:
        try:
            return self.models.index(model_id)
        except ValueError:
            raise KeyError(f"unknown model {model_id!r}") from None

    def check_invariants(self, atol: float = 1e-9) -> None:
        """Raise if the ledger's accounting identities are violated."""
        if np.any(np.diag(self.w) != 0.0) or np.any(np.diag(self.n) != 0.0):
            raise ValueError("diagonal of w and n must be zero")
        if not np.allclose(self.w + self.w.T, self.n, atol=atol):
            raise ValueError("w[i,j] + w[j,i] must equal n[i,j]")
        if np.any(self.w < -atol) or np.any(self.w > self.n + atol):
            raise ValueError("w entries must lie in [0, n]")

    def to_json_text(self) -> str:
        obj = {
            "dataset": self.dataset_id,
            "models": list(self.models),
            "w": self.w.tolist(),
            "n": self.n.tolist(),
        }
        return json.dumps(obj, indent=2) + "\n"

    @classmethod
    def from_json_text(cls, text: str) -> "PairwiseCounts":
        obj = json.loads(text)
        return cls(
            dataset_id=obj["dataset"],
            models=tuple(obj["models"]),
            w=np.array(obj["w"], dtype=float),
            n=np.array(obj["n"], dtype=float),
        )


def _counts_equal_splits(scores: np.ndarray, paired: bool):
    """Greater/equal comparison counts for an (m, s) score matrix, chunked."""
    m, s = scores.shape
    gt = np.empty((m, m))
    eq = np.empty((m, m))
    if paired:
        rows = max(1, _CHUNK_ELEMS // max(1, m * s))
        for lo in range(0, m, rows):
            hi = min(lo + rows, m)
            a = scores[lo:hi, None, :]  # (c, 1, s)
            b = scores[None, :, :]  # (1, m, s)
            gt[lo:hi] = (a > b).sum(axis=2)
            eq[lo:hi] = (a == b).sum(axis=2)
    else:
        rows = max(1, _CHUNK_ELEMS // max(1, m * s * s))
        for lo in range(0, m, rows):
            hi = min(lo + rows, m)
            a = scores[lo:hi, :, None, None]  # (c, s, 1, 1)
            b = scores[None, None, :, :]  # (1, 1, m, s)
            gt[lo:hi] = (a > b).sum(axis=(1, 3))
            eq[lo:hi] = (a == b).sum(axis=(1, 3))
    return gt, eq


def _counts_ragged_cross(per_model: list[np.ndarray]):
    """CROSS counts when split counts differ across models (per-pair loop)."""
    m = len(per_model)
    gt = np.zeros((m, m))
    eq = np.zeros((m, m))
    nmat = np.zeros((m, m))
    sorted_scores = [np.sort(x) for x in per_model]
    for i in range(m):
        xi = per_model[i]
        for j in range(i + 1, m):
            sj = sorted_scores[j]
            # #{b in sj : b < a} summed over a, via binary search
            wins_i = np.searchsorted(sj, xi, side="left").sum()
            ties = (
                np.searchsorted(sj, xi, side="right").sum() - wins_i
            )
            total = len(xi) * len(sj)
            gt[i, j] = wins_i
            gt[j, i] = total - wins_i - ties
            eq[i, j] = eq[j, i] = ties
            nmat[i, j] = nmat[j, i] = total
    return gt, eq, nmat


def build_matches(
    table: PerformanceTable,
    dataset_id: str,
    mode: PairingMode = PairingMode.CROSS,
    ties: TiePolicy = TiePolicy.HALF,
) -> PairwiseCounts:
    """Aggregate all pairwise score comparisons for one dataset.

    Only score orderings matter: any strictly increasing transform of the
    scores yields identical counts. Models are indexed in sorted-id order.
    """
    if dataset_id not in table.index:
        raise KeyError(f"unknown dataset {dataset_id!r}")
    by_model = table.index[dataset_id]
    models = tuple(sorted(by_model))
    split_sets = {m: frozenset(by_model[m]) for m in models}

    if mode == PairingMode.PAIRED:
        all_splits = frozenset().union(*split_sets.values()) if models else frozenset()
        offending = sorted(m for m in models if split_sets[m] != all_splits)
        if offending:
            raise PairedSplitsMismatchError(dataset_id, offending)
        split_order = sorted(all_splits)
        scores = np.array(
            [[by_model[m][s] for s in split_order] for m in models], dtype=float
        )
        gt, eq = _counts_equal_splits(scores, paired=True)
        nmat = np.full((len(models), len(models)), float(len(split_order)))
    else:
        lengths = {len(split_sets[m]) for m in models}
        if len(lengths) <= 1:
            scores = np.array(
                [[by_model[m][s] for s in sorted(split_sets[m])] for m in models],
                dtype=float,
            )
            gt, eq = _counts_equal_splits(scores, paired=False)
            s = scores.shape[1] if models else 0
            nmat = np.full((len(models), len(models)), float(s * s))
        else:
            per_model = [
                np.array([by_model[m][s] for s in sorted(split_sets[m])], dtype=float)
                for m in models
            ]
            gt, eq, nmat = _counts_ragged_cross(per_model)

    if ties == TiePolicy.HALF:
        w = gt + 0.5 * eq
        n = nmat
    else:
        w = gt.astype(float)
        n = nmat - eq
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(n, 0.0)
    counts = PairwiseCounts(dataset_id=dataset_id, models=models, w=w, n=n)
    counts.check_invariants()
    return counts


def empirical_win_rate(counts: PairwiseCounts, i, j) -> float:
    """Observed win fraction w[i, j] / n[i, j]; models given by id or index."""
    ii = counts.model_index(i) if isinstance(i, str) else int(i)
    jj = counts.model_index(j) if isinstance(j, str) else int(j)
    n = counts.n[ii, jj]
    if n <= 0:
        raise UndefinedWinRateError(
            f"no matches recorded between {counts.models[ii]!r} and "
            f"{counts.models[jj]!r}"
        )
    return float(counts.w[ii, jj] / n)
