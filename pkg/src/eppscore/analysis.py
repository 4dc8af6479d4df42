"""Consumer-facing reports: leaderboards, win matrices, cross-dataset
comparisons, embedding points, and hyperparameter tunability tables."""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AnalysisWarning, ConstantInputError
from .inference import (
    TestResult,
    mann_whitney,
    prob_vs_average,
    spearman,
    wald_test_difference,
)
from .perf_table import HyperparamTable, PerformanceTable
from .solver import EppScores
from .special import sigmoid

_FMT = ".6g"  # CSV numeric formatting, 6 significant digits


def _fmt(x: float) -> str:
    return format(float(x), _FMT)


class SpreadKind(str, Enum):
    """Absolute-deviation statistic: deviations from the MEDIAN or the MEAN."""

    MEDIAN = "median"
    MEAN = "mean"


def _spread(values: np.ndarray, kind: SpreadKind) -> float:
    if kind == SpreadKind.MEDIAN:
        return float(np.median(np.abs(values - np.median(values))))
    return float(np.mean(np.abs(values - np.mean(values))))


# ---------------------------------------------------------------------------
# Leaderboards


@dataclass
class LeaderboardRow:
    rank: int
    model_id: str
    beta: float
    prob_vs_average: float
    mean_score: float
    significance_vs_next: TestResult | None
    note: str | None = None


def leaderboard(
    scores: EppScores, table: PerformanceTable, top_k: int | None = None
) -> list[LeaderboardRow]:
    """Rows sorted by beta descending (ties broken by model id), annotated
    with the Wald test against the next row and with a note whenever the
    mean-raw-score ordering disagrees with the fitted ordering."""
    order = sorted(
        range(len(scores.models)), key=lambda k: (-scores.beta[k], scores.models[k])
    )
    score_order = sorted(
        order,
        key=lambda k: (
            -table.mean_score(scores.dataset_id, scores.models[k]),
            scores.models[k],
        ),
    )
    mean_rank = {k: r + 1 for r, k in enumerate(score_order)}
    rows = []
    for pos, k in enumerate(order):
        nxt = order[pos + 1] if pos + 1 < len(order) else None
        note = None
        if mean_rank[k] != pos + 1:
            note = f"mean-score rank {mean_rank[k]} differs from EPP rank {pos + 1}"
        rows.append(
            LeaderboardRow(
                rank=pos + 1,
                model_id=scores.models[k],
                beta=float(scores.beta[k]),
                prob_vs_average=prob_vs_average(float(scores.beta[k])),
                mean_score=table.mean_score(scores.dataset_id, scores.models[k]),
                significance_vs_next=(
                    wald_test_difference(scores, k, nxt) if nxt is not None else None
                ),
                note=note,
            )
        )
    return rows[:top_k] if top_k is not None else rows


def leaderboard_csv_text(rows: list[LeaderboardRow]) -> str:
    lines = ["rank,model,epp,p_vs_avg,mean_score,p_value_vs_next,stars"]
    for r in rows:
        if r.significance_vs_next is None:
            p_next, stars = "", ""
        else:
            p_next = _fmt(r.significance_vs_next.p_value)
            stars = r.significance_vs_next.stars
        lines.append(
            f"{r.rank},{r.model_id},{_fmt(r.beta)},{_fmt(r.prob_vs_average)},"
            f"{_fmt(r.mean_score)},{p_next},{stars}"
        )
    return "\n".join(lines) + "\n"


def leaderboard_json_text(rows: list[LeaderboardRow]) -> str:
    out = []
    for r in rows:
        out.append(
            {
                "rank": r.rank,
                "model": r.model_id,
                "epp": r.beta,
                "p_vs_avg": r.prob_vs_average,
                "mean_score": r.mean_score,
                "vs_next": (
                    r.significance_vs_next.to_json_dict()
                    if r.significance_vs_next
                    else None
                ),
                "note": r.note,
            }
        )
    return json.dumps({"rows": out}, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Win-probability matrix


def win_matrix(scores: EppScores) -> np.ndarray:
    """Matrix of modeled win probabilities; entry (i, j) = P(i beats j)."""
    beta = scores.beta
    out = sigmoid(beta[:, None] - beta[None, :])
    np.fill_diagonal(out, 0.5)
    return out


# ---------------------------------------------------------------------------
# Cross-dataset comparison


@dataclass
class ComparisonCell:
    beta: float
    prob_vs_average: float


@dataclass
class ComparisonTable:
    """Models x datasets grid of (beta, probability vs average) cells.

    Missing (model, dataset) fits are None, never an error: the probability
    column is what stays comparable across datasets.
    """

    models: tuple[str, ...]
    datasets: tuple[str, ...]
    cells: dict[tuple[str, str], ComparisonCell]

    def cell(self, model_id: str, dataset_id: str) -> ComparisonCell | None:
        return self.cells.get((model_id, dataset_id))

    def to_csv_text(self) -> str:
        header = ["model"]
        for ds in self.datasets:
            header += [f"{ds}_epp", f"{ds}_p_vs_avg"]
        lines = [",".join(header)]
        for model in self.models:
            row = [model]
            for ds in self.datasets:
                c = self.cell(model, ds)
                row += ["", ""] if c is None else [_fmt(c.beta), _fmt(c.prob_vs_average)]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        obj = {
            "models": list(self.models),
            "datasets": list(self.datasets),
            "cells": [
                {
                    "model": model,
                    "dataset": ds,
                    "epp": c.beta,
                    "p_vs_avg": c.prob_vs_average,
                }
                for (model, ds), c in sorted(self.cells.items())
            ],
        }
        return json.dumps(obj, indent=2) + "\n"


def cross_dataset_compare(
    results: list[EppScores], model_ids=None
) -> ComparisonTable:
    """Line up fitted scores for the same models across datasets."""
    datasets = tuple(sorted(r.dataset_id for r in results))
    if model_ids is None:
        seen: set[str] = set()
        for r in results:
            seen.update(r.models)
        models = tuple(sorted(seen))
    else:
        models = tuple(model_ids)
    cells: dict[tuple[str, str], ComparisonCell] = {}
    for r in results:
        for model in models:
            if model in r.models:
                b = r.beta_of(model)
                cells[(model, r.dataset_id)] = ComparisonCell(b, prob_vs_average(b))
    return ComparisonTable(models=models, datasets=datasets, cells=cells)


# ---------------------------------------------------------------------------
# Embedding points (average strength vs spread)


@dataclass(frozen=True)
class EmbeddingPoint:
    algorithm: str
    dataset_id: str
    avg_epp: float
    spread: float
    spread_kind: SpreadKind
    n_models: int


def embed(
    results: list[EppScores],
    algorithm_of: dict[str, str],
    spread_kind: SpreadKind = SpreadKind.MEDIAN,
) -> list[EmbeddingPoint]:
    """One point per (algorithm, dataset): mean fitted score and its spread.

    An algorithm with fewer than two models on a dataset gets spread 0 and
    an :class:`AnalysisWarning`.
    """
    points = []
    for r in sorted(results, key=lambda s: s.dataset_id):
        groups: dict[str, list[float]] = {}
        for model, b in zip(r.models, r.beta):
            try:
                alg = algorithm_of[model]
            except KeyError:
                raise KeyError(f"model {model!r} has no algorithm label") from None
            groups.setdefault(alg, []).append(float(b))
        for alg in sorted(groups):
            betas = np.array(groups[alg])
            if len(betas) < 2:
                warnings.warn(
                    f"algorithm {alg!r} has {len(betas)} model(s) on dataset "
                    f"{r.dataset_id!r}; spread set to 0",
                    AnalysisWarning,
                    stacklevel=2,
                )
                spread = 0.0
            else:
                spread = _spread(betas, spread_kind)
            points.append(
                EmbeddingPoint(
                    algorithm=alg,
                    dataset_id=r.dataset_id,
                    avg_epp=float(betas.mean()),
                    spread=spread,
                    spread_kind=spread_kind,
                    n_models=len(betas),
                )
            )
    return points


def embed_csv_text(points: list[EmbeddingPoint]) -> str:
    lines = ["algorithm,dataset,avg_epp,spread,spread_kind,n_models"]
    for p in points:
        lines.append(
            f"{p.algorithm},{p.dataset_id},{_fmt(p.avg_epp)},{_fmt(p.spread)},"
            f"{p.spread_kind.value},{p.n_models}"
        )
    return "\n".join(lines) + "\n"


def beta_distribution_rows(
    results: list[EppScores], algorithm_of: dict[str, str]
) -> list[tuple[str, str, str, float]]:
    """Raw (algorithm, dataset, model, score) rows behind the embedding,
    for box-plot style views of per-algorithm score distributions."""
    rows = []
    for r in sorted(results, key=lambda s: s.dataset_id):
        for model, b in zip(r.models, r.beta):
            rows.append((algorithm_of.get(model, "unknown"), r.dataset_id, model, float(b)))
    rows.sort(key=lambda t: (t[0], t[1], t[2]))
    return rows


def beta_distribution_csv_text(
    results: list[EppScores], algorithm_of: dict[str, str]
) -> str:
    lines = ["algorithm,dataset,model,epp"]
    for alg, ds, model, beta in beta_distribution_rows(results, algorithm_of):
        lines.append(f"{alg},{ds},{model},{_fmt(beta)}")
    return "\n".join(lines) + "\n"


def embed_json_text(points: list[EmbeddingPoint]) -> str:
    out = [
        {
            "algorithm": p.algorithm,
            "dataset": p.dataset_id,
            "avg_epp": p.avg_epp,
            "spread": p.spread,
            "spread_kind": p.spread_kind.value,
            "n_models": p.n_models,
        }
        for p in points
    ]
    return json.dumps({"points": out}, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Tunability: hyperparameters vs per-model aggregates


class TunabilityTarget(str, Enum):
    AVG_EPP = "avg_epp"
    SPREAD = "spread"


@dataclass(frozen=True)
class TunabilityRow:
    algorithm: str
    parameter: str
    target: TunabilityTarget
    result: TestResult
    estimate_label: str  # "Corr" for numeric parameters, "W" for binary


def aggregate_across_datasets(
    results: list[EppScores], spread_kind: SpreadKind = SpreadKind.MEDIAN
) -> dict[str, tuple[float, float]]:
    """Per model: (mean fitted score across datasets, spread across datasets).

    A model fitted on a single dataset gets spread 0.
    """
    values: dict[str, list[float]] = {}
    for r in results:
        for model, b in zip(r.models, r.beta):
            values.setdefault(model, []).append(float(b))
    out = {}
    for model in sorted(values):
        betas = np.array(values[model])
        spread = _spread(betas, spread_kind) if len(betas) > 1 else 0.0
        out[model] = (float(betas.mean()), spread)
    return out


def tunability_report(
    results: list[EppScores],
    hyper: HyperparamTable,
    algorithm_of: dict[str, str],
    spread_kind: SpreadKind = SpreadKind.MEDIAN,
) -> list[TunabilityRow]:
    """Associate each hyperparameter with per-model average score and spread.

    Numeric parameters use Spearman correlation; two-level parameters use
    the Mann-Whitney test (U of the lexicographically first level).
    Parameters with a single distinct value are skipped with a warning.
    """
    aggregates = aggregate_across_datasets(results, spread_kind)
    unknown = sorted(m for m in hyper.models if m not in aggregates)
    if unknown:
        raise ValueError(
            "hyperparameter table references models without fitted scores: "
            + ", ".join(unknown)
        )
    rows: list[TunabilityRow] = []
    for parameter in hyper.parameters:
        per_model = hyper.values(parameter)
        by_alg: dict[str, list[str]] = {}
        for model in per_model:
            by_alg.setdefault(algorithm_of.get(model, "unknown"), []).append(model)
        for alg in sorted(by_alg):
            models = sorted(by_alg[alg])
            raw = [per_model[m] for m in models]
            if len(set(map(str, raw))) < 2:
                warnings.warn(
                    f"parameter {parameter!r} of {alg!r} has a single distinct "
                    "value; skipped",
                    AnalysisWarning,
                    stacklevel=2,
                )
                continue
            for target in (TunabilityTarget.AVG_EPP, TunabilityTarget.SPREAD):
                idx = 0 if target == TunabilityTarget.AVG_EPP else 1
                response = np.array([aggregates[m][idx] for m in models])
                try:
                    if hyper.kind(parameter) == "numeric":
                        values = np.array([float(per_model[m]) for m in models])
                        result = spearman(values, response)
                        label = "Corr"
                    else:
                        levels = hyper.levels(parameter)
                        group_a = response[
                            [str(per_model[m]) == levels[0] for m in models]
                        ]
                        group_b = response[
                            [str(per_model[m]) == levels[1] for m in models]
                        ]
                        result = mann_whitney(group_a, group_b)
                        label = "W"
                except (ConstantInputError, ValueError) as exc:
                    warnings.warn(
                        f"parameter {parameter!r} of {alg!r} vs {target.value}: "
                        f"skipped ({exc})",
                        AnalysisWarning,
                        stacklevel=2,
                    )
                    continue
                rows.append(
                    TunabilityRow(
                        algorithm=alg,
                        parameter=parameter,
                        target=target,
                        result=result,
                        estimate_label=label,
                    )
                )
    rows.sort(key=lambda r: (r.algorithm, r.parameter, r.target.value))
    return rows


def tunability_csv_text(rows: list[TunabilityRow]) -> str:
    lines = ["algorithm,parameter,target,estimate_label,estimate,p_value,stars"]
    for r in rows:
        lines.append(
            f"{r.algorithm},{r.parameter},{r.target.value},{r.estimate_label},"
            f"{_fmt(r.result.statistic)},{_fmt(r.result.p_value)},{r.result.stars}"
        )
    return "\n".join(lines) + "\n"


def tunability_json_text(rows: list[TunabilityRow]) -> str:
    out = [
        {
            "algorithm": r.algorithm,
            "parameter": r.parameter,
            "target": r.target.value,
            "estimate_label": r.estimate_label,
            "result": r.result.to_json_dict(),
        }
        for r in rows
    ]
    return json.dumps({"rows": out}, indent=2) + "\n"


def win_matrix_csv_text(scores: EppScores) -> str:
    matrix = win_matrix(scores)
    buf = io.StringIO()
    buf.write("model," + ",".join(scores.models) + "\n")
    for i, model in enumerate(scores.models):
        buf.write(model + "," + ",".join(_fmt(v) for v in matrix[i]) + "\n")
    return buf.getvalue()


def win_matrix_json_text(scores: EppScores) -> str:
    obj = {
        "models": list(scores.models),
        "win_probability": win_matrix(scores).tolist(),
    }
    return json.dumps(obj, indent=2) + "\n"
