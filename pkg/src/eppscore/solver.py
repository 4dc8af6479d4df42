"""Maximum-likelihood fit of per-model strength scores on pairwise counts.

The model is the classical Bradley-Terry / zero-intercept logistic model:
P(i beats j) = sigmoid(beta_i - beta_j). The fit maximizes the binomial
log-likelihood of the win counts, optionally ridge-penalized, and reports
mean-centered scores with covariance and separation diagnostics.
Fractional win counts (half-win tie credit) enter the same formulas
unchanged, making the objective a quasi-likelihood in that case.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import FitWarning, SeparationError
from .match_engine import PairwiseCounts
from .special import sigmoid

_BETA_CLAMP = 350.0  # keeps exp(beta) finite when an unpenalized fit separates
_MM_STALL_CHECK = 20  # sweeps between stall checks; see _fit_mm


class FitAlgorithm(str, Enum):
    MM = "mm"
    NEWTON = "newton"


class SeparationFlag(str, Enum):
    NONE = "none"
    ALL_WINS = "all_wins"
    ALL_LOSSES = "all_losses"


@dataclass
class FitConfig:
    """Optimizer settings.

    `tol` bounds the max absolute score change per iteration at convergence;
    the fit additionally requires the penalized gradient max-norm to fall
    below ``10 * tol`` so that reported optima are true stationary points.
    """

    algorithm: FitAlgorithm = FitAlgorithm.MM
    ridge_lambda: float = 1e-6
    tol: float = 1e-9
    max_iter: int = 10_000

    def __post_init__(self):
        self.algorithm = FitAlgorithm(self.algorithm)
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class EppScores:
    """Fitted scores for one dataset with diagnostics.

    `beta` is mean-centered; `covariance` is the pseudo-inverse of the
    negative Hessian at the optimum projected onto the mean-zero subspace,
    so its rows sum to ~0. `log_likelihood` is the unpenalized value at
    `beta`. Models that won or lost every match are flagged: their
    magnitudes depend on the ridge penalty, not the data alone.
    """

    dataset_id: str
    models: tuple[str, ...]
    beta: np.ndarray
    converged: bool
    iterations: int
    log_likelihood: float
    covariance: np.ndarray
    separation_flags: tuple[SeparationFlag, ...]
    n_components: int = 1
    algorithms: dict[str, str] = field(default_factory=dict)

    def model_index(self, model_id: str) -> int:
        try:
            return self.models.index(model_id)
        except ValueError:
            raise KeyError(f"unknown model {model_id!r}") from None

    def beta_of(self, model_id: str) -> float:
        return float(self.beta[self.model_index(model_id)])

    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_csv_text(self) -> str:
        se = self.standard_errors()
        lines = ["model,beta,se,separation,converged"]
        for k, model in enumerate(self.models):
            lines.append(
                f"{model},{self.beta[k]:.6g},{se[k]:.6g},"
                f"{self.separation_flags[k].value},{str(self.converged).lower()}"
            )
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        obj = {
            "dataset": self.dataset_id,
            "models": list(self.models),
            "beta": self.beta.tolist(),
            "se": self.standard_errors().tolist(),
            "separation": [f.value for f in self.separation_flags],
            "converged": self.converged,
            "iterations": self.iterations,
            "log_likelihood": self.log_likelihood,
            "covariance": self.covariance.tolist(),
            "n_components": self.n_components,
            "algorithms": self.algorithms,
        }
        return json.dumps(obj, indent=2) + "\n"

    @classmethod
    def from_json_text(cls, text: str) -> "EppScores":
        obj = json.loads(text)
        return cls(
            dataset_id=obj["dataset"],
            models=tuple(obj["models"]),
            beta=np.array(obj["beta"], dtype=float),
            converged=bool(obj["converged"]),
            iterations=int(obj["iterations"]),
            log_likelihood=float(obj["log_likelihood"]),
            covariance=np.array(obj["covariance"], dtype=float),
            separation_flags=tuple(SeparationFlag(s) for s in obj["separation"]),
            n_components=int(obj.get("n_components", 1)),
            algorithms=dict(obj.get("algorithms", {})),
        )


def _loglik(w: np.ndarray, n: np.ndarray, beta: np.ndarray, lam: float) -> float:
    diff = beta[:, None] - beta[None, :]
    p = sigmoid(diff)
    iu = np.triu_indices(len(beta), k=1)
    pu = np.clip(p[iu], 1e-300, 1.0)
    pl = np.clip(1.0 - p[iu], 1e-300, 1.0)
    wu = w[iu]
    wl = w.T[iu]
    value = float(np.dot(wu, np.log(pu)) + np.dot(wl, np.log(pl)))
    if lam > 0.0:
        value -= 0.5 * lam * float(beta @ beta)
    return value


def _grad(w: np.ndarray, n: np.ndarray, beta: np.ndarray, lam: float) -> np.ndarray:
    p = sigmoid(beta[:, None] - beta[None, :])
    np.fill_diagonal(p, 0.0)
    g = (w - n * p).sum(axis=1)
    if lam > 0.0:
        g = g - lam * beta
    return g


def log_likelihood(counts: PairwiseCounts, beta, ridge_lambda: float = 0.0) -> float:
    """Binomial log-likelihood of the counts at `beta` (each unordered pair
    once), minus ``ridge_lambda/2 * ||beta||^2`` when the penalty is positive."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (counts.n_models,):
        raise ValueError(f"beta must have length {counts.n_models}")
    return _loglik(counts.w, counts.n, beta, ridge_lambda)


def gradient(counts: PairwiseCounts, beta, ridge_lambda: float = 0.0) -> np.ndarray:
    """Gradient of :func:`log_likelihood` with respect to `beta`."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (counts.n_models,):
        raise ValueError(f"beta must have length {counts.n_models}")
    return _grad(counts.w, counts.n, beta, ridge_lambda)


def two_model_closed_form(w: float, n: float) -> tuple[float, float]:
    """Exact centered two-model solution: (logit(w/n)/2, -logit(w/n)/2).

    Raises :class:`SeparationError` when w is 0 or n (infinite estimate).
    """
    if not 0 < w < n:
        raise SeparationError(
            f"two-model estimate is infinite for w={w}, n={n} "
            "(one model wins every match)"
        )
    half = 0.5 * float(np.log(w / (n - w)))
    return half, -half


def detect_separation(counts: PairwiseCounts) -> tuple[SeparationFlag, ...]:
    """Flag models that won or lost every match they played."""
    flags = []
    w, n = counts.w, counts.n
    for i in range(counts.n_models):
        played = n[i] > 0
        if not played.any():
            flags.append(SeparationFlag.NONE)
        elif np.all(w[i, played] == n[i, played]):
            flags.append(SeparationFlag.ALL_WINS)
        elif np.all(w[i, played] == 0.0):
            flags.append(SeparationFlag.ALL_LOSSES)
        else:
            flags.append(SeparationFlag.NONE)
    return tuple(flags)


def _connected_components(n: np.ndarray) -> list[np.ndarray]:
    m = n.shape[0]
    seen = np.zeros(m, dtype=bool)
    components = []
    for start in range(m):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        members = [start]
        while stack:
            node = stack.pop()
            for nxt in np.nonzero(n[node] > 0)[0]:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
                    members.append(nxt)
        components.append(np.array(sorted(members)))
    return components


def _newton_direction(w, n, beta, lam, g):
    m = len(beta)
    p = sigmoid(beta[:, None] - beta[None, :])
    np.fill_diagonal(p, 0.0)
    curv = n * p * (1.0 - p)
    lap = np.diag(curv.sum(axis=1)) - curv
    # Gauge term acts only along the all-ones direction, which the centered
    # gradient never has; it keeps the system nonsingular when lam == 0.
    gauge = (max(np.trace(lap), 1.0) / m / m) * np.ones((m, m))
    h = lap + lam * np.identity(m) + gauge
    try:
        return np.linalg.solve(h, g)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(h, g, rcond=None)[0]


def _newton_step(w, n, beta, lam):
    """One ascent-guaranteed Newton step: Armijo backtracking, centered."""
    g = _grad(w, n, beta, lam)
    direction = _newton_direction(w, n, beta, lam, g)
    f0 = _loglik(w, n, beta, lam)
    slope = float(g @ direction)
    # Below float-noise level the Armijo test is meaningless; take the step.
    if abs(slope) <= 1e-10 * (1.0 + abs(f0)):
        candidate = beta + direction
    else:
        t = 1.0
        candidate = beta
        while t > 1e-13:
            trial = beta + t * direction
            if _loglik(w, n, trial, lam) >= f0 + 1e-4 * t * slope:
                candidate = trial
                break
            t *= 0.5
    candidate = np.clip(candidate, -_BETA_CLAMP, _BETA_CLAMP)
    return candidate - candidate.mean()


def _gradient_noise_floor(n: np.ndarray) -> float:
    # A gradient entry accumulates ~sum_j n_ij; below a few ulps of that
    # scale no float64 iterate can certify further progress.
    return max(1.0, float(n.sum(axis=1).max())) * 2.0**-46


def _fit_newton(w, n, cfg: FitConfig, trace=None):
    beta = np.zeros(n.shape[0])
    lam = cfg.ridge_lambda
    noise = _gradient_noise_floor(n)
    if trace is not None:
        trace.append(_loglik(w, n, beta, lam))
    for it in range(1, cfg.max_iter + 1):
        new_beta = _newton_step(w, n, beta, lam)
        delta = float(np.max(np.abs(new_beta - beta)))
        beta = new_beta
        if trace is not None:
            trace.append(_loglik(w, n, beta, lam))
        gnorm = float(np.max(np.abs(_grad(w, n, beta, lam))))
        if (delta <= cfg.tol and gnorm <= 10.0 * cfg.tol) or gnorm <= noise:
            return beta, it, True
    return beta, cfg.max_iter, False


def _fit_mm(w, n, cfg: FitConfig, trace=None):
    """Minorization-maximization sweeps on aggregated counts.

    Each sweep maximizes a separable minorizer of the penalized likelihood,
    so the objective never decreases. Near-separated instances make the
    minorizer arbitrarily loose; when the gradient norm stalls, a single
    safeguarded Newton step (also an ascent step) is interleaved.
    """
    m = n.shape[0]
    lam = cfg.ridge_lambda
    beta = np.zeros(m)
    wins = w.sum(axis=1)
    noise = _gradient_noise_floor(n)
    if trace is not None:
        trace.append(_loglik(w, n, beta, lam))
    stall_reference = np.inf
    for it in range(1, cfg.max_iter + 1):
        pi = np.exp(beta)
        pair_sum = pi[:, None] + pi[None, :]
        np.fill_diagonal(pair_sum, 1.0)
        rate = (n / pair_sum).sum(axis=1)
        # Sweep update solves rate_i * e^u + lam * u = wins_i per model
        # (exactly u = log(wins/rate) when lam == 0); convex scalar Newton.
        u = np.log(np.maximum(wins, 1e-300)) - np.log(rate)
        if lam > 0.0:
            for _ in range(100):
                eu = np.exp(np.clip(u, -_BETA_CLAMP, _BETA_CLAMP))
                resid = rate * eu + lam * u - wins
                u_next = u - resid / (rate * eu + lam)
                # far below the sweep tolerance; avoids last-ulp oscillation
                if float(np.max(np.abs(u_next - u))) < 1e-12:
                    u = u_next
                    break
                u = u_next
        u = np.clip(u, -_BETA_CLAMP, _BETA_CLAMP)
        new_beta = u - u.mean()
        delta = float(np.max(np.abs(new_beta - beta)))
        beta = new_beta
        if trace is not None:
            trace.append(_loglik(w, n, beta, lam))
        g = _grad(w, n, beta, lam)
        gnorm = float(np.max(np.abs(g)))
        if (delta <= cfg.tol and gnorm <= 10.0 * cfg.tol) or gnorm <= noise:
            return beta, it, True
        if it % _MM_STALL_CHECK == 0:
            if gnorm > 0.5 * stall_reference:
                beta = _newton_step(w, n, beta, lam)
                if trace is not None:
                    trace.append(_loglik(w, n, beta, lam))
            stall_reference = gnorm
    return beta, cfg.max_iter, False


def _component_covariance(w, n, beta, lam):
    m = len(beta)
    p = sigmoid(beta[:, None] - beta[None, :])
    np.fill_diagonal(p, 0.0)
    curv = n * p * (1.0 - p)
    neg_hessian = np.diag(curv.sum(axis=1)) - curv + lam * np.identity(m)
    cov = np.linalg.pinv(neg_hessian, hermitian=True)
    proj = np.identity(m) - np.full((m, m), 1.0 / m)
    cov = proj @ cov @ proj
    return (cov + cov.T) / 2.0


def fit_epp(counts: PairwiseCounts, cfg: FitConfig | None = None) -> EppScores:
    """Fit mean-centered strength scores to a pairwise-count ledger.

    Disconnected comparison graphs are fitted per connected component (each
    centered to zero mean) with a :class:`FitWarning`. Non-convergence
    within ``cfg.max_iter`` returns a result with ``converged=False``.
    """
    cfg = cfg or FitConfig()
    m = counts.n_models
    w, n = counts.w, counts.n
    beta = np.zeros(m)
    covariance = np.zeros((m, m))
    components = _connected_components(n)
    if len(components) > 1:
        warnings.warn(
            f"dataset {counts.dataset_id!r}: comparison graph has "
            f"{len(components)} connected components; fitted separately",
            FitWarning,
            stacklevel=2,
        )
    fitter = _fit_mm if cfg.algorithm == FitAlgorithm.MM else _fit_newton
    converged = True
    iterations = 0
    for comp in components:
        if len(comp) == 1:
            continue  # isolated model keeps beta 0 and zero variance
        wc = w[np.ix_(comp, comp)]
        nc = n[np.ix_(comp, comp)]
        beta_c, iters_c, conv_c = fitter(wc, nc, cfg)
        beta_c = beta_c - beta_c.mean()
        beta[comp] = beta_c
        covariance[np.ix_(comp, comp)] = _component_covariance(
            wc, nc, beta_c, cfg.ridge_lambda
        )
        converged = converged and conv_c
        iterations = max(iterations, iters_c)
    return EppScores(
        dataset_id=counts.dataset_id,
        models=counts.models,
        beta=beta,
        converged=converged,
        iterations=iterations,
        log_likelihood=_loglik(w, n, beta, 0.0),
        covariance=covariance,
        separation_flags=detect_separation(counts),
        n_components=len(components),
    )
