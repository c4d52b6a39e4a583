"""CMA-ES minimiser with box constraints and independent restarts.

Default strategy parameters follow Hansen's tutorial settings (log-linear
recombination weights, cumulative step-size adaptation, rank-one plus rank-mu
covariance update). Candidates outside the box are resampled up to 100 times
and then clipped coordinate-wise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

MAX_RESAMPLES = 100
SIGMA_FLOOR = 1e-12
EIGEN_FLOOR = 1e-20
MAX_CONDITION = 1e14


class CmaAbort(RuntimeError):
    """A whole generation returned non-finite objective values."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class CmaConfig:
    dimension: int
    bounds: tuple
    max_evals_per_restart: int
    population_size: Optional[int] = None
    max_restarts: int = 0
    seed: int = 0
    initial_step_size: Optional[float] = None

    def __post_init__(self) -> None:
        if self.population_size is None:
            self.population_size = 4 + int(3 * math.log(self.dimension))
        if self.population_size < 4:
            raise ValueError("population size must be at least 4")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be nonnegative")
        lo, hi = self.box()
        if np.any(lo >= hi):
            raise ValueError("every lower bound must be below its upper bound")
        if self.initial_step_size is None:
            self.initial_step_size = 0.3 * float(np.min(hi - lo))

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.bounds
        return (
            np.broadcast_to(np.asarray(lo, float), (self.dimension,)).copy(),
            np.broadcast_to(np.asarray(hi, float), (self.dimension,)).copy(),
        )


@dataclass(frozen=True)
class StrategyParameters:
    weights: np.ndarray
    mu: int
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float


def default_parameters(dimension: int, popsize: int) -> StrategyParameters:
    n = dimension
    mu = popsize // 2
    w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mu_eff = 1.0 / float(np.sum(w**2))
    c_sigma = (mu_eff + 2) / (n + mu_eff + 5)
    d_sigma = 1 + 2 * max(0.0, math.sqrt((mu_eff - 1) / (n + 1)) - 1) + c_sigma
    c_c = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
    c_1 = 2 / ((n + 1.3) ** 2 + mu_eff)
    c_mu = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((n + 2) ** 2 + mu_eff))
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))
    return StrategyParameters(w, mu, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n)


@dataclass
class CmaState:
    mean: np.ndarray
    cov: np.ndarray
    sigma: float
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int = 0
    evals: int = 0
    eigvals: np.ndarray = field(default=None)
    eigvecs: np.ndarray = field(default=None)

    @classmethod
    def initial(cls, mean: np.ndarray, sigma: float) -> "CmaState":
        n = mean.size
        s = cls(mean.copy(), np.eye(n), sigma, np.zeros(n), np.zeros(n))
        s.decompose()
        return s

    def decompose(self) -> None:
        """Refresh the eigendecomposition, flooring eigenvalues if needed."""
        self.cov = (self.cov + self.cov.T) / 2
        d, B = np.linalg.eigh(self.cov)
        if d.min() <= 0:
            d = np.maximum(d, EIGEN_FLOOR)
            self.cov = (B * d) @ B.T
            self.cov = (self.cov + self.cov.T) / 2
        self.eigvals, self.eigvecs = d, B

    def condition(self) -> float:
        return float(self.eigvals.max() / self.eigvals.min())


def sample_population(
    state: CmaState, popsize: int, rng: np.random.Generator, lo: np.ndarray, hi: np.ndarray
) -> np.ndarray:
    """Draw ``popsize`` in-box candidates (resample, then clip)."""
    BD = state.eigvecs * np.sqrt(state.eigvals)
    out = np.empty((popsize, state.mean.size))
    for k in range(popsize):
        for _ in range(MAX_RESAMPLES):
            x = state.mean + state.sigma * (BD @ rng.standard_normal(state.mean.size))
            if np.all(x >= lo) and np.all(x <= hi):
                break
        out[k] = np.clip(x, lo, hi)
    return out


def update_state(state: CmaState, params: StrategyParameters, X: np.ndarray, f: np.ndarray) -> None:
    """One generation of mean, path, covariance and step-size updates (in place)."""
    n = state.mean.size
    order = np.argsort(f, kind="stable")
    sel = X[order[: params.mu]]
    Y = (sel - state.mean) / state.sigma
    y_w = params.weights @ Y
    state.mean = state.mean + state.sigma * y_w

    inv_sqrt = (state.eigvecs / np.sqrt(state.eigvals)) @ state.eigvecs.T
    cs = params.c_sigma
    state.p_sigma = (1 - cs) * state.p_sigma + math.sqrt(cs * (2 - cs) * params.mu_eff) * (
        inv_sqrt @ y_w
    )
    g = state.generation + 1
    ps_norm = float(np.linalg.norm(state.p_sigma))
    h_sigma = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * g)) < (1.4 + 2 / (n + 1)) * params.chi_n
    cc = params.c_c
    state.p_c = (1 - cc) * state.p_c + h_sigma * math.sqrt(cc * (2 - cc) * params.mu_eff) * y_w

    rank_one = np.outer(state.p_c, state.p_c) + (1 - h_sigma) * cc * (2 - cc) * state.cov
    rank_mu = (Y * params.weights[:, None]).T @ Y
    state.cov = (1 - params.c_1 - params.c_mu) * state.cov + params.c_1 * rank_one + params.c_mu * rank_mu
    state.sigma *= math.exp((cs / params.d_sigma) * (ps_norm / params.chi_n - 1))
    state.generation = g
    state.decompose()


@dataclass
class CmaResult:
    x: Optional[np.ndarray]
    f: float
    history: list
    evaluations: int
    restarts: int
    stop_reasons: list

    def history_json(self) -> list[dict]:
        return [dict(h) for h in self.history]


BatchEvaluator = Callable[[np.ndarray, int, int], Sequence[float]]


def cma_minimize(
    f: Optional[Callable[[np.ndarray], float]],
    cfg: CmaConfig,
    evaluate_batch: Optional[BatchEvaluator] = None,
) -> CmaResult:
    """Minimise ``f`` over the box of ``cfg``.

    ``evaluate_batch(X, first_eval_index, restart)`` may replace ``f`` to
    evaluate a generation at once (e.g. in parallel); eval indices count
    across restarts.
    Each restart draws its initial mean uniformly in the box.
    """
    if evaluate_batch is None:
        if f is None:
            raise ValueError("need an objective or a batch evaluator")
        evaluate_batch = lambda X, _start, _restart: [f(x) for x in X]  # noqa: E731
    lo, hi = cfg.box()
    lam = cfg.population_size
    params = default_parameters(cfg.dimension, lam)
    history: list[dict] = []
    stops: list[str] = []
    best_x, best_f = None, math.inf
    total = 0
    runs = 0

    for restart in range(cfg.max_restarts + 1):
        if cfg.max_evals_per_restart < lam:
            break
        runs += 1
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(restart,)))
        state = CmaState.initial(rng.uniform(lo, hi), cfg.initial_step_size)
        while True:
            if state.evals + lam > cfg.max_evals_per_restart:
                stops.append("budget")
                break
            X = sample_population(state, lam, rng, lo, hi)
            raw = np.asarray(evaluate_batch(X, total, restart), dtype=float)
            finite = np.isfinite(raw)
            if not finite.any():
                raise CmaAbort(
                    "objective was non-finite on an entire generation",
                    {"restart": restart, "generation": state.generation, "evals": total, "values": raw.tolist()},
                )
            vals = np.where(finite, raw, np.inf)
            state.evals += lam
            total += lam
            k = int(np.argmin(vals))
            if vals[k] < best_f:
                best_f, best_x = float(vals[k]), X[k].copy()
            update_state(state, params, X, vals)
            history.append(
                {
                    "restart": restart,
                    "generation": state.generation,
                    "evals": total,
                    "best": best_f,
                    "median": float(np.median(vals)),
                    "sigma": state.sigma,
                }
            )
            if state.sigma < SIGMA_FLOOR:
                stops.append("sigma")
                break
            if state.condition() > MAX_CONDITION:
                stops.append("condition")
                break
    return CmaResult(best_x, best_f, history, total, runs, stops)
