"""Goemans-Williamson: low-rank SDP relaxation and random-hyperplane rounding.

The relaxation ``max sum_e w_e (1 - v_u . v_v) / 2`` over unit vectors is solved
on the product of spheres (Burer-Monteiro) by Riemannian gradient ascent with
an Armijo backtracking line search seeded by a Barzilai-Borwein step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from cutforge.graph import Graph, cut_value, cut_values

log = logging.getLogger(__name__)

RESTARTS = 8
MAX_ITER = 50_000
GRAD_TOL = 1e-7

_ARMIJO = 1e-4


class SdpConvergenceError(RuntimeError):
    """No restart reached the gradient tolerance within the iteration cap."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class SdpSolution:
    vectors: np.ndarray
    relaxed_cost: float
    iterations: int
    grad_norm: float
    restarts: list = field(default_factory=list)

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T

    def to_dict(self) -> dict:
        return {
            "vectors": self.vectors.tolist(),
            "relaxed_cost": self.relaxed_cost,
            "diagnostics": {
                "iterations": self.iterations,
                "grad_norm": self.grad_norm,
                "rank": self.rank,
                "restarts": self.restarts,
            },
        }


@dataclass
class GwResult:
    samples: np.ndarray
    best: float
    mean: float
    std: float
    median: float
    relaxed_cost: float = math.nan

    @classmethod
    def from_samples(cls, samples, relaxed_cost: float = math.nan) -> "GwResult":
        x = np.asarray(samples, dtype=float)
        return cls(
            samples=x,
            best=float(x.max()),
            mean=float(x.mean()),
            std=float(x.std()),
            median=float(np.median(x)),
            relaxed_cost=relaxed_cost,
        )


def sdp_rank(n: int) -> int:
    return math.ceil(math.sqrt(2 * n)) + 1


def relaxed_cost(g: Graph, V: np.ndarray) -> float:
    eu, ev, w = g.edge_arrays
    dots = np.einsum("ij,ij->i", V[eu], V[ev])
    return float(np.sum(w * (1 - dots)) / 2)


def _normalize_rows(V: np.ndarray) -> np.ndarray:
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _ascend(W: np.ndarray, V: np.ndarray, half_total: float, max_iter: int, tol: float):
    """Riemannian gradient ascent from ``V``; returns ``(V, cost, iterations, grad_norm)``."""

    def cost(X):
        return half_total - 0.25 * float(np.sum((W @ X) * X))

    def rgrad(X):
        G = -0.5 * (W @ X)
        return G - np.sum(G * X, axis=1, keepdims=True) * X

    f = cost(V)
    G = rgrad(V)
    gn = float(np.linalg.norm(G))
    step = 1.0 / max(1.0, float(np.abs(W).sum(axis=1).max()))
    it = 0
    while gn > tol and it < max_iter:
        it += 1
        # roundoff slack: near the optimum the Armijo gain drops below float resolution
        slack = 1e-14 * (1.0 + abs(f))
        t = step
        while True:
            Vn = _normalize_rows(V + t * G)
            fn = cost(Vn)
            if fn >= f + _ARMIJO * t * gn * gn - slack or t < 1e-20:
                break
            t *= 0.5
        Gn = rgrad(Vn)
        s = Vn - V
        y = Gn - G
        sy = float(np.sum(s * y))
        step = abs(float(np.sum(s * s)) / sy) if sy != 0.0 else 2 * t
        step = min(max(step, 1e-10), 1e10)
        V, f, G = Vn, fn, Gn
        gn = float(np.linalg.norm(G))
    return V, f, it, gn


def solve_sdp(
    g: Graph,
    seed: int = 0,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
    tol: float = GRAD_TOL,
    rank: int | None = None,
) -> SdpSolution:
    """Solve the MaxCut SDP relaxation; best of ``restarts`` random starts."""
    if g.m == 0:
        raise ValueError("SDP relaxation needs at least one edge")
    if any(w < 0 for _, _, w in g.edges):
        raise ValueError("solve_sdp expects nonnegative weights")
    r = rank or sdp_rank(g.n)
    W = np.array(g.weights)
    half = g.total_weight / 2
    best = None
    runs = []
    for k in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        V0 = _normalize_rows(rng.standard_normal((g.n, r)))
        V, _, it, gn = _ascend(W, V0, half, max_iter, tol)
        V = _normalize_rows(V)
        f = relaxed_cost(g, V)
        runs.append({"restart": k, "cost": f, "iterations": it, "grad_norm": gn})
        ok = gn <= tol
        if best is None or (ok, f) > (best[0], best[1]):
            best = (ok, f, V, it, gn)
    ok, f, V, it, gn = best
    if not ok:
        raise SdpConvergenceError(
            f"SDP ascent did not reach grad norm {tol} in {max_iter} iterations "
            f"(best {gn:.3e})",
            {"restarts": runs, "n": g.n, "m": g.m},
        )
    return SdpSolution(vectors=V, relaxed_cost=f, iterations=it, grad_norm=gn, restarts=runs)


def round_hyperplane(g: Graph, sol: SdpSolution, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Split the vectors by a standard-normal hyperplane; ``sign(0) = +1``."""
    r = rng.standard_normal(sol.rank)
    proj = sol.vectors @ r
    s = np.where(proj >= 0, 1, -1).astype(np.int64)
    return s, cut_value(g, s)


def trial_rng(seed: int, trial: int, tag: int = 0) -> np.random.Generator:
    """Independent generator for rounding ``trial`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag, trial)))


def round_many(g: Graph, sol: SdpSolution, trials: int, seed: int, tag: int = 0) -> np.ndarray:
    R = np.array([trial_rng(seed, t, tag).standard_normal(sol.rank) for t in range(trials)])
    S = np.where(R @ sol.vectors.T >= 0, 1, -1)
    return cut_values(g, S)


def gw_solve(g: Graph, trials: int, seed: int, sol: SdpSolution | None = None) -> GwResult:
    """Solve the relaxation once (or reuse ``sol``) and round it ``trials`` times."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if sol is None:
        sol = solve_sdp(g)
    return GwResult.from_samples(round_many(g, sol, trials, seed), sol.relaxed_cost)
