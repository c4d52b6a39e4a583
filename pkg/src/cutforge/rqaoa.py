"""Classical simulation of depth-1 recursive QAOA for weighted MaxCut.

The QAOA state is ``exp(-i beta B) exp(-i gamma C) |+>^n`` with
``C = sum_e w_e (1 - Z_u Z_v) / 2`` and ``B = sum_j X_j``. Edge correlators
use the closed form evaluated by :mod:`cutforge.kernels`; a dense statevector
routine is kept alongside as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from cutforge import kernels
from cutforge.graph import Graph, brute_force_maxcut, connected_components, cut_value, serialize

GAMMA_RANGE = (-math.pi, math.pi)
BETA_RANGE = (-math.pi / 4, math.pi / 4)
GRID_POINTS = 64
REFINE_ITERATIONS = 40
REFINE_TOL = 1e-10
STATEVECTOR_MAX_NODES = 12


@dataclass(frozen=True)
class QaoaParams:
    gamma: float
    beta: float

    def __post_init__(self) -> None:
        lo, hi = GAMMA_RANGE
        if not lo <= self.gamma <= hi:
            raise ValueError(f"gamma={self.gamma} outside [{lo}, {hi}]")
        lo, hi = BETA_RANGE
        if not lo <= self.beta <= hi:
            raise ValueError(f"beta={self.beta} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class ContractionRecord:
    """One elimination: node ``edge[1]`` is replaced by ``sigma * s[edge[0]]``.

    ``edge`` and ``node_map`` use the local labels of the graph that was
    contracted; ``labels`` maps those local labels to the caller's nodes.
    """

    iteration: int
    edge: tuple[int, int]
    expectation: float
    sigma: int
    offset_delta: float
    params: QaoaParams
    node_map: tuple[int, ...]
    labels: Optional[tuple[int, ...]] = None
    tied: int = 1

    @property
    def original_edge(self) -> tuple[int, int]:
        if self.labels is None:
            return self.edge
        return self.labels[self.edge[0]], self.labels[self.edge[1]]

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "edge": list(self.original_edge),
            "local_edge": list(self.edge),
            "expectation": self.expectation,
            "sigma": self.sigma,
            "offset_delta": self.offset_delta,
            "gamma": self.params.gamma,
            "beta": self.params.beta,
            "node_map": list(self.node_map),
            "labels": None if self.labels is None else list(self.labels),
            "tied": self.tied,
        }


@dataclass
class RqaoaResult:
    value: float
    assignment: np.ndarray
    trace: list[ContractionRecord] = field(default_factory=list)
    terminal_size: int = 0


@dataclass
class RqaoaCache:
    """Memo of the deterministic parts of a solve, keyed by canonical graph text.

    Repeated solves of one instance differ only in tie-breaking, so sharing a
    cache across them avoids re-optimising parameters on graphs already seen.
    """

    analysis: dict = field(default_factory=dict)
    brute: dict = field(default_factory=dict)

    def analyse(self, g: Graph) -> tuple[QaoaParams, float, np.ndarray]:
        key = serialize(g)
        hit = self.analysis.get(key)
        if hit is None:
            params, expected = optimize_parameters(g)
            hit = (params, expected, edge_correlators(g, params))
            self.analysis[key] = hit
        return hit

    def brute_force(self, g: Graph) -> np.ndarray:
        key = serialize(g)
        hit = self.brute.get(key)
        if hit is None:
            hit = brute_force_maxcut(g)[1]
            self.brute[key] = hit
        return hit


# --- correlators ---------------------------------------------------------------

def _edge_terms(g: Graph, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    W = g.weights
    C = np.cos(gamma * W)
    S = np.sin(gamma * W)
    eu, ev, _ = g.edge_arrays
    return kernels.edge_terms(C, S, eu, ev)


def edge_correlators(g: Graph, p: QaoaParams) -> np.ndarray:
    """``<Z_u Z_v>`` for every edge of ``g`` in canonical order."""
    if g.m == 0:
        return np.zeros(0)
    A, B = _edge_terms(g, p.gamma)
    out = math.sin(4 * p.beta) * A + math.sin(2 * p.beta) ** 2 * B
    return np.clip(out, -1.0, 1.0)


def edge_expectation(g: Graph, p: QaoaParams, e: tuple[int, int]) -> float:
    u, v = sorted(e)
    if not g.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")
    k = next(i for i, (a, b, _) in enumerate(g.edges) if (a, b) == (u, v))
    return float(edge_correlators(g, p)[k])


def statevector_expectation(g: Graph, p: QaoaParams, e: tuple[int, int]) -> float:
    """``<Z_u Z_v>`` from the full 2**n amplitude vector."""
    n = g.n
    if n > STATEVECTOR_MAX_NODES:
        raise ValueError(f"statevector simulation limited to {STATEVECTOR_MAX_NODES} nodes")
    u, v = e
    if not (0 <= u < n and 0 <= v < n and u != v):
        raise ValueError(f"invalid node pair {e}")
    idx = np.arange(2**n)
    z = 1 - 2 * ((idx[:, None] >> np.arange(n)) & 1)
    cost = np.zeros(2**n)
    for a, b, w in g.edges:
        cost += w * (1 - z[:, a] * z[:, b]) / 2
    psi = np.exp(-1j * p.gamma * cost) / math.sqrt(2**n)
    # qubit q is bit q, i.e. tensor axis n-1-q of the C-ordered reshape
    psi = psi.reshape((2,) * n)
    c, s = math.cos(p.beta), math.sin(p.beta)
    rx = np.array([[c, -1j * s], [-1j * s, c]])
    for q in range(n):
        axis = n - 1 - q
        psi = np.moveaxis(np.tensordot(rx, psi, axes=([1], [axis])), 0, axis)
    prob = np.abs(psi.reshape(-1)) ** 2
    return float(np.sum(prob * z[:, u] * z[:, v]))


def expected_cut(g: Graph, p: QaoaParams) -> float:
    _, _, w = g.edge_arrays
    return float(np.sum(w * (1 - edge_correlators(g, p))) / 2)


# --- parameter search ----------------------------------------------------------

def _profile(g: Graph, gamma: float) -> tuple[float, float]:
    _, _, w = g.edge_arrays
    A, B = _edge_terms(g, gamma)
    return float(w @ A), float(w @ B)


def _objective(half_total: float, a: float, b: float, beta: float) -> float:
    return half_total - 0.5 * (math.sin(4 * beta) * a + math.sin(2 * beta) ** 2 * b)


def optimize_parameters(g: Graph) -> tuple[QaoaParams, float]:
    """Maximise the depth-1 expected cut: 64x64 grid, then coordinate descent."""
    if g.m == 0:
        raise ValueError("cannot optimise QAOA parameters on an edgeless graph")
    half = g.total_weight / 2
    gammas = np.linspace(*GAMMA_RANGE, GRID_POINTS)
    betas = np.linspace(*BETA_RANGE, GRID_POINTS)
    prof = np.array([_profile(g, gm) for gm in gammas])
    grid = half - 0.5 * (
        np.outer(prof[:, 0], np.sin(4 * betas)) + np.outer(prof[:, 1], np.sin(2 * betas) ** 2)
    )
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)

    x = [float(gammas[i]), float(betas[j])]
    ab = tuple(prof[i])
    best = _objective(half, *ab, x[1])
    steps = [float(gammas[1] - gammas[0]), float(betas[1] - betas[0])]
    bounds = (GAMMA_RANGE, BETA_RANGE)
    for _ in range(REFINE_ITERATIONS):
        for axis in (0, 1):
            lo, hi = bounds[axis]
            move = None
            for sign in (1.0, -1.0):
                y = list(x)
                y[axis] = min(hi, max(lo, x[axis] + sign * steps[axis]))
                if y[axis] == x[axis]:
                    continue
                y_ab = _profile(g, y[0]) if axis == 0 else ab
                fy = _objective(half, *y_ab, y[1])
                if fy > best:
                    best, move = fy, (y, y_ab)
            if move is None:
                steps[axis] /= 2
            else:
                x, ab = move
        if max(steps) < REFINE_TOL:
            break
    return QaoaParams(x[0], x[1]), best


# --- recursion -----------------------------------------------------------------

def contract(g: Graph, u: int, v: int, sigma: int) -> tuple[Graph, float, tuple[int, ...]]:
    """Substitute ``s_v = sigma * s_u`` and drop ``v``.

    Returns ``(g', offset, node_map)`` with ``cut(g, expand(s')) = cut(g', s') + offset``
    and ``node_map[i]`` the label in ``g`` of node ``i`` of ``g'``.
    """
    W = {}
    offset = 0.0
    moved = []
    for a, b, w in g.edges:
        if v in (a, b):
            k = b if a == v else a
            if k == u:
                offset += w * (1 - sigma) / 2
            else:
                moved.append((k, w))
        else:
            W[(a, b)] = w
    for k, w in moved:
        offset += w * (1 - sigma) / 2
        key = (min(u, k), max(u, k))
        W[key] = W.get(key, 0.0) + sigma * w
    relabel = lambda x: x if x < v else x - 1  # noqa: E731
    edges = tuple(
        (relabel(a), relabel(b), w) for (a, b), w in W.items() if w != 0.0
    )
    node_map = tuple(x for x in range(g.n) if x != v)
    return Graph(g.n - 1, edges), offset, node_map


def expand(s_small: np.ndarray, rec: ContractionRecord, n: int) -> np.ndarray:
    """Lift an assignment of the contracted graph back through one record."""
    s = np.empty(n, dtype=np.int64)
    s[list(rec.node_map)] = s_small
    u, v = rec.edge
    s[v] = rec.sigma * s[u]
    return s


def rqaoa_step(
    g: Graph,
    rng: np.random.Generator,
    cache: Optional[RqaoaCache] = None,
    iteration: int = 0,
) -> tuple[Graph, ContractionRecord]:
    """Contract the edge with the largest ``|<Z_u Z_v>|``.

    Ties (exact float equality) are broken uniformly with ``rng``; a zero
    correlator gives ``sigma = +1``.
    """
    if g.n < 2 or g.m == 0:
        raise ValueError("rqaoa_step needs at least two nodes and one edge")
    cache = cache if cache is not None else RqaoaCache()
    params, _, corr = cache.analyse(g)
    mag = np.abs(corr)
    ties = np.flatnonzero(mag == mag.max())
    pick = int(ties[rng.integers(ties.size)]) if ties.size > 1 else int(ties[0])
    u, v, _ = g.edges[pick]
    x = float(corr[pick])
    sigma = 1 if x >= 0 else -1
    g2, offset, node_map = contract(g, u, v, sigma)
    rec = ContractionRecord(
        iteration=iteration,
        edge=(u, v),
        expectation=x,
        sigma=sigma,
        offset_delta=offset,
        params=params,
        node_map=node_map,
        tied=int(ties.size),
    )
    return g2, rec


StepHook = Callable[[Graph, ContractionRecord, np.ndarray], None]


def rqaoa_solve(
    g: Graph,
    n_c: int,
    seed=None,
    cache: Optional[RqaoaCache] = None,
    on_step: Optional[StepHook] = None,
) -> RqaoaResult:
    """Run depth-1 RQAOA with brute-force handoff at ``n_c`` nodes.

    Every connected component is solved separately, including components
    split off during the recursion. ``seed`` feeds the tie-breaking rng.
    ``on_step(graph, record, correlators)`` sees each contraction before it
    is applied.
    """
    if n_c < 1:
        raise ValueError("n_c must be a positive integer")
    rng = np.random.default_rng(seed)
    cache = cache if cache is not None else RqaoaCache()
    trace: list[ContractionRecord] = []
    banked = [0.0]

    def solve(h: Graph, labels: np.ndarray) -> np.ndarray:
        s = np.empty(h.n, dtype=np.int64)
        for comp, cmap in connected_components(h):
            s[cmap] = solve_connected(comp, labels[cmap])
        return s

    def solve_connected(h: Graph, labels: np.ndarray) -> np.ndarray:
        if h.n <= n_c or h.m == 0:
            s = cache.brute_force(h)
            banked[0] += cut_value(h, s)
            return s
        h2, rec = rqaoa_step(h, rng, cache, iteration=len(trace))
        rec = _with_labels(rec, labels)
        if on_step is not None:
            on_step(h, rec, cache.analyse(h)[2])
        trace.append(rec)
        banked[0] += rec.offset_delta
        s2 = solve(h2, labels[list(rec.node_map)])
        return expand(s2, rec, h.n)

    s = solve(g, np.arange(g.n))
    value = cut_value(g, s)
    if not math.isclose(value, banked[0], rel_tol=1e-9, abs_tol=1e-9):
        raise RuntimeError(f"offset bookkeeping drifted: {banked[0]} vs {value}")
    return RqaoaResult(value=value, assignment=s, trace=trace, terminal_size=g.n - len(trace))


def _with_labels(rec: ContractionRecord, labels: np.ndarray) -> ContractionRecord:
    return replace(rec, labels=tuple(int(x) for x in labels))
