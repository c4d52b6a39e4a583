"""Structural and GW-derived instance features, plus CSV export.

Structural features use the unweighted support of the graph. NP-hard
quantities (independence and chromatic numbers) are solved exactly by
branch and bound under a wall-clock budget; when the budget runs out a greedy
bound is reported and the feature name is added to ``FeatureVector.approximate``.
"""

from __future__ import annotations

import csv
import math
import time
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from cutforge import kernels
from cutforge.graph import Graph
from cutforge.gw import SdpSolution, round_many

GRAPH_FEATURES = (
    "LOG_NUM_EDGES",
    "DENSITY",
    "LOGRATIO_EDGETONODES",
    "LOG_CHROMATIC_NUM",
    "NORM_MIS",
    "GRAPH_ASSORTATIVITY",
    "SPECTRAL_GAP",
    "LOG_LARGESTEIGVAL",
    "LOG_SECONDLARGESTEIGVAL",
    "LOG_SMALLESTEIGVAL",
    "GIRTH",
    "TRANSITIVITY",
)
GW_FEATURES = (
    "PERCENT_CUT",
    "PERCENT_POSITIVE_LOWER_TRIANGULAR",
    "PERCENT_CLOSE1_LOWER_TRIANGULAR",
    "PERCENT_CLOSE3_LOWER_TRIANGULAR",
    "EXPECTED_COSTGW_OVER_SDP_COST",
    "STD_COSTGW_OVER_SDP_COST",
)
FEATURE_NAMES = GRAPH_FEATURES + GW_FEATURES

EXACT_BUDGET_SECONDS = 10.0
GW_FEATURE_TRIALS = 1000
LOG_FLOOR = 1e-300
_GW_FEATURE_TAG = 7


@dataclass(frozen=True)
class FeatureVector:
    """The 18 named instance features, in ``FEATURE_NAMES`` order."""

    values: dict
    approximate: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        missing = set(FEATURE_NAMES) - set(self.values)
        if missing:
            raise ValueError(f"missing features: {sorted(missing)}")
        object.__setattr__(self, "values", {k: float(self.values[k]) for k in FEATURE_NAMES})

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def as_list(self) -> list[float]:
        return [self.values[k] for k in FEATURE_NAMES]

    def to_dict(self) -> dict:
        return {"values": dict(self.values), "approximate": list(self.approximate)}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        return cls(d["values"], tuple(d.get("approximate", ())))


class _OutOfTime(Exception):
    pass


# --- spectrum ------------------------------------------------------------------

def normalized_laplacian(g: Graph) -> np.ndarray:
    """``I - D^-1/2 A D^-1/2`` of the support; isolated nodes give an all-zero row."""
    A = (g.weights != 0).astype(float)
    deg = A.sum(axis=1)
    inv = np.zeros(g.n)
    inv[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    L = -(inv[:, None] * A * inv[None, :])
    L[np.diag_indices(g.n)] = (deg > 0).astype(float)
    return L


def laplacian_spectrum(g: Graph) -> np.ndarray:
    """Ascending normalized-Laplacian eigenvalues via cyclic Jacobi."""
    return kernels.jacobi_eigenvalues(normalized_laplacian(g), 1e-12)


# --- combinatorial -------------------------------------------------------------

def _bitsets(adj: Iterable[Iterable[int]]) -> list[int]:
    out = []
    for nbrs in adj:
        b = 0
        for x in nbrs:
            b |= 1 << x
        out.append(b)
    return out


def _bits(b: int):
    while b:
        low = b & -b
        yield low.bit_length() - 1
        b ^= low


def _max_clique(nbr: list[int], deadline: float) -> int:
    """Size of a maximum clique; greedy-colouring bound (Tomita MCQ)."""
    n = len(nbr)
    best = [0]
    calls = [0]

    def colour_sort(P: int):
        order, bounds = [], []
        colour = 0
        U = P
        while U:
            colour += 1
            Q = U
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                Q &= ~nbr[v] & ~low
                U &= ~low
                order.append(v)
                bounds.append(colour)
        return order, bounds

    def expand(size: int, P: int) -> None:
        calls[0] += 1
        if calls[0] % 1024 == 0 and time.monotonic() > deadline:
            raise _OutOfTime
        order, bounds = colour_sort(P)
        for v, c in zip(reversed(order), reversed(bounds)):
            if size + c <= best[0]:
                return
            NP = P & nbr[v]
            if NP:
                expand(size + 1, NP)
            elif size + 1 > best[0]:
                best[0] = size + 1
            P &= ~(1 << v)

    if n:
        expand(0, (1 << n) - 1)
    return best[0]


def _greedy_independent_set(g: Graph) -> int:
    alive = set(range(g.n))
    size = 0
    while alive:
        v = min(alive, key=lambda x: (len(g.adjacency[x] & alive), x))
        size += 1
        alive -= g.adjacency[v] | {v}
    return size


def independence_number(g: Graph, budget: float = EXACT_BUDGET_SECONDS) -> tuple[int, bool]:
    """``(alpha(G), exact)``: maximum clique of the complement."""
    full = (1 << g.n) - 1
    comp = [full & ~b & ~(1 << i) for i, b in enumerate(_bitsets(g.adjacency))]
    try:
        return _max_clique(comp, time.monotonic() + budget), True
    except _OutOfTime:
        return _greedy_independent_set(g), False


def _dsatur_greedy(g: Graph) -> int:
    colour = [-1] * g.n
    for _ in range(g.n):
        v = _dsatur_pick(g, colour)
        used = {colour[x] for x in g.adjacency[v]}
        colour[v] = next(c for c in range(g.n) if c not in used)
    return max(colour) + 1 if g.n else 0


def _dsatur_pick(g: Graph, colour: list[int]) -> int:
    best, key = -1, None
    for v in range(g.n):
        if colour[v] >= 0:
            continue
        sat = len({colour[x] for x in g.adjacency[v] if colour[x] >= 0})
        free_deg = sum(1 for x in g.adjacency[v] if colour[x] < 0)
        k = (sat, free_deg, -v)
        if key is None or k > key:
            best, key = v, k
    return best


def chromatic_number(g: Graph, budget: float = EXACT_BUDGET_SECONDS) -> tuple[int, bool]:
    """``(chi(G), exact)`` by DSATUR branch and bound with a clique lower bound."""
    if g.n == 0:
        return 0, True
    if g.m == 0:
        return 1, True
    deadline = time.monotonic() + budget
    upper = _dsatur_greedy(g)
    try:
        lower = _max_clique(_bitsets(g.adjacency), deadline)
    except _OutOfTime:
        return upper, False
    best = [upper]
    colour = [-1] * g.n
    calls = [0]

    def search(coloured: int, used: int) -> None:
        if used >= best[0]:
            return
        if coloured == g.n:
            best[0] = used
            return
        calls[0] += 1
        if calls[0] % 256 == 0 and time.monotonic() > deadline:
            raise _OutOfTime
        v = _dsatur_pick(g, colour)
        taken = {colour[x] for x in g.adjacency[v]}
        for c in range(min(used + 1, best[0] - 1)):
            if c in taken:
                continue
            colour[v] = c
            search(coloured + 1, max(used, c + 1))
            colour[v] = -1
            if best[0] == lower:
                return

    try:
        search(0, 0)
    except _OutOfTime:
        return best[0], False
    return best[0], True


def girth(g: Graph) -> float:
    """Shortest cycle length by BFS from every node; ``inf`` for forests."""
    best = math.inf
    for root in range(g.n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in g.adjacency[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return float(best)


def transitivity(g: Graph) -> float:
    """``3 * triangles / connected triples``; 0 when there are no triples."""
    adj = g.adjacency
    closed = sum(len(adj[u] & adj[v]) for u, v, _ in g.edges)  # 3 * triangles
    triples = sum(len(a) * (len(a) - 1) // 2 for a in adj)
    return closed / triples if triples else 0.0


def degree_assortativity(g: Graph) -> float:
    """Pearson correlation of endpoint degrees over edges; NaN if degrees do not vary."""
    if g.m == 0:
        return math.nan
    deg = g.degrees()
    eu, ev, _ = g.edge_arrays
    x = np.concatenate([deg[eu], deg[ev]]).astype(float)
    y = np.concatenate([deg[ev], deg[eu]]).astype(float)
    x -= x.mean()
    y -= y.mean()
    var = float(np.sum(x * x))
    if var == 0.0:
        return math.nan
    return float(np.clip(np.sum(x * y) / var, -1.0, 1.0))


# --- feature groups ------------------------------------------------------------

def _log(x: float) -> float:
    return math.log(max(x, LOG_FLOOR))


def compute_graph_features(
    g: Graph, budget: float = EXACT_BUDGET_SECONDS
) -> tuple[dict, tuple[str, ...]]:
    """The twelve structural features and the names of any inexact ones."""
    n, m = g.n, g.m
    if m == 0:
        out = {k: math.nan for k in GRAPH_FEATURES}
        out["DENSITY"] = 0.0
        return out, ("LOG_NUM_EDGES",)
    flags = []
    lam = laplacian_spectrum(g)
    chi, exact = chromatic_number(g, budget)
    if not exact:
        flags.append("LOG_CHROMATIC_NUM")
    alpha, exact = independence_number(g, budget)
    if not exact:
        flags.append("NORM_MIS")
    largest = float(lam[-1])
    second_largest = float(lam[-2]) if n > 1 else 0.0
    second_smallest = float(lam[1]) if n > 1 else 0.0
    out = {
        "LOG_NUM_EDGES": math.log(m),
        "DENSITY": m / (n * (n - 1) / 2),
        "LOGRATIO_EDGETONODES": math.log(m / n),
        "LOG_CHROMATIC_NUM": math.log(chi),
        "NORM_MIS": alpha / n,
        "GRAPH_ASSORTATIVITY": degree_assortativity(g),
        "SPECTRAL_GAP": max(0.0, largest - second_largest),
        "LOG_LARGESTEIGVAL": _log(largest),
        "LOG_SECONDLARGESTEIGVAL": _log(second_largest),
        "LOG_SMALLESTEIGVAL": _log(second_smallest),
        "GIRTH": girth(g),
        "TRANSITIVITY": transitivity(g),
    }
    return out, tuple(flags)


def lower_triangle(M: np.ndarray) -> np.ndarray:
    return M[np.tril_indices(M.shape[0], -1)]


def compute_gw_features(
    g: Graph, sol: SdpSolution, seed: int, trials: int = GW_FEATURE_TRIALS
) -> dict:
    """The six SDP and rounding features; triangle statistics use the Gram matrix."""
    tri = lower_triangle(sol.gram())
    samples = round_many(g, sol, trials, seed, tag=_GW_FEATURE_TAG)
    c = sol.relaxed_cost
    if tri.size == 0:
        pos = close1 = close3 = math.nan
    else:
        pos = float(np.mean(tri > 0))
        close1 = float(np.mean(np.abs(tri) < 0.1))
        close3 = float(np.mean(np.abs(tri) < 0.001))
    return {
        "PERCENT_CUT": c / g.m,
        "PERCENT_POSITIVE_LOWER_TRIANGULAR": pos,
        "PERCENT_CLOSE1_LOWER_TRIANGULAR": close1,
        "PERCENT_CLOSE3_LOWER_TRIANGULAR": close3,
        "EXPECTED_COSTGW_OVER_SDP_COST": float(samples.mean()) / c,
        "STD_COSTGW_OVER_SDP_COST": float(samples.std()) / c,
    }


def compute_features(
    g: Graph,
    sol: Optional[SdpSolution],
    seed: int,
    budget: float = EXACT_BUDGET_SECONDS,
) -> FeatureVector:
    values, flags = compute_graph_features(g, budget)
    if sol is None or g.m == 0:
        values.update({k: math.nan for k in GW_FEATURES})
    else:
        values.update(compute_gw_features(g, sol, seed))
    return FeatureVector(values, flags)


# --- CSV -----------------------------------------------------------------------

CSV_COLUMNS = ("instance_id", "n") + FEATURE_NAMES + ("ratio", "label")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def export_features(records, path) -> None:
    """Write one row per record: id, node count, the 18 features, ratio, label.

    Records need ``instance_id``, ``n``, ``features``, ``ratio`` and ``label``.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            row = [r.instance_id, r.n, *r.features.as_list(), float(r.ratio), r.label]
            w.writerow([_fmt(x) for x in row])


def read_features_csv(path) -> list[dict]:
    """Parse a file written by ``export_features`` back into typed rows."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {"instance_id": raw["instance_id"], "n": int(raw["n"])}
            for k in FEATURE_NAMES + ("ratio",):
                row[k] = float(raw[k])
            row["label"] = int(raw["label"]) if raw["label"] != "" else None
            rows.append(row)
    return rows
