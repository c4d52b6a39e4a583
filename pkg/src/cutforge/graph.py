"""Weighted undirected graphs, the edge-logit encoding, and exact MaxCut by enumeration."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from cutforge import kernels

#: Largest graph ``brute_force_maxcut`` will enumerate.
BRUTE_FORCE_MAX_NODES = 30

#: Default per-dimension box of the edge-logit search space.
LATENT_BOUNDS = (-3.0, 3.0)


class GraphFormatError(ValueError):
    """Malformed edge-list text or an invalid edge set."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with real edge weights.

    ``edges`` holds ``(u, v, w)`` triples with ``u < v``, sorted lexicographically
    by ``(u, v)``. Zero-weight edges are never stored.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise GraphFormatError(f"node count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        clean = []
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if not u < v:
                raise GraphFormatError(f"edge ({u}, {v}) must satisfy u < v")
            if u < 0 or v >= self.n:
                raise GraphFormatError(f"edge ({u}, {v}) out of range for n={self.n}")
            if not np.isfinite(w):
                raise GraphFormatError(f"edge ({u}, {v}) has non-finite weight {w}")
            if w != 0.0:
                clean.append((u, v, w))
        clean.sort(key=lambda e: (e[0], e[1]))
        for a, b in zip(clean, clean[1:]):
            if a[:2] == b[:2]:
                raise GraphFormatError(f"duplicate edge ({a[0]}, {a[1]})")
        object.__setattr__(self, "edges", tuple(clean))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]], weight: float = 1.0) -> "Graph":
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` items in any orientation."""
        out = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else weight
            if u > v:
                u, v = v, u
            out.append((u, v, w))
        return cls(n, tuple(out))

    @classmethod
    def from_networkx(cls, nx_graph) -> "Graph":
        nodes = sorted(nx_graph.nodes())
        index = {x: i for i, x in enumerate(nodes)}
        return cls.from_edges(
            len(nodes),
            ((index[a], index[b], d.get("weight", 1.0)) for a, b, d in nx_graph.edges(data=True)),
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    @cached_property
    def weights(self) -> np.ndarray:
        """Dense symmetric weight matrix (read-only)."""
        W = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            W[u, v] = W[v, u] = w
        W.flags.writeable = False
        return W

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(u, v, w)`` as parallel arrays in canonical edge order."""
        if not self.edges:
            return np.zeros(0, np.intp), np.zeros(0, np.intp), np.zeros(0)
        u, v, w = zip(*self.edges)
        arrays = (np.array(u, np.intp), np.array(v, np.intp), np.array(w, float))
        for a in arrays:
            a.flags.writeable = False
        return arrays

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for u, v, _ in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u] if 0 <= u < self.n else False

    def weight(self, u: int, v: int) -> float:
        return float(self.weights[u, v])

    def to_networkx(self):
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_weighted_edges_from(self.edges)
        return G

    def serialize(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class LatentPoint:
    """A point of the edge-logit search space together with its box."""

    x: np.ndarray
    bounds: tuple[float, float] = LATENT_BOUNDS

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        lo, hi = self.bounds
        if not lo < hi:
            raise ValueError(f"invalid bounds {self.bounds}")
        if np.any(x < lo) or np.any(x > hi):
            raise ValueError("latent point lies outside its bounds")
        object.__setattr__(self, "x", x)


def latent_dimension(n: int) -> int:
    return n * (n - 1) // 2


def decode_latent(p: LatentPoint | np.ndarray | Sequence[float], n: int) -> Graph:
    """Threshold an edge-logit vector at zero; entry ``k`` is the k-th upper-triangle pair."""
    x = np.asarray(p.x if isinstance(p, LatentPoint) else p, dtype=float)
    if x.ndim != 1 or x.size != latent_dimension(n):
        raise ValueError(f"expected {latent_dimension(n)} logits for n={n}, got shape {x.shape}")
    iu, iv = np.triu_indices(n, 1)
    keep = x > 0
    return Graph(n, tuple((int(a), int(b), 1.0) for a, b in zip(iu[keep], iv[keep])))


def cut_value(g: Graph, s: Sequence[int] | np.ndarray) -> float:
    """Total weight of edges whose endpoints carry different spins."""
    s = np.asarray(s)
    if s.shape != (g.n,):
        raise ValueError(f"assignment has shape {s.shape}, graph has {g.n} nodes")
    if not np.all(np.abs(s) == 1):
        raise ValueError("assignment entries must be +1 or -1")
    total = 0.0
    for u, v, w in g.edges:
        if s[u] != s[v]:
            total += w
    return total


def cut_values(g: Graph, S: np.ndarray) -> np.ndarray:
    """``cut_value`` for each row of ``S``, with the same summation order."""
    S = np.asarray(S)
    out = np.zeros(S.shape[0])
    for u, v, w in g.edges:
        out += np.where(S[:, u] != S[:, v], w, 0.0)
    return out


def assignment_from_index(index: int, n: int) -> np.ndarray:
    """Spin vector for enumeration index ``index`` (node 0 fixed to +1, node i>0 reads bit i-1)."""
    bits = (index >> np.arange(n - 1)) & 1
    return np.concatenate(([1], 1 - 2 * bits)).astype(np.int64)


def brute_force_maxcut(g: Graph) -> tuple[float, np.ndarray]:
    """Exact maximum cut by enumerating all assignments with node 0 fixed to +1.

    Ties go to the lowest enumeration index.
    """
    if g.n > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_NODES} nodes, got {g.n}")
    if g.n == 1 or g.m == 0:
        return 0.0, np.ones(g.n, dtype=np.int64)
    u, v, w = g.edge_arrays
    value, index = kernels.brute_force_maxcut(g.n, u, v, w)
    return value, assignment_from_index(index, g.n)


def connected_components(g: Graph) -> list[tuple[Graph, np.ndarray]]:
    """Split ``g`` into relabelled components, ordered by their smallest node.

    Each item is ``(component, node_map)`` where ``node_map[i]`` is the parent
    label of local node ``i``.
    """
    seen = np.zeros(g.n, dtype=bool)
    out = []
    for root in range(g.n):
        if seen[root]:
            continue
        seen[root] = True
        members = [root]
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in g.adjacency[x]:
                if not seen[y]:
                    seen[y] = True
                    members.append(y)
                    queue.append(y)
        members.sort()
        local = {x: i for i, x in enumerate(members)}
        sub = tuple(
            (local[a], local[b], w) for a, b, w in g.edges if a in local
        )
        out.append((Graph(len(members), sub), np.array(members, dtype=np.int64)))
    return out


def serialize(g: Graph) -> str:
    """Edge-list text: ``"n m"`` header then ``"u v w"`` lines, 17 significant digits."""
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v} {w:.17g}" for u, v, w in g.edges]
    return "\n".join(lines) + "\n"


def parse(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GraphFormatError("empty input")
    head = lines[0].split()
    try:
        n, m = int(head[0]), int(head[1])
        if len(head) != 2:
            raise ValueError
    except (ValueError, IndexError):
        raise GraphFormatError(f"malformed header {lines[0]!r}") from None
    if len(lines) - 1 != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(lines) - 1}")
    edges = []
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        try:
            if len(parts) != 3:
                raise ValueError
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphFormatError(f"malformed edge line {ln!r}") from None
        if not u < v:
            raise GraphFormatError(f"edge line {ln!r} requires u < v")
        if u < 0 or v >= n:
            raise GraphFormatError(f"edge line {ln!r} out of range for n={n}")
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge ({u}, {v})")
        if w == 0.0:
            raise GraphFormatError(f"edge line {ln!r} has zero weight")
        seen.add((u, v))
        edges.append((u, v, w))
    return Graph(n, tuple(edges))


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(g))


# Small named graphs used by tests and the CLI.

def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def gnp_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return Graph(n, tuple((int(a), int(b), 1.0) for a, b in zip(iu[keep], iv[keep])))


def disjoint_union(*graphs: Graph) -> Graph:
    edges = []
    offset = 0
    for g in graphs:
        edges += [(u + offset, v + offset, w) for u, v, w in g.edges]
        offset += g.n
    return Graph(offset, tuple(edges))
