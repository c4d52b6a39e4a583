"""Instance evolution: the median performance-ratio fitness and its drivers.

Seeds are derived, never drawn: evaluation ``k`` of a run with master seed
``s`` uses ``SeedSequence(s, spawn_key=(EVAL, k))``, and inside it RQAOA run
``r`` and GW rounding ``r`` get their own spawn keys. Results therefore do
not depend on how evaluations are scheduled across workers.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from cutforge.cmaes import CmaConfig, cma_minimize
from cutforge.features import FeatureVector, compute_features, export_features
from cutforge.graph import (
    LATENT_BOUNDS,
    Graph,
    brute_force_maxcut,
    decode_latent,
    latent_dimension,
    parse,
    serialize,
)
from cutforge.gw import SdpConvergenceError, SdpSolution, round_many, solve_sdp
from cutforge.rqaoa import RqaoaCache, rqaoa_solve

log = logging.getLogger(__name__)

PENALTY = -1.0
WORKERS_ENV = "CUTFORGE_WORKERS"
OPTIMUM_MAX_NODES = 20

TAG_EVAL = 0
TAG_RQAOA = 1
TAG_GW = 2
TAG_FEATURES = 3


class Direction(str, enum.Enum):
    GW_OVER_RQAOA = "gw-over-rqaoa"
    RQAOA_OVER_GW = "rqaoa-over-gw"

    def ratio(self, median_rqaoa: float, median_gw: float) -> float:
        if self is Direction.GW_OVER_RQAOA:
            return median_gw / median_rqaoa
        return median_rqaoa / median_gw

    def denominator(self, median_rqaoa: float, median_gw: float) -> float:
        return median_rqaoa if self is Direction.GW_OVER_RQAOA else median_gw


@dataclass
class EvolutionConfig:
    n: int
    n_c: int
    direction: Direction = Direction.GW_OVER_RQAOA
    runs_per_algorithm: int = 100
    popsize: int = 64
    max_evals_per_restart: int = 2000
    max_restarts: int = 10
    seed: int = 0
    out: Optional[str] = None

    def __post_init__(self) -> None:
        self.direction = Direction(self.direction)
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 1 <= self.n_c <= self.n:
            raise ValueError("n_c must lie in [1, n]")
        if self.runs_per_algorithm < 1:
            raise ValueError("runs_per_algorithm must be at least 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["direction"] = self.direction.value
        d.pop("out")
        return d


PRESETS = {
    "full-20": dict(n=20, n_c=10, popsize=64, max_evals_per_restart=2000, max_restarts=10),
    "full-100": dict(n=100, n_c=20, popsize=64, max_evals_per_restart=2000, max_restarts=10),
    "desk": dict(n=12, n_c=6, popsize=16, max_evals_per_restart=500, max_restarts=0),
}


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 63-bit seed from a master seed and integer keys."""
    state = np.random.SeedSequence(master, spawn_key=tuple(keys)).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def median(values: Sequence[float]) -> float:
    """Median with the midpoint convention for even counts."""
    return float(np.median(np.asarray(values, dtype=float)))


@dataclass
class Evaluation:
    """Per-run outcomes of both algorithms on one instance."""

    graph: Graph
    rqaoa_values: np.ndarray
    gw_values: np.ndarray
    median_rqaoa: float
    median_gw: float
    ratio: float
    sdp: Optional[SdpSolution] = None

    @property
    def valid(self) -> bool:
        return self.ratio != PENALTY


def run_algorithms(g: Graph, n_c: int, runs: int, seed: int, sdp: Optional[SdpSolution] = None):
    """``runs`` seeded RQAOA solves and ``runs`` GW roundings of one SDP solution."""
    cache = RqaoaCache()
    rq = np.array(
        [
            rqaoa_solve(g, n_c, np.random.SeedSequence(seed, spawn_key=(TAG_RQAOA, r)), cache).value
            for r in range(runs)
        ]
    )
    sdp = sdp if sdp is not None else solve_sdp(g)
    gw = round_many(g, sdp, runs, seed, tag=TAG_GW)
    return rq, gw, sdp


def evaluate_graph(g: Graph, cfg: EvolutionConfig, seed: int) -> Evaluation:
    """Fitness ingredients for a decoded graph; invalid instances carry the penalty."""
    empty = np.zeros(0)
    if g.m == 0:
        return Evaluation(g, empty, empty, math.nan, math.nan, PENALTY)
    try:
        rq, gw, sdp = run_algorithms(g, cfg.n_c, cfg.runs_per_algorithm, seed)
    except SdpConvergenceError as exc:
        log.warning("penalising instance: %s", exc)
        return Evaluation(g, empty, empty, math.nan, math.nan, PENALTY)
    med_rq, med_gw = median(rq), median(gw)
    if cfg.direction.denominator(med_rq, med_gw) == 0:
        return Evaluation(g, rq, gw, med_rq, med_gw, PENALTY, sdp)
    return Evaluation(g, rq, gw, med_rq, med_gw, cfg.direction.ratio(med_rq, med_gw), sdp)


def fitness(x, cfg: EvolutionConfig, seed: Optional[int] = None) -> float:
    """Median ratio of the configured direction for the graph decoded from ``x``."""
    seed = cfg.seed if seed is None else seed
    return evaluate_graph(decode_latent(x, cfg.n), cfg, seed).ratio


# --- archive -------------------------------------------------------------------

@dataclass
class InstanceRecord:
    instance_id: str
    graph: Graph
    median_rqaoa: float
    median_gw: float
    ratio: float
    direction: Direction
    features: FeatureVector
    provenance: dict
    rqaoa_values: list = field(default_factory=list)
    gw_values: list = field(default_factory=list)
    label: Optional[int] = None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def gw_over_rqaoa(self) -> float:
        return self.median_gw / self.median_rqaoa

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "n": self.graph.n,
            "graph": serialize(self.graph),
            "median_rqaoa": self.median_rqaoa,
            "median_gw": self.median_gw,
            "ratio": self.ratio,
            "direction": self.direction.value,
            "features": self.features.to_dict(),
            "provenance": self.provenance,
            "rqaoa_values": list(self.rqaoa_values),
            "gw_values": list(self.gw_values),
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceRecord":
        return cls(
            instance_id=d["instance_id"],
            graph=parse(d["graph"]),
            median_rqaoa=d["median_rqaoa"],
            median_gw=d["median_gw"],
            ratio=d["ratio"],
            direction=Direction(d["direction"]),
            features=FeatureVector.from_dict(d["features"]),
            provenance=d["provenance"],
            rqaoa_values=d["rqaoa_values"],
            gw_values=d["gw_values"],
            label=d.get("label"),
        )


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_archive(records: Sequence[InstanceRecord], out, cfg: Optional[EvolutionConfig] = None,
                  history: Optional[list] = None) -> None:
    """One JSON and one edge-list file per instance, plus a manifest."""
    out = Path(out)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    (out / "graphs").mkdir(exist_ok=True)
    for r in records:
        (out / "instances" / f"{r.instance_id}.json").write_text(_dumps(r.to_dict()), encoding="utf-8")
        (out / "graphs" / f"{r.instance_id}.txt").write_text(serialize(r.graph), encoding="utf-8")
    manifest = {
        "config": cfg.to_dict() if cfg else None,
        "instances": [
            {"instance_id": r.instance_id, "ratio": r.ratio, "n": r.n, "m": r.graph.m} for r in records
        ],
    }
    (out / "manifest.json").write_text(_dumps(manifest), encoding="utf-8")
    if history is not None:
        (out / "history.json").write_text(_dumps(history), encoding="utf-8")
    export_features(records, out / "features.csv")


def load_archive(path) -> list[InstanceRecord]:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
    return [
        InstanceRecord.from_dict(
            json.loads((path / "instances" / f"{item['instance_id']}.json").read_text(encoding="utf-8"))
        )
        for item in manifest["instances"]
    ]


# --- evolution -----------------------------------------------------------------

def worker_count(popsize: int) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(popsize, os.cpu_count() or 1))


def _evaluate_point(args) -> Evaluation:
    x, cfg, eval_index = args
    seed = derive_seed(cfg.seed, TAG_EVAL, eval_index)
    return evaluate_graph(decode_latent(x, cfg.n), cfg, seed)


def _featurize(args) -> FeatureVector:
    g, sdp, seed = args
    return compute_features(g, sdp, seed)


class _Pool:
    """``map`` over a process pool, or inline when one worker is requested."""

    def __init__(self, workers: int):
        self.executor = ProcessPoolExecutor(workers) if workers > 1 else None

    def map(self, fn, items):
        if self.executor is None:
            return [fn(x) for x in items]
        return list(self.executor.map(fn, items))

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self.executor is not None:
            self.executor.shutdown()


def evolve(cfg: EvolutionConfig, workers: Optional[int] = None) -> list[InstanceRecord]:
    """Maximise the fitness with CMA-ES and archive every instance with ratio > 1.

    Identical graphs found at several points are archived once, under the
    highest ratio (earliest evaluation on ties). Records come back sorted by
    ratio, descending; when ``cfg.out`` is set the archive is also written.
    """
    dim = latent_dimension(cfg.n)
    cma_cfg = CmaConfig(
        dimension=dim,
        bounds=LATENT_BOUNDS,
        max_evals_per_restart=cfg.max_evals_per_restart,
        population_size=cfg.popsize,
        max_restarts=cfg.max_restarts,
        seed=cfg.seed,
    )
    found: dict[str, tuple] = {}
    workers = workers or worker_count(cfg.popsize)

    with _Pool(workers) as pool:

        def batch(X, start, restart):
            results = pool.map(_evaluate_point, [(x, cfg, start + k) for k, x in enumerate(X)])
            for k, ev in enumerate(results):
                if ev.ratio > 1.0:
                    key = serialize(ev.graph)
                    prev = found.get(key)
                    if prev is None or ev.ratio > prev[0].ratio:
                        found[key] = (ev, restart, start + k)
            return [-ev.ratio for ev in results]

        result = cma_minimize(None, cma_cfg, evaluate_batch=batch)

        hits = sorted(found.values(), key=lambda t: (-t[0].ratio, t[2]))
        feats = pool.map(
            _featurize,
            [(ev.graph, ev.sdp, derive_seed(cfg.seed, TAG_FEATURES, idx)) for ev, _, idx in hits],
        )

    records = [
        InstanceRecord(
            instance_id=f"r{restart:02d}_e{idx:06d}",
            graph=ev.graph,
            median_rqaoa=ev.median_rqaoa,
            median_gw=ev.median_gw,
            ratio=ev.ratio,
            direction=cfg.direction,
            features=fv,
            provenance={"seed": cfg.seed, "restart": restart, "eval_index": idx},
            rqaoa_values=ev.rqaoa_values.tolist(),
            gw_values=ev.gw_values.tolist(),
        )
        for (ev, restart, idx), fv in zip(hits, feats)
    ]
    if cfg.out:
        write_archive(records, cfg.out, cfg, result.history_json())
    return records


# --- single-instance tools -----------------------------------------------------

def evaluate(g: Graph, cfg: EvolutionConfig, seed: Optional[int] = None) -> dict:
    """Both algorithms, both ratios, the optimum (small graphs) and the features."""
    if g.m == 0:
        raise ValueError("cannot evaluate an edgeless graph")
    seed = cfg.seed if seed is None else seed
    rq, gw, sdp = run_algorithms(g, cfg.n_c, cfg.runs_per_algorithm, seed)
    med_rq, med_gw = median(rq), median(gw)
    fv = compute_features(g, sdp, derive_seed(seed, TAG_FEATURES))
    report = {
        "n": g.n,
        "m": g.m,
        "n_c": cfg.n_c,
        "runs": cfg.runs_per_algorithm,
        "seed": seed,
        "median_rqaoa": med_rq,
        "median_gw": med_gw,
        "ratio_gw_over_rqaoa": med_gw / med_rq if med_rq else math.nan,
        "ratio_rqaoa_over_gw": med_rq / med_gw if med_gw else math.nan,
        "rqaoa_values": rq.tolist(),
        "gw_values": gw.tolist(),
        "relaxed_cost": sdp.relaxed_cost,
        "optimum": brute_force_maxcut(g)[0] if g.n <= OPTIMUM_MAX_NODES else None,
        "features": fv.values,
        "approximate_features": list(fv.approximate),
    }
    return report


def to_dot(g: Graph, labels: Sequence[int], edge: tuple[int, int], correlators, title: str) -> str:
    """DOT text of one contraction step; the chosen edge and its ends in orange."""
    u, v = edge
    lines = [f'graph "{title}" {{', f'  label="{title}";', "  node [shape=circle];"]
    for i in range(g.n):
        attrs = ' [color=orange, style=filled, fillcolor=orange]' if i in (u, v) else ""
        lines.append(f"  {labels[i]}{attrs};")
    for k, (a, b, w) in enumerate(g.edges):
        attrs = [f'label="{correlators[k]:.4f}"']
        if (a, b) == (u, v):
            attrs += ["color=orange", "penwidth=3"]
        lines.append(f"  {labels[a]} -- {labels[b]} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def trace(g: Graph, n_c: int, seed: int, out) -> dict:
    """Run one RQAOA solve and write ``trace.json`` plus one DOT file per contraction."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    dots = []

    def hook(h, rec, corr):
        title = f"iteration {rec.iteration}: contract {rec.original_edge} <ZZ>={rec.expectation:.4f}"
        dots.append(to_dot(h, rec.labels, rec.edge, corr, title))

    res = rqaoa_solve(g, n_c, seed, on_step=hook)
    for i, text in enumerate(dots):
        (out / f"iteration_{i:03d}.dot").write_text(text, encoding="utf-8")
    doc = {
        "n": g.n,
        "n_c": n_c,
        "seed": seed,
        "value": res.value,
        "assignment": res.assignment.tolist(),
        "terminal_size": res.terminal_size,
        "trace": [rec.to_dict() for rec in res.trace],
    }
    (out / "trace.json").write_text(_dumps(doc), encoding="utf-8")
    return doc


# --- labelling -----------------------------------------------------------------

def threshold_label(gw_over_rqaoa: float, threshold: float) -> int:
    """1 when GW/RQAOA is at or below ``threshold`` (RQAOA clearly ahead)."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    return 1 if gw_over_rqaoa <= threshold else 0


def winner_label(median_rqaoa: float, median_gw: float) -> int:
    """0 when RQAOA beats GW, else 1."""
    return 0 if median_rqaoa > median_gw else 1


def label(records: Sequence[InstanceRecord], threshold: Optional[float] = None,
          path=None) -> list[InstanceRecord]:
    """Attach labels (winner mode, or threshold mode when given) and optionally write the CSV."""
    out = []
    for r in records:
        if threshold is None:
            lab = winner_label(r.median_rqaoa, r.median_gw)
        else:
            lab = threshold_label(r.gw_over_rqaoa, threshold)
        out.append(replace(r, label=lab))
    if path is not None:
        export_features(out, path)
    return out
