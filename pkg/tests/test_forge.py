import json
import math
import re

import numpy as np
import pydot
import pytest

from cutforge.forge import (
    PENALTY,
    PRESETS,
    Direction,
    EvolutionConfig,
    InstanceRecord,
    derive_seed,
    evaluate,
    evaluate_graph,
    evolve,
    fitness,
    label,
    load_archive,
    median,
    threshold_label,
    trace,
    winner_label,
    write_archive,
)
from cutforge.features import compute_features, read_features_csv
from cutforge.graph import Graph, brute_force_maxcut, complete_graph, cycle_graph, disjoint_union, gnp_graph
from cutforge.gw import solve_sdp


def small_cfg(**kw):
    base = dict(n=6, n_c=2, runs_per_algorithm=10, popsize=8, max_evals_per_restart=48, max_restarts=1, seed=3)
    return EvolutionConfig(**(base | kw))


def make_record(iid, ratio_parts, label=None):
    g = cycle_graph(5)
    fv = compute_features(g, solve_sdp(g), 0)
    rq, gw = ratio_parts
    return InstanceRecord(iid, g, median(rq), median(gw), median(gw) / median(rq), Direction.GW_OVER_RQAOA,
                          fv, {"seed": 0, "restart": 0, "eval_index": 0}, rq, gw, label)


@pytest.mark.parametrize("kw", [dict(n=1, n_c=1), dict(n=5, n_c=0), dict(n=5, n_c=6), dict(n=5, n_c=2, runs_per_algorithm=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        EvolutionConfig(**kw)


def test_presets_are_valid():
    for p in PRESETS.values():
        EvolutionConfig(**p)
    assert PRESETS["full-20"]["n_c"] == 10 and PRESETS["full-100"]["n_c"] == 20


def test_derive_seed_is_stable():
    assert derive_seed(1, 0, 5) == derive_seed(1, 0, 5)
    assert derive_seed(1, 0, 5) != derive_seed(1, 0, 6) != derive_seed(2, 0, 5)


def test_median_midpoint():
    assert median([1, 2, 3, 10]) == 2.5 and median([3, 1, 2]) == 2


def test_fitness_penalty_and_equal_medians():
    cfg = small_cfg(n=4)
    assert fitness(np.full(6, -1.0), cfg) == PENALTY
    x = -np.ones(6)
    x[0] = 1.0  # single edge: both algorithms always cut it
    assert fitness(x, cfg) == 1.0


def test_fitness_deterministic():
    cfg = small_cfg(n=8, n_c=3)
    x = np.random.default_rng(0).uniform(-3, 3, 28)
    assert fitness(x, cfg, seed=11) == fitness(x, cfg, seed=11)


def test_direction_ratio():
    assert Direction.GW_OVER_RQAOA.ratio(4.0, 5.0) == 1.25
    assert Direction.RQAOA_OVER_GW.ratio(4.0, 5.0) == 0.8


def test_evaluate_examples():
    rep = evaluate(complete_graph(2), small_cfg(n=2, n_c=1))
    assert rep["median_rqaoa"] == 1 and rep["median_gw"] == 1 and rep["ratio_gw_over_rqaoa"] == 1
    two = disjoint_union(cycle_graph(3), cycle_graph(3))
    assert evaluate(two, small_cfg(n_c=3))["median_rqaoa"] == 4
    g = gnp_graph(12, 0.5, np.random.default_rng(1))
    rep = evaluate(g, small_cfg(n=12, n_c=4))
    assert rep["optimum"] == brute_force_maxcut(g)[0]
    assert max(rep["median_rqaoa"], rep["median_gw"]) <= rep["optimum"]
    assert len(rep["rqaoa_values"]) == len(rep["gw_values"]) == 10
    with pytest.raises(ValueError):
        evaluate(Graph(3), small_cfg(n=3))


def test_trace_files(tmp_path):
    doc = trace(complete_graph(2), 1, 0, tmp_path / "k2")
    assert len(doc["trace"]) == 1
    g = gnp_graph(20, 0.4, np.random.default_rng(5))
    doc = trace(g, 10, 0, tmp_path / "g20")
    assert len(doc["trace"]) <= 10
    dots = sorted((tmp_path / "g20").glob("*.dot"))
    assert len(dots) == len(doc["trace"])
    for path, rec in zip(dots, doc["trace"]):
        (parsed,) = pydot.graph_from_dot_file(str(path))
        u, v = rec["edge"]
        orange = {e.get_source() + "-" + e.get_destination() for e in parsed.get_edges() if e.get("color") == "orange"}
        assert orange == {f"{u}-{v}"}
        assert all(re.fullmatch(r'"-?\d\.\d{4}"', e.get("label")) for e in parsed.get_edges())


def test_label_modes():
    assert threshold_label(0.95, 0.96) == 1
    assert threshold_label(0.96, 0.96) == 1
    assert threshold_label(1.0, 0.96) == 0
    with pytest.raises(ValueError):
        threshold_label(0.9, 0.0)
    assert winner_label(5.0, 4.0) == 0 and winner_label(4.0, 4.0) == 1
    recs = [make_record("a", ([5.0], [4.0])), make_record("b", ([4.0], [5.0]))]
    assert [r.label for r in label(recs)] == [0, 1]
    assert [r.label for r in label(recs, 0.96)] == [1, 0]


def test_archive_round_trip(tmp_path):
    recs = [make_record("a", ([4.0, 4.0], [5.0, 5.0])), make_record("b", ([4.0], [4.5]))]
    write_archive(recs, tmp_path, small_cfg(), [])
    back = load_archive(tmp_path)
    dump = lambda rs: json.dumps([r.to_dict() for r in rs], sort_keys=True)  # noqa: E731
    assert dump(back) == dump(recs)
    rows = read_features_csv(tmp_path / "features.csv")
    assert [r["instance_id"] for r in rows] == ["a", "b"]


def test_zero_budget_gives_empty_archive(tmp_path):
    assert evolve(small_cfg(max_evals_per_restart=0, out=str(tmp_path)), workers=1) == []
    assert load_archive(tmp_path) == []


def test_evolve_archive_invariants_and_determinism(tmp_path):
    cfg = small_cfg(n=7, n_c=2, out=str(tmp_path / "a"))
    recs = evolve(cfg, workers=1)
    assert recs
    ratios = [r.ratio for r in recs]
    assert ratios == sorted(ratios, reverse=True)
    assert len({r.graph for r in recs}) == len(recs)
    for r in recs:
        assert r.ratio > 1 and r.median_gw > r.median_rqaoa
        assert r.ratio == median(r.gw_values) / median(r.rqaoa_values)
        assert r.provenance["eval_index"] < 2 * 48
    evolve(small_cfg(n=7, n_c=2, out=str(tmp_path / "b")), workers=2)
    for f in (tmp_path / "a").rglob("*"):
        if f.is_file():
            assert f.read_bytes() == (tmp_path / "b" / f.relative_to(tmp_path / "a")).read_bytes()


def test_sdp_failure_is_penalised(monkeypatch):
    from cutforge import forge
    from cutforge.gw import SdpConvergenceError

    def boom(g):
        raise SdpConvergenceError("no", {})

    monkeypatch.setattr(forge, "solve_sdp", boom)
    ev = evaluate_graph(cycle_graph(5), small_cfg(n=5), 0)
    assert ev.ratio == PENALTY and not ev.valid
    assert math.isnan(ev.median_gw)
