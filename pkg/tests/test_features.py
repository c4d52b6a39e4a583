import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from cutforge.features import (
    FEATURE_NAMES,
    FeatureVector,
    chromatic_number,
    compute_features,
    compute_graph_features,
    degree_assortativity,
    export_features,
    girth,
    independence_number,
    laplacian_spectrum,
    normalized_laplacian,
    read_features_csv,
    transitivity,
)
from cutforge.graph import Graph, complete_graph, cycle_graph, disjoint_union, gnp_graph, path_graph, petersen_graph
from cutforge.gw import solve_sdp

from conftest import graphs


def chromatic_oracle(g: Graph) -> int:
    for k in range(1, g.n + 1):
        for colours in itertools.product(range(k), repeat=g.n):
            if all(colours[u] != colours[v] for u, v, _ in g.edges):
                return k
    return g.n


def test_k5_fixture():
    f, flags = compute_graph_features(complete_graph(5))
    assert flags == ()
    assert f["DENSITY"] == 1 and f["TRANSITIVITY"] == 1 and f["GIRTH"] == 3
    assert f["SPECTRAL_GAP"] == pytest.approx(0, abs=1e-9)
    assert f["LOG_CHROMATIC_NUM"] == pytest.approx(math.log(5))
    lam = laplacian_spectrum(complete_graph(5))
    assert np.allclose(lam, [0, 1.25, 1.25, 1.25, 1.25], atol=1e-9)


def test_c5_and_petersen_fixtures():
    f, _ = compute_graph_features(cycle_graph(5))
    assert f["GIRTH"] == 5 and f["NORM_MIS"] == 0.4
    # C_n normalized Laplacian: 1 - cos(2 pi k / n)
    expect = np.sort(1 - np.cos(2 * np.pi * np.arange(5) / 5))
    assert np.allclose(laplacian_spectrum(cycle_graph(5)), expect, atol=1e-9)

    p = petersen_graph()
    f, _ = compute_graph_features(p)
    assert f["GIRTH"] == 5 and f["NORM_MIS"] == 0.4
    assert chromatic_number(p) == (3, True)
    # adjacency spectrum 3, 1^5, (-2)^4 on a 3-regular graph
    assert np.allclose(laplacian_spectrum(p), np.sort([0] + [2 / 3] * 5 + [5 / 3] * 4), atol=1e-9)


def test_spectrum_isolated_nodes():
    g = Graph(3, ((0, 1, 1.0),))
    assert np.allclose(laplacian_spectrum(g), [0, 0, 2], atol=1e-12)
    assert np.all(normalized_laplacian(g)[2] == 0)


@settings(max_examples=40, deadline=None)
@given(graphs(min_nodes=2, max_nodes=10))
def test_spectrum_matches_networkx(g):
    if g.m == 0 or np.any(g.degrees() == 0):
        return
    L = nx.normalized_laplacian_matrix(g.to_networkx(), nodelist=range(g.n), weight=None).toarray()
    lam = laplacian_spectrum(g)
    assert np.max(np.abs(lam - np.linalg.eigvalsh(L))) <= 1e-9
    assert lam[0] >= -1e-9 and lam[-1] <= 2 + 1e-9


@settings(max_examples=40, deadline=None)
@given(graphs(min_nodes=1, max_nodes=9))
def test_combinatorial_features_match_oracles(g):
    G = g.to_networkx()
    alpha, exact = independence_number(g)
    assert exact and alpha == nx.max_weight_clique(nx.complement(G), weight=None)[1]
    chi, exact = chromatic_number(g)
    assert exact and chi == chromatic_oracle(g)
    assert girth(g) == nx.girth(G)
    assert transitivity(g) == pytest.approx(nx.transitivity(G), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(graphs(min_nodes=3, max_nodes=10))
def test_assortativity_matches_networkx(g):
    r = degree_assortativity(g)
    deg = g.degrees()
    eu, ev, _ = g.edge_arrays
    if g.m == 0 or np.var(np.concatenate([deg[eu], deg[ev]])) == 0:
        assert math.isnan(r)
    else:
        with np.errstate(all="ignore"):
            assert r == pytest.approx(nx.degree_assortativity_coefficient(g.to_networkx()), abs=1e-9)


def test_girth_and_transitivity_edge_cases():
    assert girth(path_graph(6)) == math.inf
    assert transitivity(Graph(4, ((0, 1, 1.0), (2, 3, 1.0)))) == 0.0
    assert girth(disjoint_union(cycle_graph(7), cycle_graph(4))) == 4


def test_budget_exhaustion_falls_back():
    g = gnp_graph(60, 0.5, np.random.default_rng(2))
    chi, exact = chromatic_number(g, budget=0.0)
    assert not exact and chi >= 1
    _, flags = compute_graph_features(g, budget=0.0)
    assert "LOG_CHROMATIC_NUM" in flags
    sparse = gnp_graph(150, 0.1, np.random.default_rng(2))
    alpha, exact = independence_number(sparse, budget=0.0)
    assert not exact and alpha >= 1


def test_gw_features():
    g = complete_graph(3)
    fv = compute_features(g, solve_sdp(g), seed=0)
    assert fv["PERCENT_CUT"] == pytest.approx(0.75, abs=1e-6)
    assert fv["EXPECTED_COSTGW_OVER_SDP_COST"] == pytest.approx(2 / 2.25, abs=1e-6)
    assert fv["STD_COSTGW_OVER_SDP_COST"] == 0.0
    assert fv["PERCENT_POSITIVE_LOWER_TRIANGULAR"] == 0.0  # Gram entries are all -1/2
    assert fv.as_list() == [fv[k] for k in FEATURE_NAMES]


def test_edgeless_features():
    fv = compute_features(Graph(4), None, 0)
    assert fv["DENSITY"] == 0 and math.isnan(fv["LOG_NUM_EDGES"]) and math.isnan(fv["PERCENT_CUT"])


def test_feature_vector_requires_all_names():
    with pytest.raises(ValueError):
        FeatureVector({"DENSITY": 1.0})


def test_csv_round_trip(tmp_path):
    from types import SimpleNamespace

    g = petersen_graph()
    fv = compute_features(g, solve_sdp(g), 3)
    recs = [SimpleNamespace(instance_id="p", n=10, features=fv, ratio=1.25, label=1),
            SimpleNamespace(instance_id="q", n=10, features=fv, ratio=float("nan"), label=None)]
    export_features(recs, tmp_path / "f.csv")
    rows = read_features_csv(tmp_path / "f.csv")
    assert rows[0]["label"] == 1 and rows[1]["label"] is None
    assert all(rows[0][k] == fv[k] or (math.isnan(fv[k]) and math.isnan(rows[0][k])) for k in FEATURE_NAMES)
    assert rows[0]["ratio"] == 1.25 and math.isnan(rows[1]["ratio"])
