import math

import numpy as np
import pytest
from hypothesis import given, settings

from cutforge.graph import Graph, brute_force_maxcut, complete_graph, cycle_graph, gnp_graph, petersen_graph
from cutforge.gw import (
    GwResult,
    SdpConvergenceError,
    gw_solve,
    relaxed_cost,
    round_hyperplane,
    round_many,
    sdp_rank,
    solve_sdp,
    trial_rng,
)

from conftest import graphs


def triangle_angular_oracle(points: int = 2001) -> float:
    """Best relaxed cut of the unit triangle over planar unit vectors at angles (0, a, b)."""
    a = np.linspace(0, 2 * np.pi, points)
    A, B = np.meshgrid(a, a)
    val = (3 - np.cos(A) - np.cos(B) - np.cos(A - B)) / 2
    return float(val.max())


def test_triangle_relaxation_matches_oracle():
    oracle = triangle_angular_oracle()
    assert oracle == pytest.approx(2.25, abs=1e-5)
    assert solve_sdp(complete_graph(3)).relaxed_cost == pytest.approx(oracle, abs=1e-4)


@pytest.mark.parametrize("g, value", [(complete_graph(2), 1.0), (cycle_graph(4), 4.0), (petersen_graph(), 12.5)])
def test_known_relaxations(g, value):
    assert solve_sdp(g).relaxed_cost == pytest.approx(value, abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(graphs(min_nodes=2, max_nodes=9))
def test_relaxation_bounds_optimum(g):
    if g.m == 0:
        return
    sol = solve_sdp(g)
    opt = brute_force_maxcut(g)[0]
    assert sol.relaxed_cost >= opt - 1e-6
    assert sol.relaxed_cost <= g.total_weight + 1e-9
    assert np.allclose(np.linalg.norm(sol.vectors, axis=1), 1, atol=1e-9)
    assert sol.relaxed_cost == pytest.approx(relaxed_cost(g, sol.vectors), abs=1e-12)
    assert np.all(round_many(g, sol, 50, 0) <= opt)


def test_rank_and_diagnostics():
    sol = solve_sdp(petersen_graph())
    assert sol.rank == sdp_rank(10) == 6
    d = sol.to_dict()
    assert set(d) == {"vectors", "relaxed_cost", "diagnostics"}
    assert d["diagnostics"]["grad_norm"] <= 1e-7
    G = sol.gram()
    assert np.allclose(np.diag(G), 1)


def test_non_convergence_raises():
    with pytest.raises(SdpConvergenceError) as info:
        solve_sdp(gnp_graph(30, 0.5, np.random.default_rng(0)), max_iter=2)
    assert len(info.value.diagnostics["restarts"]) == 8


def test_invalid_inputs():
    with pytest.raises(ValueError):
        solve_sdp(Graph(3))
    with pytest.raises(ValueError):
        solve_sdp(Graph(2, ((0, 1, -1.0),)))
    with pytest.raises(ValueError):
        gw_solve(complete_graph(3), 0, 0)


def test_rounding_is_seeded_and_vectorised():
    g = petersen_graph()
    sol = solve_sdp(g)
    vals = round_many(g, sol, 40, seed=9, tag=2)
    single = [round_hyperplane(g, sol, trial_rng(9, t, 2))[1] for t in range(40)]
    assert vals.tolist() == single
    assert np.array_equal(vals, round_many(g, sol, 40, seed=9, tag=2))
    assert not np.array_equal(vals, round_many(g, sol, 40, seed=9, tag=3))


def test_sign_zero_is_plus():
    g = complete_graph(2)
    sol = solve_sdp(g)
    sol.vectors[:] = 0.0  # degenerate projection: everyone on the + side
    s, v = round_hyperplane(g, sol, np.random.default_rng(0))
    assert s.tolist() == [1, 1] and v == 0


def test_triangle_expected_rounding():
    # planar 120-degree vectors: a random line separates exactly one vertex
    g = complete_graph(3)
    res = gw_solve(g, 200, 1)
    assert res.mean == 2.0 and res.std == 0.0 and res.best == 2.0


def test_result_statistics():
    r = GwResult.from_samples([1, 2, 3, 4], 5.0)
    assert (r.best, r.mean, r.median) == (4.0, 2.5, 2.5)
    assert r.std == pytest.approx(math.sqrt(1.25))
