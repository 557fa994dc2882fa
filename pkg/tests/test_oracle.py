import math

import numpy as np
import pytest

import anypath as ap
from anypath.graph import JointReceptionModel
from anypath.metrics import EATX
from anypath.oracle import MAX_ORACLE_DEGREE, OracleDegreeError, independence_report, sample_reception

from conftest import random_case

R = 1_000_000


def test_oracle_worked_example():
    t = ap.brute_force_optimal(ap.worked_example_graph(), 4)
    assert t.cost[0] == pytest.approx(4.686363636, abs=1e-6)
    assert t.forwarding_set[0] == (1, 2)
    assert t.rounds == 4


def test_oracle_sets_are_cost_sorted_prefixes():
    for seed in range(80):
        g, m, d = random_case(seed)
        t = ap.brute_force_optimal(g, d, m)
        for i in range(g.node_count):
            F = t.forwarding_set[i]
            if not F:
                continue
            nbrs = sorted(g.out_links(i, t.rate[i]), key=lambda j: (t.cost[j], j))
            assert list(F) == nbrs[: len(F)]


def test_oracle_degree_bound():
    n = MAX_ORACLE_DEGREE + 2
    g = ap.Graph(n, [R], [(0, j, R, 0.5) for j in range(1, n)])
    with pytest.raises(OracleDegreeError):
        ap.brute_force_optimal(g, 1)


def test_oracle_rejects_unknown_rate():
    with pytest.raises(ValueError):
        ap.brute_force_optimal(ap.worked_example_graph(), 4, rate=2_000_000)


def test_oracle_prefers_fewest_members_on_ties():
    # a relay with the same cost as the node itself adds nothing
    g = ap.Graph(3, [R], [(0, 2, R, 1.0), (0, 1, R, 1.0), (1, 2, R, 1.0)])
    t = ap.brute_force_optimal(g, 2)
    assert t.forwarding_set[0] == (2,)


def test_sample_reception_marginal():
    g = ap.Graph(3, [R], [(0, 1, R, 0.3), (0, 2, R, 0.2)])
    rng = np.random.default_rng(0)
    got = ap.oracle._sample_matrix(g, 0, [1, 2], R, rng, 1_000_000)
    assert got.any(axis=1).mean() == pytest.approx(0.44, abs=0.002)
    assert got[:, 0].mean() == pytest.approx(0.3, abs=0.002)


def test_sample_reception_single_draw():
    g = ap.Graph(3, [R], [(0, 1, R, 1.0), (0, 2, R, 0.2)])
    out = sample_reception(0, [1, 2], R, g, np.random.default_rng(1))
    assert 1 in out and out <= {1, 2}
    with pytest.raises(ValueError):
        sample_reception(0, [0], R, g, np.random.default_rng(1))


def test_joint_sampling_frequencies():
    pmf = np.array([0.1, 0.2, 0.3, 0.4])
    model = JointReceptionModel(0, R, (1, 2), pmf)
    g = ap.Graph(3, [R], [(0, 1, R, 0.6), (0, 2, R, 0.7)], [model])
    trials = 200_000
    got = ap.oracle._sample_matrix(g, 0, [1, 2], R, np.random.default_rng(2), trials)
    masks = got[:, 0] * 1 + got[:, 1] * 2
    freq = np.bincount(masks, minlength=4) / trials
    assert np.all(np.abs(freq - pmf) <= 4 / math.sqrt(trials))


def test_perfect_link_simulation_is_exact():
    g = ap.Graph(2, [R], [(0, 1, R, 1.0)])
    rep = ap.simulate_delivery(g, ap.solve(g, 1), 0, trials=1000, seed=0)
    assert rep.mean_cost == 1.0 and rep.std_error == 0.0
    assert rep.delivery_failures == 0 and rep.mean_hops == 1.0


def test_simulation_is_deterministic_per_seed():
    g = ap.worked_example_graph()
    t = ap.solve(g, 4)
    a = ap.simulate_delivery(g, t, 0, trials=20_000, seed=7)
    b = ap.simulate_delivery(g, t, 0, trials=20_000, seed=7)
    c = ap.simulate_delivery(g, t, 0, trials=20_000, seed=8)
    assert a == b
    assert a.mean_cost != c.mean_cost


def test_simulation_tracks_analytic_cost():
    g = ap.worked_example_graph()
    t = ap.solve(g, 4)
    rep = ap.simulate_delivery(g, t, 0, trials=50_000, seed=3)
    assert abs(rep.mean_cost - t.cost[0]) <= 4 * rep.std_error
    assert rep.delivery_failures == 0


def test_cap_failures_match_geometric_tail():
    g = ap.Graph(2, [R], [(0, 1, R, 0.1)])
    cap, trials = 5, 100_000
    rep = ap.simulate_delivery(g, ap.solve(g, 1), 0, trials=trials, cap=cap, seed=4)
    expected = 0.9 ** cap
    sd = math.sqrt(expected * (1 - expected) / trials)
    assert abs(rep.delivery_failures / trials - expected) <= 4 * sd


def test_cap_hits_are_rare_on_usable_links():
    g = ap.Graph(3, [R], [(0, 1, R, 0.1), (1, 2, R, 0.1), (0, 2, R, 0.1)])
    rep = ap.simulate_delivery(g, ap.solve(g, 2), 0, trials=20_000, cap=100, seed=6)
    assert rep.delivery_failures / rep.trials < 1e-3


def test_simulation_argument_errors():
    g = ap.worked_example_graph()
    t = ap.solve(g, 4)
    with pytest.raises(ValueError):
        ap.simulate_delivery(g, t, 0, cap=0)
    with pytest.raises(ValueError):
        ap.simulate_delivery(g, t, 0, trials=0)
    with pytest.raises(ValueError):
        ap.simulate_delivery(g, t, 9)


def test_unreachable_source_fails_every_trial():
    g = ap.Graph(3, [R], [(1, 0, R, 0.5)])
    rep = ap.simulate_delivery(g, ap.solve(g, 0), 2, trials=100, seed=0)
    assert rep.delivery_failures == 100 and math.isnan(rep.mean_cost)


def test_suboptimal_table_costs_more_in_simulation():
    g = ap.worked_example_graph()
    best = ap.solve(g, 4)
    worse = ap.solve(g, 4)
    worse.forwarding_set[0] = (1, 2, 3)
    a = ap.simulate_delivery(g, best, 0, trials=50_000, seed=5)
    b = ap.simulate_delivery(g, worse, 0, trials=50_000, seed=5)
    assert b.mean_cost > a.mean_cost
    assert b.mean_cost == pytest.approx(7.19, abs=4 * b.std_error)


def test_simulation_report_csv():
    rep = ap.SimulationReport(0, 4, 10, 0.0125, 0.001, 0, 2.0, 1)
    lines = rep.to_csv(ms=True).splitlines()
    assert lines[0] == "source,dest,trials,mean,stderr,failures,mean_hops,seed"
    assert lines[1] == "0,4,10,12.5,1.0,0,2.0,1"


def test_independence_report_correlated_pair():
    model = JointReceptionModel(0, R, (1, 2), [0.5, 0.0, 0.0, 0.5])
    rep = independence_report(model)
    np.testing.assert_allclose(rep.marginals, [0.5, 0.5])
    np.testing.assert_allclose(rep.independent, [0.25] * 4)
    # |.5-.25| + .25 + .25 + |.5-.25| = 1, halved
    assert rep.total_variation == pytest.approx(0.5, abs=1e-15)
    assert rep.max_abs_difference == pytest.approx(0.25, abs=1e-15)


def test_independence_report_product_model():
    model = ap.independent_joint_model(0, R, (1, 2, 3), (0.3, 0.6, 0.9))
    rep = independence_report(model)
    assert rep.total_variation <= 1e-15
    assert rep.to_csv().splitlines()[0] == "receiver_set,observed,independent"
