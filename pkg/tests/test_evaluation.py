import math
import os

import numpy as np
import pytest

import anypath as ap
from anypath.evaluation import all_pairs_tables
from anypath.metrics import EATT

R1, R2, R11 = 1_000_000, 2_000_000, 11_000_000


@pytest.fixture
def fast_rate_gap():
    """Node 2 reaches node 0 only at the slow rate."""
    links = [(1, 0, R1, 0.9), (1, 0, R11, 0.8), (2, 1, R1, 0.9), (2, 1, R11, 0.5),
             (2, 0, R1, 0.2), (0, 2, R1, 0.5)]
    return ap.Graph(3, [R1, R11], links)


def test_all_pairs_costs_shape_and_diagonal(fast_rate_gap):
    C = ap.all_pairs_costs(fast_rate_gap, "multi", EATT)
    assert C.shape == (3, 3)
    assert np.all(np.diag(C) == 0.0)
    for d in range(3):
        np.testing.assert_array_equal(C[:, d], ap.solve(fast_rate_gap, d, EATT).cost)


def test_all_pairs_parallel_matches_serial():
    g = ap.generate_random_graph(12, [R1, R2], 0.3, seed=3)
    np.testing.assert_array_equal(ap.all_pairs_costs(g, jobs=1), ap.all_pairs_costs(g, jobs=2))


def test_all_pairs_rejects_unknown_rate(fast_rate_gap):
    with pytest.raises(ValueError):
        all_pairs_tables(fast_rate_gap, R2)


def test_gain_distribution_counts_multirate_only_pairs(fast_rate_gap):
    gains = ap.gain_distribution(fast_rate_gap, R11, EATT)
    assert gains.infinite_count >= 1
    assert all(math.isinf(r.gain) for r in gains.infinite)
    assert all(r.gain >= 1 - 1e-9 for r in gains.records)
    assert list(gains.gains()) == sorted(gains.gains(), reverse=True)
    text = gains.to_csv()
    assert text.startswith("src,dst,gain\n") and ",inf\n" in text


def test_gain_distribution_unreachable_pairs():
    g = ap.Graph(3, [R1], [(1, 0, R1, 0.5)])
    gains = ap.gain_distribution(g, R1)
    assert gains.unreachable_pairs == 5
    assert [(r.source, r.destination, r.gain) for r in gains.records] == [(1, 0, 1.0)]


def test_gains_are_at_least_one_on_random_graphs():
    for seed in range(10):
        g = ap.generate_random_graph(15, [R1, R2, 5_500_000, R11], 0.25, seed=seed)
        multi = ap.all_pairs_costs(g, "multi", EATT)
        for r in g.rates:
            gains = ap.gain_distribution(g, r, EATT, multi=multi)
            assert gains.records == [] or min(gains.gains()) >= 1 - 1e-9


def test_rate_histogram_sums_to_one(fast_rate_gap):
    hist = ap.rate_histogram(fast_rate_gap, EATT)
    assert set(hist) == {R1, R11}
    assert sum(hist.values()) == pytest.approx(1.0)


def test_rate_histogram_empty_graph():
    assert ap.rate_histogram(ap.Graph(2, [R1], [])) == {R1: 0.0}


def test_connectivity_report(fast_rate_gap):
    rep = ap.connectivity_report(fast_rate_gap)
    # slow rate connects every ordered pair; fast rate only 1->0, 2->1, 2->0
    assert rep.fraction_connected[R1] == 1.0
    assert rep.fraction_connected[R11] == pytest.approx(3 / 6)
    np.testing.assert_array_equal(rep.rank_curves[R1], [0.9, 0.9, 0.5, 0.2])
    np.testing.assert_array_equal(rep.rank_curves[R11], [0.8, 0.5])


def test_write_evaluation_files(tmp_path, fast_rate_gap):
    files = ap.write_evaluation(fast_rate_gap, tmp_path, EATT)
    assert set(files) == {"costs.csv", f"gains_{R1}.csv", f"gains_{R11}.csv", "rate_hist.csv",
                          "connectivity.csv", f"rank_{R1}.csv", f"rank_{R11}.csv"}
    costs = (tmp_path / "costs.csv").read_text().splitlines()
    assert costs[0] == "node,to_0,to_1,to_2"
    assert costs[1].split(",")[1] == "0.0"
    # EATT costs are written in milliseconds
    assert float(costs[2].split(",")[1]) == pytest.approx(1000 * ap.solve(fast_rate_gap, 0, EATT).cost[1])
    with pytest.raises(FileExistsError):
        ap.write_evaluation(fast_rate_gap, tmp_path, EATT)
    ap.write_evaluation(fast_rate_gap, tmp_path, EATT, force=True)
    assert os.path.getsize(files["rate_hist.csv"]) > 0


def test_fast_rate_clique_connectivity():
    # full slow-rate ring plus fast links only inside the clique {0, 1, 2}
    n = 6
    links = [(i, (i + 1) % n, R1, 0.7) for i in range(n)]
    links += [(i, j, R11, 0.6) for i in range(3) for j in range(3) if i != j]
    rep = ap.connectivity_report(ap.Graph(n, [R1, R11], links))
    assert rep.fraction_connected[R1] == 1.0
    assert rep.fraction_connected[R11] == pytest.approx(6 / 30)
