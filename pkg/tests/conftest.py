import math

import numpy as np
import pytest

import anypath as ap
from anypath.metrics import EATT, EATX

RATES = [1_000_000, 2_000_000, 5_500_000]


def random_case(seed, max_nodes=8, max_rates=3, max_degree=6, law="rate-decaying"):
    """Small random graph plus metric and destination, all derived from ``seed``."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    k = int(rng.integers(1, max_rates + 1))
    g = ap.generate_random_graph(n, RATES[:k], density=float(rng.uniform(0.3, 0.9)),
                                 ratio_law=law, seed=seed, max_out_degree=max_degree)
    m = EATT if seed % 2 else EATX
    d = int(rng.integers(n))
    return g, m, d


def corpus(count=200, **kw):
    return [random_case(seed, **kw) for seed in range(count)]


def assert_costs_close(a, b, tol=1e-9):
    a, b = np.asarray(a), np.asarray(b)
    assert np.array_equal(np.isinf(a), np.isinf(b)), (a, b)
    fin = np.isfinite(b)
    assert np.all(np.abs(a[fin] - b[fin]) <= tol), (a, b)


def relay_expectation(i, J, r, costs, g, m=EATX):
    """Expected cost by enumerating every receiver subset of ``J``.

    Renewal argument: each broadcast costs one unit; with probability P[S]
    exactly the members in S receive and the cheapest of them relays.
    """
    J = list(J)
    model = g.joint_model(i, r)
    unit = ap.metrics.transmission_cost(r, g, m)
    none = 0.0
    acc = 0.0
    for mask in range(1 << len(J)):
        got = [J[k] for k in range(len(J)) if mask >> k & 1]
        if model is None:
            p = 1.0
            for k, j in enumerate(J):
                pj = g.ratio(i, j, r)
                p *= pj if mask >> k & 1 else 1.0 - pj
        else:
            # marginalize the joint pmf onto J (J must be covered by the model)
            p = 0.0
            for full in range(model.pmf.size):
                if all(bool(full & model.bit(j)) == (j in got) for j in J):
                    p += model.pmf[full]
        if not got:
            none += p
            continue
        relay = min(got, key=lambda j: (costs[j], j))
        acc += p * costs[relay]
    if none >= 1.0:
        return math.inf
    return (unit + acc) / (1.0 - none)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion; printed in the summary."""
    lines = request.config._acceptance_lines

    def record(name, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        lines.append(line)
        print(line)
        return passed

    return record
