# Forward packets hop by hop and compare the realised cost with the formula.
import anypath as ap
from anypath.metrics import EATT

g = ap.worked_example_graph()
t = ap.solve(g, ap.fixtures.DESTINATION)
rep = ap.simulate_delivery(g, t, ap.fixtures.SOURCE, trials=100_000, seed=1)
print(f"analytic {t.cost[0]:.4f}  simulated {rep.mean_cost:.4f} +- {rep.std_error:.4f}  hops {rep.mean_hops:.3f}")

g = ap.generate_random_graph(12, [1_000_000, 11_000_000], 0.4, ratio_law="uniform", seed=3)
t = ap.solve(g, 0, EATT)
for s in range(1, g.node_count):
    if not t.reachable(s):
        continue
    rep = ap.simulate_delivery(g, t, s, trials=20_000, seed=s)
    z = (rep.mean_cost - t.cost[s]) / rep.std_error
    print(f"node {s:>2}: analytic {t.cost[s] * 1e3:8.3f} ms  simulated {rep.mean_cost * 1e3:8.3f} ms  z={z:+.2f}")

# a deliberately worse forwarding set costs more in simulation too
worse = ap.solve(ap.worked_example_graph(), 4)
worse.forwarding_set[0] = (1, 2, 3)
rep = ap.simulate_delivery(ap.worked_example_graph(), worse, 0, trials=100_000, seed=1)
print(f"with every relay in the set: {rep.mean_cost:.4f} +- {rep.std_error:.4f}")
