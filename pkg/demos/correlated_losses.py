# Receptions that fail together make extra relays worth less.
import numpy as np

import anypath as ap
from anypath.graph import JointReceptionModel
from anypath.oracle import independence_report

R = 1_000_000
links = [(0, 1, R, 0.5), (0, 2, R, 0.5), (1, 3, R, 1.0), (2, 3, R, 1.0)]

indep = ap.Graph(4, [R], links)
# same marginals, but both relays hear a frame together or not at all
together = JointReceptionModel(0, R, (1, 2), [0.5, 0.0, 0.0, 0.5])
corr = ap.Graph(4, [R], links, [together])

for name, g in (("independent", indep), ("correlated", corr)):
    t = ap.solve(g, 3)
    print(f"{name:>12}: p={ap.hyperlink_delivery_ratio(0, [1, 2], R, g):.2f} "
          f"cost={t.cost[0]:.3f} set={t.forwarding_set[0]}")

rep = independence_report(together)
print("outcome  observed  product")
for mask in range(4):
    print(f"{mask:>7}  {rep.observed[mask]:8.3f}  {rep.independent[mask]:7.3f}")
print(f"total variation {rep.total_variation:.3f}, largest gap {rep.max_abs_difference:.3f}")

# a random joint pmf, checked against the exhaustive optimum
rng = np.random.default_rng(0)
model = JointReceptionModel(0, R, (1, 2), rng.dirichlet(np.ones(4)))
g = ap.Graph(4, [R], links, [model])
print("solver", ap.solve(g, 3).cost[0], "oracle", ap.brute_force_optimal(g, 3).cost[0])
