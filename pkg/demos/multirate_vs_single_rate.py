# Does choosing a rate per node beat the best network-wide fixed rate?
import numpy as np

import anypath as ap
from anypath.metrics import EATT

RATES = [1_000_000, 2_000_000, 5_500_000, 11_000_000]
g = ap.generate_random_graph(18, RATES, density=0.35, ratio_law="rate-decaying", seed=1)
print(g)

multi = ap.all_pairs_costs(g, "multi", EATT)
for r in RATES:
    gains = ap.gain_distribution(g, r, EATT, multi=multi)
    finite = gains.gains()
    print(f"fixed {r / 1e6:>4g} Mb/s: median gain {np.median(finite):.2f}, "
          f"max {finite.max():.2f}, {gains.infinite_count} pairs only reachable with multirate")

hist = ap.rate_histogram(g, EATT)
print("rate chosen by optimal routes:", {f"{r / 1e6:g}": round(f, 3) for r, f in hist.items()})

# EATX counts transmissions only, so the slowest (most reliable) rate wins
hist = ap.rate_histogram(g)
print("same, counting transmissions instead of airtime:", {f"{r / 1e6:g}": round(f, 3) for r, f in hist.items()})
