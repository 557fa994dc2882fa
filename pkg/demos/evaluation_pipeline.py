# Generate a testbed-sized graph, then write every evaluation CSV.
import sys
import tempfile

import anypath as ap
from anypath.metrics import EATT

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="anypath-eval-")
g = ap.generate_random_graph(18, [1_000_000, 2_000_000, 5_500_000, 11_000_000], 0.35, seed=7)
files = ap.write_evaluation(g, out, EATT, jobs=2, force=True)
for name in sorted(files):
    with open(files[name]) as fh:
        head = fh.readline().strip()
    print(f"{name:<22} {head}")

rep = ap.connectivity_report(g)
for r, frac in rep.fraction_connected.items():
    print(f"{r / 1e6:>4g} Mb/s: {frac:.0%} of pairs connected, best link {rep.rank_curves[r][0]:.2f}")
