# Check all four solvers against the exhaustive oracle on many small graphs.
import sys

from anypath.cli import main

seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 200
failed = 0
for seed in range(seeds):
    metric = "eatt" if seed % 2 else "eatx"
    code = main(["validate", "--gen-nodes", "7", "--gen-density", "0.4", "--seed", str(seed),
                 "--metric", metric])
    failed += code != 0
print(f"{seeds - failed}/{seeds} graphs validated")
sys.exit(1 if failed else 0)
