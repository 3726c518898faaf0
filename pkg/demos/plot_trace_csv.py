"""
Plotting a trace written by the command line tool
=================================================

    odrs compare --solvers drs,odrs,iodrs --lambda 1 --scaling classic --out compare.csv
    python plot_trace_csv.py compare.csv

Needs matplotlib, which the package itself does not depend on.
"""

import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "compare.csv"
with open(path, newline="") as fh:
    rows = list(csv.DictReader(fh))

# compare.csv has <solver>_objective columns; a single-run trace has objective
columns = [c for c in rows[0] if c.endswith("objective")]
for col in columns:
    pts = [(int(r["t"]), float(r[col])) for r in rows if r[col]]
    plt.semilogy(*zip(*pts), label=col.replace("_objective", "") or "objective")

plt.xlabel("iteration")
plt.ylabel("objective")
plt.legend()
plt.show()
