"""
Jumble norm, cut norm and their bounds
======================================

The exact jumble distance enumerates row sets. For a fixed row set the best
column set of each size is a sorted prefix. This script compares it with brute
force and shows the ordering of the four statistics.
"""

import math

from pagcoupling import Multigraph, cut_exact, global_stats, jumble_exact, jumble_naive, jumble_rowsum_bound
from pagcoupling.experiments import random_graph_pair
from pagcoupling.rand import make_stream

path = Multigraph.from_edges(3, [0, 1], [1, 2])
empty = Multigraph(3)
print("path vs empty, exact jumble:", jumble_exact(path, empty), " sqrt(2)/3 =", math.sqrt(2) / 3)

s = make_stream(3, label="demo/norms")
for _ in range(5):
    g, h = random_graph_pair(7, 3, s)
    ms = global_stats(g, h)[0]
    print(f"matrix {ms:.4f} <= cut {cut_exact(g, h):.4f} <= jumble {jumble_exact(g, h):.4f}"
          f" (naive {jumble_naive(g, h):.4f}) <= row-sum {jumble_rowsum_bound(g, h):.4f}")
