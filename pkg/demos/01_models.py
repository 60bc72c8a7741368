"""
Seven random multigraphs on the same vertex count
=================================================

Draws one graph from each model and prints its edge count, loop count and
largest row sum, next to the expected edge count.
"""

import numpy as np

from pagcoupling import ModelParams, generate, make_stream

n, c, alpha = 64, 1.0, 5 / 3
p = ModelParams(n, c, alpha)

# Model 1 always has floor(floor(c n^2) / 2) edges; Models 4-7 fluctuate
expected = {
    1: p.steps // 2,
    2: "fewer than model 1",
    3: "same as model 2",
    4: c * n * n / 2,
    5: c * n * n / 2,
    6: c * n * (n - 1) / 2 + c * n,
    7: c * n * (n - 1) / 2,
}

print(f"n={n} c={c} alpha={alpha:.4f}")
for k in range(1, 8):
    g = generate(k, p, make_stream(2024, label=f"demo/model{k}"))
    print(f"model {k}: edges={g.edge_count():5d} loops={g.loop_count():3d} "
          f"max row sum={g.max_row_sum():4d}   expected edges: {expected[k]}")

# the W-random graphs grow vertex by vertex: the same stream on n+1 vertices
# reproduces the n-vertex graph in its top-left block
small = generate(6, ModelParams(10, c), make_stream(7))
big = generate(6, ModelParams(11, c), make_stream(7))
print("Model 6 extends vertex by vertex:", np.array_equal(big.A[:10, :10], small.A))
