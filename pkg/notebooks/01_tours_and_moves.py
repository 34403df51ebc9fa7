# Tours, moves and node selection on a small clustered instance.
# Run with: python notebooks/01_tours_and_moves.py

import numpy as np

from gtsp_bls import benchmark_instance
from gtsp_bls.tour import (
    apply_swap,
    apply_two_opt,
    cluster_optimization,
    delta_swap,
    delta_two_opt,
    double_bridge,
    format_tour,
    semi_random_construction,
)

# %% eil51 clustered into ceil(51/5) = 11 clusters
inst = benchmark_instance("11eil51")
print(inst.name, "nodes:", inst.n, "clusters:", inst.m, "best known:", inst.best_known)
print("cluster sizes:", [len(c) for c in inst.members])

# %% a random cluster order, picks chosen by the layered shortest path
rng = np.random.default_rng(0)
t = semi_random_construction(inst, rng)
print("start:", format_tour(t))

# %% deltas are read off the boundary edges, the tour is not re-summed
d = delta_two_opt(t, 2, 6, inst)
apply_two_opt(t, 2, 6, inst, d)
print(f"2-opt (2, 6): delta {d:+d} -> {t.cost}")

u, v = int(t.order[1]), int(t.order[8])
d = delta_swap(t, u, v, inst)
apply_swap(t, u, v, inst, d)
print(f"swap clusters {u + 1} and {v + 1}: delta {d:+d} -> {t.cost}")

# %% moving clusters leaves stale picks; re-selecting them never hurts
best = cluster_optimization(t.order, inst)
print("re-selected picks:", t.cost, "->", best.cost)

# %% double bridge: A|B|C|D becomes A|C|B|D
m = double_bridge(best, inst, rng)
print("order before:", (best.order + 1).tolist())
print("order after: ", (m.order + 1).tolist())
