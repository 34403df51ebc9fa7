# One breakout local search run, watched descent by descent.

import numpy as np

from gtsp_bls import benchmark_instance
from gtsp_bls.bls import BlsParams, bls_search
from gtsp_bls.tour import semi_random_construction

inst = benchmark_instance("20kroA100").with_best_known(None)   # no early stop
rng = np.random.default_rng(1)
t0 = semi_random_construction(inst, rng)
params = BlsParams(desc_max=120)

trace = []
best, state = bls_search(t0, params, inst, rng, trace=trace)

# %% each record: local optimum cost, best so far, jump count L and the stagnation counter omega
print(" desc   cost   best   L  omega  strong")
for rec in trace[::6]:
    print(f"{rec['desc']:5d} {rec['cost']:6d} {rec['best']:6d} {rec['L']:3d} {rec['omega']:6d}  "
          f"{'yes' if rec['strong'] else ''}")

print(f"\nstart {t0.cost}, best {best.cost} (published best for 20kroA100: 9711)")
print(f"{state.desc} descents, {state.jumps} perturbation jumps, "
      f"{sum(r['strong'] for r in trace)} strong perturbations")
