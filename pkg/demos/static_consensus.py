"""
Learning the average belief on a fixed network
==============================================

Every agent sees noisy samples of its own belief.  Mixing running averages
over a fixed graph drives all agents to the network-wide average, with the
disagreement shrinking like 1/t.
"""

import numpy as np
from beliefavg import analysis
from beliefavg.observations import BeliefModel
from beliefavg.protocols import run, EXACT
from beliefavg.topology import Static, make_connected_rgg
from beliefavg.weights import metropolis

rng = np.random.default_rng(0)
means = rng.uniform(0, 100, 10)
beliefs = BeliefModel.gaussian(means, variance=10.0)
g = make_connected_rgg(10, 0.5, seed=1)

trace = run(Static(g), metropolis(g), beliefs, EXACT, T=10_000, seed=42)

for t in (1, 10, 100, 1000, 10_000):
    k = t - 1
    print(f"t={t:>6}  spread={trace.seminorm[k]:.4g}  average error={trace.e_t[k]:.4g}")

fit = analysis.fit_rate(trace, 1000, 10_000)
print(f"log-log slope of the spread on [1e3, 1e4]: {fit.slope:.3f}")

# the sum of the estimates always equals the sum of the running averages
print("worst mass gap:", np.abs(trace.mass_y - trace.mass_z).max())
