"""
Directed links with push-sum
============================

On a directed graph each agent splits its value and a unit of mass evenly
among itself and the agents it talks to.  The ratio of the two converges to
the average belief even though the mixing is not doubly stochastic.
"""

import numpy as np
from beliefavg.observations import BeliefModel
from beliefavg.protocols import run, PUSH_SUM
from beliefavg.topology import Static, make_directed_rgg, is_strongly_connected

g = make_directed_rgg(10, 0.6, seed=5, delete_prob=0.3)
print("arcs:", len(g.edges), " strongly connected:", is_strongly_connected(g))

means = np.linspace(5, 95, 10)
trace = run(Static(g), None, BeliefModel.gaussian(means, 10.0), PUSH_SUM, T=5000, seed=7)

print("true average:", means.mean())
print("estimates at T:", trace.est[-1].round(3))
print("total mass stays at n:", trace.mass_v.min(), trace.mass_v.max())
print("smallest mass any agent held:", trace.v_min.min())
