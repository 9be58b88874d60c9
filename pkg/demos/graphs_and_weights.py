"""
Graphs and mixing weights
=========================

Sample a random geometric graph, check it is connected and build the two
weight rules used by the protocols.
"""

import numpy as np
from beliefavg.topology import make_connected_rgg, is_connected, DynamicProbabilistic, union_graph, sample_graph
from beliefavg.weights import metropolis, modified_metropolis, validate_assumption1, validate_assumption4, mask_to_active

# ten agents dropped in the unit square, linked when closer than 0.5
g = make_connected_rgg(10, 0.5, seed=3)
print(len(g.edges), "edges, connected:", is_connected(g))
print("degrees:", g.degrees)

# plain Metropolis weights are symmetric and doubly stochastic
W = metropolis(g)
print("row sums:", W.dense.sum(axis=1).round(12))
print("symmetric/doubly stochastic:", validate_assumption1(W, g).ok)

# the quantized protocol wants rational weights with a heavy diagonal
Wq = modified_metropolis(g, C=2)
print("w_00 =", Wq.entry(0, 0), " dominant diagonal:", validate_assumption4(Wq, g).ok)

###############################################################################
# A time-varying network: each edge of the union is switched on with
# probability p at every step.  Over a long enough window the union is
# connected again.
sched = DynamicProbabilistic(g, 0.1, seed=1)
window = [sample_graph(sched, t) for t in range(1, 101)]
print("edges active at t=1..5:", [len(h.edges) for h in window[:5]])
print("100-step window jointly connected:", is_connected(union_graph(window)))

# masking keeps the rational weights of the active edges only
M = mask_to_active(Wq, window[0])
print("masked matrix still stochastic:", np.allclose(M.dense.sum(axis=1), 1))
