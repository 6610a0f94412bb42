"""
Counting band-restricted permutations
=====================================

A type-(s, t) permutation moves every position at most ``s`` steps left and
at most ``t`` steps right.  Equivalently it is a perfect matching of the
band bipartite graph.  This demo counts them three ways and checks that the
counts grow like the Perron root of the state graph.
"""

import math

import numpy as np

from bandsis.counting import count_matchings, perron
from bandsis.graph import BandSpec, band_graph, enumerate_matchings, permanent_ryser

###############################################################################
# The (2, 2) band on five vertices has 19 edges.

spec = BandSpec(2, 2, 5)
g = band_graph(spec)
print(np.array(g.to_matrix()))
print("edges:", g.n_edges)

###############################################################################
# The permanent, a brute-force listing and the state-space dynamic program
# all agree.

print("Ryser permanent :", permanent_ryser(g))
print("enumeration     :", len(enumerate_matchings(g)))
print("dynamic program :", count_matchings(spec))

###############################################################################
# For s = t = 1 the counts are Fibonacci numbers.

print([count_matchings(BandSpec(1, 1, n)) for n in range(1, 15)])

###############################################################################
# The DP handles thousands of vertices with exact integers.  The log count
# per vertex approaches log of the Perron root.

lam = perron(2, 1).lam
for n in (256, 1024, 4096):
    c = count_matchings(BandSpec(2, 1, n))
    print(f"n={n:5d}  digits={len(str(c)):5d}  log(count)/n={math.log(c) / n:.8f}  log(lambda)={math.log(lam):.8f}")
