"""
Sampling matchings of an arbitrary bipartite graph
==================================================

Outside the band family the sampler checks each candidate edge by asking
whether the rest of the graph still has a perfect matching.  Graphs are
read from a small text format: a header ``n n`` followed by ``n`` rows of
0/1 characters.
"""

import math
import tempfile
from pathlib import Path

import numpy as np

from bandsis.graph import permanent_ryser, read_graph
from bandsis.sampler import estimate_count, sis_uniform

text = "6 6\n110100\n011010\n101001\n010110\n001011\n100101\n"
path = Path(tempfile.mkdtemp()) / "graph.txt"
path.write_text(text)
g = read_graph(path)

print("exact count:", permanent_ryser(g))
rng = np.random.default_rng(0)
for _ in range(3):
    w = sis_uniform(g, rng)
    print(w.permutation, f"mu={math.exp(w.log_mu):.4f}")

est = estimate_count("uniform", g, 20_000, seed=1)
print(f"estimate: {math.exp(est.log_estimate):.3f} (ESS {est.ess:.0f})")
