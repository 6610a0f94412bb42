"""
How many samples does the uniform sampler need?
===============================================

The log density of the uniform law against the sampler is a linear
function of the number of forced moves, so its mean and variance follow
from an exact forward pass over the chain.  Both grow linearly in ``n``.
"""

from bandsis.analysis import TABLE2_N, crossover_N_star, mcmc_reference, table1, table2
from bandsis.chain import exact_theta_moments
from bandsis.graph import BandSpec

rep = exact_theta_moments(BandSpec(2, 1, 1000))
print({k: round(v, 4) for k, v in rep.to_json().items() if isinstance(v, float)})

###############################################################################
# Growth constants of the mean and variance.

for s, t, c, d in table1(n_big=1024):
    print(f"({s},{t})  c={c:.5f}  d={d:.5f}")

###############################################################################
# Predicted log(N n) against log(n^7 log n), the cost scale of MCMC.

tab = table2([(2, 1), (3, 2)])
for pair in [(2, 1), (3, 2)]:
    print(pair, [round(tab.value(*pair, n), 2) for n in TABLE2_N])
print("mcmc  ", [round(mcmc_reference(n), 2) for n in TABLE2_N])

###############################################################################
# Where the curves cross.

for pair in [(2, 1), (3, 2)]:
    print(crossover_N_star(pair))
