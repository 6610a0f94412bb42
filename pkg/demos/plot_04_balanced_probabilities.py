"""
Balanced forward probabilities
==============================

For bands with one step to the right, choosing the forward edge with a
probability that depends on the current run length keeps every
permutation's sampling probability within a factor of 4 of every other.
"""

import math

from bandsis.graph import BandSpec
from bandsis.optprob import (
    OptProbs,
    convergence_rate_check,
    limiting_kernel,
    limiting_prob,
    solve_opt_probs,
    table3,
)
from bandsis.sampler import enumerate_sampler_paths, weighted_t1_probs

###############################################################################
# The probabilities for run lengths 1..t, for t up to 9.

for t, row in enumerate(table3(), 1):
    print(t, " ".join(f"{p:.5f}" for p in row))

###############################################################################
# The last few probabilities settle at (2^(k+1) - 1) / (2^(k+2) - 1), with
# the error halving each time t grows by one.

print([str(limiting_prob(k)) for k in range(3)])
rep = convergence_rate_check(range(10, 16), (0,))
print({t: f"{r:.4f}" for (t, _), r in rep["ratios"].items()})

###############################################################################
# Exhaustive spread of log mu over all permutations, balanced against the
# plain 1/2 rule.


def spread(n, probs):
    spec = BandSpec(2, 1, n)
    log_mus = [lp for _, lp in enumerate_sampler_paths(spec, weighted_t1_probs(spec, probs))]
    return max(log_mus) - min(log_mus)


for n in (4, 8, 12):
    balanced, plain = spread(n, solve_opt_probs(2)), spread(n, OptProbs.uniform(2))
    print(f"n={n:2d} balanced spread {balanced:.4f}  plain spread {plain:.4f}  bound {2 * math.log(2):.4f}")

###############################################################################
# The balanced probabilities coincide with the Perron-vector kernel of the
# state graph: the forward move from state (-k,) has probability p_(k+1).

print(solve_opt_probs(2).p, limiting_kernel(2, 1).probs[[2, 1], 0])
