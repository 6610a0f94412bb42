"""
Estimating the number of matchings by importance sampling
=========================================================

Every sampler builds a matching vertex by vertex and records its own
probability ``mu``.  Averaging ``1 / mu`` gives an unbiased estimate of the
count.  Samplers closer to uniform have flatter weights and a larger
effective sample size.
"""

import math

from bandsis.counting import count_matchings
from bandsis.graph import BandSpec
from bandsis.sampler import estimate_count

spec = BandSpec(2, 1, 120)
exact = math.log(count_matchings(spec))
print(f"exact log count: {exact:.5f}")

###############################################################################
# The same seed and sample size for each sampler.  Results are identical for
# any ``workers`` value.

for kind in ("uniform", "opt-t1", "limiting"):
    est = estimate_count(kind, spec, 50_000, seed=0, workers=2)
    print(f"{kind:9s} log estimate {est.log_estimate:.5f} +- {est.stderr_log:.5f}  ESS {est.ess:9.0f}")

###############################################################################
# A wider band makes the uniform sampler's weights more uneven.

spec = BandSpec(3, 2, 120)
print(f"exact log count: {math.log(count_matchings(spec)):.5f}")
for kind in ("uniform", "limiting"):
    est = estimate_count(kind, spec, 50_000, seed=0, workers=2)
    print(f"{kind:9s} log estimate {est.log_estimate:.5f} +- {est.stderr_log:.5f}  ESS {est.ess:9.0f}")
