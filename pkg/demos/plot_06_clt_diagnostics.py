"""
Normality of the forced-move count
==================================

The number of forced moves in a uniform matching is approximately normal.
The check below samples 10^5 uniform matchings and measures the
Kolmogorov-Smirnov distance with a continuity correction.  The chain
diagnostics behind the limit theorem come after it.
"""

from bandsis.analysis import clt_check
from bandsis.chain import coupling_time_test, max_correlation
from bandsis.graph import BandSpec

for spec in (BandSpec(2, 1, 500), BandSpec(1, 1, 1000)):
    rep = clt_check(spec, 100_000, seed=0, workers=4)
    print(f"{spec}  KS={rep.ks_statistic:.4f}  raw KS={rep.ks_raw:.4f}  mean {rep.sample_mean:.2f} vs {rep.mean:.2f}")

###############################################################################
# Maximal correlation between consecutive states stays below one, and the
# gap does not depend on n.

for n in (100, 200, 400):
    corr = max_correlation(BandSpec(2, 2, n))
    print(n, f"max rho={corr.max_rho:.5f}  min gap={corr.min_gap:.5f}  eps={corr.epsilon_kernel:.4f}")

###############################################################################
# Two copies of the chain that split at a random step merge again quickly.

cpl = coupling_time_test(BandSpec(2, 1, 200), seed=0, trials=2000)
print(f"E[delay^2]={cpl.mean_square:.2f}  bound={cpl.bound:.1f}  survival ratios={[round(r, 3) for r in cpl.survival_ratios()[:5]]}")
