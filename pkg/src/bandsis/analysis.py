"""Sample-size analysis, normality checks and the reference tables.

The sample size needed by the uniform sequential sampler is modelled as
``N_conv = exp(E log rho + sd(log rho))``, where ``rho`` is the density of
the uniform distribution against the sampling distribution.  Predicted
values of ``log(N_conv n)`` are compared with ``log(n^7 log n)``, the cost
scale of the switch-chain MCMC sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .chain import exact_theta_moments, extract_constants, sample_uniform_many
from .counting import EXACT_MAX_N, weighted_count_exact
from .graph import BandSpec
from .sampler import required_samples

__all__ = [
    "TABLE1",
    "TABLE2",
    "TABLE2_N",
    "TABLE2_CROSSOVER",
    "TABLE1_PAIRS",
    "TABLE2_PAIRS",
    "DegenerateDistributionError",
    "CLTReport",
    "clt_check",
    "table1",
    "SampleSizeRow",
    "SampleSizeTable",
    "mcmc_reference",
    "predicted_log_cost",
    "table2",
    "naive_variance_comparison",
    "CrossoverReport",
    "crossover_N_star",
]

# Published reference values: (c, d) per pair.
TABLE1 = {
    (2, 1): (0.62420, 0.02858),
    (3, 1): (0.66495, 0.01511),
    (4, 1): (0.68082, 0.00762),
    (5, 1): (0.68772, 0.00382),
    (6, 1): (0.69094, 0.00192),
    (7, 1): (0.69168, 0.00094),
    (3, 2): (0.99886, 0.07314),
}
TABLE1_PAIRS = tuple(TABLE1)

# Published log(N_conv n) per pair at TABLE2_N, then the MCMC row.
TABLE2_N = (100, 200, 500, 1000, 2000, 5000)
TABLE2 = {
    (2, 1): (8.4337, 11.3094, 18.0617, 27.7317, 45.4614, 95.2377),
    (3, 1): (7.3476, 9.4193, 13.9540, 20.1327, 31.1300, 61.3230),
    (4, 1): (6.6173, 8.1566, 11.2439, 15.1682, 21.8500, 39.5709),
    (5, 1): (6.1718, 7.4025, 9.6713, 12.3446, 16.6626, 27.6310),
    (6, 1): (5.9018, 6.9584, 8.7804, 10.7888, 13.8747, 21.3863),
    (7, 1): (5.6468, 6.5188, 7.8429, 9.0796, 10.6935, 13.9642),
    (3, 2): (12.3426, 18.1945, 33.4493, 56.8404, 101.4620, 230.5653),
    "mcmc": (33.7634, 38.7556, 45.3291, 50.2869, 55.2346, 61.7624),
}
TABLE2_CROSSOVER = {
    (2, 1): 2701,
    (3, 1): 5053,
    (4, 1): 9925,
    (5, 1): 18531,
    (6, 1): 30778,
    (7, 1): 118094,
    (3, 2): 829,
}
TABLE2_PAIRS = tuple(TABLE2_CROSSOVER)


class DegenerateDistributionError(ValueError):
    """Raised when the number of forced moves has zero variance."""


# -- normality of the forced-move count ------------------------------------------


@dataclass(frozen=True)
class CLTReport:
    """Kolmogorov-Smirnov distance of standardised ``theta`` from N(0, 1).

    ``theta`` is integer valued, so the plain distance cannot fall below
    roughly half the largest atom of its law.  ``ks_statistic`` therefore
    compares the empirical CDF with the normal CDF evaluated half a unit
    above each lattice point (continuity correction).  ``ks_raw`` is the
    uncorrected distance.
    """

    spec: BandSpec
    n_samples: int
    seed: int
    mean: float
    variance: float
    sample_mean: float
    sample_variance: float
    ks_statistic: float
    ks_raw: float

    def to_json(self) -> dict:
        return {
            "s": self.spec.s,
            "t": self.spec.t,
            "n": self.spec.n,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "mean": self.mean,
            "variance": self.variance,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "ks_statistic": self.ks_statistic,
            "ks_raw": self.ks_raw,
        }


def _lattice_ks(values: np.ndarray, mean: float, sd: float) -> tuple[float, float]:
    support, counts = np.unique(values, return_counts=True)
    n = values.size
    upper = np.cumsum(counts) / n  # empirical CDF at each support point
    lower = upper - counts / n  # just below it
    corrected = np.max(np.abs(upper - norm.cdf((support + 0.5 - mean) / sd)))
    z = (support - mean) / sd
    fz = norm.cdf(z)
    raw = max(np.max(np.abs(upper - fz)), np.max(np.abs(fz - lower)))
    return float(corrected), float(raw)


def clt_check(spec: BandSpec, n_samples: int = 100_000, seed: int = 0, workers: int = 1) -> CLTReport:
    """Sample uniform matchings and measure how normal ``theta`` looks."""
    if n_samples < 10_000:
        raise ValueError(f"need at least 10^4 samples, got {n_samples}")
    rep = exact_theta_moments(spec)
    if rep.Var_theta <= 1e-12:
        raise DegenerateDistributionError(f"theta is constant for {spec}")
    theta = sample_uniform_many(spec, n_samples, seed, workers).theta.astype(float)
    sd = math.sqrt(rep.Var_theta)
    ks, raw = _lattice_ks(theta, rep.E_theta, sd)
    return CLTReport(
        spec,
        n_samples,
        seed,
        rep.E_theta,
        rep.Var_theta,
        float(theta.mean()),
        float(theta.var(ddof=1)),
        ks,
        raw,
    )


# -- growth constants ---------------------------------------------------------------


def table1(pairs=TABLE1_PAIRS, n_big: int = 2048) -> list[tuple[int, int, float, float]]:
    """Rows ``(s, t, c, d)`` of the linear growth constants of ``log rho``."""
    return [(s, t, *extract_constants(s, t, n_big)) for s, t in pairs]


# -- sample sizes ------------------------------------------------------------------------


def mcmc_reference(n: int) -> float:
    """``log(n^7 log n)``."""
    return 7.0 * math.log(n) + math.log(math.log(n))


def predicted_log_cost(spec: BandSpec) -> float:
    """``log(N_conv n)`` with ``log N_conv = E log rho + sd(log rho)``."""
    return required_samples(spec) + math.log(spec.n)


@dataclass(frozen=True)
class SampleSizeRow:
    s: int
    t: int
    n: int
    log_Nconv_n_predicted: float
    log_mcmc_reference: float


@dataclass
class SampleSizeTable:
    rows: list[SampleSizeRow] = field(default_factory=list)

    def value(self, s: int, t: int, n: int) -> float:
        for r in self.rows:
            if (r.s, r.t, r.n) == (s, t, n):
                return r.log_Nconv_n_predicted
        raise KeyError((s, t, n))

    def mcmc_row(self) -> dict[int, float]:
        return {r.n: r.log_mcmc_reference for r in self.rows}

    def to_json(self) -> list[dict]:
        return [vars(r) | {} for r in self.rows]


def table2(pairs=TABLE2_PAIRS, n_list=TABLE2_N) -> SampleSizeTable:
    """Predicted ``log(N_conv n)`` for every pair and size, with the MCMC reference."""
    table = SampleSizeTable()
    for s, t in pairs:
        for n in n_list:
            spec = BandSpec(s, t, n)
            table.rows.append(SampleSizeRow(s, t, n, predicted_log_cost(spec), mcmc_reference(n)))
    return table


def naive_variance_comparison(spec: BandSpec) -> tuple[float, float]:
    """``(log chi2(nu || mu), log N_eL)`` for the uniform sequential sampler.

    The chi-square divergence is ``sum_pi 1/mu(pi) / |M|^2 - 1`` and is
    evaluated with exact integers, so a sampler that happens to be uniform
    gives ``-inf``.
    """
    if spec.n > EXACT_MAX_N:
        raise ValueError(f"n = {spec.n} exceeds the exact limit {EXACT_MAX_N}")
    inv_mu_sum = weighted_count_exact(spec, 1)
    count = weighted_count_exact(spec, 0)
    excess = inv_mu_sum - count * count
    log_naive = -math.inf if excess == 0 else _log_int(excess) - 2 * _log_int(count)
    return log_naive, required_samples(spec)


def _log_int(v: int) -> float:
    # math.log accepts arbitrarily large ints
    return math.log(v)


@dataclass(frozen=True)
class CrossoverReport:
    """Smallest ``n`` at which the sequential sampler stops beating MCMC.

    ``log_N_star`` is the predicted ``log(N_conv n)`` at that size.
    """

    s: int
    t: int
    n_star: int
    log_N_star: float

    def to_json(self) -> dict:
        return vars(self) | {}


def _excess(s: int, t: int, n: int) -> float:
    return predicted_log_cost(BandSpec(s, t, n)) - mcmc_reference(n)


def crossover_N_star(spec: BandSpec | tuple[int, int], n_max: int = 1 << 20) -> CrossoverReport:
    """Bisect for the first ``n`` where predicted cost reaches ``n^7 log n``.

    Only ``s`` and ``t`` of ``spec`` are used.  The excess of predicted
    over reference cost is negative for moderate ``n`` and grows linearly,
    so a doubling search followed by bisection locates the sign change.
    """
    s, t = (spec.s, spec.t) if isinstance(spec, BandSpec) else spec
    lo = 16
    while _excess(s, t, lo) >= 0:
        lo //= 2
        if lo < 2:
            return CrossoverReport(s, t, 2, predicted_log_cost(BandSpec(s, t, 2)))
    hi = lo * 2
    while _excess(s, t, hi) < 0:
        lo, hi = hi, hi * 2
        if hi > n_max:
            raise ValueError(f"no crossover below n = {n_max}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _excess(s, t, mid) < 0:
            lo = mid
        else:
            hi = mid
    return CrossoverReport(s, t, hi, predicted_log_cost(BandSpec(s, t, hi)))
