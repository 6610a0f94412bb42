"""Near-optimal sampling probabilities.

For the one-sided band ``F_{n,s,1}`` the sampler takes the forward edge
``(i+1)'`` with probability ``p_k`` when ``k - 1`` consecutive forward edges
precede vertex ``i``.  The ``p_k`` solve

    (1 - p_1)^k     = p_1 ... p_{k-1} (1 - p_k),   k <= s
    (1 - p_1)^(s+1) = p_1 ... p_s

which makes every permutation's sampling probability equal up to a factor
of 4.  For general bands the limiting kernel ``p_{x,j}`` comes from the
Perron vector of the state graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .counting import log_count_matchings, perron
from .graph import BandSpec
from .states import enumerate_states

__all__ = [
    "OptProbs",
    "LimitingKernel",
    "solve_opt_probs",
    "opt_residuals",
    "limiting_prob",
    "convergence_rate_check",
    "verify_bounded_ratio",
    "limiting_kernel",
    "conjecture_experiment",
    "table3",
    "TABLE3",
]

# printed to five decimals, t = 1..9
TABLE3 = {
    1: (0.38196,),
    2: (0.45631, 0.35220),
    3: (0.48120, 0.44069, 0.34158),
    4: (0.49133, 0.47340, 0.43419, 0.33716),
    5: (0.49586, 0.48744, 0.46989, 0.43126, 0.33516),
    6: (0.49798, 0.49391, 0.48561, 0.46824, 0.42988, 0.33422),
    7: (0.49900, 0.49700, 0.49297, 0.48473, 0.46744, 0.42922, 0.33377),
    8: (0.49950, 0.49851, 0.49653, 0.49251, 0.48429, 0.46705, 0.42889, 0.33355),
    9: (0.49975, 0.49926, 0.49827, 0.49629, 0.49228, 0.48408, 0.46685, 0.42873, 0.33344),
}


@dataclass(frozen=True)
class OptProbs:
    """Solution ``p_1 > ... > p_t`` of the balance equations (as floats).

    ``exact`` keeps the high-precision values used to compute them.
    """

    t: int
    p: tuple[float, ...]
    exact: tuple = ()

    def __post_init__(self):
        if len(self.p) != self.t:
            raise ValueError(f"expected {self.t} probabilities, got {len(self.p)}")

    @classmethod
    def uniform(cls, t: int) -> "OptProbs":
        """``p_k = 1/2`` for every k: the plain uniform sampler."""
        return cls(t, (0.5,) * t)


def _working_dps(t: int) -> int:
    # forward substitution amplifies errors by up to ~2 per level
    return 30 + int(0.31 * t) + 5


def solve_opt_probs(t: int) -> OptProbs:
    """Solve the balance equations for ``1 <= t <= 64``.

    ``p_1`` is the root in ``(1/3, 1/2)`` of ``p^2 = (1-p)^2 - (1-p)^(t+2)``,
    isolated by bisection and polished by Newton; the remaining
    probabilities follow by forward substitution.
    """
    if not 1 <= t <= 64:
        raise ValueError("t must be in 1..64")
    with mpmath.workdps(_working_dps(t)):
        one = mpmath.mpf(1)

        def f(p):
            q = one - p
            return p * p - q * q + q ** (t + 2)

        def df(p):
            q = one - p
            return 2 * p + 2 * q - (t + 2) * q ** (t + 1)

        lo, hi = one / 3, one / 2
        if not (f(lo) < 0 < f(hi)):
            raise ArithmeticError("root of the p_1 equation is not bracketed")
        while hi - lo > mpmath.mpf("1e-6"):
            mid = (lo + hi) / 2
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        p1 = (lo + hi) / 2
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps - 5))
        for _ in range(200):
            step = f(p1) / df(p1)
            p1 -= step
            if abs(step) < tol:
                break
        else:
            raise ArithmeticError("Newton polish did not converge")
        if not lo <= p1 <= hi:
            raise ArithmeticError("Newton left the bisection bracket")
        ps = [p1]
        prod = p1
        for k in range(2, t + 1):
            pk = one - (one - p1) ** k / prod
            ps.append(pk)
            prod *= pk
        res = opt_residuals(ps)
        if max(res) > mpmath.mpf("1e-20"):
            raise ArithmeticError(f"balance residual too large: {max(res)}")
        return OptProbs(t, tuple(float(p) for p in ps), tuple(ps))


def opt_residuals(ps) -> list:
    """Absolute residuals of every balance equation (``t`` of them plus the last)."""
    t = len(ps)
    q1 = 1 - ps[0]
    out = []
    prod = 1
    for k in range(1, t + 1):
        out.append(abs(q1**k - prod * (1 - ps[k - 1])))
        prod *= ps[k - 1]
    out.append(abs(q1 ** (t + 1) - prod))
    return out


def table3(t_max: int = 9) -> list[tuple[float, ...]]:
    return [solve_opt_probs(t).p for t in range(1, t_max + 1)]


def limiting_prob(k: int) -> Fraction:
    """Large-``t`` limit of ``p_{t-k}``: ``(2^(k+1) - 1) / (2^(k+2) - 1)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return Fraction(2 ** (k + 1) - 1, 2 ** (k + 2) - 1)


def convergence_rate_check(t_range=range(10, 26), k_set=(0, 1, 2)) -> dict:
    """Errors ``e(t, k) = |p_{t-k} - p*_{t-k}|`` and their decay diagnostics.

    Returns a dict with ``errors[(t, k)]`` (mpf), ``scaled[(t, k)] =
    e * 2^(t+k)`` and ``ratios[(t, k)] = e(t+1, k) / e(t, k)``.
    """
    t_values = list(t_range)
    errors = {}
    for t in t_values:
        sol = solve_opt_probs(t)
        with mpmath.workdps(_working_dps(t)):
            for k in k_set:
                if k >= t:
                    continue
                target = limiting_prob(k)
                errors[(t, k)] = abs(sol.exact[t - k - 1] - mpmath.mpf(target.numerator) / target.denominator)
    scaled = {key: float(e * mpmath.mpf(2) ** (key[0] + key[1])) for key, e in errors.items()}
    ratios = {}
    for (t, k), e in errors.items():
        nxt = errors.get((t + 1, k))
        if nxt is not None:
            ratios[(t, k)] = float(nxt / e)
    return {"errors": errors, "scaled": scaled, "ratios": ratios}


@dataclass(frozen=True)
class LimitingKernel:
    """State-dependent move distribution ``probs[a, j]`` of the limiting chain."""

    s: int
    t: int
    probs: np.ndarray

    def to_json(self) -> dict:
        space = enumerate_states(self.s, self.t)
        return {
            "s": self.s,
            "t": self.t,
            "rows": [
                {"state": list(x), "p": [float(v) for v in self.probs[a]]}
                for a, x in enumerate(space.states)
            ],
        }


def limiting_kernel(s: int, t: int) -> LimitingKernel:
    """``p_{x,j} = v(T_j x) / sum_k v(T_k x)`` with ``v`` the Perron vector."""
    space = enumerate_states(s, t)
    v = perron(s, t).v
    legal = space.succ >= 0
    weights = np.where(legal, v[np.where(legal, space.succ, 0)], 0.0)
    probs = weights / weights.sum(axis=1, keepdims=True)
    probs.setflags(write=False)
    return LimitingKernel(s, t, probs)


def verify_bounded_ratio(t: int, n: int, probs: OptProbs | None = None) -> float:
    """Spread ``max - min`` of ``log mu*(pi)`` over all of ``F_{n,t,1}``.

    The weighted sampler uses the balance-equation probabilities (or
    ``probs`` if given).  Raises ``AssertionError`` if the spread exceeds
    ``2 log 2``.
    """
    from .sampler import enumerate_sampler_paths, weighted_t1_probs

    spec = BandSpec(t, 1, n)
    probs = probs or solve_opt_probs(t)
    log_mus = [lp for _, lp in enumerate_sampler_paths(spec, weighted_t1_probs(spec, probs))]
    spread = max(log_mus) - min(log_mus)
    if spread > 2 * math.log(2) + 1e-12:
        raise AssertionError(f"spread {spread} exceeds 2 log 2 for t={t}, n={n}")
    return spread


def conjecture_experiment(s: int, t: int, n_max: int = 10) -> list[dict]:
    """``max_pi 1 / (|M| mu*(pi))`` under the limiting sampler for ``n <= n_max``.

    Exploratory: the sequence is reported, not tested for boundedness.
    """
    if n_max > 12:
        raise ValueError("exhaustive experiment limited to n_max <= 12")
    from .sampler import enumerate_sampler_paths, limiting_probs

    rows = []
    for n in range(1, n_max + 1):
        spec = BandSpec(s, t, n)
        log_mus = [lp for _, lp in enumerate_sampler_paths(spec, limiting_probs(spec))]
        log_count = log_count_matchings(spec)
        worst = -min(log_mus) - log_count
        rows.append({"n": n, "count": len(log_mus), "max_ratio": math.exp(worst), "log_max_ratio": worst})
    return rows
