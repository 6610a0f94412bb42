"""Sequential importance samplers for perfect matchings and the count estimator.

Every banded sampler is a chain on the type-(s, t) states driven by a table
``probs[i, a, j]`` of move probabilities; they differ only in that table:

``uniform`` / ``sequence``
    uniform over the legal moves.  On the band graph this is the plain
    sequential algorithm: a vertex whose leftmost window vertex is still
    free must take it, otherwise it picks uniformly among free neighbours;
``opt-t1``
    the balance-equation probabilities for ``t = 1``;
``limiting``
    the Perron-vector kernel, renormalised over legal moves near the end.

General graphs use :func:`sis_uniform` with explicit feasibility checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .chain import exact_theta_moments, paths_to_permutations, simulate
from .graph import BandSpec, BipartiteGraph, has_perfect_matching, maximum_matching_size
from .optprob import OptProbs, limiting_kernel, solve_opt_probs
from .rng import map_blocks, substream
from .states import StateSpace, enumerate_states, permutation_moves

__all__ = [
    "SAMPLERS",
    "WeightedSample",
    "ISEstimate",
    "NoPerfectMatchingError",
    "sis_uniform",
    "sis_sequence",
    "sis_weighted_t1",
    "sis_limiting",
    "sequence_probs",
    "weighted_t1_probs",
    "limiting_probs",
    "sampler_probs",
    "log_mu",
    "graph_log_mu",
    "enumerate_sampler_paths",
    "is_estimate",
    "estimate_count",
    "sample_log_mu",
    "required_samples",
    "JACKKNIFE_BATCHES",
]

SAMPLERS = ("uniform", "sequence", "opt-t1", "limiting")
JACKKNIFE_BATCHES = 32


class NoPerfectMatchingError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedSample:
    """A sampled permutation with ``log mu`` and the number of forced moves."""

    permutation: tuple[int, ...]
    log_mu: float
    theta: int
    path: tuple | None = None


# -- move-probability tables ----------------------------------------------------


def _legal_masks(space: StateSpace, n: int) -> np.ndarray:
    return np.stack([space.legal_mask(i, n) for i in range(n)])


def _normalize(weights: np.ndarray) -> np.ndarray:
    weights.setflags(write=True)
    out = weights / weights.sum(axis=2, keepdims=True)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def sequence_probs(spec: BandSpec) -> np.ndarray:
    """Uniform choice among legal moves at every step."""
    space = enumerate_states(spec.s, spec.t)
    return _normalize(_legal_masks(space, spec.n).astype(float))


def weighted_t1_probs(spec: BandSpec, probs: OptProbs) -> np.ndarray:
    """Forward move with probability ``p_k`` in state ``(-(k-1),)``, for ``t = 1``."""
    if spec.t != 1:
        raise ValueError(f"the weighted sampler needs t = 1, got t = {spec.t}")
    if probs.t != spec.s:
        raise ValueError(f"need {spec.s} probabilities for s = {spec.s}, got {probs.t}")
    space = enumerate_states(spec.s, 1)
    step = np.zeros((len(space), 2))
    for a, (y,) in enumerate(space.states):
        if y == -spec.s:
            step[a, 1] = 1.0
        else:
            p = probs.p[-y]
            step[a] = (p, 1.0 - p)
    legal = _legal_masks(space, spec.n)
    return _normalize(np.where(legal, step[None], 0.0))


@lru_cache(maxsize=32)
def limiting_probs(spec: BandSpec) -> np.ndarray:
    """Limiting (Perron) kernel restricted and renormalised to legal moves."""
    space = enumerate_states(spec.s, spec.t)
    kern = limiting_kernel(spec.s, spec.t).probs
    legal = _legal_masks(space, spec.n)
    return _normalize(np.where(legal, kern[None], 0.0))


def sampler_probs(kind: str, spec: BandSpec, probs: OptProbs | None = None) -> np.ndarray:
    if kind in ("uniform", "sequence"):
        return sequence_probs(spec)
    if kind == "opt-t1":
        return weighted_t1_probs(spec, probs or solve_opt_probs(spec.s))
    if kind == "limiting":
        return limiting_probs(spec)
    raise ValueError(f"unknown sampler {kind!r}; choose from {SAMPLERS}")


def log_mu(kind: str, spec: BandSpec, perm, probs: OptProbs | None = None) -> float:
    """Exact log-probability that sampler ``kind`` outputs ``perm``."""
    table = sampler_probs(kind, spec, probs)
    space = enumerate_states(spec.s, spec.t)
    a = space.x0
    total = 0.0
    for i, j in enumerate(permutation_moves(perm, spec)):
        p = table[i, a, j]
        if p <= 0:
            return -math.inf
        total += math.log(p)
        a = space.succ[a, j]
    return total


def enumerate_sampler_paths(spec: BandSpec, table: np.ndarray):
    """Yield ``(permutation, log_mu)`` for every path with positive probability."""
    space = enumerate_states(spec.s, spec.t)
    n = spec.n
    perm = [0] * n

    def rec(i, a, lp):
        if i == n:
            yield tuple(perm), lp
            return
        for j in range(space.n_moves):
            p = table[i, a, j]
            if p > 0:
                perm[i] = i + 1 + int(space.offset[a, j])
                yield from rec(i + 1, int(space.succ[a, j]), lp + math.log(p))

    yield from rec(0, space.x0, 0.0)


# -- single draws -----------------------------------------------------------------


def _table_draw(spec: BandSpec, table: np.ndarray, rng: np.random.Generator) -> WeightedSample:
    space = enumerate_states(spec.s, spec.t)
    batch = simulate(space, table, rng.random((1, spec.n)))
    perm = tuple(int(v) for v in paths_to_permutations(space, batch)[0])
    path = tuple(space.states[a] for a in batch.states[0])
    return WeightedSample(perm, float(batch.log_prob[0]), int(batch.theta[0]), path)


def _banded_window_draw(spec: BandSpec, rng: np.random.Generator) -> WeightedSample:
    # free-neighbour window rule: O(s + t) per vertex
    n, s, t = spec.n, spec.s, spec.t
    used = [False] * (n + 2)
    perm = []
    log_p = 0.0
    theta = 0
    for i in range(1, n + 1):
        left = i - s
        if left >= 1 and not used[left]:
            choices = [left]
            theta += 1
        else:
            choices = [j for j in range(max(1, left), min(n, i + t) + 1) if not used[j]]
        pick = choices[int(rng.integers(len(choices)))] if len(choices) > 1 else choices[0]
        used[pick] = True
        perm.append(pick)
        log_p -= math.log(len(choices))
    return WeightedSample(tuple(perm), log_p, theta)


def _feasible_choices(g: BipartiteGraph, i: int, used: int, cache: dict) -> list[int]:
    key = (i, used)
    hit = cache.get(key)
    if hit is not None:
        return hit
    n = g.n_left
    free = g.rows[i] & ~used
    out = []
    j = 0
    while free >> j:
        if free >> j & 1:
            rest = used | (1 << j)
            rows = [r & ~rest for r in g.rows[i + 1 :]]
            if maximum_matching_size(rows, n) == n - i - 1:
                out.append(j)
        j += 1
    cache[key] = out
    return out


def _graph_draw(g: BipartiteGraph, rng: np.random.Generator, cache: dict) -> WeightedSample:
    used = 0
    perm = []
    log_p = 0.0
    forced = 0
    for i in range(g.n_left):
        choices = _feasible_choices(g, i, used, cache)
        if not choices:
            raise NoPerfectMatchingError("partial matching cannot be completed")
        j = choices[int(rng.integers(len(choices)))] if len(choices) > 1 else choices[0]
        forced += len(choices) == 1
        used |= 1 << j
        perm.append(j + 1)
        log_p -= math.log(len(choices))
    return WeightedSample(tuple(perm), log_p, forced)


def sis_uniform(target: BandSpec | BipartiteGraph, rng: np.random.Generator) -> WeightedSample:
    """Sequential algorithm: match vertices in order, uniformly among completable edges.

    On band graphs the completable edges follow from the window rule in
    constant time; general graphs check each candidate with a maximum
    matching of the remainder.  ``theta`` counts single-choice steps on
    general graphs and forced steps on band graphs.
    """
    if isinstance(target, BandSpec):
        return _banded_window_draw(target, rng)
    if not has_perfect_matching(target):
        raise NoPerfectMatchingError("graph has no perfect matching")
    return _graph_draw(target, rng, {})


def sis_sequence(spec: BandSpec, rng: np.random.Generator) -> WeightedSample:
    """Sequential algorithm in sequence form: uniform over the legal moves ``T_j``."""
    return _table_draw(spec, sequence_probs(spec), rng)


def sis_weighted_t1(spec: BandSpec, probs: OptProbs, rng: np.random.Generator) -> WeightedSample:
    """Weighted sampler for ``t = 1`` with forward probabilities ``probs``."""
    return _table_draw(spec, weighted_t1_probs(spec, probs), rng)


def sis_limiting(spec: BandSpec, rng: np.random.Generator) -> WeightedSample:
    """Sampler driven by the limiting kernel of the uniform chain."""
    return _table_draw(spec, limiting_probs(spec), rng)


def graph_log_mu(g: BipartiteGraph, perm) -> float:
    """Exact ``log mu(perm)`` for the sequential algorithm on a general graph."""
    used = 0
    total = 0.0
    cache: dict = {}
    for i, v in enumerate(perm):
        choices = _feasible_choices(g, i, used, cache)
        if v - 1 not in choices:
            return -math.inf
        total -= math.log(len(choices))
        used |= 1 << (v - 1)
    return total


# -- estimation --------------------------------------------------------------------


@dataclass(frozen=True)
class ISEstimate:
    """Importance-sampling estimate of ``log |M|`` with weight diagnostics."""

    log_estimate: float
    n_samples: int
    stderr_log: float
    ess: float

    @property
    def estimate(self) -> float:
        return math.exp(self.log_estimate)

    def to_json(self) -> dict:
        return {
            "log_estimate": self.log_estimate,
            "n_samples": self.n_samples,
            "stderr_log": self.stderr_log,
            "ess": self.ess,
        }


def _batch_bounds(n: int, batches: int) -> list[tuple[int, int]]:
    size = n // batches
    bounds = [(b * size, (b + 1) * size) for b in range(batches)]
    # remainder folded into the last batch
    bounds[-1] = (bounds[-1][0], n)
    return bounds


def is_estimate(log_mus: np.ndarray) -> ISEstimate:
    """Estimator from per-sample ``log mu``; weights ``1/mu`` stay in log space.

    The standard error of ``log_estimate`` is a delete-one-batch jackknife
    over 32 contiguous batches (fewer if there are fewer samples).
    """
    log_w = -np.asarray(log_mus, dtype=float)
    n = log_w.size
    if n == 0:
        raise ValueError("no samples")
    total = logsumexp(log_w)
    log_est = float(total - math.log(n))
    ess = float(math.exp(2 * total - logsumexp(2 * log_w)))
    if n < 2:
        return ISEstimate(log_est, n, math.inf, ess)
    batches = min(JACKKNIFE_BATCHES, n)
    bounds = _batch_bounds(n, batches)
    batch_lse = np.array([logsumexp(log_w[lo:hi]) for lo, hi in bounds])
    sizes = np.array([hi - lo for lo, hi in bounds])
    loo = np.array(
        [logsumexp(np.delete(batch_lse, b)) - math.log(n - sizes[b]) for b in range(batches)]
    )
    var = (batches - 1) / batches * float(np.sum((loo - loo.mean()) ** 2))
    return ISEstimate(log_est, n, math.sqrt(var), ess)


def _banded_block(kind, spec, probs, seed, block, size):
    table = sampler_probs(kind, spec, probs)
    space = enumerate_states(spec.s, spec.t)
    u = substream(seed, block).random((size, spec.n))
    return simulate(space, table, u).log_prob


def _graph_block(g, seed, block, size):
    rng = substream(seed, block)
    cache: dict = {}
    return np.array([_graph_draw(g, rng, cache).log_mu for _ in range(size)])


def sample_log_mu(
    kind: str,
    target: BandSpec | BipartiteGraph,
    n_samples: int,
    seed: int = 0,
    workers: int = 1,
    probs: OptProbs | None = None,
) -> np.ndarray:
    """``log mu`` of ``n_samples`` draws, identical for any worker count."""
    if isinstance(target, BipartiteGraph):
        if kind != "uniform":
            raise ValueError("general graphs only support the 'uniform' sampler")
        if not has_perfect_matching(target):
            raise NoPerfectMatchingError("graph has no perfect matching")
        parts = map_blocks(_graph_block, n_samples, seed, (target,), workers)
    else:
        if kind not in SAMPLERS:
            raise ValueError(f"unknown sampler {kind!r}; choose from {SAMPLERS}")
        if kind == "opt-t1" and probs is None:
            probs = solve_opt_probs(target.s) if target.t == 1 else None
            if probs is None:
                raise ValueError(f"the weighted sampler needs t = 1, got t = {target.t}")
        parts = map_blocks(_banded_block, n_samples, seed, (kind, target, probs), workers)
    return np.concatenate(parts)


def estimate_count(
    kind: str,
    target: BandSpec | BipartiteGraph,
    n_samples: int,
    seed: int = 0,
    workers: int = 1,
    probs: OptProbs | None = None,
) -> ISEstimate:
    """Importance-sampling estimate of the number of perfect matchings."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    return is_estimate(sample_log_mu(kind, target, n_samples, seed, workers, probs))


def required_samples(spec: BandSpec) -> float:
    """Log of the recommended sample size, ``E log rho + sd(log rho)``."""
    rep = exact_theta_moments(spec)
    return rep.E_log_rho + math.sqrt(rep.Var_log_rho)
