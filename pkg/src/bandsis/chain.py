"""The time-inhomogeneous Markov chain of a uniformly random permutation.

A uniform draw from the type-(s, t) permutations, read vertex by vertex, is
a Markov chain on the state space with step-dependent kernels
``K_i(x, T_j x) = completions[i+1][T_j x] / completions[i][x]``.  This
module builds those kernels, samples from them, and computes exact moments
of the forced-move count ``theta`` together with the diagnostics behind the
central limit theorem (maximal correlations, coupling times).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .counting import completion_table
from .graph import BandSpec
from .rng import map_blocks, substream
from .states import StateSpace, enumerate_states

__all__ = [
    "TransitionKernel",
    "ChainModel",
    "MomentReport",
    "CorrelationReport",
    "CouplingReport",
    "chain_model",
    "kernels",
    "simulate",
    "paths_to_permutations",
    "sample_uniform",
    "sample_uniform_many",
    "exact_theta_moments",
    "extract_constants",
    "max_correlation",
    "maximal_correlation",
    "coupling_time_test",
]


@dataclass(frozen=True)
class TransitionKernel:
    step: int
    matrix: np.ndarray


@dataclass(frozen=True)
class ChainModel:
    """Move probabilities ``probs[i, a, j]`` of the uniform-permutation chain."""

    spec: BandSpec
    space: StateSpace
    probs: np.ndarray = field(repr=False)
    log_count: float

    @property
    def n(self) -> int:
        return self.spec.n

    def kernel(self, i: int) -> TransitionKernel:
        return TransitionKernel(i, dense_kernel(self.space, self.probs[i]))

    def marginals(self) -> np.ndarray:
        """``(n+1, states)`` distribution of the state at every step."""
        space = self.space
        m = len(space)
        target = _flat_targets(space)
        out = np.zeros((self.n + 1, m))
        out[0, space.x0] = 1.0
        for i in range(self.n):
            flow = out[i][:, None] * self.probs[i]
            out[i + 1] = np.bincount(target, flow.ravel(), minlength=m + 1)[:m]
        return out


def dense_kernel(space: StateSpace, step_probs: np.ndarray) -> np.ndarray:
    m = len(space)
    mat = np.zeros((m, m))
    rows, cols = np.nonzero(space.succ >= 0)
    np.add.at(mat, (rows, space.succ[rows, cols]), step_probs[rows, cols])
    return mat


def _flat_targets(space: StateSpace) -> np.ndarray:
    """Successor index per (state, move), with illegal moves sent to a sink slot."""
    return np.where(space.succ >= 0, space.succ, len(space)).ravel()


@lru_cache(maxsize=16)
def chain_model(spec: BandSpec) -> ChainModel:
    table = completion_table(spec)
    probs = table.move_probabilities()
    probs.setflags(write=False)
    return ChainModel(spec, table.space, probs, table.log_total)


def kernels(spec: BandSpec) -> list[TransitionKernel]:
    """The ``n`` dense kernels ``K_0, ..., K_{n-1}`` over state indices."""
    model = chain_model(spec)
    return [model.kernel(i) for i in range(spec.n)]


# -- sampling -----------------------------------------------------------------


def _cdf_tables(space: StateSpace, probs: np.ndarray):
    # moves are walked in increasing successor-state index; illegal ones last
    key = np.where(space.succ >= 0, space.succ, len(space))
    order = np.argsort(key, axis=1, kind="stable")
    ordered = np.take_along_axis(probs, np.broadcast_to(order, probs.shape), axis=2)
    cum = np.cumsum(ordered, axis=2)
    positive = ordered > 0
    k = probs.shape[2]
    last = k - 1 - np.argmax(positive[..., ::-1], axis=2)
    return order, cum, last


@dataclass
class PathBatch:
    """A batch of sampled state paths with their log sampling probabilities."""

    states: np.ndarray  # (N, n+1) state indices
    moves: np.ndarray  # (N, n) move indices
    log_prob: np.ndarray  # (N,)
    theta: np.ndarray  # (N,) forced steps among x_0..x_{n-1}


def simulate(space: StateSpace, probs: np.ndarray, uniforms: np.ndarray) -> PathBatch:
    """Run the chain with per-step move probabilities ``probs`` (n, states, t+1).

    Row ``r`` of ``uniforms`` (N, n) drives sample ``r``: at each step one
    uniform selects the move by a CDF walk.
    """
    uniforms = np.atleast_2d(uniforms)
    n_samples, n = uniforms.shape
    if probs.shape[0] != n:
        raise ValueError(f"need {probs.shape[0]} uniforms per sample, got {n}")
    order, cum, last = _cdf_tables(space, probs)
    states = np.empty((n_samples, n + 1), dtype=np.int64)
    moves = np.empty((n_samples, n), dtype=np.int64)
    states[:, 0] = space.x0
    log_prob = np.zeros(n_samples)
    theta = np.zeros(n_samples, dtype=np.int64)
    for i in range(n):
        a = states[:, i]
        pos = (uniforms[:, i, None] >= cum[i, a]).sum(axis=1)
        pos = np.minimum(pos, last[i, a])
        j = order[a, pos]
        moves[:, i] = j
        states[:, i + 1] = space.succ[a, j]
        log_prob += np.log(probs[i, a, j])
        theta += space.forced[a]
    return PathBatch(states, moves, log_prob, theta)


def paths_to_permutations(space: StateSpace, batch: PathBatch) -> np.ndarray:
    """1-based permutations ``(N, n)`` encoded by a batch of paths."""
    n = batch.moves.shape[1]
    return np.arange(1, n + 1) + space.offset[batch.states[:, :-1], batch.moves]


def sample_uniform(spec: BandSpec, rng: np.random.Generator) -> tuple[int, ...]:
    """One uniformly random type-(s, t) permutation."""
    model = chain_model(spec)
    batch = simulate(model.space, model.probs, rng.random((1, spec.n)))
    return tuple(int(v) for v in paths_to_permutations(model.space, batch)[0])


def _uniform_block(spec: BandSpec, seed: int, block: int, size: int) -> PathBatch:
    model = chain_model(spec)
    u = substream(seed, block).random((size, spec.n))
    return simulate(model.space, model.probs, u)


def _concat(batches: list[PathBatch]) -> PathBatch:
    return PathBatch(
        np.concatenate([b.states for b in batches]),
        np.concatenate([b.moves for b in batches]),
        np.concatenate([b.log_prob for b in batches]),
        np.concatenate([b.theta for b in batches]),
    )


def sample_uniform_many(spec: BandSpec, n_samples: int, seed: int = 0, workers: int = 1) -> PathBatch:
    """``n_samples`` uniform permutations as state paths (deterministic in ``seed``)."""
    return _concat(map_blocks(_uniform_block, n_samples, seed, (spec,), workers))


# -- exact moments ------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    """Exact moments of ``theta`` and of ``log rho`` under the uniform law.

    ``log rho = (n - theta) log(t+1) - log|M|``; ``c`` and ``d`` are the
    per-vertex ratios ``(n - E theta) log(t+1) / n`` and ``Var log rho / n``.
    """

    s: int
    t: int
    n: int
    E_theta: float
    Var_theta: float
    E_log_rho: float
    Var_log_rho: float
    c: float
    d: float
    log_count: float

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def exact_theta_moments(spec: BandSpec) -> MomentReport:
    """Mean and variance of ``theta`` by one forward pass over the kernels.

    Each state carries its probability mass and the partial first and second
    moments of ``theta`` accumulated along paths reaching it.
    """
    model = chain_model(spec)
    space = model.space
    m = len(space)
    target = _flat_targets(space)
    forced = space.forced.astype(float)
    mass = np.zeros(m)
    mass[space.x0] = 1.0
    mom1 = np.zeros(m)
    mom2 = np.zeros(m)
    for i in range(spec.n):
        k = model.probs[i]
        carried1 = mom1 + forced * mass
        carried2 = mom2 + 2.0 * forced * mom1 + forced * mass
        mass, mom1, mom2 = (
            np.bincount(target, (v[:, None] * k).ravel(), minlength=m + 1)[:m]
            for v in (mass, carried1, carried2)
        )
    e_theta = float(mom1.sum())
    var_theta = max(float(mom2.sum()) - e_theta**2, 0.0)
    log_t1 = math.log(spec.t + 1)
    n = spec.n
    e_log_rho = (n - e_theta) * log_t1 - model.log_count
    var_log_rho = log_t1**2 * var_theta
    return MomentReport(
        spec.s,
        spec.t,
        n,
        e_theta,
        var_theta,
        e_log_rho,
        var_log_rho,
        (n - e_theta) * log_t1 / n,
        var_log_rho / n,
        model.log_count,
    )


def extract_constants(s: int, t: int, n_big: int = 2048) -> tuple[float, float]:
    """Linear-growth constants ``(c, d)`` of ``E`` and ``Var`` of ``log rho``.

    Differencing the exact values at ``n_big`` and ``2 n_big`` cancels the
    constant term of the expansion.
    """
    if n_big < 1024 or n_big & (n_big - 1):
        raise ValueError("n_big must be a power of two >= 1024")
    lo = exact_theta_moments(BandSpec(s, t, n_big))
    hi = exact_theta_moments(BandSpec(s, t, 2 * n_big))
    log_t1 = math.log(t + 1)
    g_lo = (n_big - lo.E_theta) * log_t1
    g_hi = (2 * n_big - hi.E_theta) * log_t1
    c = (g_hi - g_lo) / n_big
    d = (hi.Var_log_rho - lo.Var_log_rho) / n_big
    return c, d


# -- maximal correlation ------------------------------------------------------


def maximal_correlation(joint: np.ndarray) -> float:
    """Maximal correlation of a finite joint law ``joint[x, y]``.

    Equals the second singular value of ``D_x^{-1/2} J D_y^{-1/2}``;
    zero-mass rows and columns are dropped first.
    """
    joint = np.asarray(joint, dtype=float)
    joint = joint / joint.sum()
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    joint = joint[px > 0][:, py > 0]
    px, py = px[px > 0], py[py > 0]
    if min(joint.shape) < 2:
        return 0.0
    normalized = joint / np.sqrt(px)[:, None] / np.sqrt(py)[None, :]
    sv = np.linalg.svd(normalized, compute_uv=False)
    return float(min(sv[1], 1.0))


@dataclass(frozen=True)
class CorrelationReport:
    s: int
    t: int
    n: int
    rho: np.ndarray
    min_gap: float
    epsilon_kernel: float

    @property
    def max_rho(self) -> float:
        return float(self.rho.max())

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "n": self.n,
            "rho": [float(r) for r in self.rho],
            "max_rho": self.max_rho,
            "min_gap": self.min_gap,
            "epsilon_kernel": self.epsilon_kernel,
        }


def max_correlation(spec: BandSpec) -> CorrelationReport:
    """Per-step maximal correlations ``rho(X_i, X_{i+1})`` of the uniform chain."""
    model = chain_model(spec)
    pis = model.marginals()
    n = spec.n
    rho = np.zeros(n)
    eps = math.inf
    for i in range(n):
        k = model.kernel(i).matrix
        joint = pis[i][:, None] * k
        rho[i] = maximal_correlation(joint)
        if i <= n - (spec.s + spec.t):
            live = k[pis[i] > 0]
            positive = live[live > 0]
            if positive.size:
                eps = min(eps, float(positive.min()))
    if eps is math.inf:
        eps = float("nan")
    return CorrelationReport(spec.s, spec.t, n, rho, 1.0 - float(rho.max()), eps)


# -- coupling -----------------------------------------------------------------


@dataclass(frozen=True)
class CouplingReport:
    s: int
    t: int
    n: int
    trials: int
    delays: np.ndarray  # tau_I - I per trial
    epsilon_kernel: float

    @property
    def mean_square(self) -> float:
        return float(np.mean(self.delays.astype(float) ** 2))

    @property
    def bound(self) -> float:
        """``4 (s+t)^2 / eps^2`` with the measured kernel floor."""
        return 4.0 * (self.s + self.t) ** 2 / self.epsilon_kernel**2

    def survival(self, k: int) -> float:
        return float(np.mean(self.delays > k))

    @property
    def tail_probability(self) -> float:
        """Empirical ``P(tau - I > 10 (s+t))``."""
        return self.survival(10 * (self.s + self.t))

    def survival_ratios(self) -> list[float]:
        """``S(k + s + t) / S(k)`` for ``k = 0, s+t, ...`` while ``S(k) > 0``."""
        w = self.s + self.t
        out = []
        k = 0
        while self.survival(k) > 0:
            out.append(self.survival(k + w) / self.survival(k))
            k += w
        return out


def coupling_time_test(spec: BandSpec, seed: int = 0, trials: int = 1000) -> CouplingReport:
    """Empirical coupling delays of the uniform chain against a resampled copy.

    For each trial a uniform path ``X`` is drawn, an index ``I`` is chosen
    uniformly from ``0..n-1`` and the suffix after ``X_I`` is redrawn
    independently; ``tau_I`` is the first step ``j > I`` at which the copy
    agrees with ``X`` (``n + 1`` if never).
    """
    if trials < 1000:
        raise ValueError("coupling test needs at least 1000 trials")
    model = chain_model(spec)
    space, probs, n = model.space, model.probs, spec.n
    gen = substream(seed, 0)
    x = simulate(space, probs, gen.random((trials, n))).states
    start = gen.integers(0, n, size=trials)
    u = gen.random((trials, n))
    order, cum, last = _cdf_tables(space, probs)
    y = x.copy()
    for i in range(n):
        active = i >= start
        if not active.any():
            continue
        a = y[active, i]
        pos = (u[active, i, None] >= cum[i, a]).sum(axis=1)
        pos = np.minimum(pos, last[i, a])
        y[active, i + 1] = space.succ[a, order[a, pos]]
    steps = np.arange(n + 1)
    agree = (x == y) & (steps[None, :] > start[:, None])
    tau = np.where(agree.any(axis=1), agree.argmax(axis=1), n + 1)
    eps = max_correlation(spec).epsilon_kernel
    return CouplingReport(spec.s, spec.t, n, trials, tau - start, eps)
