"""Exact counting of type-(s, t) permutations by dynamic programming.

The backward table ``completions[i][x]`` counts the ways to finish a
permutation when vertex ``i + 1`` is about to be matched in state ``x``.
Moves that would consume a right vertex with label above ``n`` are
excluded, which is exactly the boundary condition for permutations; no
special terminal states are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .graph import BandSpec
from .states import StateSpace, enumerate_states, state_graph

__all__ = [
    "EXACT_MAX_N",
    "CountTable",
    "SpectralData",
    "ConvergenceError",
    "count_matchings",
    "log_count_matchings",
    "completion_table",
    "path_counts",
    "perron",
    "weighted_count",
    "weighted_count_exact",
    "choice_counts",
]

EXACT_MAX_N = 4096


class ConvergenceError(RuntimeError):
    pass


def choice_counts(space: StateSpace, n: int) -> np.ndarray:
    """``(n, states)`` array: number of legal moves at each step and state."""
    return np.stack([space.legal_mask(i, n).sum(axis=1) for i in range(n)])


@dataclass
class CountTable:
    """Completion counts for one instance.

    With ``exact`` the counts are Python integers in ``counts``; otherwise
    ``scaled[i] * exp(log_scale[i])`` holds them in floating point.
    """

    spec: BandSpec
    space: StateSpace
    exact: bool
    counts: list | None
    scaled: np.ndarray | None
    log_scale: np.ndarray | None

    def completions(self, i: int, x) -> int | float:
        a = x if isinstance(x, (int, np.integer)) else self.space.index[tuple(x)]
        if self.exact:
            return self.counts[i][a]
        return float(self.scaled[i, a] * math.exp(self.log_scale[i]))

    def log_completions(self, i: int) -> np.ndarray:
        if self.exact:
            return np.array([math.log(c) if c else -np.inf for c in self.counts[i]])
        with np.errstate(divide="ignore"):
            return np.log(self.scaled[i]) + self.log_scale[i]

    @property
    def total(self) -> int | float:
        """``completions[0][x0]``, the number of permutations."""
        return self.completions(0, self.space.x0)

    @property
    def log_total(self) -> float:
        return float(self.log_completions(0)[self.space.x0])

    def move_probabilities(self) -> np.ndarray:
        """``(n, states, t+1)`` uniform-permutation transition probabilities.

        Entry ``[i, a, j]`` is the fraction of completions from state ``a`` at
        step ``i`` that start with move ``j``.
        """
        space, n = self.space, self.spec.n
        m, k = space.succ.shape
        probs = np.zeros((n, m, k))
        for i in range(n):
            legal = space.legal_mask(i, n)
            if self.exact:
                nxt, cur = self.counts[i + 1], self.counts[i]
                for a in range(m):
                    if cur[a] == 0:
                        continue
                    for j in range(k):
                        if legal[a, j]:
                            # int / int is correctly rounded even for huge operands
                            probs[i, a, j] = nxt[space.succ[a, j]] / cur[a]
            else:
                nxt = self.scaled[i + 1][np.where(legal, space.succ, 0)] * legal
                tot = nxt.sum(axis=1, keepdims=True)
                probs[i] = np.divide(nxt, tot, out=np.zeros_like(nxt), where=tot > 0)
        return probs


def completion_table(spec: BandSpec, exact: bool | None = None) -> CountTable:
    """Backward completion counts for every step and state."""
    space = enumerate_states(spec.s, spec.t)
    n = spec.n
    if exact is None:
        exact = n <= EXACT_MAX_N
    m = len(space)
    succ = space.succ
    if exact:
        counts = [None] * (n + 1)
        counts[n] = [1] * m
        for i in range(n - 1, -1, -1):
            legal = space.legal_mask(i, n)
            nxt = counts[i + 1]
            counts[i] = [
                sum(nxt[succ[a, j]] for j in range(succ.shape[1]) if legal[a, j]) for a in range(m)
            ]
        return CountTable(spec, space, True, counts, None, None)
    scaled = np.zeros((n + 1, m))
    log_scale = np.zeros(n + 1)
    scaled[n] = 1.0
    for i in range(n - 1, -1, -1):
        legal = space.legal_mask(i, n)
        row = (scaled[i + 1][np.where(legal, succ, 0)] * legal).sum(axis=1)
        top = row.max()
        scaled[i] = row / top
        log_scale[i] = log_scale[i + 1] + math.log(top)
    return CountTable(spec, space, False, None, scaled, log_scale)


def count_matchings(spec: BandSpec) -> int:
    """Exact number of type-(s, t) permutations of size ``n``."""
    space = enumerate_states(spec.s, spec.t)
    n, m = spec.n, len(space)
    succ = space.succ.tolist()
    k = space.n_moves
    # away from the right boundary every in-range move is legal
    interior = [[succ[a][j] for j in range(k) if succ[a][j] >= 0] for a in range(m)]
    cur = [1] * m
    for i in range(n - 1, -1, -1):
        if i + 1 + spec.t <= n:
            cur = [sum(cur[b] for b in interior[a]) for a in range(m)]
        else:
            legal = space.legal_mask(i, n)
            cur = [sum(cur[succ[a][j]] for j in range(k) if legal[a, j]) for a in range(m)]
    return cur[space.x0]


def log_count_matchings(spec: BandSpec) -> float:
    if spec.n <= 20000:
        return math.log(count_matchings(spec))
    return completion_table(spec, exact=False).log_total


def path_counts(s: int, t: int, length: int, x=None) -> int | list[int]:
    """Number of directed paths of ``length`` edges in the state graph from ``x``.

    Without ``x`` the full vector over states is returned.
    """
    if length < 0:
        raise ValueError("length must be nonnegative")
    space = enumerate_states(s, t)
    out = [[int(b) for b in row if b >= 0] for row in space.succ]
    vec = [1] * len(space)
    for _ in range(length):
        vec = [sum(vec[b] for b in out[a]) for a in range(len(space))]
    if x is None:
        return vec
    a = x if isinstance(x, int) else space.index[tuple(x)]
    return vec[a]


@dataclass(frozen=True)
class SpectralData:
    """Dominant eigenpair of the state-graph adjacency matrix ``A v = lam v``."""

    lam: float
    v: np.ndarray
    residual: float
    lambda2_abs: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.lam - self.lambda2_abs


def _power_iteration(mat: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, int]:
    m = mat.shape[0]
    x = np.full(m, 1.0 / m)
    # A + I has the same Perron vector and a better-separated spectrum
    shifted = mat + np.eye(m)
    for it in range(1, max_iter + 1):
        y = shifted @ x
        y /= y.sum()
        if np.max(np.abs(y - x)) < tol:
            x = y
            break
        x = y
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    lam = float((mat @ x).sum() / x.sum())
    return lam, x, it


def perron(s: int, t: int, tol: float = 1e-13, max_iter: int = 1_000_000) -> SpectralData:
    """Perron root and positive eigenvector of the state graph.

    The second eigenvalue modulus is estimated by power iteration on the
    deflated matrix ``A - lam v w^T / (w . v)`` with ``w`` the left vector.
    """
    adj = state_graph(s, t).astype(float)
    lam, v, iters = _power_iteration(adj, tol, max_iter)
    _, w, _ = _power_iteration(adj.T.copy(), tol, max_iter)
    v = v / v.sum()
    residual = float(np.max(np.abs(adj @ v - lam * v)))
    deflated = adj - lam * np.outer(v, w) / float(w @ v)
    m = adj.shape[0]
    if m == 1:
        lam2 = 0.0
    else:
        rng = np.random.default_rng(0)
        z = rng.standard_normal(m)
        z /= np.linalg.norm(z)
        log_growth = []
        for _ in range(3000):
            z = deflated @ z
            norm = np.linalg.norm(z)
            if norm < 1e-300:
                break
            log_growth.append(math.log(norm))
            z /= norm
        lam2 = math.exp(float(np.mean(log_growth[-1000:]))) if log_growth else 0.0
    return SpectralData(lam, v, residual, lam2, iters)


def _step_weights(space: StateSpace, n: int, i: int, m: float, weights: str) -> np.ndarray:
    """Log-weight multiplier for leaving each state at step ``i``."""
    legal = space.legal_mask(i, n)
    if weights == "actual":
        base = legal.sum(axis=1).astype(float)
    elif weights == "nominal":
        base = np.where(space.forced, 1.0, float(space.t + 1))
    else:
        raise ValueError(f"weights must be 'actual' or 'nominal', got {weights!r}")
    return m * np.log(base)


def weighted_count(spec: BandSpec, m: float, weights: str = "actual") -> float:
    """``log sum_pi w(pi)^m`` over the type-(s, t) permutations.

    With ``weights="actual"`` the weight is ``1 / mu(pi)`` for the uniform
    sequential sampler (product of the number of legal choices at each
    step).  With ``"nominal"`` every unforced step contributes ``t + 1``,
    i.e. ``w(pi) = (t + 1)^(n - theta(pi))``.  At ``m = 0`` both give
    ``log |F_{n,s,t}|``.
    """
    if abs(m) > 4:
        raise ValueError("|m| must be at most 4")
    space = enumerate_states(spec.s, spec.t)
    n = spec.n
    succ = space.succ
    logw = np.zeros(len(space))
    for i in range(n - 1, -1, -1):
        legal = space.legal_mask(i, n)
        terms = np.where(legal, logw[np.where(legal, succ, 0)], -np.inf)
        logw = logsumexp(terms, axis=1) + _step_weights(space, n, i, m, weights)
    return float(logw[space.x0])


def weighted_count_exact(spec: BandSpec, m: int, weights: str = "actual") -> int:
    """Integer version of :func:`weighted_count` for integer ``m >= 0``."""
    if m < 0 or int(m) != m:
        raise ValueError("exact weighted counts need an integer m >= 0")
    space = enumerate_states(spec.s, spec.t)
    n = spec.n
    succ = space.succ
    k = space.n_moves
    cur = [1] * len(space)
    for i in range(n - 1, -1, -1):
        legal = space.legal_mask(i, n)
        new = []
        for a in range(len(space)):
            total = sum(cur[succ[a, j]] for j in range(k) if legal[a, j])
            if weights == "actual":
                base = int(legal[a].sum())
            elif weights == "nominal":
                base = 1 if space.forced[a] else space.t + 1
            else:
                raise ValueError(f"weights must be 'actual' or 'nominal', got {weights!r}")
            new.append(base**m * total)
        cur = new
    return cur[space.x0]
