"""State space of type-(s, t) sequences and the permutation encoding.

A state is a strictly increasing ``t``-tuple drawn from ``{-s, ..., t-1}``:
the offsets, relative to the vertex about to be matched, of the right
vertices still available in the window (offset ``t`` is always available
and therefore left implicit).  Matching the current vertex to the candidate
with index ``j`` moves the state by ``T_j``:

* ``j = 0`` takes the implicit offset ``t`` and decrements every entry;
* ``j >= 1`` takes entry ``j``, drops it, decrements the rest and appends
  ``t - 1``.

If ``-s`` is in the state that right vertex must be taken now, so only
``j = 1`` is legal (a *forced* move).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .graph import BandSpec

__all__ = [
    "StateTuple",
    "StateSpace",
    "IllegalTransitionError",
    "BandViolationError",
    "NotInImageError",
    "initial_state",
    "enumerate_states",
    "transition",
    "legal_moves",
    "encode_permutation",
    "decode_sequence",
    "state_graph",
]

StateTuple = tuple[int, ...]


class IllegalTransitionError(ValueError):
    pass


class BandViolationError(ValueError):
    pass


class NotInImageError(ValueError):
    """The sequence does not come from any permutation of the band."""


def initial_state(t: int) -> StateTuple:
    return tuple(range(t))


def transition(x: StateTuple, j: int, s: int | None = None) -> StateTuple:
    """Apply ``T_j`` to ``x``.

    With ``s`` given, the move is checked for legality: a state holding
    ``-s`` only admits ``j = 1``, and the result must stay in range.
    """
    t = len(x)
    if not 0 <= j <= t:
        raise IllegalTransitionError(f"move index {j} outside 0..{t}")
    if s is not None and x[0] == -s and j != 1:
        raise IllegalTransitionError(f"state {x} contains -s = {-s}; only T_1 is legal")
    if j == 0:
        y = tuple(v - 1 for v in x)
    else:
        y = tuple(v - 1 for k, v in enumerate(x) if k != j - 1) + (t - 1,)
    if s is not None and y[0] < -s:
        raise IllegalTransitionError(f"T_{j}{x} = {y} leaves the state space")
    return y


def legal_moves(x: StateTuple, s: int) -> tuple[int, ...]:
    """Move indices allowed from ``x`` ignoring the right boundary."""
    if x[0] == -s:
        return (1,)
    return tuple(range(len(x) + 1))


def move_offset(x: StateTuple, j: int) -> int:
    """Offset of the right vertex consumed by move ``j``."""
    return len(x) if j == 0 else x[j - 1]


@dataclass(frozen=True)
class StateSpace:
    """All states for fixed (s, t), indexed in lexicographic order.

    ``succ[a, j]`` is the index of ``T_j(states[a])`` or -1 when the move is
    illegal; ``offset[a, j]`` is the offset of the right vertex move ``j``
    consumes; ``forced[a]`` marks states containing ``-s``.
    """

    s: int
    t: int
    states: tuple[StateTuple, ...]
    index: dict = field(repr=False)
    succ: np.ndarray = field(repr=False)
    offset: np.ndarray = field(repr=False)
    forced: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.states)

    @property
    def x0(self) -> int:
        return self.index[initial_state(self.t)]

    @property
    def n_moves(self) -> int:
        return self.t + 1

    def legal_mask(self, step: int, n: int) -> np.ndarray:
        """Boolean ``(states, t+1)`` mask of moves legal at 0-based ``step``.

        A move is legal if ``T_j`` stays in range (which also encodes the
        forced rule) and the right vertex it consumes has label at most ``n``.
        """
        return (self.succ >= 0) & (step + 1 + self.offset <= n)

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "states": [list(x) for x in self.states],
            "x0": self.x0,
            "successors": self.succ.tolist(),
            "forced": [bool(f) for f in self.forced],
        }


@lru_cache(maxsize=None)
def enumerate_states(s: int, t: int) -> StateSpace:
    """The ``C(s+t, t)`` states of the type-(s, t) chain."""
    if s < 1 or t < 1:
        raise ValueError("s and t must be positive")
    states = tuple(itertools.combinations(range(-s, t), t))
    assert len(states) == comb(s + t, t)
    index = {x: a for a, x in enumerate(states)}
    m = len(states)
    succ = np.full((m, t + 1), -1, dtype=np.int64)
    offset = np.zeros((m, t + 1), dtype=np.int64)
    for a, x in enumerate(states):
        for j in range(t + 1):
            offset[a, j] = move_offset(x, j)
        for j in legal_moves(x, s):
            succ[a, j] = index[transition(x, j, s)]
    forced = np.array([x[0] == -s for x in states])
    for arr in (succ, offset, forced):
        arr.setflags(write=False)
    return StateSpace(s, t, states, index, succ, offset, forced)


def state_graph(s: int, t: int) -> np.ndarray:
    """Adjacency matrix of the state graph: ``A[a, b] = 1`` iff ``b = T_j(a)``."""
    space = enumerate_states(s, t)
    m = len(space)
    adj = np.zeros((m, m), dtype=np.int64)
    for a in range(m):
        for b in space.succ[a]:
            if b >= 0:
                adj[a, b] = 1
    return adj


def _check_permutation(perm, spec: BandSpec) -> tuple[int, ...]:
    perm = tuple(int(v) for v in perm)
    if len(perm) != spec.n:
        raise BandViolationError(f"permutation has length {len(perm)}, expected {spec.n}")
    if sorted(perm) != list(range(1, spec.n + 1)):
        raise BandViolationError(f"{perm} is not a permutation of 1..{spec.n}")
    for i, v in enumerate(perm, start=1):
        if not spec.contains(i, v):
            raise BandViolationError(f"pi({i}) = {v} violates -{spec.s} <= pi(i) - i <= {spec.t}")
    return perm


def permutation_moves(perm, spec: BandSpec) -> list[int]:
    """The move index chosen at each step when the sampler builds ``perm``."""
    perm = _check_permutation(perm, spec)
    t = spec.t
    x = initial_state(t)
    moves = []
    for i, v in enumerate(perm):
        off = v - (i + 1)
        if off == t:
            j = 0
        else:
            # a valid permutation always finds its offset in the window
            j = x.index(off) + 1
        moves.append(j)
        x = transition(x, j, spec.s)
    return moves


def encode_permutation(perm, spec: BandSpec) -> list[StateTuple]:
    """The state path ``x_0, ..., x_n`` visited while building ``perm``.

    ``x_i`` is the state seen when matching vertex ``i + 1``.
    """
    path = [initial_state(spec.t)]
    for j in permutation_moves(perm, spec):
        path.append(transition(path[-1], j, spec.s))
    return path


def decode_sequence(path, spec: BandSpec) -> tuple[int, ...]:
    """Inverse of :func:`encode_permutation`.

    Raises :class:`NotInImageError` if a step is not a legal ``T_j`` or if it
    would consume a right vertex beyond ``n``.
    """
    path = [tuple(x) for x in path]
    n, t, s = spec.n, spec.t, spec.s
    if len(path) != n + 1:
        raise NotInImageError(f"path has {len(path)} states, expected {n + 1}")
    if path[0] != initial_state(t):
        raise NotInImageError(f"path must start at {initial_state(t)}, got {path[0]}")
    perm = []
    for i in range(n):
        x, y = path[i], path[i + 1]
        for j in legal_moves(x, s):
            if transition(x, j) == y:
                break
        else:
            raise NotInImageError(f"step {i}: {y} is not reachable from {x}")
        label = i + 1 + move_offset(x, j)
        if not 1 <= label <= n:
            raise NotInImageError(f"step {i}: move T_{j} would match vertex {i + 1} to {label}'")
        perm.append(label)
    return tuple(perm)
