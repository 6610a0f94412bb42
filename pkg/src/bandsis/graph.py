"""Bipartite graphs, band graphs and exact matching oracles.

Left vertices are ``1..n`` and right vertices ``1'..n'`` at the public
surface (permutations are returned 1-based); adjacency rows are stored
0-based as integer bitmasks so that row intersections are word-parallel.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "BandSpec",
    "BipartiteGraph",
    "GraphFormatError",
    "SizeLimitError",
    "band_graph",
    "permanent_ryser",
    "enumerate_matchings",
    "has_perfect_matching",
    "maximum_matching_size",
    "read_graph",
    "parse_graph",
]

RYSER_MAX_N = 30
ENUMERATE_MAX_N = 10


class SizeLimitError(ValueError):
    """Raised when an exact oracle is asked for an instance that is too big."""


class GraphFormatError(ValueError):
    """Raised for malformed graph files; the message names line and column."""


@dataclass(frozen=True)
class BandSpec:
    """A type-(s, t) instance: edge (i, j') iff -s <= j - i <= t."""

    s: int
    t: int
    n: int

    def __post_init__(self):
        for name in ("s", "t", "n"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    def contains(self, i: int, j: int) -> bool:
        """Whether left vertex ``i`` and right vertex ``j`` (1-based) are adjacent."""
        return 1 <= i <= self.n and 1 <= j <= self.n and -self.s <= j - i <= self.t


class BipartiteGraph:
    """Balanced or unbalanced bipartite graph with bitset adjacency rows.

    ``rows[i]`` has bit ``j`` set iff left vertex ``i`` is adjacent to right
    vertex ``j`` (both 0-based).
    """

    __slots__ = ("n_left", "n_right", "rows")

    def __init__(self, n_left: int, n_right: int, rows: Sequence[int]):
        if n_left < 0 or n_right < 0:
            raise ValueError("vertex counts must be nonnegative")
        if len(rows) != n_left:
            raise ValueError(f"expected {n_left} adjacency rows, got {len(rows)}")
        full = (1 << n_right) - 1
        for i, row in enumerate(rows):
            if row < 0 or row & ~full:
                raise ValueError(f"row {i} references a right vertex out of range")
        self.n_left = n_left
        self.n_right = n_right
        self.rows = tuple(int(r) for r in rows)

    @classmethod
    def from_edges(cls, n_left: int, n_right: int, edges: Iterable[tuple[int, int]]):
        """Build from 1-based ``(i, j)`` pairs; duplicate edges are rejected."""
        rows = [0] * n_left
        for i, j in edges:
            if not (1 <= i <= n_left and 1 <= j <= n_right):
                raise ValueError(f"edge ({i}, {j}) out of range")
            bit = 1 << (j - 1)
            if rows[i - 1] & bit:
                raise ValueError(f"duplicate edge ({i}, {j})")
            rows[i - 1] |= bit
        return cls(n_left, n_right, rows)

    @classmethod
    def from_matrix(cls, matrix) -> "BipartiteGraph":
        """Build from a 0/1 matrix (nested sequences or an ndarray)."""
        rows = []
        n_right = None
        for r, line in enumerate(matrix):
            line = [int(v) for v in line]
            if n_right is None:
                n_right = len(line)
            elif len(line) != n_right:
                raise ValueError(f"row {r + 1} has length {len(line)}, expected {n_right}")
            mask = 0
            for c, v in enumerate(line):
                if v not in (0, 1):
                    raise ValueError(f"entry ({r + 1}, {c + 1}) is {v}, expected 0 or 1")
                if v:
                    mask |= 1 << c
            rows.append(mask)
        return cls(len(rows), n_right or 0, rows)

    @property
    def is_square(self) -> bool:
        return self.n_left == self.n_right

    @property
    def n_edges(self) -> int:
        return sum(bin(r).count("1") for r in self.rows)

    def has_edge(self, i: int, j: int) -> bool:
        """1-based edge query."""
        return bool(self.rows[i - 1] >> (j - 1) & 1)

    def neighbors(self, i: int) -> list[int]:
        """1-based right neighbours of left vertex ``i`` in increasing order."""
        row = self.rows[i - 1]
        return [j + 1 for j in range(self.n_right) if row >> j & 1]

    def to_matrix(self) -> list[list[int]]:
        return [[r >> j & 1 for j in range(self.n_right)] for r in self.rows]

    def _require_square(self):
        if not self.is_square:
            raise ValueError(
                f"perfect matchings need a balanced graph, got {self.n_left}x{self.n_right}"
            )

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.n_left, self.n_right, self.rows) == (other.n_left, other.n_right, other.rows)

    def __hash__(self):
        return hash((self.n_left, self.n_right, self.rows))

    def __repr__(self):
        return f"BipartiteGraph(n_left={self.n_left}, n_right={self.n_right}, edges={self.n_edges})"


def band_graph(spec: BandSpec) -> BipartiteGraph:
    """The type-(s, t) graph of side ``n``."""
    n = spec.n
    rows = []
    for i in range(1, n + 1):
        lo = max(1, i - spec.s)
        hi = min(n, i + spec.t)
        rows.append(((1 << (hi - lo + 1)) - 1) << (lo - 1))
    return BipartiteGraph(n, n, rows)


def permanent_ryser(g: BipartiteGraph) -> int:
    """Permanent of the 0/1 adjacency matrix, i.e. the number of perfect matchings.

    Ryser's inclusion-exclusion formula with Gray-code subset order: each
    step toggles one column, so the per-row counts are updated in O(n).
    """
    g._require_square()
    n = g.n_left
    if n > RYSER_MAX_N:
        raise SizeLimitError(f"Ryser oracle limited to n <= {RYSER_MAX_N}, got n = {n}")
    if n == 0:
        return 1
    rows = g.rows
    # column masks: which rows have a one in column j
    cols = [sum(1 << i for i in range(n) if rows[i] >> j & 1) for j in range(n)]
    row_sums = [0] * n
    total = 0
    prev_gray = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        changed = gray ^ prev_gray
        j = changed.bit_length() - 1
        delta = 1 if gray & changed else -1
        col = cols[j]
        while col:
            low = col & -col
            row_sums[low.bit_length() - 1] += delta
            col ^= low
        prev_gray = gray
        prod = 1
        for r in row_sums:
            if r == 0:
                prod = 0
                break
            prod *= r
        if prod:
            size = bin(gray).count("1")
            total += prod if (n - size) % 2 == 0 else -prod
    return total


def enumerate_matchings(g: BipartiteGraph) -> list[tuple[int, ...]]:
    """All perfect matchings as 1-based permutations, in lexicographic order."""
    g._require_square()
    n = g.n_left
    if n > ENUMERATE_MAX_N:
        raise SizeLimitError(f"enumeration limited to n <= {ENUMERATE_MAX_N}, got n = {n}")
    out: list[tuple[int, ...]] = []
    perm = [0] * n

    def rec(i: int, used: int):
        if i == n:
            out.append(tuple(perm))
            return
        free = g.rows[i] & ~used
        j = 0
        while free >> j:
            if free >> j & 1:
                perm[i] = j + 1
                rec(i + 1, used | (1 << j))
            j += 1

    rec(0, 0)
    return out


def maximum_matching_size(rows: Sequence[int], n_right: int) -> int:
    """Size of a maximum matching via repeated augmenting-path search (Kuhn)."""
    match_right = [-1] * n_right

    def augment(u: int, seen: list[bool]) -> bool:
        row = rows[u]
        while row:
            low = row & -row
            v = low.bit_length() - 1
            row ^= low
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] < 0 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in range(len(rows)):
        if augment(u, [False] * n_right):
            size += 1
    return size


def has_perfect_matching(g: BipartiteGraph) -> bool:
    """True iff ``g`` is balanced and a maximum matching saturates every vertex."""
    if not g.is_square:
        return False
    return maximum_matching_size(g.rows, g.n_right) == g.n_left


def parse_graph(text: str, source: str = "<string>") -> BipartiteGraph:
    """Parse the text graph format: a header ``n n`` then ``n`` rows of 0/1 chars."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise GraphFormatError(f"{source}: line 1, column 1: empty file")
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise GraphFormatError(f"{source}: line 1, column 1: expected header 'n n'")
    n, m = int(header[0]), int(header[1])
    if n != m:
        col = lines[0].index(header[1]) + 1
        raise GraphFormatError(f"{source}: line 1, column {col}: graph must be square, got {n} x {m}")
    if len(lines) - 1 != n:
        raise GraphFormatError(
            f"{source}: line {len(lines) + 1 if len(lines) - 1 < n else n + 2}, column 1: "
            f"expected {n} matrix rows, found {len(lines) - 1}"
        )
    rows = []
    for r, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r\n").rstrip()
        if len(line) != n:
            col = min(len(line), n) + 1
            raise GraphFormatError(f"{source}: line {r}, column {col}: expected {n} characters, found {len(line)}")
        mask = 0
        for c, ch in enumerate(line):
            if ch == "1":
                mask |= 1 << c
            elif ch != "0":
                raise GraphFormatError(f"{source}: line {r}, column {c + 1}: expected '0' or '1', found {ch!r}")
        rows.append(mask)
    return BipartiteGraph(n, n, rows)


def read_graph(path: str | os.PathLike) -> BipartiteGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read(), source=str(path))
