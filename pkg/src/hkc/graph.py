"""Social network representation, edge-list ingestion, and standard generators.

Graphs are undirected, simple, connected, with dense vertex ids 0..n-1.
Instances are immutable after construction and shareable across workers.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

_ER_MAX_ATTEMPTS = 10**4


class GraphParseError(ValueError):
    """Malformed edge-list input."""


class GraphValidationError(ValueError):
    """Structurally invalid graph (disconnected, bad ids, ...)."""


@dataclass(frozen=True, eq=False)
class SocialGraph:
    vertex_count: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.vertex_count
        if n < 1:
            raise GraphValidationError("graph needs at least one vertex")
        if len(self.adjacency) != n:
            raise GraphValidationError("adjacency length does not match vertex count")
        for x, nbrs in enumerate(self.adjacency):
            if len(set(nbrs)) != len(nbrs) or tuple(sorted(nbrs)) != nbrs:
                raise GraphValidationError(f"adjacency of {x} must be sorted and duplicate-free")
            for y in nbrs:
                if not 0 <= y < n:
                    raise GraphValidationError(f"neighbor {y} of {x} out of range")
                if y == x:
                    raise GraphValidationError(f"self-loop at vertex {x}")
                if x not in self.adjacency[y]:
                    raise GraphValidationError(f"edge ({x}, {y}) is not symmetric")
        if not _is_connected(n, self.adjacency):
            raise GraphValidationError("graph is not connected")

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]]) -> "SocialGraph":
        nbrs: list[set[int]] = [set() for _ in range(vertex_count)]
        for u, v in edges:
            if u == v:
                raise GraphValidationError(f"self-loop ({u}, {v})")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise GraphValidationError(f"edge ({u}, {v}) out of range for {vertex_count} vertices")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(vertex_count, tuple(tuple(sorted(s)) for s in nbrs))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SocialGraph)
            and self.vertex_count == other.vertex_count
            and self.adjacency == other.adjacency
        )

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as (u, v) with u < v, in ascending order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if v > u:
                    yield (u, v)

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def degree(self, x: int) -> int:
        return len(self.adjacency[x])


def _is_connected(n: int, adjacency) -> bool:
    seen = bytearray(n)
    seen[0] = 1
    queue = deque([0])
    count = 1
    while queue:
        x = queue.popleft()
        for y in adjacency[x]:
            if not seen[y]:
                seen[y] = 1
                count += 1
                queue.append(y)
    return count == n


def parse_edge_list(text: str) -> SocialGraph:
    """Parse "u v" edge lines into a graph.

    Blank lines and lines starting with '#' are ignored; duplicate edges are
    deduplicated; vertex ids must densely cover 0..max (a gap leaves an
    isolated vertex, which fails the connectivity check).
    """
    edges: set[tuple[int, int]] = set()
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphParseError(f"line {lineno}: expected two vertex ids, got {line!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: non-integer token in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphParseError(f"line {lineno}: vertex ids must be nonnegative, got {line!r}")
        if u == v:
            raise GraphParseError(f"line {lineno}: self-loop on vertex {u}")
        edges.add((min(u, v), max(u, v)))
        max_id = max(max_id, u, v)
    if max_id < 0:
        raise GraphParseError("edge list contains no edges")
    return SocialGraph.from_edges(max_id + 1, edges)


def to_edge_list_text(g: SocialGraph) -> str:
    """Canonical edge-list text: one "u v" line per edge, u < v, ascending."""
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def path(n: int) -> SocialGraph:
    if n < 1:
        raise GraphValidationError("path needs n >= 1")
    return SocialGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> SocialGraph:
    if n < 3:
        raise GraphValidationError("cycle needs n >= 3")
    return SocialGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> SocialGraph:
    if n < 1:
        raise GraphValidationError("complete graph needs n >= 1")
    return SocialGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def grid(w: int, h: int) -> SocialGraph:
    if w < 1 or h < 1:
        raise GraphValidationError("grid needs w >= 1 and h >= 1")
    edges = []
    for r in range(h):
        for c in range(w):
            v = r * w + c
            if c + 1 < w:
                edges.append((v, v + 1))
            if r + 1 < h:
                edges.append((v, v + w))
    return SocialGraph.from_edges(w * h, edges)


def erdos_renyi(n: int, p: float, rng: random.Random) -> SocialGraph:
    """G(n, p) conditioned on connectivity, by resampling (capped attempts)."""
    if n < 1:
        raise GraphValidationError("erdos_renyi needs n >= 1")
    if not 0 < p <= 1:
        raise GraphValidationError(f"erdos_renyi needs 0 < p <= 1, got {p}")
    for _ in range(_ER_MAX_ATTEMPTS):
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        if _is_connected(n, adjacency):
            return SocialGraph(n, adjacency)
    raise GraphValidationError(
        f"no connected sample in {_ER_MAX_ATTEMPTS} attempts; increase p (n={n}, p={p})"
    )


def generate(kind: str, rng: random.Random | None = None, **params) -> SocialGraph:
    """Dispatch on kind: path(n), cycle(n), complete(n), grid(w, h), erdos_renyi(n, p)."""
    if kind == "path":
        return path(params["n"])
    if kind == "cycle":
        return cycle(params["n"])
    if kind == "complete":
        return complete(params["n"])
    if kind == "grid":
        return grid(params["w"], params["h"])
    if kind == "erdos_renyi":
        if rng is None:
            raise ValueError("erdos_renyi needs a random stream")
        return erdos_renyi(params["n"], params["p"], rng)
    raise ValueError(f"unknown graph kind {kind!r}")


def graph_distance(g: SocialGraph, x: int, y: int) -> int:
    """Shortest-path length between two vertices (breadth-first search)."""
    n = g.vertex_count
    if not (0 <= x < n and 0 <= y < n):
        raise ValueError(f"vertex ids must be in 0..{n - 1}, got {x}, {y}")
    if x == y:
        return 0
    dist = [-1] * n
    dist[x] = 0
    queue = deque([x])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                if v == y:
                    return dist[v]
                queue.append(v)
    raise GraphValidationError("vertices are not connected")  # unreachable on a valid graph
