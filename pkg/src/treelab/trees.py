"""Finite trees: construction, validation, rooting, path queries, and file I/O.

A tree is stored with dense vertex ids 0..N-1. Every edge has a canonical
orientation (min id, max id); the canonical edge list is sorted
lexicographically and indexed, and every sign convention downstream refers
to that orientation. Trees and rooted trees are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

import heapq
import re
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "Tree",
    "RootedTree",
    "TreeFormatError",
    "parse_tree",
    "serialize_tree",
    "root_at",
    "tree_from_spec",
    "is_tree_spec",
    "make_path",
    "make_star",
    "make_regular",
    "make_random",
]


class TreeFormatError(ValueError):
    """Raised for malformed tree files or structurally invalid edge lists.

    Carries the 1-based line number when the error is tied to a file line.
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Tree:
    """A finite unrooted tree on vertices 0..n-1.

    Attributes:
        n: number of vertices.
        adjacency: per-vertex sorted tuple of neighbour ids.
        edges: canonical edge list, each (u, v) with u < v, sorted
            lexicographically; the position of an edge in this list is its
            canonical edge id.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise TreeFormatError(f"vertex count must be >= 1, got {n}")
        canonical = []
        seen = set()
        parent = list(range(n))  # union-find for cycle detection

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise TreeFormatError(f"vertex id out of range in edge ({u}, {v})")
            if u == v:
                raise TreeFormatError(f"self-loop at vertex {u}")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise TreeFormatError(f"duplicate edge {e}")
            ru, rv = find(u), find(v)
            if ru == rv:
                raise TreeFormatError(f"cycle detected at edge {e}")
            parent[ru] = rv
            seen.add(e)
            canonical.append(e)
        if len(canonical) != n - 1:
            # More than n-1 acyclic edges is impossible, so a count mismatch
            # here always means too few edges, i.e. a disconnected graph.
            raise TreeFormatError(
                f"disconnected graph: {n} vertices need {n - 1} edges, "
                f"got {len(canonical)}"
            )

        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in canonical:
            adj[u].append(v)
            adj[v].append(u)
        self.n: int = n
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(a)) for a in adj
        )
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(canonical))

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        """Canonical edge (u, v) with u < v -> canonical edge id."""
        return {e: i for i, e in enumerate(self.edges)}

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, x: int, y: int) -> bool:
        return (min(x, y), max(x, y)) in self.edge_index

    def degree(self, x: int) -> int:
        self.check_vertex(x)
        return len(self.adjacency[x])

    def q(self, x: int) -> int:
        """Degree minus one (the branching number; -1 for an isolated vertex)."""
        return self.degree(x) - 1

    def check_vertex(self, x: int) -> None:
        if not (0 <= x < self.n):
            raise ValueError(f"vertex id {x} out of range 0..{self.n - 1}")

    def path(self, x: int, y: int) -> list[int]:
        """The unique vertex sequence from x to y, consecutive entries adjacent."""
        self.check_vertex(x)
        self.check_vertex(y)
        if x == y:
            return [x]
        prev = {x: x}
        frontier = [x]
        while frontier and y not in prev:
            nxt = []
            for v in frontier:
                for w in self.adjacency[v]:
                    if w not in prev:
                        prev[w] = v
                        nxt.append(w)
            frontier = nxt
        walk = [y]
        while walk[-1] != x:
            walk.append(prev[walk[-1]])
        walk.reverse()
        return walk

    def distance(self, x: int, y: int) -> int:
        return len(self.path(x, y)) - 1

    def distance_matrix(self) -> np.ndarray:
        """All-pairs edge distances, computed by one BFS per vertex."""
        d = np.full((self.n, self.n), -1, dtype=np.int64)
        for s in range(self.n):
            d[s, s] = 0
            frontier = [s]
            while frontier:
                nxt = []
                for v in frontier:
                    for w in self.adjacency[v]:
                        if d[s, w] < 0:
                            d[s, w] = d[s, v] + 1
                            nxt.append(w)
                frontier = nxt
        return d

    def __repr__(self) -> str:
        return f"Tree(n={self.n}, edges={len(self.edges)})"


class RootedTree:
    """A tree with a chosen origin, plus parent-toward-origin and depth maps.

    parent[origin] is None; for any other vertex it is the unique neighbour
    one step closer to the origin.
    """

    def __init__(self, tree: Tree, origin: int):
        tree.check_vertex(origin)
        n = tree.n
        parent: list[Optional[int]] = [None] * n
        depth = [0] * n
        seen = [False] * n
        seen[origin] = True
        order = [origin]
        for v in order:
            for w in tree.adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    depth[w] = depth[v] + 1
                    order.append(w)
        self.tree = tree
        self.origin = origin
        self.parent: tuple[Optional[int], ...] = tuple(parent)
        self.depth: tuple[int, ...] = tuple(depth)
        self.max_depth: int = max(depth)

    @property
    def n(self) -> int:
        return self.tree.n

    def path_to_origin(self, x: int) -> list[int]:
        """Vertices from x up to the origin, inclusive."""
        self.tree.check_vertex(x)
        walk = [x]
        while walk[-1] != self.origin:
            walk.append(self.parent[walk[-1]])
        return walk

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, origin={self.origin})"


def root_at(tree: Tree, origin: int) -> RootedTree:
    return RootedTree(tree, origin)


# ----------------------------------------------------------------------
# Tree file format:
#   first non-comment line: "tree v=N"
#   then exactly N-1 lines "u v"; '#' starts a comment; whitespace-separated.
# ----------------------------------------------------------------------

_HEADER_RE = re.compile(r"^tree\s+v=(\d+)$")


def parse_tree(text: str) -> Tree:
    """Parse the tree file format, reporting errors with 1-based line numbers."""
    n: Optional[int] = None
    n_line = 0
    entries: list[tuple[int, int, int]] = []  # (u, v, line)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise TreeFormatError(
                    f"expected header 'tree v=N', got {line!r}", lineno
                )
            n = int(m.group(1))
            n_line = lineno
            if n < 1:
                raise TreeFormatError("vertex count must be >= 1", lineno)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TreeFormatError(f"expected edge 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise TreeFormatError(f"non-integer vertex id in {line!r}", lineno)
        entries.append((u, v, lineno))
    if n is None:
        raise TreeFormatError("missing header 'tree v=N'")

    # Validate incrementally so errors carry the offending line number.
    canonical: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, lineno in entries:
        if not (0 <= u < n and 0 <= v < n):
            raise TreeFormatError(f"vertex id out of range in edge ({u}, {v})", lineno)
        if u == v:
            raise TreeFormatError(f"self-loop at vertex {u}", lineno)
        e = (min(u, v), max(u, v))
        if e in seen:
            raise TreeFormatError(f"duplicate edge {e}", lineno)
        if find(u) == find(v):
            raise TreeFormatError("cycle detected", lineno)
        parent[find(u)] = find(v)
        seen.add(e)
        canonical.append(e)
    if len(canonical) != n - 1:
        raise TreeFormatError(
            f"disconnected graph: {n} vertices need {n - 1} edges, "
            f"got {len(canonical)}",
            n_line,
        )
    return Tree(n, canonical)


def serialize_tree(tree: Tree) -> str:
    lines = [f"tree v={tree.n}"]
    lines.extend(f"{u} {v}" for u, v in tree.edges)
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Built-in generator families, addressable by spec string.
# ----------------------------------------------------------------------


def make_path(n: int) -> Tree:
    """Path on n vertices: 0 - 1 - ... - (n-1)."""
    return Tree(n, [(i, i + 1) for i in range(n - 1)])


def make_star(n: int) -> Tree:
    """Star on n vertices: center 0, leaves 1..n-1."""
    return Tree(n, [(0, i) for i in range(1, n)])


def make_regular(q: int, r: int) -> Tree:
    """Truncated (q+1)-regular tree of radius r, centered at vertex 0.

    Every vertex within distance r-1 of the center has degree q+1; the
    vertices at distance r are leaves. Vertex ids follow breadth-first
    order from the center.
    """
    if q < 1:
        raise ValueError(f"branching number must be >= 1, got {q}")
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    edges = []
    next_id = 1
    frontier = [0]
    for level in range(r):
        grown = []
        for v in frontier:
            children = q + 1 if level == 0 else q
            for _ in range(children):
                edges.append((v, next_id))
                grown.append(next_id)
                next_id += 1
        frontier = grown
    return Tree(next_id, edges)


def make_random(n: int, seed: int) -> Tree:
    """Uniformly random labelled tree on n vertices from a seeded generator.

    Decodes a uniform sequence of n-2 vertex ids, so all n^(n-2) labelled
    trees are equally likely.
    """
    if n < 1:
        raise ValueError(f"vertex count must be >= 1, got {n}")
    if n == 1:
        return Tree(1, [])
    if n == 2:
        return Tree(2, [(0, 1)])
    rng = np.random.default_rng(seed)
    code = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for x in code:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in code:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, int(x))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return Tree(n, edges)


_SPEC_RE = re.compile(r"^(path|star|regular|random):([0-9,]+)$")


def is_tree_spec(text: str) -> bool:
    """Whether the string uses the generator grammar (vs a file path)."""
    return bool(_SPEC_RE.match(text.strip()))


def tree_from_spec(spec: str) -> Tree:
    """Build a tree from a generator string.

    Accepted forms: ``path:N``, ``star:N``, ``regular:q,r``, ``random:N,seed``.
    """
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise ValueError(
            f"unrecognized tree spec {spec!r}; expected "
            "path:N, star:N, regular:q,r, or random:N,seed"
        )
    family, args_text = m.groups()
    args = [int(a) for a in args_text.split(",") if a != ""]
    if family == "path":
        if len(args) != 1:
            raise ValueError("path takes one parameter: path:N")
        return make_path(args[0])
    if family == "star":
        if len(args) != 1:
            raise ValueError("star takes one parameter: star:N")
        return make_star(args[0])
    if family == "regular":
        if len(args) != 2:
            raise ValueError("regular takes two parameters: regular:q,r")
        return make_regular(args[0], args[1])
    if len(args) != 2:
        raise ValueError("random takes two parameters: random:N,seed")
    return make_random(args[0], args[1])
