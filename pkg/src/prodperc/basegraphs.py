"""Small explicit graphs used as product factors.

Factors of a high-dimensional product are tiny (a handful to a few
thousand vertices), so they are stored as plain adjacency lists and
all their statistics are computed exactly.  The edge-expansion constant
is found by exhaustive subset scan, which is why the vertex count for
that operation is capped at 24.

Indexing conventions that the rest of the package relies on:

* ``star(s)``: vertex 0 is the centre, vertices 1..s are the leaves.
* ``star_clique(r, s)``: clique vertices are 0..r-1, the j-th leaf of
  clique vertex i is ``r + i*s + j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SizeLimitError

ISO_SCAN_MAX_VERTICES = 24


@dataclass(frozen=True)
class BaseGraph:
    """Immutable undirected graph: ``adj[v]`` is the sorted neighbor tuple."""

    n: int
    adj: tuple[tuple[int, ...], ...]
    label: str = ""

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) pairs with u < v, lexicographically sorted."""
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def is_trivial(self) -> bool:
        return self.n == 1


@dataclass(frozen=True)
class GraphStats:
    min_degree: int
    max_degree: int
    avg_degree: Fraction
    is_regular: bool
    is_connected: bool


def complete(r: int) -> BaseGraph:
    """Complete graph K_r (K_1 is the trivial one-vertex graph)."""
    if r < 1:
        raise ValueError(f"complete graph needs r >= 1, got {r}")
    adj = tuple(tuple(w for w in range(r) if w != v) for v in range(r))
    return BaseGraph(r, adj, f"K{r}")


def star(s: int) -> BaseGraph:
    """Star with s leaves; the centre is vertex 0 (layer machinery depends
    on this index)."""
    if s < 1:
        raise ValueError(f"star needs s >= 1 leaves, got {s}")
    adj = (tuple(range(1, s + 1)),) + ((0,),) * s
    return BaseGraph(s + 1, adj, f"star({s})")


def star_clique(r: int, s: int) -> BaseGraph:
    """K_r with s pendant leaves attached to each clique vertex."""
    if r < 1:
        raise ValueError(f"star_clique needs r >= 1, got {r}")
    if s < 0:
        raise ValueError(f"star_clique needs s >= 0, got {s}")
    n = r * (s + 1)
    adj = []
    for v in range(r):
        adj.append(tuple(w for w in range(r) if w != v)
                   + tuple(r + v * s + j for j in range(s)))
    for v in range(r):
        for _ in range(s):
            adj.append((v,))
    return BaseGraph(n, tuple(adj), f"S({r},{s})")


def from_edge_list(n: int, edges) -> BaseGraph:
    """Graph from an edge list; symmetric closure, duplicates removed."""
    if n < 1:
        raise ValueError(f"need n >= 1 vertices, got {n}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u},{v}) out of range for n={n}")
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    return BaseGraph(n, tuple(tuple(sorted(a)) for a in nbrs), f"G({n})")


def _connected(g: BaseGraph) -> bool:
    seen = bytearray(g.n)
    seen[0] = 1
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for w in g.adj[u]:
            if not seen[w]:
                seen[w] = 1
                count += 1
                stack.append(w)
    return count == g.n


def stats(g: BaseGraph) -> GraphStats:
    """Exact degree statistics and connectivity of a base graph."""
    degs = [len(a) for a in g.adj]
    avg = Fraction(sum(degs), g.n)
    return GraphStats(
        min_degree=min(degs),
        max_degree=max(degs),
        avg_degree=avg,
        is_regular=min(degs) == max(degs),
        is_connected=_connected(g),
    )


def distance_table(g: BaseGraph) -> list[list[int]]:
    """All-pairs distances by BFS from every vertex; -1 for unreachable."""
    out = []
    for src in range(g.n):
        dist = [-1] * g.n
        dist[src] = 0
        queue = [src]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for w in g.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        out.append(dist)
    return out


def _popcount32(x: np.ndarray) -> np.ndarray:
    # SWAR popcount on uint32 chunks of subset masks
    x = x - ((x >> 1) & 0x55555555)
    x = (x & 0x33333333) + ((x >> 2) & 0x33333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F
    return (x * 0x01010101) >> 24


def brute_force_isoperimetric(g: BaseGraph, chunk: int = 1 << 22) -> Fraction:
    """Exact edge-expansion constant min e(S, S^c)/|S| over nonempty S with
    |S| <= n/2, scanning all 2^n subsets.

    Cut sizes are built by the highest-vertex recursion
    cut(S + {h}) = cut(S) + deg(h) - 2 e(h, S), one vectorized block per
    vertex, so the scan costs O(2^n) popcounts rather than O(2^n |E|).
    Returned as an exact rational so downstream sandwich checks never hit
    floating-point ties.  Capped at n = 24 (16.7M subsets).
    """
    n = g.n
    if n < 2:
        raise ValueError("isoperimetric constant needs at least 2 vertices")
    if n > ISO_SCAN_MAX_VERTICES:
        raise SizeLimitError(
            f"subset scan capped at n = {ISO_SCAN_MAX_VERTICES}, got {n}")
    if g.edge_count() == 0:
        return Fraction(0, 1)

    size = 1 << n
    cut = np.zeros(size, dtype=np.int32)
    pop = np.zeros(size, dtype=np.int8)
    adj_mask = [sum(1 << w for w in a) for a in g.adj]
    for h in range(n):
        block = 1 << h
        rest = np.arange(block, dtype=np.uint32)
        cross = _popcount32(rest & np.uint32(adj_mask[h])).astype(np.int32)
        cut[block:2 * block] = cut[:block] + np.int32(g.degree(h)) - 2 * cross
        pop[block:2 * block] = pop[:block] + np.int8(1)

    half = n // 2
    # exact fraction comparison via a common multiple of all subset sizes
    lcm = math.lcm(*range(1, half + 1))
    lcm_over = np.zeros(half + 1, dtype=np.int64)
    for s in range(1, half + 1):
        lcm_over[s] = lcm // s

    best_scaled = None
    best = (0, 1)
    for lo in range(1, size, chunk):
        hi = min(lo + chunk, size)
        p_c = pop[lo:hi].astype(np.int64)
        c_c = cut[lo:hi].astype(np.int64)
        ok = (p_c >= 1) & (p_c <= half)
        if not ok.any():
            continue
        scaled = np.where(ok, c_c * lcm_over[np.where(ok, p_c, 1)],
                          np.iinfo(np.int64).max)
        i = int(np.argmin(scaled))
        if best_scaled is None or scaled[i] < best_scaled:
            best_scaled = int(scaled[i])
            best = (int(c_c[i]), int(p_c[i]))
    return Fraction(best[0], best[1])


def read_edge_list_text(text: str) -> BaseGraph:
    """Parse the interchange format: first line ``n m``, then m lines ``u v``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty graph text")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"expected header 'n m', got {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(lines) - 1 != m:
        raise ValueError(f"header promises {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return from_edge_list(n, edges)


def write_edge_list_text(g: BaseGraph) -> str:
    """Emit the interchange format with edges sorted lexicographically."""
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"]
    lines.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(lines) + "\n"


def load_graph(path) -> BaseGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return read_edge_list_text(fh.read())


def save_graph(g: BaseGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_edge_list_text(g))
