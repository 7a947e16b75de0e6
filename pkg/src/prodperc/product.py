"""Implicit Cartesian products of small base graphs.

A product of t factors is never materialized: a vertex is a mixed-radix
integer code (factor 0 is the least significant digit), and adjacency is
generated on the fly by moving one coordinate along one factor edge.
This keeps a 2^27-vertex product in a few hundred bytes plus the factor
adjacency lists, and integer codes make visited bitmaps and hashing cheap
during cluster exploration.

Neighbor iteration order is fixed (factor-major, then the factor's sorted
adjacency), so breadth-first explorations and their truncation points are
reproducible from a seed alone.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from . import basegraphs
from .basegraphs import BaseGraph
from .errors import SizeLimitError, UnsupportedOperationError

VERTEX_BUDGET = 1 << 27
_DIST_TABLE_MAX = 2048

# vertices are plain mixed-radix integer codes
VertexId = int


class ProductGraph:
    """Cartesian product of ``factors``, addressed by mixed-radix codes."""

    def __init__(self, factors: Sequence[BaseGraph]):
        if not factors:
            raise ValueError("need at least one factor")
        self.factors = tuple(factors)
        self.radices = tuple(f.n for f in self.factors)
        strides = [1]
        for r in self.radices:
            strides.append(strides[-1] * r)
            if strides[-1] > VERTEX_BUDGET:
                raise SizeLimitError(
                    f"product exceeds vertex budget 2^27 "
                    f"({strides[-1]} vertices so far)")
        self.strides = tuple(strides[:-1])
        self.vertex_count = strides[-1]
        self.dimension = sum(1 for f in self.factors if f.n >= 2)
        self._factor_stats = tuple(basegraphs.stats(f) for f in self.factors)
        self._dist_tables: list[Optional[list[list[int]]]] = [
            basegraphs.distance_table(f) if f.n <= _DIST_TABLE_MAX else None
            for f in self.factors
        ]
        self._factor_edge_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def factor_edge_arrays(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Factor i's edges as (a, b) int64 arrays with a < b, cached.

        Built with one fromiter pass over the adjacency instead of per-edge
        tuples; a dense factor can carry millions of edges.
        """
        if i not in self._factor_edge_cache:
            import itertools
            f = self.factors[i]
            degs = np.array([len(a) for a in f.adj], dtype=np.int64)
            flat = np.fromiter(itertools.chain.from_iterable(f.adj),
                               dtype=np.int64, count=int(degs.sum()))
            rows = np.repeat(np.arange(f.n, dtype=np.int64), degs)
            keep = flat > rows
            self._factor_edge_cache[i] = (rows[keep], flat[keep])
        return self._factor_edge_cache[i]

    # -- codec ---------------------------------------------------------------

    def encode(self, coords: Sequence[int]) -> int:
        if len(coords) != len(self.factors):
            raise ValueError(
                f"expected {len(self.factors)} coordinates, got {len(coords)}")
        code = 0
        for c, r, s in zip(coords, self.radices, self.strides):
            if not 0 <= c < r:
                raise ValueError(f"coordinate {c} out of range [0,{r})")
            code += c * s
        return code

    def decode(self, v: int) -> tuple[int, ...]:
        if not 0 <= v < self.vertex_count:
            raise ValueError(f"vertex code {v} out of range")
        coords = []
        for r in self.radices:
            v, c = divmod(v, r)
            coords.append(c)
        return tuple(coords)

    def coordinate(self, v: int, i: int) -> int:
        return (v // self.strides[i]) % self.radices[i]

    # -- adjacency -----------------------------------------------------------

    def neighbors(self, v: int) -> Iterator[int]:
        """Yield each neighbor exactly once, factor-major then base order."""
        if not 0 <= v < self.vertex_count:
            raise ValueError(f"vertex code {v} out of range")
        for f, r, s in zip(self.factors, self.radices, self.strides):
            c = (v // s) % r
            base = v - c * s
            for w in f.adj[c]:
                yield base + w * s

    def degree(self, v: int) -> int:
        d = 0
        for f, r, s in zip(self.factors, self.radices, self.strides):
            d += len(f.adj[(v // s) % r])
        return d

    def average_degree(self) -> Fraction:
        return sum((st.avg_degree for st in self._factor_stats), Fraction(0))

    def max_degree_bound(self) -> int:
        """Max over factors of the factor's maximum degree (the constant that
        bounds how fast vertex degrees can vary along an edge)."""
        return max(st.max_degree for st in self._factor_stats)

    def neighbors_bulk(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized adjacency: all (source, neighbor) pairs for ``codes``.

        Sources are repeated once per incident edge; order matches the scalar
        iterator (factor-major within each factor block).
        """
        codes = np.asarray(codes, dtype=np.int64)
        src_parts = []
        dst_parts = []
        for i, (f, r) in enumerate(zip(self.factors, self.radices)):
            s = self.strides[i]
            vals = (codes // s) % r
            degs = np.array([len(a) for a in f.adj], dtype=np.int64)
            flat = np.array([w for a in f.adj for w in a], dtype=np.int64)
            offs = np.concatenate(([0], np.cumsum(degs)))[:-1]
            d = degs[vals]
            total = int(d.sum())
            if total == 0:
                continue
            rep_src = np.repeat(codes, d)
            starts = np.repeat(offs[vals], d)
            within = np.arange(total) - np.repeat(np.cumsum(d) - d, d)
            nv = flat[starts + within]
            rep_vals = np.repeat(vals, d)
            src_parts.append(rep_src)
            dst_parts.append(rep_src + (nv - rep_vals) * s)
        if not src_parts:
            e = np.zeros(0, dtype=np.int64)
            return e, e
        return np.concatenate(src_parts), np.concatenate(dst_parts)

    # -- metric --------------------------------------------------------------

    def distance(self, u: int, v: int) -> int:
        """Sum over factors of the coordinate distances."""
        if not all(st.is_connected for st in self._factor_stats):
            raise UnsupportedOperationError(
                "distance needs every factor connected")
        total = 0
        for i, (r, s) in enumerate(zip(self.radices, self.strides)):
            cu = (u // s) % r
            cv = (v // s) % r
            if cu == cv:
                continue
            table = self._dist_tables[i]
            if table is not None:
                total += table[cu][cv]
            else:
                total += self._factor_distance(i, cu, cv)
        return total

    def _factor_distance(self, i: int, cu: int, cv: int) -> int:
        # large factor: single-source BFS per query instead of a full table
        f = self.factors[i]
        dist = {cu: 0}
        queue = [cu]
        head = 0
        while head < len(queue):
            x = queue[head]
            head += 1
            if x == cv:
                return dist[x]
            for w in f.adj[x]:
                if w not in dist:
                    dist[w] = dist[x] + 1
                    queue.append(w)
        return dist[cv]

    # -- projections ---------------------------------------------------------

    def projection_contains(self, proj: "Projection", v: int) -> bool:
        for i, fx in enumerate(proj.fixed):
            if fx is not None and self.coordinate(v, i) != fx:
                return False
        return True

    def projection_dimension(self, proj: "Projection") -> int:
        return sum(1 for i, fx in enumerate(proj.fixed)
                   if fx is None and self.radices[i] >= 2)

    def restrict_neighbors(self, proj: "Projection", v: int) -> Iterator[int]:
        """Neighbors of v inside the projection subgraph (edges that move a
        non-fixed coordinate only)."""
        if not self.projection_contains(proj, v):
            raise ValueError("vertex lies outside the projection")
        for i, (f, r, s) in enumerate(
                zip(self.factors, self.radices, self.strides)):
            if proj.fixed[i] is not None:
                continue
            c = (v // s) % r
            base = v - c * s
            for w in f.adj[c]:
                yield base + w * s


@dataclass(frozen=True)
class Projection:
    """Per-factor mask: ``fixed[i] is None`` keeps factor i full, otherwise
    the i-th coordinate is pinned to that value."""

    fixed: tuple[Optional[int], ...]

    def conflicts_with(self, other: "Projection") -> bool:
        """True when the two projections are provably vertex-disjoint: some
        coordinate is fixed to different values in both."""
        return any(a is not None and b is not None and a != b
                   for a, b in zip(self.fixed, other.fixed))


def build(factors: Sequence[BaseGraph]) -> ProductGraph:
    return ProductGraph(factors)


def projection_cover(g: ProductGraph, vertices: Sequence[int]
                     ) -> list[tuple[Projection, int]]:
    """Cover m distinct vertices by m pairwise-disjoint projections, one
    vertex per projection, each of dimension >= dimension - m + 1.

    Recursive splitting: find the lowest-index free coordinate on which the
    group disagrees, pin it to each observed value, and recurse on the
    sub-groups.  Every split pins one coordinate and breaks the group into
    at least two parts, so a group of size m pins at most m - 1 coordinates
    on the path to any of its vertices.
    """
    vs = list(vertices)
    m = len(vs)
    if m == 0:
        return []
    if len(set(vs)) != m:
        raise ValueError("cover vertices must be distinct")
    if m > g.dimension:
        raise ValueError(
            f"cannot cover {m} vertices in a dimension-{g.dimension} product")

    t = len(g.factors)
    out: list[tuple[Projection, int]] = []

    def rec(group: list[int], fixed: dict[int, int]) -> None:
        if len(group) == 1:
            spec = tuple(fixed.get(i) for i in range(t))
            out.append((Projection(spec), group[0]))
            return
        split_at = -1
        for i in range(t):
            if i in fixed:
                continue
            c0 = g.coordinate(group[0], i)
            if any(g.coordinate(v, i) != c0 for v in group[1:]):
                split_at = i
                break
        # distinct vertices agreeing on every free coordinate would be equal
        assert split_at >= 0
        parts: dict[int, list[int]] = {}
        for v in group:
            parts.setdefault(g.coordinate(v, split_at), []).append(v)
        for val in sorted(parts):
            rec(parts[val], {**fixed, split_at: val})

    rec(vs, {})
    return out


_ATOM_RE = re.compile(
    r"^(?:K(?P<k>\d+)|star\((?P<s>\d+)\)|S\((?P<sr>\d+),(?P<ss>\d+)\)"
    r"|file:(?P<path>[^^]+))(?:\^(?P<pow>\d+))?$")


def _split_atoms(text: str) -> list[str]:
    # commas inside parentheses belong to the atom, e.g. S(1200,10)
    atoms, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            atoms.append(text[start:i])
            start = i + 1
    atoms.append(text[start:])
    return atoms


def parse_product_spec(text: str) -> list[BaseGraph]:
    """Expand a product specification string into its factor list.

    Atoms: ``K<r>``, ``star(<s>)``, ``S(<r>,<s>)``, ``file:<path>``; an
    optional ``^<power>`` repeats the atom.  Atoms are comma-separated and
    powers expand left to right, e.g. ``"K2^3,star(2)"``.
    """
    factors: list[BaseGraph] = []
    for raw in _split_atoms(text):
        atom = raw.strip()
        if not atom:
            raise ValueError(f"empty atom in product spec {text!r}")
        m = _ATOM_RE.match(atom)
        if not m:
            raise ValueError(f"cannot parse product atom {atom!r}")
        if m.group("k") is not None:
            base = basegraphs.complete(int(m.group("k")))
        elif m.group("s") is not None:
            base = basegraphs.star(int(m.group("s")))
        elif m.group("sr") is not None:
            base = basegraphs.star_clique(int(m.group("sr")),
                                          int(m.group("ss")))
        else:
            base = basegraphs.load_graph(m.group("path").strip())
        power = int(m.group("pow")) if m.group("pow") else 1
        if power < 1:
            raise ValueError(f"power must be >= 1 in atom {atom!r}")
        factors.extend([base] * power)
    return factors
