"""Reproducible bond percolation on implicit product graphs.

Whether an edge is retained is never stored: it is recomputed on demand as
a pure function of (seed, round tag, canonical edge key), so a percolated
graph costs O(1) memory, both endpoints of an edge always agree, and runs
are bit-reproducible.  The decision itself is a threshold test

    uniform64(seed, tag, key) < floor(p * 2^64)

which also gives a monotone coupling across retention probabilities for
free: raising p can only open more edges under the same seed.

The mixing function is fixed and must never change, because seeds and
recorded results depend on it.  It maps the 128-bit canonical key (the two
64-bit endpoint codes, smaller first) to 64 bits through a chain of
SplitMix64-style finalization rounds, all arithmetic mod 2^64:

    mix(x):  x ^= x >> 30;  x *= 0xBF58476D1CE4E5B9
             x ^= x >> 27;  x *= 0x94D049BB133111EB
             x ^= x >> 31

    u64(seed, tag, kmin, kmax) =
        mix(mix(mix(mix(seed + G) ^ kmin) ^ kmax) + tag * G)

with G = 0x9E3779B97F4A7C15.  Frozen test vectors live in
``data/prf_test_vectors.txt``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UnsupportedOperationError
from .product import ProductGraph

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB

_CHUNK = 1 << 22


def mix64(x: int) -> int:
    """One SplitMix64 finalization round (64-bit bijection)."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _MULT1) & MASK64
    x ^= x >> 27
    x = (x * _MULT2) & MASK64
    return x ^ (x >> 31)


def canonical_edge_key(u: int, v: int) -> int:
    """Order-free 128-bit key for the unordered pair {u, v}."""
    if u == v:
        raise ValueError(f"no self-loops: got ({u},{v})")
    if u > v:
        u, v = v, u
    return (u << 64) | v


def prf_uniform64(seed: int, round_tag: int, key: int) -> int:
    """The fixed PRF: 128-bit key -> uniform 64-bit word."""
    h = mix64((seed + _GAMMA) & MASK64)
    h = mix64(h ^ (key >> 64))
    h = mix64(h ^ (key & MASK64))
    return mix64((h + round_tag * _GAMMA) & MASK64)


def _mix64_arr(x: np.ndarray, tmp: np.ndarray) -> np.ndarray:
    # scratch buffer avoids three temporaries per round on hot paths
    np.right_shift(x, np.uint64(30), out=tmp)
    x ^= tmp
    x *= np.uint64(_MULT1)
    np.right_shift(x, np.uint64(27), out=tmp)
    x ^= tmp
    x *= np.uint64(_MULT2)
    np.right_shift(x, np.uint64(31), out=tmp)
    x ^= tmp
    return x


def _prf_uniform64_arrays(seed: int, round_tag: int,
                          kmin: np.ndarray, kmax: np.ndarray) -> np.ndarray:
    h0 = mix64((seed + _GAMMA) & MASK64)
    x = np.uint64(h0) ^ kmin
    tmp = np.empty_like(x)
    _mix64_arr(x, tmp)
    x ^= kmax
    _mix64_arr(x, tmp)
    x += np.uint64((round_tag * _GAMMA) & MASK64)
    _mix64_arr(x, tmp)
    return x


class EdgeSampler:
    """Stateless Bernoulli(p) oracle over canonical edge keys.

    ``round_tag`` separates independent exposure rounds under one seed.
    """

    __slots__ = ("seed", "p", "round_tag", "threshold")

    def __init__(self, seed: int, p: float, round_tag: int = 0):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"retention probability must be in [0,1], got {p}")
        if round_tag < 0:
            raise ValueError("round_tag must be non-negative")
        self.seed = seed & MASK64
        self.p = float(p)
        self.round_tag = int(round_tag)
        self.threshold = int(self.p * (1 << 64))

    def open(self, u: int, v: int) -> bool:
        key = canonical_edge_key(u, v)
        return prf_uniform64(self.seed, self.round_tag, key) < self.threshold

    def open_arrays(self, kmin: np.ndarray, kmax: np.ndarray) -> np.ndarray:
        """Vectorized decisions; ``kmin``/``kmax`` are the sorted endpoint
        codes as uint64 arrays."""
        if self.threshold <= 0:
            return np.zeros(len(kmin), dtype=bool)
        if self.threshold >= (1 << 64):
            return np.ones(len(kmin), dtype=bool)
        u = _prf_uniform64_arrays(self.seed, self.round_tag, kmin, kmax)
        return u < np.uint64(self.threshold)

    def __repr__(self):
        return (f"EdgeSampler(seed={self.seed:#x}, p={self.p}, "
                f"round_tag={self.round_tag})")


class UnionSampler:
    """Edge open iff open in either round; the lawful way to expose
    G_p as a union of two sparser rounds."""

    __slots__ = ("s1", "s2")

    def __init__(self, s1: EdgeSampler, s2: EdgeSampler):
        if s1.round_tag == s2.round_tag:
            raise ValueError("union rounds must use distinct round_tags")
        self.s1 = s1
        self.s2 = s2

    @property
    def seed(self) -> int:
        return self.s1.seed

    @property
    def p(self) -> float:
        return 1.0 - (1.0 - self.s1.p) * (1.0 - self.s2.p)

    def open(self, u: int, v: int) -> bool:
        return self.s1.open(u, v) or self.s2.open(u, v)

    def open_arrays(self, kmin, kmax):
        return self.s1.open_arrays(kmin, kmax) | self.s2.open_arrays(kmin, kmax)


def sample_edge(sampler, u: int, v: int) -> bool:
    return sampler.open(u, v)


@dataclass(frozen=True)
class TwoRoundSchedule:
    p1: float
    p2: float

    @property
    def combined(self) -> float:
        return 1.0 - (1.0 - self.p1) * (1.0 - self.p2)


def two_round_split(p: float, p2: float) -> TwoRoundSchedule:
    """Solve for p1 so that (1-p1)(1-p2) = 1-p."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"target probability must be in [0,1), got {p}")
    if not 0.0 <= p2 <= p:
        raise ValueError(f"round-2 probability {p2} must lie in [0, p={p}]")
    p1 = (p - p2) / (1.0 - p2)
    return TwoRoundSchedule(p1=p1, p2=p2)


# -- single-cluster exploration ----------------------------------------------

@dataclass
class ExplorationResult:
    size: int
    truncated: bool
    members: Optional[list[int]]
    queried_edges: int


def bfs_component(g: ProductGraph, sampler, v: int,
                  cap: Optional[int] = None,
                  want_members: bool = True) -> ExplorationResult:
    """Explore the open cluster of v breadth-first.

    Exploration halts as soon as the number of discovered vertices reaches
    ``cap`` (queue included), in which case ``truncated`` is set and the
    reported size equals the cap.  Neighbor queries follow the product's
    fixed iteration order, so truncation points are seed-reproducible.
    """
    if not 0 <= v < g.vertex_count:
        raise ValueError(f"vertex code {v} out of range")
    discovered = {v}
    members = [v] if want_members else None
    queried = 0
    if cap is not None and cap <= 1:
        return ExplorationResult(1, True, members, 0)
    queue = [v]
    head = 0
    truncated = False
    while head < len(queue) and not truncated:
        u = queue[head]
        head += 1
        for w in g.neighbors(u):
            if w in discovered:
                continue
            queried += 1
            if not sampler.open(u, w):
                continue
            discovered.add(w)
            if want_members:
                members.append(w)
            queue.append(w)
            if cap is not None and len(discovered) >= cap:
                truncated = True
                break
    return ExplorationResult(
        size=len(discovered),
        truncated=truncated,
        members=members,
        queried_edges=queried,
    )


# -- whole-graph census --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CensusResult:
    """Exact component census of one percolated graph."""

    component_sizes: np.ndarray  # sorted descending, sums to vertex_count
    L1: int
    L2: int
    isolated: int
    seed: int
    p: float

    @property
    def n_components(self) -> int:
        return len(self.component_sizes)


def _iter_candidate_edges(g: ProductGraph, chunk: int = _CHUNK):
    """Stream every host edge exactly once as (kmin, kmax) uint64 chunks.

    Edges along factor i connect codes that differ only in the i-th digit;
    both endpoints share the same "complement" code, so the endpoint with
    the smaller digit is always the smaller code.
    """
    for i in range(len(g.factors)):
        fa, fb = g.factor_edge_arrays(i)
        if len(fa) == 0:
            continue
        stride = g.strides[i]
        r = g.radices[i]
        block = r * stride
        ea = fa.astype(np.uint64) * np.uint64(stride)
        eb = fb.astype(np.uint64) * np.uint64(stride)
        n_comp = g.vertex_count // r
        ccap = min(n_comp, max(1, chunk))
        for c0 in range(0, n_comp, ccap):
            flat = np.arange(c0, min(c0 + ccap, n_comp), dtype=np.uint64)
            comp = (flat // np.uint64(stride)) * np.uint64(block) \
                + (flat % np.uint64(stride))
            ecap = max(1, chunk // len(comp))
            for e0 in range(0, len(ea), ecap):
                lo = (comp[None, :] + ea[e0:e0 + ecap, None]).ravel()
                hi = (comp[None, :] + eb[e0:e0 + ecap, None]).ravel()
                yield lo, hi


def open_edges(g: ProductGraph, sampler) -> tuple[np.ndarray, np.ndarray]:
    """Materialize the retained edges of G_p as sorted endpoint-code arrays."""
    lo_parts, hi_parts = [], []
    for lo, hi in _iter_candidate_edges(g):
        mask = sampler.open_arrays(lo, hi)
        if mask.any():
            lo_parts.append(lo[mask])
            hi_parts.append(hi[mask])
    if not lo_parts:
        e = np.zeros(0, dtype=np.uint64)
        return e, e
    return np.concatenate(lo_parts), np.concatenate(hi_parts)


def _components_from_edges(n: int, lo: np.ndarray, hi: np.ndarray,
                           want_labels: bool):
    """Connected components of the open subgraph.

    Vertices touching no open edge are size-1 components and never enter
    the search; the rest are relabeled to a compact range and swept
    breadth-first in ascending code order, so each component is labeled by
    its minimum vertex code.
    """
    if len(lo) == 0:
        sizes = np.ones(n, dtype=np.int64)
        labels = np.arange(n, dtype=np.int64) if want_labels else None
        return sizes, labels, n
    nodes, inv = np.unique(np.concatenate([lo, hi]), return_inverse=True)
    k = len(nodes)
    m = len(lo)
    src = np.concatenate([inv[:m], inv[m:]])
    dst = np.concatenate([inv[m:], inv[:m]])
    deg = np.bincount(src, minlength=k)
    indptr = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = dst[np.argsort(src, kind="stable")]

    ip = indptr.tolist()
    ind = indices.tolist()
    visited = bytearray(k)
    comp_sizes: list[int] = []
    labels_c = [0] * k if want_labels else None
    for s0 in range(k):
        if visited[s0]:
            continue
        queue = [s0]
        visited[s0] = 1
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for j in range(ip[u], ip[u + 1]):
                w = ind[j]
                if not visited[w]:
                    visited[w] = 1
                    queue.append(w)
        comp_sizes.append(len(queue))
        if want_labels:
            for u in queue:
                labels_c[u] = s0
    iso = n - k
    nontrivial = np.sort(np.array(comp_sizes, dtype=np.int64))[::-1]
    sizes = np.concatenate([nontrivial, np.ones(iso, dtype=np.int64)])
    labels = None
    if want_labels:
        labels = np.arange(n, dtype=np.int64)
        nodes64 = nodes.astype(np.int64)
        labels[nodes64] = nodes64[np.asarray(labels_c, dtype=np.int64)]
    return sizes, labels, iso


def census(g: ProductGraph, sampler) -> CensusResult:
    """Exact component sizes of G_p under the given sampler.

    Every edge decision comes from the same stateless oracle, so the
    partition cannot depend on discovery order; sweeping components in
    ascending code order just fixes the reporting."""
    sizes, _, iso = _components_from_edges(
        g.vertex_count, *open_edges(g, sampler), want_labels=False)
    return _census_result(g, sampler, sizes, iso)


def census_with_labels(g: ProductGraph, sampler
                       ) -> tuple[CensusResult, np.ndarray]:
    """Census plus a per-vertex label array (label = min code in component)."""
    sizes, labels, iso = _components_from_edges(
        g.vertex_count, *open_edges(g, sampler), want_labels=True)
    return _census_result(g, sampler, sizes, iso), labels


def _census_result(g, sampler, sizes, iso) -> CensusResult:
    l1 = int(sizes[0]) if len(sizes) else 0
    l2 = int(sizes[1]) if len(sizes) > 1 else 0
    return CensusResult(
        component_sizes=sizes,
        L1=l1,
        L2=l2,
        isolated=iso,
        seed=sampler.seed,
        p=sampler.p,
    )


def union_sampler(s1: EdgeSampler, s2: EdgeSampler) -> UnionSampler:
    return UnionSampler(s1, s2)


# -- layer-restricted exploration ----------------------------------------------

@dataclass
class LayerExploration:
    size: int
    truncated: bool
    in_layer: int      # vertices found with z centre coordinates
    below_layer: int   # vertices found with z-1 centre coordinates
    members: list[int]
    queried_edges: int


def _star_power_params(g: ProductGraph) -> tuple[int, int]:
    s = g.radices[0] - 1
    for f in g.factors:
        if f.n != s + 1 or f.adj[0] != tuple(range(1, s + 1)) \
                or any(f.adj[w] != (0,) for w in range(1, s + 1)):
            raise UnsupportedOperationError(
                "layer operations need a uniform star power")
    return len(g.factors), s


def _centre_count(g: ProductGraph, v: int) -> int:
    z = 0
    for r, st in zip(g.radices, g.strides):
        if (v // st) % r == 0:
            z += 1
    return z


def layer_bfs(g: ProductGraph, sampler, v: int, z: int,
              cap: Optional[int] = None) -> LayerExploration:
    """Two-step exploration of v's cluster inside the bipartite slice
    between the layers with z and z-1 centre coordinates.

    Dequeue u from the z-layer, expose its down-edges; every newly found
    down-vertex x immediately exposes its up-edges, feeding fresh z-layer
    vertices to the queue.  Halts when the total number of discovered
    vertices (both layers) reaches ``cap``.
    """
    t, s = _star_power_params(g)
    if not 1 <= z <= t:
        raise ValueError(f"layer index must be in [1,{t}], got {z}")
    if _centre_count(g, v) != z:
        raise ValueError(f"vertex has {_centre_count(g, v)} centre "
                         f"coordinates, expected {z}")
    discovered = {v}
    members = [v]
    in_layer, below = 1, 0
    queried = 0
    truncated = cap is not None and cap <= 1
    queue = [v]
    head = 0
    while head < len(queue) and not truncated:
        u = queue[head]
        head += 1
        for st in g.strides:
            if truncated:
                break
            if (u // st) % (s + 1) != 0:
                continue
            for w in range(1, s + 1):
                x = u + w * st
                if x in discovered:
                    continue
                queried += 1
                if not sampler.open(u, x):
                    continue
                discovered.add(x)
                members.append(x)
                below += 1
                if cap is not None and len(discovered) >= cap:
                    truncated = True
                    break
                for st2 in g.strides:
                    cx = (x // st2) % (s + 1)
                    if cx == 0:
                        continue
                    y = x - cx * st2
                    if y in discovered:
                        continue
                    queried += 1
                    if not sampler.open(x, y):
                        continue
                    discovered.add(y)
                    members.append(y)
                    in_layer += 1
                    queue.append(y)
                    if cap is not None and len(discovered) >= cap:
                        truncated = True
                        break
                if truncated:
                    break
    return LayerExploration(
        size=len(discovered),
        truncated=truncated,
        in_layer=in_layer,
        below_layer=below,
        members=members,
        queried_edges=queried,
    )


# -- census CSV (interchange format) -------------------------------------------

CENSUS_CSV_HEADER = "seed,p,L1,L2,isolated,n_components"


def census_csv_line(c: CensusResult) -> str:
    return (f"{c.seed},{c.p:.12g},{c.L1},{c.L2},{c.isolated},"
            f"{c.n_components}")
