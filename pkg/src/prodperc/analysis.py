"""Analytic companions to the percolation experiments.

Covers the survival fixed point y(eps), Monte-Carlo branching-process
survival, the layer decomposition of star powers (layer sizes, degree
formula, distance-2 classification), Johnson-graph construction and
neighborhoods, the product-graph edge-expansion sandwich, and component
statistics derived from a census.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import basegraphs
from .basegraphs import BaseGraph, brute_force_isoperimetric
from .errors import SizeLimitError, UnsupportedOperationError
from .percolation import CensusResult, census_with_labels
from .product import ProductGraph, build


# -- survival fixed point ------------------------------------------------------

@dataclass(frozen=True)
class SurvivalPoint:
    epsilon: float
    y: float
    residual: float


def solve_y(epsilon: float, tol: float = 1e-12) -> SurvivalPoint:
    """The unique root in (0,1) of y = 1 - exp(-(1+eps) y), by bisection.

    f(y) = y - 1 + exp(-(1+eps)y) is negative between 0 and the root and
    positive after it (f(1) > 0 always), so once a negative grid point is
    found the sign change brackets the root unconditionally.
    """
    if epsilon <= 0:
        raise ValueError(f"need epsilon > 0 for a root in (0,1), got {epsilon}")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    a = 1.0 + epsilon

    def f(y: float) -> float:
        return y - 1.0 + math.exp(-a * y)

    lo = min(0.5, 2.0 * epsilon / (a * a))
    while f(lo) >= 0.0:
        lo /= 2.0
        if lo < 1e-300:
            raise ValueError(f"no bracket found for epsilon={epsilon}")
    hi = 1.0
    mid = lo
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol:
            break
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    return SurvivalPoint(epsilon=epsilon, y=mid, residual=abs(f(mid)))


# -- Galton-Watson survival ------------------------------------------------------

@dataclass(frozen=True)
class SurvivalEstimate:
    survival: float
    std_error: float
    trials: int
    explode_at: int


def gw_survival_mc(n: int, p: float, explode_at: int = 20_000,
                   trials: int = 2000, seed: int = 0) -> SurvivalEstimate:
    """Estimate the survival probability of a branching process with
    Binomial(n, p) offspring.

    "Survives" is proxied by the total population reaching ``explode_at``
    before extinction; a generation of z individuals produces
    Binomial(z*n, p) children, drawn as one variate.  Trials are seeded
    independently by stride so any subset reproduces identically.
    """
    if explode_at < 1000:
        raise ValueError("explode_at below 1000 is too biased a proxy")
    survived = 0
    for i in range(trials):
        rng = np.random.default_rng(seed + i)
        z, total = 1, 1
        while z > 0 and total < explode_at:
            z = int(rng.binomial(z * n, p))
            total += z
        if total >= explode_at:
            survived += 1
    est = survived / trials
    return SurvivalEstimate(
        survival=est,
        std_error=math.sqrt(max(est * (1.0 - est), 1e-12) / trials),
        trials=trials,
        explode_at=explode_at,
    )


# -- star-power layers -----------------------------------------------------------

def _star_power_params(g: ProductGraph) -> tuple[int, int]:
    s = g.radices[0] - 1
    for f in g.factors:
        if f.n != s + 1 or f.adj[0] != tuple(range(1, s + 1)) \
                or any(f.adj[w] != (0,) for w in range(1, s + 1)):
            raise UnsupportedOperationError(
                "layer operations need a uniform star power")
    return len(g.factors), s


def layer_of(g: ProductGraph, v: int) -> int:
    """Number of centre coordinates of v (centre = coordinate value 0)."""
    _star_power_params(g)
    z = 0
    for r, st in zip(g.radices, g.strides):
        if (v // st) % r == 0:
            z += 1
    return z


@dataclass(frozen=True)
class LayerCensus:
    t: int
    s: int
    sizes: tuple[int, ...]          # sizes[z] = C(t,z) * s^(t-z)
    degree_per_layer: tuple[int, ...]  # z*s + (t-z)


def layer_census(t: int, s: int, verify: bool = False) -> LayerCensus:
    """Exact per-layer vertex counts of the t-fold star power, by formula;
    with ``verify`` every vertex of the (s+1)^t product is decoded and
    tallied as an independent cross-check."""
    if t < 1 or s < 1:
        raise ValueError("need t >= 1 and s >= 1")
    sizes = tuple(math.comb(t, z) * s ** (t - z) for z in range(t + 1))
    if verify:
        n = (s + 1) ** t
        if n > (1 << 27):
            raise SizeLimitError("enumeration cross-check exceeds budget")
        codes = np.arange(n, dtype=np.int64)
        zcount = np.zeros(n, dtype=np.int64)
        for _ in range(t):
            codes, digit = np.divmod(codes, s + 1)
            zcount += digit == 0
        counted = np.bincount(zcount, minlength=t + 1)
        if tuple(int(c) for c in counted) != sizes:
            raise AssertionError("layer size formula disagrees with enumeration")
    return LayerCensus(
        t=t, s=s, sizes=sizes,
        degree_per_layer=tuple(z * s + (t - z) for z in range(t + 1)),
    )


class Dist2Class(Enum):
    T1 = "T1"          # same centre set, one differing leaf coordinate
    T2 = "T2"          # centre sets one swap apart, leaves agree elsewhere
    NOT_DIST2 = "not_dist2"


def classify_dist2(g: ProductGraph, u: int, v: int) -> Dist2Class:
    """Classify a same-layer pair of star-power vertices by whether they sit
    at distance exactly two, and through which mechanism.

    T1: identical centre sets and exactly one leaf coordinate differs
    (the two-path runs through that star's centre).  T2: centre sets differ
    by a single swap and every coordinate outside the swap agrees (the
    two-path moves one centre out and one in).
    """
    t, _ = _star_power_params(g)
    cu = g.decode(u)
    cv = g.decode(v)
    zu = sum(1 for c in cu if c == 0)
    zv = sum(1 for c in cv if c == 0)
    if zu != zv:
        raise ValueError(f"layer mismatch: {zu} vs {zv} centre coordinates")
    centre_diff = [i for i in range(t) if (cu[i] == 0) != (cv[i] == 0)]
    if not centre_diff:
        differing = [i for i in range(t) if cu[i] != cv[i]]
        if len(differing) == 1:
            return Dist2Class.T1
        return Dist2Class.NOT_DIST2
    if len(centre_diff) == 2:
        outside_agree = all(cu[i] == cv[i] for i in range(t)
                            if i not in centre_diff)
        if outside_agree:
            return Dist2Class.T2
    return Dist2Class.NOT_DIST2


# -- Hamming and Johnson graphs ----------------------------------------------------

def hamming(t: int, s: int) -> ProductGraph:
    """Hamming graph H(t,s): the t-fold product of complete graphs K_s."""
    if t < 1 or s < 1:
        raise ValueError("need t >= 1 and s >= 1")
    return build([basegraphs.complete(s)] * t)


JOHNSON_MAX_VERTICES = 10 ** 6


@dataclass(frozen=True, eq=False)
class JohnsonGraph:
    """z-subsets of {0..t-1} in colex order, adjacent when the symmetric
    difference has size two."""

    t: int
    z: int
    vertices: tuple[tuple[int, ...], ...]
    adj: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index_of(self, subset) -> int:
        return self._index[tuple(sorted(subset))]


def johnson(t: int, z: int) -> JohnsonGraph:
    if not 0 < z < t:
        raise ValueError(f"need 0 < z < t, got z={z}, t={t}")
    n = math.comb(t, z)
    if n > JOHNSON_MAX_VERTICES:
        raise SizeLimitError(f"J({t},{z}) has {n} vertices, cap is 10^6")
    verts = sorted(itertools.combinations(range(t), z),
                   key=lambda c: tuple(reversed(c)))
    index = {c: i for i, c in enumerate(verts)}
    adj = []
    for c in verts:
        inside = set(c)
        nbrs = []
        for out in c:
            for inn in range(t):
                if inn in inside:
                    continue
                nb = tuple(sorted(inside - {out} | {inn}))
                nbrs.append(index[nb])
        adj.append(tuple(sorted(nbrs)))
    g = JohnsonGraph(t=t, z=z, vertices=tuple(verts), adj=tuple(adj))
    object.__setattr__(g, "_index", index)
    return g


def johnson_neighborhood(j: JohnsonGraph, vertex_set) -> set[int]:
    """External neighborhood of a set of Johnson-graph vertex indices."""
    inside = set(vertex_set)
    out: set[int] = set()
    for v in inside:
        for w in j.adj[v]:
            if w not in inside:
                out.add(w)
    return out


# -- edge-expansion sandwich ------------------------------------------------------

@dataclass(frozen=True)
class IsoSandwich:
    i_product: Fraction
    lower: Fraction
    upper: Fraction
    ok: bool


def materialize(g: ProductGraph) -> BaseGraph:
    """Explicit BaseGraph copy of a small product (subset-scan sized)."""
    if g.vertex_count > basegraphs.ISO_SCAN_MAX_VERTICES:
        raise SizeLimitError(
            f"will not materialize {g.vertex_count} vertices")
    edges = [(v, w) for v in range(g.vertex_count)
             for w in g.neighbors(v) if v < w]
    return basegraphs.from_edge_list(g.vertex_count, edges)


def iso_sandwich_check(factors: Sequence[BaseGraph]) -> IsoSandwich:
    """Exact check that the product's edge-expansion constant lies between
    half the weakest factor's constant and the weakest factor's constant."""
    if any(f.is_trivial() for f in factors):
        raise ValueError("sandwich needs non-trivial factors")
    g = build(factors)
    i_g = brute_force_isoperimetric(materialize(g))
    i_min = min(brute_force_isoperimetric(f) for f in factors)
    lower = i_min / 2
    return IsoSandwich(
        i_product=i_g,
        lower=lower,
        upper=i_min,
        ok=lower <= i_g <= i_min,
    )


# -- component statistics ----------------------------------------------------------

@dataclass(frozen=True)
class BigComponentStats:
    threshold: int
    w_size: int
    fraction: Fraction


def big_component_stats(c: CensusResult, k: int) -> BigComponentStats:
    """Vertices living in components of size at least k."""
    sizes = c.component_sizes
    w = int(sizes[sizes >= k].sum())
    total = int(sizes.sum())
    return BigComponentStats(threshold=k, w_size=w,
                             fraction=Fraction(w, total))


def near_big_fraction(g: ProductGraph, sampler, k: int,
                      degree_floor: int) -> float:
    """Among vertices of degree >= degree_floor, the fraction NOT within
    graph distance two of any component of size >= k.

    The radius is fixed at two: one census pass marks the big components,
    then two vectorized neighbor sweeps grow the mark.
    """
    _, labels = census_with_labels(g, sampler)
    uniq, counts = np.unique(labels, return_counts=True)
    big = uniq[counts >= k]

    near = np.zeros(g.vertex_count, dtype=bool)
    if len(big):
        mask = np.isin(labels, big)
        near[mask] = True
        frontier = np.nonzero(mask)[0]
        for _ in range(2):
            if len(frontier) == 0:
                break
            _, nbrs = g.neighbors_bulk(frontier)
            nbrs = np.unique(nbrs)
            fresh = nbrs[~near[nbrs]]
            near[fresh] = True
            frontier = fresh

    degs = np.zeros(g.vertex_count, dtype=np.int64)
    codes = np.arange(g.vertex_count, dtype=np.int64)
    for i, f in enumerate(g.factors):
        per_val = np.array([len(a) for a in f.adj], dtype=np.int64)
        degs += per_val[(codes // g.strides[i]) % g.radices[i]]
    eligible = degs >= degree_floor
    n_elig = int(eligible.sum())
    if n_elig == 0:
        return 0.0
    return float((eligible & ~near).sum() / n_elig)
