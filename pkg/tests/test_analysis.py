"""Fixed point, branching survival, layers, Johnson graphs, sandwich."""

import itertools
import math
import random
from fractions import Fraction

import pytest

from prodperc import analysis as an
from prodperc import basegraphs as bg
from prodperc import percolation as pc
from prodperc import product as pr
from prodperc.errors import SizeLimitError, UnsupportedOperationError


def oracle_y_eps1():
    """Independent bisection for y = 1 - exp(-2y) (the eps = 1 point)."""
    f = lambda y: y - 1.0 + math.exp(-2.0 * y)
    lo, hi = 0.25, 1.0
    assert f(lo) < 0 < f(hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- solve_y ------------------------------------------------------------------------

def test_solve_y_contract():
    pt = an.solve_y(0.3, tol=1e-12)
    assert pt.residual <= 1e-12
    assert 0 < pt.y < 1
    assert abs(pt.y - 1 + math.exp(-1.3 * pt.y)) <= 1e-12


def test_solve_y_small_epsilon_slope():
    pt = an.solve_y(1e-4)
    assert 0.99 <= pt.y / (2e-4) <= 1.01


def test_solve_y_eps1_against_oracle():
    got = an.solve_y(1.0, tol=1e-12).y
    assert abs(got - oracle_y_eps1()) <= 1e-9
    assert abs(got - 0.7968121300200202) <= 1e-6  # frozen from the oracle


def test_solve_y_monotone_grid():
    grid = [0.01 + i * (2.0 - 0.01) / 99 for i in range(100)]
    ys = [an.solve_y(e).y for e in grid]
    assert all(a < b for a, b in zip(ys, ys[1:]))


def test_solve_y_rejects_bad_args():
    with pytest.raises(ValueError):
        an.solve_y(0.0)
    with pytest.raises(ValueError):
        an.solve_y(-1.0)
    with pytest.raises(ValueError):
        an.solve_y(0.5, tol=0.0)


# -- Galton-Watson survival ------------------------------------------------------------

def test_gw_p0_dies():
    est = an.gw_survival_mc(10, 0.0, explode_at=1000, trials=50, seed=1)
    assert est.survival == 0.0


def test_gw_subcritical_dies_out():
    est = an.gw_survival_mc(100, 0.9 / 100, explode_at=1000, trials=400,
                            seed=2)
    assert est.survival <= 2 / math.sqrt(400)


def test_gw_supercritical_matches_fixed_point():
    est = an.gw_survival_mc(1000, 1.3 / 1000, explode_at=20_000, trials=500,
                            seed=3)
    y = an.solve_y(0.3).y
    assert abs(est.survival - y) <= 0.06  # 500 trials, looser than acceptance


def test_gw_explode_floor():
    with pytest.raises(ValueError):
        an.gw_survival_mc(10, 0.5, explode_at=10, trials=10, seed=0)


# -- layers -----------------------------------------------------------------------------

def test_layer_of_extremes():
    g = pr.build([bg.star(2)] * 4)
    assert an.layer_of(g, g.encode([0, 0, 0, 0])) == 4
    assert an.layer_of(g, g.encode([1, 2, 1, 2])) == 0


def test_layer_of_degree_identity():
    s, t = 3, 5
    g = pr.build([bg.star(s)] * t)
    rnd = random.Random(4)
    for _ in range(10 ** 4):
        v = rnd.randrange(g.vertex_count)
        z = an.layer_of(g, v)
        assert g.degree(v) == z * s + (t - z)


def test_layer_of_rejects_non_star():
    g = pr.build([bg.complete(3), bg.complete(3)])
    with pytest.raises(UnsupportedOperationError):
        an.layer_of(g, 0)


def test_layer_census_formula_and_enumeration():
    lc = an.layer_census(4, 2, verify=True)
    assert lc.sizes[2] == math.comb(4, 2) * 4 == 24
    assert sum(lc.sizes) == 3 ** 4
    assert lc.sizes[4] == 1
    assert lc.degree_per_layer == (4, 5, 6, 7, 8)


def test_layer_census_enumeration_cross_check_more():
    for t, s in [(3, 2), (5, 2), (4, 3), (2, 5)]:
        lc = an.layer_census(t, s, verify=True)
        assert sum(lc.sizes) == (s + 1) ** t


# -- distance-2 classification -------------------------------------------------------------

def brute_same_layer_dist2(s, t):
    """Oracle: explicit graph, all same-layer pairs at distance exactly 2."""
    factors = [bg.star(s)] * t
    verts = list(itertools.product(*[range(s + 1)] * t))
    adj = {v: set() for v in verts}
    for v in verts:
        for i in range(t):
            for w in factors[i].adj[v[i]]:
                adj[v].add(v[:i] + (w,) + v[i + 1:])
    dist2 = set()
    for v in verts:
        seen = {v}
        for u in adj[v]:
            seen.add(u)
        for u in list(seen - {v}):
            for w in adj[u]:
                if w not in seen:
                    dist2.add((v, w))
    return verts, dist2


def test_classify_dist2_full_oracle_s2_t4():
    s, t = 2, 4
    g = pr.build([bg.star(s)] * t)
    verts, dist2 = brute_same_layer_dist2(s, t)
    for va, vb in itertools.product(verts, repeat=2):
        za = sum(1 for c in va if c == 0)
        zb = sum(1 for c in vb if c == 0)
        if za != zb:
            continue
        got = an.classify_dist2(g, g.encode(va), g.encode(vb))
        is_dist2 = (va, vb) in dist2
        assert (got != an.Dist2Class.NOT_DIST2) == is_dist2, (va, vb)


def test_classify_dist2_identity_and_errors():
    g = pr.build([bg.star(2)] * 4)
    v = g.encode([0, 1, 2, 0])
    assert an.classify_dist2(g, v, v) == an.Dist2Class.NOT_DIST2
    with pytest.raises(ValueError):
        an.classify_dist2(g, g.encode([0, 0, 1, 1]), g.encode([0, 1, 1, 1]))


def test_classify_dist2_t2_centre_sets_match_johnson_degree():
    s, t, z = 2, 4, 2
    g = pr.build([bg.star(s)] * t)
    v = g.encode([0, 0, 1, 2])
    partner_sets = {}
    for w in range(g.vertex_count):
        if an.layer_of(g, w) != z:
            continue
        if an.classify_dist2(g, v, w) == an.Dist2Class.T2:
            centres = frozenset(
                i for i, c in enumerate(g.decode(w)) if c == 0)
            partner_sets.setdefault(centres, 0)
            partner_sets[centres] += 1
    # one adjacent centre-set per (centre out, leaf position in) swap,
    # with s partners each (the vacated centre can take any leaf value)
    assert len(partner_sets) == z * (t - z)
    assert all(count == s for count in partner_sets.values())


def test_classify_dist2_partition_is_exclusive():
    # T1 and T2 are structurally disjoint: same centre set vs a swap
    s, t = 2, 3
    g = pr.build([bg.star(s)] * t)
    for va, vb in itertools.product(range(g.vertex_count), repeat=2):
        if an.layer_of(g, va) != an.layer_of(g, vb):
            continue
        got = an.classify_dist2(g, va, vb)
        assert got in (an.Dist2Class.T1, an.Dist2Class.T2,
                       an.Dist2Class.NOT_DIST2)


# -- Johnson graphs ---------------------------------------------------------------------

def test_johnson_4_2():
    j = an.johnson(4, 2)
    assert j.n == 6
    assert all(len(a) == 4 for a in j.adj)


def test_johnson_adjacency_is_symmetric_difference_2():
    j = an.johnson(5, 2)
    for i, a in enumerate(j.vertices):
        for k in j.adj[i]:
            b = j.vertices[k]
            assert len(set(a) ^ set(b)) == 2


def test_johnson_degrees_z_t_minus_z():
    for t, z in [(5, 1), (5, 2), (6, 3), (7, 2)]:
        j = an.johnson(t, z)
        assert all(len(a) == z * (t - z) for a in j.adj)


def test_johnson_neighborhood():
    j = an.johnson(4, 2)
    assert an.johnson_neighborhood(j, set(range(j.n))) == set()
    assert len(an.johnson_neighborhood(j, {0})) == 4


def test_johnson_limits():
    with pytest.raises(ValueError):
        an.johnson(4, 0)
    with pytest.raises(ValueError):
        an.johnson(4, 4)
    with pytest.raises(SizeLimitError):
        an.johnson(40, 13)


# -- sandwich ---------------------------------------------------------------------------

def test_sandwich_q2():
    res = an.iso_sandwich_check([bg.complete(2), bg.complete(2)])
    assert res.i_product == 1
    assert res.lower == Fraction(1, 2) and res.upper == 1
    assert res.ok


def test_sandwich_single_factor():
    res = an.iso_sandwich_check([bg.complete(2)])
    assert res.i_product == 1 and res.ok


def test_sandwich_random_combinations():
    rnd = random.Random(19)
    pool = [bg.complete(2), bg.complete(3), bg.complete(4), bg.star(2),
            bg.star(3), bg.star(5), bg.star_clique(2, 1), bg.complete(6)]
    done = 0
    while done < 15:
        k = rnd.randrange(1, 4)
        factors = [rnd.choice(pool) for _ in range(k)]
        n = 1
        for f in factors:
            n *= f.n
        if n > 24:
            continue
        assert an.iso_sandwich_check(factors).ok
        done += 1


def test_sandwich_rejects_trivial_factor():
    with pytest.raises(ValueError):
        an.iso_sandwich_check([bg.complete(1), bg.complete(2)])


def test_materialize_matches_adjacency():
    g = pr.build([bg.star(2), bg.complete(3)])
    eg = an.materialize(g)
    for v in range(g.vertex_count):
        assert tuple(sorted(g.neighbors(v))) == eg.adj[v]


# -- component statistics ------------------------------------------------------------------

def make_census(sizes):
    import numpy as np
    arr = np.array(sorted(sizes, reverse=True), dtype=np.int64)
    return pc.CensusResult(
        component_sizes=arr, L1=int(arr[0]), L2=int(arr[1]) if len(arr) > 1 else 0,
        isolated=int((arr == 1).sum()), seed=0, p=0.5)


def test_big_component_stats_bounds():
    c = make_census([5, 3, 1, 1])
    assert an.big_component_stats(c, 1).fraction == 1
    assert an.big_component_stats(c, 6).fraction == 0
    assert an.big_component_stats(c, 2).w_size == 8  # |G| - isolated
    assert an.big_component_stats(c, 3).fraction == Fraction(8, 10)


def test_near_big_extremes():
    g = pr.build([bg.star(2)] * 4)
    everyone = an.near_big_fraction(
        g, pc.EdgeSampler(seed=0, p=1.0), k=2, degree_floor=0)
    assert everyone == 0.0
    nobody = an.near_big_fraction(
        g, pc.EdgeSampler(seed=0, p=0.0), k=2, degree_floor=0)
    assert nobody == 1.0


def test_near_big_marks_two_hops():
    # p=1 on one factor edge set would be contrived; use a supercritical
    # hypercube where the giant's 2-ball reaches almost everyone
    g = pr.build([bg.complete(2)] * 10)
    frac = an.near_big_fraction(
        g, pc.EdgeSampler(seed=3, p=0.3), k=100, degree_floor=10)
    assert frac <= 0.05


def test_near_big_supercritical_q14():
    # at eps = 0.3 the distance-2 ball of almost every vertex hits the giant
    g = pr.build([bg.complete(2)] * 14)
    frac = an.near_big_fraction(
        g, pc.EdgeSampler(seed=14, p=1.3 / 14), k=1000, degree_floor=14)
    assert frac <= 0.01


def test_hamming_is_complete_power():
    h = an.hamming(3, 4)
    assert h.vertex_count == 64
    assert all(h.degree(v) == 9 for v in range(64))
    assert float(h.average_degree()) == 9.0
    with pytest.raises(ValueError):
        an.hamming(0, 3)
