from fractions import Fraction
from itertools import product
from math import lcm

import numpy as np
import pytest

from hyperlim.hypergraph import Hypergraph, blowup, densities
from hyperlim.hyperpartition import (
    CombinatorialStructure,
    Hyperpartition,
    cells_union,
)
from hyperlim.hypergraphon import StepHypergraphon, builtin_w, step_from_structure, structure_of
from hyperlim.metrics import (
    closeness,
    d1,
    delta1_upper,
    delta_metric_estimate,
    delta_w_lower,
    hamming_density,
)

EDGE = Hypergraph(2, 2, [(0, 1)])
TRI = Hypergraph(2, 3, [(0, 1), (0, 2), (1, 2)])


def rand_step(k, l, seed):
    g = np.random.default_rng(seed)
    width = (1 << k) - 1
    cells = set()
    for code in range(l**width):
        if g.random() < 0.4:
            cells.add(tuple(int((code // l**i) % l) + 1 for i in range(width)))
    return step_from_structure(CombinatorialStructure(k, l, cells, symmetrize=True))


def brute_d1(U, W):
    L = lcm(U.l, W.l)
    width = (1 << U.k) - 1
    cu_cells = structure_of(U).cells
    cw_cells = structure_of(W).cells
    diff = 0
    for digs in product(range(L), repeat=width):
        cu = tuple(d * U.l // L + 1 for d in digs)
        cw = tuple(d * W.l // L + 1 for d in digs)
        if (cu in cu_cells) != (cw in cw_cells):
            diff += 1
    return Fraction(diff, L**width)


def test_d1_matches_brute_on_mixed_levels():
    pairs = [(rand_step(2, 2, 100 + t), rand_step(2, 3, 200 + t)) for t in range(5)]
    pairs += [(rand_step(2, 3, 300 + t), rand_step(2, 3, 400 + t)) for t in range(3)]
    pairs += [(rand_step(3, 2, 500), rand_step(3, 2, 501))]
    for U, W in pairs:
        assert d1(U, W).value == brute_d1(U, W)


def test_d1_frozen_examples():
    W1 = builtin_w("example1", 2)
    assert d1(W1, W1).value == 0
    assert d1(W1, builtin_w("full", 2)).value == Fraction(1, 2)
    assert d1(W1, builtin_w("empty", 2)).value == Fraction(1, 2)


def test_d1_symmetry_and_triangle_inequality():
    for t in range(20):
        A = rand_step(2, 2, 1000 + t)
        B = rand_step(2, 2, 2000 + t)
        C = rand_step(2, 2, 3000 + t)
        ab, ba = d1(A, B).value, d1(B, A).value
        assert ab == ba
        assert d1(A, C).value <= ab + d1(B, C).value


def test_d1_witness_points_at_a_real_difference():
    U = builtin_w("example1", 2)
    W = builtin_w("full", 2)
    rep = d1(U, W)
    box = rep.witness["box"]
    L = rep.witness["levels"]
    cu = tuple((b - 1) * U.l // L + 1 for b in box)
    cw = tuple((b - 1) * W.l // L + 1 for b in box)
    assert (cu in structure_of(U).cells) != (cw in structure_of(W).cells)


def test_d1_montecarlo_close_to_exact():
    U = rand_step(2, 3, 77)
    W = rand_step(2, 3, 78)
    exact = float(d1(U, W).value)
    rep = d1(U, W, mode="montecarlo", samples=20000, seed=5)
    se = rep.budget["stderr"]
    assert abs(rep.value - exact) < 4 * max(se, 1e-9)
    # replay determinism
    rep2 = d1(U, W, mode="montecarlo", samples=20000, seed=5)
    assert rep.value == rep2.value


def test_hamming_density_frozen_and_errors():
    one = Hypergraph(2, 3, [(0, 1)])
    assert hamming_density(TRI, one) == Fraction(2, 3)
    assert hamming_density(TRI, TRI) == 0
    with pytest.raises(ValueError):
        hamming_density(TRI, EDGE)


def test_hamming_bounds_per_edge_density_gap():
    for t in range(8):
        H = Hypergraph.random(2, 6, Fraction(1, 2), seed=t)
        T = Hypergraph.random(2, 6, Fraction(1, 2), seed=t + 100)
        hd = hamming_density(H, T)
        for F in (EDGE, TRI):
            gap = abs(densities(F, H).t - densities(F, T).t) / len(F.edges)
            assert gap <= hd


def test_delta_w_lower_frozen():
    W1 = builtin_w("example1", 2)
    rep = delta_w_lower(W1, builtin_w("full", 2), [EDGE])
    assert rep.value == Fraction(1, 2)
    assert rep.kind == "lower_bound"
    with pytest.raises(ValueError):
        delta_w_lower(W1, W1, [Hypergraph.empty(2, 3)])


def test_delta_w_lower_below_d1():
    for t in range(15):
        U = rand_step(2, 2, 7000 + t)
        W = rand_step(2, 2, 8000 + t)
        lo = delta_w_lower(U, W, [EDGE, TRI]).value
        assert lo <= d1(U, W).value


def test_delta_metric_estimate_frozen_grid_value():
    empty3 = Hypergraph.empty(2, 3)
    rep = delta_metric_estimate(TRI, empty3, 3)
    assert rep.value == Fraction(2, 3)
    assert rep.witness["edges"] == [[0, 1]]


def test_delta_metric_estimate_zero_for_equivalent():
    assert delta_metric_estimate(TRI, TRI, 3).value == 0
    assert delta_metric_estimate(TRI, blowup(TRI, 2), 3).value == 0


def test_delta1_upper_recovers_level_swap():
    for t in range(6):
        U = rand_step(2, 2, 6000 + t)
        assert delta1_upper(U, U).value == 0
        swapped = {(a, b, 3 - c) for (a, b, c) in structure_of(U).cells}
        rep = delta1_upper(U, StepHypergraphon(2, 2, swapped))
        assert rep.value == 0
        assert rep.budget["mode"] == "exhaustive"
        # witness holds the aligning per-arity level permutations
        assert len(rep.witness["perms"]) == 2


def test_delta1_upper_hill_climb_budget():
    U = rand_step(2, 4, 42)
    swapped = {(a, b, 5 - c) for (a, b, c) in structure_of(U).cells}
    Wsw = StepHypergraphon(2, 4, swapped)
    r = delta1_upper(U, Wsw, budget=400)  # below the (4!)^2 permutation space
    assert r.budget["mode"] == "hill_climb"
    assert 0 <= r.value <= 1
    r2 = delta1_upper(U, Wsw, budget=600)
    assert r2.budget["mode"] == "exhaustive" and r2.value == 0


def test_delta1_chain_inequalities():
    for t in range(10):
        U = rand_step(2, 2, 7000 + t)
        W = rand_step(2, 2, 8000 + t)
        up = delta1_upper(U, W).value
        lo = delta_w_lower(U, W, [EDGE, TRI]).value
        assert lo <= up <= d1(U, W).value


def test_closeness_eps_is_hamming_to_cells_union():
    W1 = builtin_w("example1", 2)
    hp = Hyperpartition.uniform_random(12, 2, 2, seed=3)
    C = structure_of(W1)
    H = cells_union(hp, C)
    eps, delta = closeness(H, C, hp, seed=1)
    assert eps == 0
    assert 0 <= delta <= 1
    # flipping one edge moves eps by exactly one normalized slot
    edges = set(H.sorted_edges())
    e = next(iter(edges))
    edges.discard(e)
    H2 = Hypergraph(2, 12, edges)
    eps2, _ = closeness(H2, C, hp, seed=1)
    assert eps2 == Fraction(1, 66)
