import json
from fractions import Fraction
from itertools import combinations

import pytest

from hyperlim import rng
from hyperlim.combinatorics import arity_offsets, colex_rank, mask_bits
from hyperlim.hypergraph import Hypergraph
from hyperlim.hyperpartition import CombinatorialStructure, Hyperpartition, cells_union
from hyperlim.hypergraphon import (
    GeneralHypergraphon,
    builtin_w,
    step_from_structure,
    structure_of,
)
from hyperlim.sampling import (
    CoordinateSystem,
    sample_vertex,
    sample_w,
    sample_w_edge_count,
)


def brute_sample_vertex(H, n, seed):
    key = rng.derive(seed, rng.TAG_VERTEX)
    picks = [rng.mix64(key, i) % H.n for i in range(n)]
    edges = []
    for e in combinations(range(n), H.k):
        imgs = [picks[v] for v in e]
        if len(set(imgs)) == H.k and tuple(sorted(imgs)) in H.edges:
            edges.append(e)
    return Hypergraph(H.k, n, edges)


def brute_sample_w(W, n, seed):
    coords = CoordinateSystem(n, W.k, seed)
    cells = structure_of(W).cells
    edges = []
    for e in combinations(range(n), W.k):
        cell = []
        for m in range(1, (1 << W.k)):
            sub = tuple(e[b] for b in mask_bits(m))
            cell.append(coords.level(sub, W.l) + 1)
        if tuple(cell) in cells:
            edges.append(e)
    return Hypergraph(W.k, n, edges)


def test_sample_vertex_matches_brute():
    for seed in range(12):
        H = Hypergraph.random(2, 7, Fraction(1, 2), seed=seed + 100)
        assert sample_vertex(H, 9, seed).edges == brute_sample_vertex(H, 9, seed).edges
    for seed in range(6):
        H = Hypergraph.random(3, 6, Fraction(1, 3), seed=seed + 500)
        assert sample_vertex(H, 7, seed).edges == brute_sample_vertex(H, 7, seed).edges


def test_sample_vertex_complete_host_frequency():
    # all k picks distinct with prob prod(1 - j/N); then the edge is present
    N, k, trials = 8, 3, 8000
    H = Hypergraph.complete(k, N)
    hits = sum(len(sample_vertex(H, k, s).edges) for s in range(trials))
    want = (1 - 1 / N) * (1 - 2 / N)
    se = (want * (1 - want) / trials) ** 0.5
    assert abs(hits / trials - want) < 4 * se


def test_sample_w_step_matches_recompute():
    import numpy as np

    rs = np.random.default_rng(7)
    for trial in range(6):
        k = int(rs.integers(2, 4))
        l = int(rs.integers(2, 4))
        width = (1 << k) - 1
        seen = set()
        while len(seen) < min(l**width, 8):
            seen.add(tuple(int(x) for x in rs.integers(1, l + 1, size=width)))
        W = step_from_structure(CombinatorialStructure(k, l, seen, symmetrize=True))
        n = 8 if k == 2 else 7
        seed = int(rs.integers(0, 10**6))
        assert sample_w(W, n, seed).sample.edges == brute_sample_w(W, n, seed).edges


def test_sample_w_full_and_empty():
    assert sample_w(builtin_w("full", 3), 9, 123).sample.edges == Hypergraph.complete(3, 9).edges
    assert sample_w(builtin_w("empty", 3), 9, 123).sample.edges == frozenset()


def test_sample_w_example1_edge_frequency():
    W = builtin_w("example1", 2)
    trials = 6000
    hits = sum(sample_w_edge_count(W, 2, s) for s in range(trials))
    se = (0.25 / trials) ** 0.5
    assert abs(hits / trials - 0.5) < 4 * se


def test_restricted_sample_is_cells_union():
    # with one level interval per class the step sample is deterministic
    W = builtin_w("example1", 2)
    for seed in range(4):
        hp = Hyperpartition.uniform_random(9, 2, 2, seed=seed)
        rec = sample_w(W, 9, seed * 7 + 1, hp=hp)
        want = cells_union(hp, structure_of(W))
        assert rec.sample.edges == want.edges
        assert rec.source["restricted"] is True
        assert "hp_digest" in rec.source


def test_edge_count_fast_path_agrees():
    C = CombinatorialStructure.from_top_labels(2, 3, {1, 3})
    W = step_from_structure(C)
    for seed in range(3):
        hp = Hyperpartition.uniform_random(30, 2, 3, seed=seed)
        assert sample_w_edge_count(W, 30, seed, hp=hp) == len(
            sample_w(W, 30, seed, hp=hp).sample.edges
        )
        assert sample_w_edge_count(W, 30, seed) == len(sample_w(W, 30, seed).sample.edges)


def test_general_predicate_path_matches_step():
    W1 = builtin_w("example1", 2)
    Wg = GeneralHypergraphon(2, lambda p: p[3] < 0.5)
    for seed in range(10):
        assert sample_w(W1, 7, seed).sample.edges == sample_w(Wg, 7, seed).sample.edges


def test_sample_record_replay_is_byte_identical():
    W1 = builtin_w("example1", 2)
    a = json.dumps(sample_w(W1, 12, 77).to_obj(), sort_keys=True)
    b = json.dumps(sample_w(W1, 12, 77).to_obj(), sort_keys=True)
    assert a == b


def test_validation_errors():
    W1 = builtin_w("example1", 2)
    with pytest.raises(ValueError):
        sample_w(W1, 9, 0, hp=Hyperpartition.uniform_random(9, 2, 3, seed=0))  # l mismatch
    Wg = GeneralHypergraphon(2, lambda p: p[3] < 0.5)
    with pytest.raises(ValueError):
        sample_w(Wg, 7, 0, hp=Hyperpartition.uniform_random(7, 2, 2, seed=0))
    with pytest.raises(ValueError):
        sample_vertex(Hypergraph(2, 0), 3, 0)


def test_coordinate_system_levels_match_rng():
    coords = CoordinateSystem(9, 2, 4242)
    offs = arity_offsets(9, 2)
    for sub in [(0,), (3,), (8,), (0, 1), (2, 7), (7, 8)]:
        ctr = offs[len(sub) - 1] + colex_rank(sub)
        h = rng.mix64(rng.derive(4242, rng.TAG_LEVELS), ctr)
        for l in (2, 3, 5):
            assert coords.level(sub, l) == rng.level_of(h, l)


def test_coordinate_system_exact_value_consistency():
    coords = CoordinateSystem(6, 2, 9)
    for sub in [(0,), (5,), (1, 4)]:
        u = coords.value(sub)
        ex = coords.exact_value(sub)
        assert 0 <= u < 1
        # float value truncates the exact rational, never rounds up
        assert u <= float(ex) and abs(u - float(ex)) < 2**-50
        for l in (2, 4, 8):
            assert coords.level(sub, l) == int(ex * l)


def test_restricted_coordinates_land_in_class_interval():
    W = builtin_w("example1", 2)
    hp = Hyperpartition.uniform_random(8, 2, 2, seed=3)
    coords = CoordinateSystem(8, 2, 11, restriction=hp)
    for sub in [(0,), (7,), (0, 3), (5, 6)]:
        g = hp.label(sub)
        ex = coords.exact_value(sub)
        assert Fraction(g - 1, 2) <= ex < Fraction(g, 2)
