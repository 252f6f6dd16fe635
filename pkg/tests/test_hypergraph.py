import itertools
from fractions import Fraction

import pytest

from hyperlim.hypergraph import (
    Hypergraph,
    VertexPartition,
    blowup,
    canonical_family,
    canonical_form,
    densities,
    density_equivalent,
    hom,
    injective_hom_brute,
    is_isomorphic,
    quotient,
)

TRI = Hypergraph(2, 3, [(0, 1), (0, 2), (1, 2)])


def brute_record(F, H):
    v, n = F.n, H.n
    t = t_ind = t0 = t0_ind = 0
    for m in itertools.product(range(n), repeat=v):
        edges_ok = all(H.is_edge(tuple(m[x] for x in e)) for e in F.edges)
        # induced: every k-subset must land distinctly, on an edge iff F has one
        ind_ok = edges_ok
        if edges_ok:
            for s in itertools.combinations(range(v), F.k):
                img = tuple(m[x] for x in s)
                if F.is_edge(s):
                    continue  # edges_ok already enforced a distinct edge image
                if len(set(img)) < F.k or H.is_edge(img):
                    ind_ok = False
                    break
        inj = len(set(m)) == v
        t += edges_ok
        t_ind += edges_ok and ind_ok
        t0 += edges_ok and inj
        t0_ind += edges_ok and ind_ok and inj
    return t, t0, t_ind, t0_ind


def test_constructor_validation():
    with pytest.raises(ValueError):
        Hypergraph(2, 3, [(0, 0)])  # repeated vertex
    with pytest.raises(ValueError):
        Hypergraph(2, 3, [(0, 3)])  # out of range
    with pytest.raises(ValueError):
        Hypergraph(2, 3, [(0,)])  # wrong arity
    H = Hypergraph(2, 3, [(1, 0), (0, 1)])
    assert H.edge_count == 1  # unordered, deduplicated


def test_edge_queries():
    assert TRI.is_edge((2, 0))
    assert not TRI.is_edge((0, 0))
    assert TRI.ordered_edge_count == 6
    assert Hypergraph.complete(3, 5).edge_count == 10
    assert Hypergraph.empty(2, 4).edge_count == 0
    assert Hypergraph.single_edge(3).sorted_edges() == [(0, 1, 2)]
    assert TRI.complement().edge_count == 0
    assert Hypergraph.empty(2, 3).complement().edge_count == 3


def test_densities_match_brute_force():
    cases = []
    for seed in range(8):
        cases.append((Hypergraph.random(2, 3, 0.6, seed=seed), Hypergraph.random(2, 4, 0.5, seed=100 + seed)))
    for seed in range(4):
        cases.append((Hypergraph.random(3, 4, 0.5, seed=seed), Hypergraph.random(3, 4, 0.6, seed=50 + seed)))
    for F, H in cases:
        t, t0, t_ind, t0_ind = brute_record(F, H)
        rec = densities(F, H)
        assert rec.t == Fraction(t, H.n**F.n)
        assert rec.t_ind == Fraction(t_ind, H.n**F.n)
        fall = 1
        for j in range(F.n):
            fall *= H.n - j
        assert rec.t0 == Fraction(t0, fall)
        assert rec.t0_ind == Fraction(t0_ind, fall)


def test_densities_pattern_larger_than_host():
    rec = densities(Hypergraph.complete(2, 4), TRI)
    assert rec.t0 is None and rec.t0_ind is None
    assert rec.t == 0


def test_hom_injective_mode_is_mobius_inversion():
    for seed in range(10):
        F = Hypergraph.random(2, 4, 0.5, seed=seed)
        H = Hypergraph.random(2, 5, 0.5, seed=200 + seed)
        assert hom(F, H, mode="injective") == injective_hom_brute(F, H)
    F = Hypergraph.random(3, 4, 0.6, seed=1)
    H = Hypergraph.random(3, 5, 0.5, seed=2)
    assert hom(F, H, mode="injective") == injective_hom_brute(F, H)


def test_blowup_shape_and_density_invariance():
    B = blowup(TRI, 2)
    assert B.n == 6
    assert B.edge_count == 12  # 3 edges times 2*2 clone pairs
    assert densities(TRI, B).t == densities(TRI, TRI).t
    F = Hypergraph(3, 4, [(0, 1, 2), (1, 2, 3)])
    H = Hypergraph.random(3, 4, 0.5, seed=3)
    assert densities(F, blowup(H, 3)).t == densities(F, H).t


def test_quotient_identity_and_collapse():
    ident = VertexPartition(3, [(0,), (1,), (2,)])
    Q = quotient(TRI, ident)
    assert is_isomorphic(Q, TRI)
    # merging the two endpoints of an edge collapses it: no valid quotient
    merged = VertexPartition(3, [(0, 1), (2,)])
    assert quotient(TRI, merged) is None
    # merging non-adjacent vertices of a path keeps all edges
    path = Hypergraph(2, 3, [(0, 1), (1, 2)])
    Q2 = quotient(path, VertexPartition(3, [(0, 2), (1,)]))
    assert Q2 is not None and Q2.n == 2 and Q2.edge_count == 1


def test_mobius_weights_partition_lattice():
    # block of size b contributes (-1)^(b-1) * (b-1)!
    assert VertexPartition(3, [(0, 1, 2)]).mobius_weight() == 2
    assert VertexPartition(3, [(0, 1), (2,)]).mobius_weight() == -1
    assert VertexPartition(4, [(0, 1, 2, 3)]).mobius_weight() == -6
    assert VertexPartition(4, [(0, 1), (2, 3)]).mobius_weight() == 1


def test_canonical_form_invariant_under_relabeling():
    for seed in range(6):
        H = Hypergraph.random(2, 5, 0.5, seed=seed)
        perm = [(i * 3 + 1) % 5 for i in range(5)]  # a 5-cycle relabeling
        P = H.relabel(perm)
        assert canonical_form(H) == canonical_form(P)
        assert is_isomorphic(H, P)
    assert not is_isomorphic(TRI, Hypergraph(2, 3, [(0, 1), (1, 2)]))


def test_canonical_family_counts_match_known_values():
    # unlabeled graph counts: 2 on 2 vertices, 4 on 3, 11 on 4
    fam4 = canonical_family(2, 4)
    by_n = {}
    for G in fam4:
        by_n[G.n] = by_n.get(G.n, 0) + 1
    assert by_n[2] == 2 and by_n[3] == 4 and by_n[4] == 11
    keyed = {(G.n, canonical_form(G)) for G in fam4}
    assert len(keyed) == len(fam4)


def test_density_equivalent_blowups_and_distinct():
    assert density_equivalent(TRI, blowup(TRI, 2))
    assert not density_equivalent(TRI, Hypergraph.empty(2, 3))


def test_serialization_roundtrip():
    H = Hypergraph.random(3, 6, 0.4, seed=12)
    obj = H.to_obj()
    back = Hypergraph.from_obj(obj)
    assert back.k == H.k and back.n == H.n and back.sorted_edges() == H.sorted_edges()
