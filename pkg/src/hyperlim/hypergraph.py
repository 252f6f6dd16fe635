"""Finite k-uniform hypergraphs and the exact density calculus.

A hypergraph is a set of k-element subsets of range(n); as a symmetric
repetition-free subset of n-tuples it has k! ordered edges per set. All
densities are exact rationals: t counts arbitrary maps, t0 injective maps,
and the induced variants additionally force non-edges onto non-edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from math import comb, factorial
from typing import Optional

import numpy as np

from . import kernels, rng
from .combinatorics import colex_rank, comb_table, falling, set_partitions

MAX_CANONICAL_N = 10
MAX_FAMILY_VERTICES = 5
_BLOWUP_EDGE_CAP = 10**7
_BLOWUP_VERTEX_CAP = 10**6


class Hypergraph:
    """Immutable k-uniform hypergraph on vertex set range(n)."""

    __slots__ = ("k", "n", "edges", "_member")

    def __init__(self, k: int, n: int, edges=()):
        if not isinstance(k, int) or k < 1:
            raise ValueError("k must be a positive integer")
        if not isinstance(n, int) or n < 0:
            raise ValueError("n must be a nonnegative integer")
        norm = set()
        for e in edges:
            t = tuple(sorted(int(v) for v in e))
            if len(t) != k:
                raise ValueError(f"edge {t} does not have {k} vertices")
            if len(set(t)) != k:
                raise ValueError(f"edge {t} has a repeated vertex")
            if t[0] < 0 or t[-1] >= n:
                raise ValueError(f"edge {t} leaves the vertex range 0..{n - 1}")
            norm.add(t)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "_member", None)

    def __setattr__(self, name, value):
        raise AttributeError("Hypergraph is immutable")

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.k, self.n, self.edges) == (other.k, other.n, other.edges)

    def __hash__(self):
        return hash((self.k, self.n, self.edges))

    def __repr__(self):
        return f"Hypergraph(k={self.k}, n={self.n}, edges={self.edge_count})"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def ordered_edge_count(self) -> int:
        """Size as a symmetric subset of n-tuples: k! per edge."""
        return factorial(self.k) * len(self.edges)

    def is_edge(self, subset) -> bool:
        return tuple(sorted(subset)) in self.edges

    def member_array(self) -> np.ndarray:
        """uint8 indicator over all k-subsets in colex order (cached)."""
        if self._member is None:
            m = np.zeros(comb(self.n, self.k), dtype=np.uint8)
            for e in self.edges:
                m[colex_rank(e)] = 1
            m.setflags(write=False)
            object.__setattr__(self, "_member", m)
        return self._member

    def complement(self) -> "Hypergraph":
        every = combinations(range(self.n), self.k)
        return Hypergraph(self.k, self.n, (e for e in every if e not in self.edges))

    def relabel(self, perm) -> "Hypergraph":
        perm = tuple(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        return Hypergraph(self.k, self.n, ((perm[v] for v in e) for e in self.edges))

    def sorted_edges(self) -> list:
        return sorted(self.edges, key=colex_rank)

    # constructors

    @classmethod
    def empty(cls, k, n):
        return cls(k, n)

    @classmethod
    def complete(cls, k, n):
        return cls(k, n, combinations(range(n), k))

    @classmethod
    def single_edge(cls, k):
        return cls(k, k, [tuple(range(k))])

    @classmethod
    def random(cls, k, n, p, seed):
        """Each k-subset kept independently with probability p (seeded)."""
        thr = int(Fraction(p) * (1 << 64))
        if thr < 0 or thr > 1 << 64:
            raise ValueError("p must lie in [0, 1]")
        key = rng.derive(seed, rng.TAG_INIT)
        m = comb(n, k)
        h = rng.np_mix64(key, np.arange(m, dtype=np.uint64))
        if thr >= 1 << 64:
            keep = np.ones(m, dtype=bool)
        else:
            keep = h < np.uint64(thr)
        from .combinatorics import colex_matrix

        rows = colex_matrix(n, k)[keep]
        return cls(k, n, (tuple(int(v) for v in r) for r in rows))

    # serialization

    def to_obj(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "edges": [list(e) for e in self.sorted_edges()],
        }

    @classmethod
    def from_obj(cls, obj) -> "Hypergraph":
        if not isinstance(obj, dict):
            raise ValueError("hypergraph object must be a mapping")
        for field in ("k", "n", "edges"):
            if field not in obj:
                raise ValueError(f"hypergraph object is missing field {field!r}")
        k, n, edges = obj["k"], obj["n"], obj["edges"]
        if not isinstance(edges, list):
            raise ValueError("field 'edges' must be a list")
        return cls(k, n, edges)


@dataclass(frozen=True)
class VertexPartition:
    """Partition of range(base) into disjoint nonempty blocks."""

    base: int
    blocks: tuple

    def __init__(self, base, blocks):
        blocks = tuple(
            frozenset(int(v) for v in b) for b in blocks
        )
        seen = set()
        for b in blocks:
            if not b:
                raise ValueError("blocks must be nonempty")
            if seen & b:
                raise ValueError("blocks must be disjoint")
            seen |= b
        if seen != set(range(base)):
            raise ValueError("blocks must cover range(base)")
        blocks = tuple(sorted(blocks, key=min))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "blocks", blocks)

    @property
    def height(self) -> int:
        """Number of merges: base minus block count."""
        return self.base - len(self.blocks)

    def block_of(self, v: int) -> int:
        for i, b in enumerate(self.blocks):
            if v in b:
                return i
        raise ValueError(f"vertex {v} is not in the partition base")

    def mobius_weight(self) -> int:
        """Partition-lattice Mobius weight prod (-1)^(|B|-1) (|B|-1)!."""
        w = 1
        for b in self.blocks:
            s = len(b)
            w *= (-1) ** (s - 1) * factorial(s - 1)
        return w


@dataclass(frozen=True)
class DensityRecord:
    """The four exact map densities of a pattern in a host.

    t0 and t0_ind are None when the pattern has more vertices than the host,
    where no injective map exists and the ratios are undefined.
    """

    t: Fraction
    t0: Optional[Fraction]
    t_ind: Fraction
    t0_ind: Optional[Fraction]

    @property
    def t0_defined(self) -> bool:
        return self.t0 is not None


def _check_arity(F: Hypergraph, H: Hypergraph):
    if F.k != H.k:
        raise ValueError(f"arity mismatch: pattern k={F.k}, host k={H.k}")


def _search_order(F: Hypergraph) -> list:
    """Vertex order that closes edges as early as possible (greedy)."""
    remaining = set(range(F.n))
    chosen = []
    edges = [set(e) for e in F.edges]
    while remaining:
        best, best_gain, best_deg = None, -1, -1
        for v in sorted(remaining):
            inside = set(chosen) | {v}
            gain = sum(1 for e in edges if v in e and e <= inside)
            deg = sum(1 for e in edges if v in e)
            if (gain, deg) > (best_gain, best_deg):
                best, best_gain, best_deg = v, gain, deg
        chosen.append(best)
        remaining.discard(best)
    return chosen


def _grouped_constraints(v: int, subs, order):
    """Relabel subset constraints by search order and group by closing depth.

    Returns (rows, perm_index, depth_ptr) with rows sorted so that block d
    holds the constraints whose deepest vertex has depth d.
    """
    depth = {vtx: i for i, vtx in enumerate(order)}
    items = []
    for idx, e in enumerate(subs):
        pos = tuple(depth[x] for x in e)
        items.append((max(pos), idx, pos))
    items.sort()
    rows = np.zeros((len(items), len(subs[0]) if subs else 0), dtype=np.int64)
    src = np.zeros(len(items), dtype=np.int64)
    ptr = np.zeros(v + 1, dtype=np.int64)
    for r, (d, idx, pos) in enumerate(items):
        rows[r] = pos
        src[r] = idx
        ptr[d + 1] += 1
    np.cumsum(ptr, out=ptr)
    return rows, src, ptr


def _hom_kernel(F: Hypergraph, H: Hypergraph, injective: bool) -> int:
    if F.n == 0:
        return 1
    if injective and F.n > H.n:
        return 0
    k = F.k
    edges = sorted(F.edges)
    order = _search_order(F)
    if edges:
        rows, _, ptr = _grouped_constraints(F.n, edges, order)
    else:
        rows = np.zeros((0, k), dtype=np.int64)
        ptr = np.zeros(F.n + 1, dtype=np.int64)
    ct = comb_table(max(H.n, 1), k)
    return kernels.hom_count(
        F.n, k, H.n, rows, ptr, H.member_array(), ct, injective
    )


def _induced_kernel(F: Hypergraph, H: Hypergraph, injective: bool) -> int:
    if F.n == 0:
        return 1
    if injective and F.n > H.n:
        return 0
    k = F.k
    subs = list(combinations(range(F.n), k))
    if not subs:
        # fewer than k vertices: no constraints at all
        return falling(H.n, F.n) if injective else H.n**F.n
    order = _search_order(F)
    rows, src, ptr = _grouped_constraints(F.n, subs, order)
    flags = np.array(
        [1 if F.is_edge(subs[int(i)]) else 0 for i in src], dtype=np.uint8
    )
    ct = comb_table(max(H.n, 1), k)
    return kernels.induced_count(
        F.n, k, H.n, rows, flags, ptr, H.member_array(), ct, injective
    )


def hom(F: Hypergraph, H: Hypergraph, mode: str = "all") -> int:
    """Count maps V(F) -> V(H) sending every edge of F onto an edge of H.

    mode "all" counts arbitrary maps by backtracking search. mode
    "injective" computes the injective count through partition-lattice
    inversion: sum over partitions P of V(F) of mobius_weight(P) times
    hom(F/P, H), where collapses that merge an edge contribute zero.
    """
    _check_arity(F, H)
    if mode == "all":
        return _hom_kernel(F, H, injective=False)
    if mode != "injective":
        raise ValueError(f"unknown hom mode {mode!r}")
    total = 0
    for blocks in set_partitions(tuple(range(F.n))):
        part = VertexPartition(F.n, blocks)
        Q = quotient(F, part)
        if Q is None:
            continue
        total += part.mobius_weight() * _hom_kernel(Q, H, injective=False)
    return total


def injective_hom_brute(F: Hypergraph, H: Hypergraph) -> int:
    """Direct enumeration of injective homomorphisms (inversion oracle)."""
    _check_arity(F, H)
    return _hom_kernel(F, H, injective=True)


def quotient(F: Hypergraph, partition) -> Optional[Hypergraph]:
    """Merge each block of the partition to a single vertex.

    Returns None (the degenerate marker) when some edge loses a vertex to a
    merge; such collapses carry no homomorphisms.
    """
    if not isinstance(partition, VertexPartition):
        partition = VertexPartition(F.n, partition)
    if partition.base != F.n:
        raise ValueError("partition base does not match the vertex count")
    lab = {}
    for i, b in enumerate(partition.blocks):
        for v in b:
            lab[v] = i
    edges = set()
    for e in F.edges:
        im = tuple(sorted(lab[v] for v in e))
        if len(set(im)) != F.k:
            return None
        edges.add(im)
    return Hypergraph(F.k, len(partition.blocks), edges)


def densities(F: Hypergraph, H: Hypergraph) -> DensityRecord:
    """Exact t, t0, t_ind, t0_ind of pattern F in host H."""
    _check_arity(F, H)
    if H.n == 0:
        raise ValueError("host must have at least one vertex")
    v = F.n
    t = Fraction(_hom_kernel(F, H, False), H.n**v)
    t_ind = Fraction(_induced_kernel(F, H, False), H.n**v)
    if v <= H.n:
        fall = falling(H.n, v)
        t0 = Fraction(_hom_kernel(F, H, True), fall)
        t0_ind = Fraction(_induced_kernel(F, H, True), fall)
    else:
        t0 = None
        t0_ind = None
    return DensityRecord(t=t, t0=t0, t_ind=t_ind, t0_ind=t0_ind)


def blowup(H: Hypergraph, t: int) -> Hypergraph:
    """Replace each vertex with t clones; each edge becomes t**k edges."""
    if not isinstance(t, int) or t < 1:
        raise ValueError("blowup factor must be a positive integer")
    if H.n * t > _BLOWUP_VERTEX_CAP or H.edge_count * t**H.k > _BLOWUP_EDGE_CAP:
        raise ValueError("blowup exceeds the size cap")
    edges = []
    for e in H.edges:
        for clones in product(range(t), repeat=H.k):
            edges.append(tuple(sorted(v * t + c for v, c in zip(e, clones))))
    return Hypergraph(H.k, H.n * t, edges)


# ---------------------------------------------------------------------------
# isomorphism and canonical forms

_canon_cache: dict = {}


def _encode(H: Hypergraph, perm) -> tuple:
    return tuple(sorted(tuple(sorted(perm[v] for v in e)) for e in H.edges))


def canonical_form(H: Hypergraph) -> tuple:
    """Lexicographically minimal edge encoding over all relabelings.

    Brute force over n! permutations, cached; capped at n <= 10.
    """
    if H.n > MAX_CANONICAL_N:
        raise ValueError(f"canonical form capped at n <= {MAX_CANONICAL_N}")
    key = (H.k, H.n, H.edges)
    hit = _canon_cache.get(key)
    if hit is not None:
        return hit
    best = None
    for perm in permutations(range(H.n)):
        enc = _encode(H, perm)
        if best is None or enc < best:
            best = enc
    _canon_cache[key] = best
    return best


def is_isomorphic(H1: Hypergraph, H2: Hypergraph) -> bool:
    """Backtracking vertex-bijection search with degree pruning."""
    if H1.k != H2.k or H1.n != H2.n or H1.edge_count != H2.edge_count:
        return False
    n = H1.n
    deg1 = [0] * n
    deg2 = [0] * n
    for e in H1.edges:
        for v in e:
            deg1[v] += 1
    for e in H2.edges:
        for v in e:
            deg2[v] += 1
    if sorted(deg1) != sorted(deg2):
        return False
    order = _search_order(H1)
    depth_of = {v: i for i, v in enumerate(order)}
    closing = [[] for _ in range(n)]
    for e in H1.edges:
        closing[max(depth_of[v] for v in e)].append(e)

    mapping = [-1] * n
    used = [False] * n

    def rec(d):
        if d == n:
            return True
        v = order[d]
        for w in range(n):
            if used[w] or deg1[v] != deg2[w]:
                continue
            mapping[v] = w
            used[w] = True
            ok = True
            for e in closing[d]:
                im = tuple(sorted(mapping[x] for x in e))
                if im not in H2.edges:
                    ok = False
                    break
            if ok and rec(d + 1):
                return True
            used[w] = False
            mapping[v] = -1
        return False

    return rec(0)


@lru_cache(maxsize=None)
def enumerate_canonical(k: int, v: int) -> tuple:
    """All isomorphism classes of k-uniform hypergraphs on v vertices.

    Canonical representatives, sorted by (edge count, encoding); capped at
    v <= 5 where exhaustive enumeration stays cheap.
    """
    if v > MAX_FAMILY_VERTICES:
        raise ValueError(f"enumeration capped at v <= {MAX_FAMILY_VERTICES}")
    subs = list(combinations(range(v), k))
    seen = {}
    for bits in range(1 << len(subs)):
        edges = [subs[i] for i in range(len(subs)) if bits >> i & 1]
        form = canonical_form(Hypergraph(k, v, edges))
        if form not in seen:
            seen[form] = Hypergraph(k, v, form)
    return tuple(seen[f] for f in sorted(seen, key=lambda f: (len(f), f)))


def canonical_family(k: int, max_vertices: int) -> list:
    """Concatenated canonical classes on 1..max_vertices vertices."""
    fam = []
    for v in range(1, min(max_vertices, MAX_FAMILY_VERTICES) + 1):
        fam.extend(enumerate_canonical(k, v))
    return fam


def density_equivalent(H1: Hypergraph, H2: Hypergraph, check_size: int = 10) -> bool:
    """Whether the two hosts have a common blowup (same limit object).

    Builds the cross blowups and tests isomorphism when they fit inside
    check_size vertices; otherwise falls back to comparing exact densities
    t(F, .) over every canonical pattern with at most min(check_size, 5)
    vertices, a necessary condition at any size.
    """
    _check_arity(H1, H2)
    if H1.n == 0 or H2.n == 0:
        return H1.n == H2.n
    cross = H1.n * H2.n
    if cross <= min(check_size, MAX_CANONICAL_N):
        return is_isomorphic(blowup(H1, H2.n), blowup(H2, H1.n))
    for F in canonical_family(H1.k, check_size):
        tF1 = Fraction(_hom_kernel(F, H1, False), H1.n**F.n)
        tF2 = Fraction(_hom_kernel(F, H2, False), H2.n**F.n)
        if tF1 != tF2:
            return False
    return True
