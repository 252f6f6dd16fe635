"""Layered partitions of bounded-arity subsets and cell structures.

A hyperpartition assigns one of l labels to every nonempty subset of
range(n) of size at most k, stored per arity as a flat array in colex
order. Ordered k-tuples with distinct entries then acquire a cell
coordinate: the tuple of labels of their position subsets. A combinatorial
structure is a permutation-closed set of cells; its union pulled back
through a hyperpartition is an ordinary hypergraph.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb
from typing import Optional

import numpy as np

from . import kernels, rng
from .combinatorics import (
    arity_offsets,
    cell_orbit,
    colex_matrix,
    colex_rank,
    colex_rank_rows,
    comb_table,
    falling,
    mask_bits,
    subsets_colex,
)
from .hypergraph import Hypergraph

_MEMBER_CAP = 1 << 24
_EXACT_CAP = 5 * 10**8


def _cell_code(cell, l: int) -> int:
    code = 0
    p = 1
    for x in cell:
        code += (x - 1) * p
        p *= l
    return code


class Hyperpartition:
    """Labels in 1..l for every subset of range(n) of arity 1..k."""

    __slots__ = ("n", "k", "l", "labels")

    def __init__(self, n: int, k: int, l: int, labels):
        if k < 1 or l < 1 or n < 0:
            raise ValueError("need n >= 0, k >= 1, l >= 1")
        store = {}
        for r in range(1, k + 1):
            want = comb(n, r)
            if r not in labels and str(r) not in labels:
                if want == 0:
                    store[r] = np.zeros(0, dtype=np.int64)
                    continue
                raise ValueError(f"labels missing arity {r}")
            arr = np.asarray(labels[r] if r in labels else labels[str(r)], dtype=np.int64)
            if arr.shape != (want,):
                raise ValueError(
                    f"labels[{r}] must have length {want}, got {arr.shape}"
                )
            if want and (arr.min() < 1 or arr.max() > l):
                raise ValueError(f"labels[{r}] must take values in 1..{l}")
            arr = arr.copy()
            arr.setflags(write=False)
            store[r] = arr
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "labels", store)

    def __setattr__(self, name, value):
        raise AttributeError("Hyperpartition is immutable")

    def __eq__(self, other):
        if not isinstance(other, Hyperpartition):
            return NotImplemented
        return (
            (self.n, self.k, self.l) == (other.n, other.k, other.l)
            and all(np.array_equal(self.labels[r], other.labels[r]) for r in self.labels)
        )

    def __repr__(self):
        return f"Hyperpartition(n={self.n}, k={self.k}, l={self.l})"

    def label(self, subset) -> int:
        t = tuple(sorted(subset))
        if len(set(t)) != len(t):
            raise ValueError("subset has repeated vertices")
        return int(self.labels[len(t)][colex_rank(t)])

    def flat_labels(self) -> np.ndarray:
        """All labels concatenated by arity; index = global subset counter."""
        return np.concatenate([self.labels[r] for r in range(1, self.k + 1)])

    def class_sizes(self, r: int) -> np.ndarray:
        return np.bincount(self.labels[r], minlength=self.l + 1)[1:]

    def class_hypergraph(self, r: int, j: int) -> Hypergraph:
        """The r-uniform hypergraph formed by the subsets labeled j."""
        rows = colex_matrix(self.n, r)[self.labels[r] == j]
        return Hypergraph(r, self.n, (tuple(int(v) for v in x) for x in rows))

    def equitability_deficit(self) -> Fraction:
        """Largest normalized class-size gap over all arities."""
        worst = Fraction(0)
        for r in range(1, self.k + 1):
            total = comb(self.n, r)
            if total == 0:
                continue
            sizes = self.class_sizes(r)
            gap = Fraction(int(sizes.max() - sizes.min()), total)
            worst = max(worst, gap)
        return worst

    @classmethod
    def uniform_random(cls, n, k, l, seed):
        """Independent uniform labels, one hash counter per subset."""
        key = rng.derive(seed, rng.TAG_PARTITION)
        offs = arity_offsets(n, k)
        labels = {}
        for r in range(1, k + 1):
            m = comb(n, r)
            ctr = np.arange(offs[r - 1], offs[r - 1] + m, dtype=np.uint64)
            labels[r] = rng.np_level_of(rng.np_mix64(key, ctr), l) + 1
        return cls(n, k, l, labels)

    @classmethod
    def round_robin(cls, n, k, l):
        """Deterministic equitable labels: colex rank modulo l, plus one."""
        return cls(
            n, k, l,
            {r: np.arange(comb(n, r), dtype=np.int64) % l + 1 for r in range(1, k + 1)},
        )

    def to_obj(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "l": self.l,
            "labels": {str(r): [int(x) for x in self.labels[r]] for r in range(1, self.k + 1)},
        }

    @classmethod
    def from_obj(cls, obj) -> "Hyperpartition":
        if not isinstance(obj, dict):
            raise ValueError("hyperpartition object must be a mapping")
        for field in ("n", "k", "l", "labels"):
            if field not in obj:
                raise ValueError(f"hyperpartition object is missing field {field!r}")
        return cls(obj["n"], obj["k"], obj["l"], obj["labels"])


def cell_coordinate(hp: Hyperpartition, tup) -> tuple:
    """Cell of an ordered tuple of k distinct vertices.

    Position mask m (bit i-1 for position i) maps to the label of the
    vertex subset sitting at those positions; entry m-1 of the result.
    """
    t = tuple(int(v) for v in tup)
    if len(t) != hp.k:
        raise ValueError(f"tuple must have {hp.k} entries")
    if len(set(t)) != hp.k:
        raise ValueError("tuple has repeated vertices")
    out = []
    for m in range(1, 1 << hp.k):
        sub = tuple(sorted(t[b] for b in mask_bits(m)))
        out.append(hp.label(sub))
    return tuple(out)


class CombinatorialStructure:
    """Permutation-closed set of cells over labels 1..l at arity k."""

    __slots__ = ("k", "l", "cells", "_member")

    def __init__(self, k: int, l: int, cells, symmetrize: bool = False):
        if k < 1 or l < 1:
            raise ValueError("need k >= 1 and l >= 1")
        width = (1 << k) - 1
        norm = set()
        for c in cells:
            c = tuple(int(x) for x in c)
            if len(c) != width:
                raise ValueError(f"cell {c} must have {width} entries")
            if any(not 1 <= x <= l for x in c):
                raise ValueError(f"cell {c} has labels outside 1..{l}")
            norm.add(c)
        if symmetrize:
            closed = set()
            for c in norm:
                closed |= cell_orbit(c, k)
            norm = closed
        else:
            for c in norm:
                if not cell_orbit(c, k) <= norm:
                    raise ValueError(
                        f"cells not S_k-closed: {c} present without its"
                        " coordinate permutations (pass symmetrize=True)"
                    )
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "cells", frozenset(norm))
        object.__setattr__(self, "_member", None)

    def __setattr__(self, name, value):
        raise AttributeError("CombinatorialStructure is immutable")

    def __eq__(self, other):
        if not isinstance(other, CombinatorialStructure):
            return NotImplemented
        return (self.k, self.l, self.cells) == (other.k, other.l, other.cells)

    def __hash__(self):
        return hash((self.k, self.l, self.cells))

    def __repr__(self):
        return f"CombinatorialStructure(k={self.k}, l={self.l}, cells={len(self.cells)})"

    @property
    def measure(self) -> Fraction:
        return Fraction(len(self.cells), self.l ** ((1 << self.k) - 1))

    def member_table(self) -> np.ndarray:
        """uint8 indicator over mixed-radix cell codes (cached)."""
        if self._member is None:
            size = self.l ** ((1 << self.k) - 1)
            if size > _MEMBER_CAP:
                raise ValueError("cell table exceeds the size cap")
            m = np.zeros(size, dtype=np.uint8)
            for c in self.cells:
                m[_cell_code(c, self.l)] = 1
            m.setflags(write=False)
            object.__setattr__(self, "_member", m)
        return self._member

    @classmethod
    def all_cells(cls, k, l):
        from itertools import product as iproduct

        return cls(k, l, iproduct(range(1, l + 1), repeat=(1 << k) - 1))

    @classmethod
    def empty(cls, k, l):
        return cls(k, l, ())

    @classmethod
    def from_top_labels(cls, k, l, top_labels):
        """Cells whose full-mask label lies in top_labels (always closed)."""
        from itertools import product as iproduct

        tops = set(int(x) for x in top_labels)
        width = (1 << k) - 1
        cells = []
        for lower in iproduct(range(1, l + 1), repeat=width - 1):
            for t in tops:
                cells.append(lower + (t,))
        return cls(k, l, cells)

    def to_obj(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "cells": [
                {str(m + 1): c[m] for m in range(len(c))} for c in sorted(self.cells)
            ],
        }

    @classmethod
    def from_obj(cls, obj, symmetrize: bool = False) -> "CombinatorialStructure":
        if not isinstance(obj, dict):
            raise ValueError("structure object must be a mapping")
        for field in ("k", "l", "cells"):
            if field not in obj:
                raise ValueError(f"structure object is missing field {field!r}")
        k = obj["k"]
        width = (1 << k) - 1
        cells = []
        for i, c in enumerate(obj["cells"]):
            if not isinstance(c, dict):
                raise ValueError(f"cells[{i}] must be a mapping of mask to label")
            try:
                cells.append(tuple(c[str(m)] for m in range(1, width + 1)))
            except KeyError as exc:
                raise ValueError(f"cells[{i}] is missing mask {exc.args[0]}") from None
        return cls(k, obj["l"], cells, symmetrize=symmetrize)


@lru_cache(maxsize=8)
def subset_rank_matrix(n: int, k: int) -> dict:
    """For each position mask, colex ranks of that sub-subset per k-subset."""
    km = colex_matrix(n, k)
    ct = comb_table(max(n, 1), k)
    out = {}
    for m in range(1, 1 << k):
        bits = mask_bits(m)
        ranks = colex_rank_rows(km[:, bits], ct)
        ranks.setflags(write=False)
        out[m] = ranks
    return out


def cells_union(hp: Hyperpartition, structure: CombinatorialStructure) -> Hypergraph:
    """Hypergraph of the k-subsets whose sorted-tuple cell lies in the
    structure (well defined because the structure is permutation-closed)."""
    if hp.k != structure.k or hp.l != structure.l:
        raise ValueError("hyperpartition and structure disagree on (k, l)")
    n, k, l = hp.n, hp.k, hp.l
    m_rows = comb(n, k)
    if m_rows == 0:
        return Hypergraph(k, n)
    srm = subset_rank_matrix(n, k)
    code = np.zeros(m_rows, dtype=np.int64)
    p = 1
    for m in range(1, 1 << k):
        r = len(mask_bits(m))
        code += (hp.labels[r][srm[m]] - 1) * p
        p *= l
    mask = structure.member_table()[code] != 0
    rows = colex_matrix(n, k)[mask]
    return Hypergraph(k, n, (tuple(int(v) for v in x) for x in rows))


# ---------------------------------------------------------------------------
# densities against structures


@dataclass(frozen=True)
class LevelMapDistribution:
    """Finitely supported distribution over label maps of a small base set.

    Rows of maps assign a label to every subset of range(v) of arity 1..k
    (arity-major colex order, as listed in simplices); counts carry the
    weight of each row out of total.
    """

    v: int
    k: int
    l: int
    simplices: tuple
    maps: np.ndarray
    counts: np.ndarray
    total: int

    def index(self, subset) -> int:
        return self.simplices.index(tuple(sorted(subset)))

    def tv_distance(self, other: "LevelMapDistribution") -> Fraction:
        """Total variation distance between two map distributions."""
        if (self.v, self.k, self.l) != (other.v, other.k, other.l):
            raise ValueError("distributions live on different map spaces")
        a = {tuple(r): int(c) for r, c in zip(self.maps.tolist(), self.counts.tolist())}
        b = {tuple(r): int(c) for r, c in zip(other.maps.tolist(), other.counts.tolist())}
        gap = Fraction(0)
        for key in set(a) | set(b):
            gap += abs(
                Fraction(a.get(key, 0), self.total) - Fraction(b.get(key, 0), other.total)
            )
        return gap / 2


def _level_simplices(v: int, k: int) -> tuple:
    out = []
    for r in range(1, min(k, v) + 1):
        out.extend(subsets_colex(v, r))
    return tuple(out)


def empirical_level_maps(
    v: int,
    hp: Hyperpartition,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    exhaustive: bool = False,
) -> LevelMapDistribution:
    """Distribution of the label map pulled back along a random injection.

    A uniform injective map g of range(v) into the partition's ground set
    induces subset labels S -> label(g(S)); this returns its distribution,
    exactly (all injections) or empirically (seeded sample).
    """
    n, k, l = hp.n, hp.k, hp.l
    if v > n:
        raise ValueError("need v <= n for injective maps")
    if exhaustive:
        if falling(n, v) > 10**6:
            raise ValueError("too many injections for exhaustive enumeration")
        picks = np.array(list(permutations(range(n), v)), dtype=np.int64)
        picks = picks.reshape(-1, v)
    else:
        if samples is None or seed is None:
            raise ValueError("sampled mode needs samples and seed")
        key = rng.derive(seed, rng.TAG_MAPS)
        picks = kernels.injective_maps(samples, v, n, key)
    simplices = _level_simplices(v, k)
    ct = comb_table(max(n, 1), k)
    cols = []
    for s in simplices:
        sub = np.sort(picks[:, list(s)], axis=1)
        cols.append(hp.labels[len(s)][colex_rank_rows(sub, ct)])
    maps = np.stack(cols, axis=1) if cols else np.zeros((picks.shape[0], 0), np.int64)
    rows, counts = np.unique(maps, axis=0, return_counts=True)
    return LevelMapDistribution(
        v=v,
        k=k,
        l=l,
        simplices=simplices,
        maps=rows,
        counts=counts.astype(np.int64),
        total=int(picks.shape[0]),
    )


def _constraints(F: Hypergraph, induced: bool):
    if induced:
        cons = list(combinations(range(F.n), F.k))
        flags = [F.is_edge(c) for c in cons]
    else:
        cons = F.sorted_edges()
        flags = [True] * len(cons)
    return cons, flags


def structure_density(
    F: Hypergraph,
    structure: CombinatorialStructure,
    distribution: Optional[LevelMapDistribution] = None,
    *,
    induced: bool = False,
) -> Fraction:
    """Probability that a random label map realizes F inside the structure.

    Under the uniform map (distribution None) this is exact by dynamic
    enumeration over the labels of the proper sub-simplices: tops of
    distinct constraints are distinct, so each constraint contributes an
    independent count of admissible top labels. With a distribution, the
    probability is taken under its weights instead.
    """
    if F.k != structure.k:
        raise ValueError(f"arity mismatch: pattern k={F.k}, structure k={structure.k}")
    k, l = structure.k, structure.l
    cons, flags = _constraints(F, induced)
    if distribution is not None:
        return _distribution_density(F, structure, distribution, cons, flags)
    if not cons:
        return Fraction(1)
    lower_set = set()
    for c in cons:
        for r in range(1, k):
            lower_set.update(combinations(c, r))
    lower = sorted(lower_set, key=lambda s: (len(s), colex_rank(s)))
    idx = {s: i for i, s in enumerate(lower)}
    n_low = len(lower)
    if l**n_low > _EXACT_CAP:
        raise ValueError("exact structure density instance too large")
    low_masks = [m for m in range(1, (1 << k) - 1)]
    width = len(low_masks)
    member = structure.member_table()
    cidx = np.zeros((len(cons), width), dtype=np.int64)
    wtab = np.zeros((len(cons), l**width), dtype=np.int64)
    full = (1 << k) - 1
    for ci, c in enumerate(cons):
        for j, m in enumerate(low_masks):
            cidx[ci, j] = idx[tuple(c[b] for b in mask_bits(m))]
        cell = [0] * full
        for q in range(l**width):
            qq = q
            for j in range(width):
                cell[low_masks[j] - 1] = qq % l + 1
                qq //= l
            cnt = 0
            for top in range(1, l + 1):
                cell[full - 1] = top
                if member[_cell_code(cell, l)]:
                    cnt += 1
            wtab[ci, q] = cnt if flags[ci] else l - cnt
    count = kernels.structure_count(n_low, l, cidx, wtab)
    return Fraction(count, l ** (n_low + len(cons)))


def _distribution_density(F, structure, dist, cons, flags):
    if dist.v != F.n or dist.k != structure.k or dist.l != structure.l:
        raise ValueError("distribution does not match the pattern and structure")
    if not cons:
        return Fraction(1)
    member = structure.member_table()
    l = structure.l
    k = structure.k
    rows = dist.maps
    good = np.ones(rows.shape[0], dtype=bool)
    for c, flag in zip(cons, flags):
        code = np.zeros(rows.shape[0], dtype=np.int64)
        p = 1
        for m in range(1, 1 << k):
            sub = tuple(c[b] for b in mask_bits(m))
            code += (rows[:, dist.index(sub)] - 1) * p
            p *= l
        inm = member[code] != 0
        good &= inm if flag else ~inm
    hit = int(dist.counts[good].sum())
    return Fraction(hit, dist.total)


# ---------------------------------------------------------------------------
# cylinder regularity


@lru_cache(maxsize=8)
def _drop_rank_matrix(n: int, r: int) -> np.ndarray:
    """Entry [i, j]: colex rank of subset i with its j-th element removed."""
    km = colex_matrix(n, r)
    ct = comb_table(max(n, 1), r)
    m_rows = km.shape[0]
    out = np.zeros((m_rows, r), dtype=np.int64)
    for j in range(r):
        rank = np.zeros(m_rows, dtype=np.int64)
        pos = 0
        for i in range(r):
            if i == j:
                continue
            rank += ct[km[:, i], pos + 1]
            pos += 1
        out[:, j] = rank
    out.setflags(write=False)
    return out


def _cylinder_arrays(n: int, r: int, family, seed):
    """Normalize a cylinder family to tuples of bool arrays over C(n, r-1)."""
    base = comb(n, r - 1)
    if isinstance(family, int):
        if family < 1:
            raise ValueError("need at least one sampled cylinder")
        if seed is None:
            raise ValueError("sampled cylinders need a seed")
        fams = []
        for c in range(family):
            parts = []
            for i in range(r):
                key = rng.derive(seed, rng.TAG_CYLINDER, c * r + i)
                h = rng.np_mix64(key, np.arange(base, dtype=np.uint64))
                parts.append((h >> np.uint64(63)) != 0)
            fams.append(tuple(parts))
        return fams
    fams = []
    for tup in family:
        tup = tuple(tup)
        if len(tup) != r:
            raise ValueError(f"each cylinder needs {r} parts")
        parts = []
        for part in tup:
            if isinstance(part, Hypergraph):
                if part.k != r - 1 or part.n != n:
                    raise ValueError("cylinder part has the wrong arity or ground set")
                arr = part.member_array() != 0
            else:
                arr = np.zeros(base, dtype=bool)
                for s in part:
                    arr[colex_rank(tuple(sorted(s)))] = True
            parts.append(arr)
        fams.append(tuple(parts))
    if not fams:
        raise ValueError("cylinder family must be nonempty")
    return fams


def regularity_deficit(G: Hypergraph, cylinders, eps, seed=None) -> Fraction:
    """Worst density deviation of G inside large cylinder intersections.

    A cylinder is built from r parts of arity r-1: a subset S belongs to it
    when some ordering of its r faces hits the parts one each. Only
    cylinders holding at least eps * C(n, r) subsets count; arity-1 graphs
    have only trivial cylinders and report zero.
    """
    r = G.k
    n = G.n
    eps = Fraction(eps)
    if r == 1:
        return Fraction(0)
    total = comb(n, r)
    if total == 0:
        return Fraction(0)
    fams = _cylinder_arrays(n, r, cylinders, seed)
    drm = _drop_rank_matrix(n, r)
    g_mask = G.member_array() != 0
    g_dens = Fraction(G.edge_count, total)
    worst = Fraction(0)
    # face j of a sorted subset drops the j-th smallest element
    for parts in fams:
        in_l = np.zeros(total, dtype=bool)
        for tau in permutations(range(r)):
            conj = np.ones(total, dtype=bool)
            for i in range(r):
                conj &= parts[tau[i]][drm[:, i]]
                if not conj.any():
                    break
            in_l |= conj
            if in_l.all():
                break
        size = int(in_l.sum())
        if Fraction(size, total) < eps or size == 0:
            continue
        inter = int((g_mask & in_l).sum())
        dev = abs(g_dens - Fraction(inter, size))
        worst = max(worst, dev)
    return worst
