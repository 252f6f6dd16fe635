"""Heuristic regular decomposition of a finite hypergraph.

refine searches for an l-hyperpartition plus combinatorial structure whose
cell union reproduces the input up to a small edit density. The structure
step is exactly optimal for fixed labels (per-orbit majority vote); the
label step is a colex-ordered sweep of single-subset relabelings. Nothing
here certifies the existence theorems; the report carries estimates only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Optional

import numpy as np

from . import rng
from .combinatorics import (
    arity_offsets,
    cell_orbit,
    colex_matrix,
    colex_rank_rows,
    comb_table,
    mask_bits,
    mask_image,
    position_perms,
)
from .hypergraph import Hypergraph
from .hyperpartition import (
    CombinatorialStructure,
    Hyperpartition,
    cells_union,
    regularity_deficit,
)

_EXHAUSTIVE_CAP = 10**7


@dataclass(frozen=True)
class DecompositionReport:
    hp: Hyperpartition
    structure: CombinatorialStructure
    eps: Fraction
    delta: Fraction
    seed: int
    trace: list = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "hp": self.hp.to_obj(),
            "structure": self.structure.to_obj(),
            "eps": f"{self.eps.numerator}/{self.eps.denominator}",
            "delta": f"{self.delta.numerator}/{self.delta.denominator}",
            "seed": self.seed,
            "trace": list(self.trace),
        }


def _subset_index_matrix(n: int, k: int) -> np.ndarray:
    """Global subset index of every proper-or-full mask of every k-set."""
    rows = colex_matrix(n, k)
    width = (1 << k) - 1
    offs = arity_offsets(n, k)
    ct = comb_table(max(n, 1), k)
    out = np.empty((rows.shape[0], width), dtype=np.int64)
    for m in range(1, width + 1):
        cols = list(mask_bits(m))
        sub = rows[:, cols]
        out[:, m - 1] = offs[len(cols) - 1] + colex_rank_rows(sub, ct)
    return out


def _perm_weight_vectors(k: int, l: int) -> np.ndarray:
    """Row p: weight of digit position m-1 in the p-permuted cell code."""
    perms = position_perms(k)
    width = (1 << k) - 1
    w = np.empty((len(perms), width), dtype=np.int64)
    for p, perm in enumerate(perms):
        for m in range(1, width + 1):
            w[p, m - 1] = l ** (mask_image(m, perm) - 1)
    return w


def _decode_cell(code: int, k: int, l: int) -> tuple:
    width = (1 << k) - 1
    return tuple((code // l**i) % l + 1 for i in range(width))


def _majority_structure(digits, edge, k, l, wvec):
    """Per-orbit majority vote: include an orbit iff over half of the k-sets
    landing in it are edges (ties excluded). Optimal for fixed labels."""
    codes_all = digits @ wvec.T
    canon = codes_all.min(axis=1)
    uniq, inv = np.unique(canon, return_inverse=True)
    sizes = np.bincount(inv)
    edges_in = np.bincount(inv, weights=edge).astype(np.int64)
    cells = set()
    for idx in np.flatnonzero(2 * edges_in > sizes):
        cells |= cell_orbit(_decode_cell(int(uniq[idx]), k, l), k)
    return CombinatorialStructure(k, l, cells)


def _partition_delta(hp, cylinder_samples, eps_cut, seed):
    delta = hp.equitability_deficit()
    for r in range(2, hp.k + 1):
        for j in range(1, hp.l + 1):
            d = regularity_deficit(
                hp.class_hypergraph(r, j),
                cylinder_samples,
                eps_cut,
                seed=rng.derive(seed, rng.TAG_CYLINDER, r, j),
            )
            if d > delta:
                delta = d
    return delta


def _labels_to_hp(n, k, l, labels_flat):
    offs = arity_offsets(n, k)
    labels = {}
    for r in range(1, k + 1):
        labels[r] = labels_flat[offs[r - 1] : offs[r]]
    return Hyperpartition(n, k, l, labels)


class _SearchState:
    """Mutable labels + derived row codes with incremental move evaluation."""

    def __init__(self, H, l, subidx, lpow):
        self.H = H
        self.n, self.k, self.l = H.n, H.k, l
        self.subidx = subidx
        self.lpow = lpow
        self.edge = H.member_array().astype(np.int64)
        self.nrows = subidx.shape[0]
        self.offs = arity_offsets(self.n, self.k)
        self.total = self.offs[-1]
        # CSR of (row, digit weight) per global subset index
        flat = subidx.ravel()
        order = np.argsort(flat, kind="stable")
        self.csr_rows = np.repeat(np.arange(self.nrows, dtype=np.int64), subidx.shape[1])[order]
        self.csr_wts = np.tile(lpow, self.nrows)[order]
        self.indptr = np.searchsorted(flat[order], np.arange(self.total + 1))
        self.labels = None
        self.codes = None
        self.member = None

    def set_labels(self, labels_flat):
        self.labels = labels_flat
        self.codes = (self.labels[self.subidx] - 1) @ self.lpow

    def set_structure(self, structure):
        self.member = structure.member_table().astype(np.int64)

    def eps_count(self) -> int:
        return int((self.edge != self.member[self.codes]).sum())

    def digits(self):
        return self.labels[self.subidx] - 1

    def arity_counts(self):
        out = []
        for r in range(1, self.k + 1):
            seg = self.labels[self.offs[r - 1] : self.offs[r]]
            out.append(np.bincount(seg, minlength=self.l + 1)[1:].astype(np.int64))
        return out

    def sweep(self, lam: Fraction) -> int:
        """One colex-ordered pass of single-subset relabel moves. A move is
        accepted iff the objective eps + lam*equitability strictly drops and
        eps itself does not increase. Returns accepted-move count."""
        if self.l == 1:
            return 0
        counts = self.arity_counts()
        csizes = [comb(self.n, r) for r in range(1, self.k + 1)]

        def arity_def(r_idx):
            c = counts[r_idx]
            return Fraction(int(c.max() - c.min()), csizes[r_idx])

        defs = [arity_def(i) for i in range(self.k)]
        eps_cnt = self.eps_count()
        accepted = 0
        for r in range(1, self.k + 1):
            for g in range(self.offs[r - 1], self.offs[r]):
                a = int(self.labels[g])
                lo, hi = self.indptr[g], self.indptr[g + 1]
                rows = self.csr_rows[lo:hi]
                wts = self.csr_wts[lo:hi]
                cur_codes = self.codes[rows]
                cur_bad = int((self.edge[rows] != self.member[cur_codes]).sum())
                cur_equit = max(defs)
                cur_obj = Fraction(eps_cnt, self.nrows) + lam * cur_equit
                best = None
                for b in range(1, self.l + 1):
                    if b == a:
                        continue
                    new_codes = cur_codes + (b - a) * wts
                    new_bad = int((self.edge[rows] != self.member[new_codes]).sum())
                    new_eps = eps_cnt - cur_bad + new_bad
                    if new_eps > eps_cnt:
                        continue
                    c = counts[r - 1].copy()
                    c[a - 1] -= 1
                    c[b - 1] += 1
                    new_def = Fraction(int(c.max() - c.min()), csizes[r - 1])
                    new_equit = max(max(d for i, d in enumerate(defs) if i != r - 1), new_def) if self.k > 1 else new_def
                    new_obj = Fraction(new_eps, self.nrows) + lam * new_equit
                    if new_obj < cur_obj and (best is None or new_obj < best[0]):
                        best = (new_obj, b, new_codes, new_eps, new_def)
                if best is not None:
                    _, b, new_codes, new_eps, new_def = best
                    self.labels[g] = b
                    self.codes[rows] = new_codes
                    counts[r - 1][a - 1] -= 1
                    counts[r - 1][b - 1] += 1
                    defs[r - 1] = new_def
                    eps_cnt = new_eps
                    accepted += 1
        return accepted


def _random_labels(n, k, l, seed) -> np.ndarray:
    gen = np.random.Generator(np.random.PCG64(seed))
    total = arity_offsets(n, k)[-1]
    return gen.integers(1, l + 1, size=total, dtype=np.int64)


def refine(
    H: Hypergraph,
    l: int,
    iterations: int = 12,
    cylinder_samples: int = 32,
    seed: int = 0,
    *,
    lam: Fraction = Fraction(1, 10),
    eps_cut: Fraction = Fraction(1, 10),
    exhaustive: bool = False,
    structure: Optional[CombinatorialStructure] = None,
) -> DecompositionReport:
    """Search for an (hp, structure) pair approximating H in edit density.

    Alternates an exact majority choice of the structure with local
    relabeling sweeps, restarting from fresh random labels when stuck; the
    best snapshot wins. Passing structure= pins the structure and searches
    labels only. exhaustive=True (k = 2 only) scans every vertex labeling
    and orbit structure with per-pair optimal labels instead.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if H.n < H.k:
        raise ValueError("need n >= k")
    if structure is not None and (structure.k != H.k or structure.l != l):
        raise ValueError("pinned structure must match k and l")
    if exhaustive:
        if structure is not None:
            raise ValueError("exhaustive mode searches structures itself")
        return _refine_exhaustive(H, l, cylinder_samples, seed, eps_cut)
    n, k = H.n, H.k
    width = (1 << k) - 1
    lpow = l ** np.arange(width, dtype=np.int64)
    subidx = _subset_index_matrix(n, k)
    wvec = _perm_weight_vectors(k, l)
    state = _SearchState(H, l, subidx, lpow)
    best = None
    trace = []
    ridx = 0
    state.set_labels(_random_labels(n, k, l, rng.derive(seed, rng.TAG_INIT, ridx)))
    it = 0
    while it < iterations:
        if structure is not None:
            current = structure
        else:
            current = _majority_structure(state.digits(), state.edge, k, l, wvec)
        state.set_structure(current)
        accepted = state.sweep(lam)
        eps_cnt = state.eps_count()
        if best is None or eps_cnt < best[0]:
            best = (eps_cnt, state.labels.copy(), current)
        trace.append(
            {
                "restart": ridx,
                "iteration": it,
                "eps": f"{Fraction(eps_cnt, state.nrows)}",
                "accepted": accepted,
                "best_eps": f"{Fraction(best[0], state.nrows)}",
            }
        )
        it += 1
        if best[0] == 0:
            break
        if accepted == 0:
            # local optimum for this start; spend remaining budget elsewhere
            ridx += 1
            state.set_labels(_random_labels(n, k, l, rng.derive(seed, rng.TAG_INIT, ridx)))
    eps_cnt, labels, structure = best
    hp = _labels_to_hp(n, k, l, labels)
    eps = Fraction(eps_cnt, comb(n, k))
    delta = _partition_delta(hp, cylinder_samples, eps_cut, seed)
    return DecompositionReport(
        hp=hp, structure=structure, eps=eps, delta=delta, seed=seed, trace=trace
    )


def _refine_exhaustive(H, l, cylinder_samples, seed, eps_cut):
    if H.k != 2:
        raise ValueError("exhaustive mode supports k = 2 only")
    n = H.n
    orbit_reps = [(a, b, c) for a in range(1, l + 1) for b in range(a, l + 1) for c in range(1, l + 1)]
    n_orb = len(orbit_reps)
    if (l**n) * (1 << n_orb) > _EXHAUSTIVE_CAP:
        raise ValueError("exhaustive search space exceeds the cap")
    pair_class = {}
    for i, (a, b, c) in enumerate(orbit_reps):
        pair_class.setdefault((a, b), []).append((c, i))
    classes = sorted(pair_class)
    cidx = {ab: i for i, ab in enumerate(classes)}
    edges = H.edges
    best = None
    for vl in product(range(1, l + 1), repeat=n):
        ne = np.zeros(len(classes), dtype=np.int64)
        nn = np.zeros(len(classes), dtype=np.int64)
        for u, v in combinations(range(n), 2):
            ab = (min(vl[u], vl[v]), max(vl[u], vl[v]))
            if (u, v) in edges:
                ne[cidx[ab]] += 1
            else:
                nn[cidx[ab]] += 1
        for smask in range(1 << n_orb):
            miss = 0
            for ci, ab in enumerate(classes):
                in_c = sum(1 for (c, i) in pair_class[ab] if smask >> i & 1)
                if in_c == 0:
                    miss += int(ne[ci])
                if in_c == l:
                    miss += int(nn[ci])
                if best is not None and miss >= best[0]:
                    break
            if best is None or miss < best[0]:
                best = (miss, vl, smask)
                if miss == 0:
                    break
        if best[0] == 0:
            break
    miss, vl, smask = best
    cells = set()
    for i, rep in enumerate(orbit_reps):
        if smask >> i & 1:
            cells |= cell_orbit(rep, 2)
    structure = CombinatorialStructure(2, l, cells)
    vert = np.array(vl, dtype=np.int64)
    pair_labels = np.empty(comb(n, 2), dtype=np.int64)
    rows = colex_matrix(n, 2)
    for idx in range(rows.shape[0]):
        u, v = int(rows[idx, 0]), int(rows[idx, 1])
        ab = (min(vl[u], vl[v]), max(vl[u], vl[v]))
        is_edge = (u, v) in edges
        chosen = 1
        for c, _ in pair_class[ab]:
            a0, b0 = ab
            inside = (a0, b0, c) in cells or (b0, a0, c) in cells
            if inside == is_edge:
                chosen = c
                break
        pair_labels[idx] = chosen
    hp = Hyperpartition(n, 2, l, {1: vert, 2: pair_labels})
    eps = Fraction(miss, comb(n, 2))
    check = cells_union(hp, structure)
    assert Fraction(len(check.edges ^ H.edges), comb(n, 2)) == eps
    delta = _partition_delta(hp, cylinder_samples, eps_cut, seed)
    trace = [{"mode": "exhaustive", "labelings": l**n, "structures": 1 << n_orb}]
    return DecompositionReport(
        hp=hp, structure=structure, eps=eps, delta=delta, seed=seed, trace=trace
    )
