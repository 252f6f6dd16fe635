"""Distances between hypergraphs and between step hypergraphons.

Four notions live here: the box-measure distance d1 (exact on a common
refinement, or estimated), a density lower bound delta_w_lower, a searched
relabeling upper bound delta1_upper, and a grid estimate of the sampling
metric on finite hypergraphs. closeness certifies a (hypergraph, structure,
hyperpartition) triple. Every report labels its guarantee honestly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from math import comb, factorial, lcm
from typing import Optional

import numpy as np

from . import rng
from .combinatorics import mask_bits
from .hypergraph import Hypergraph, densities, density_equivalent, enumerate_canonical
from .hyperpartition import CombinatorialStructure, cells_union, regularity_deficit
from .hypergraphon import StepHypergraphon, density, structure_of

_REFINE_CAP = 1 << 22


@dataclass(frozen=True)
class DistanceReport:
    value: object
    kind: str
    witness: object = None
    budget: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def to_obj(self) -> dict:
        v = self.value
        if isinstance(v, Fraction):
            v = f"{v.numerator}/{v.denominator}"
        return {
            "value": v,
            "kind": self.kind,
            "witness": self.witness,
            "budget": dict(self.budget),
            "seed": self.seed,
        }


def hamming_density(H: Hypergraph, T: Hypergraph) -> Fraction:
    """Normalized edit distance |E(H) Δ E(T)| / C(n, k)."""
    if H.k != T.k or H.n != T.n:
        raise ValueError("hypergraphs must share n and k")
    denom = comb(H.n, H.k)
    if denom == 0:
        return Fraction(0)
    return Fraction(len(H.edges ^ T.edges), denom)


def _refined_member(structure: CombinatorialStructure, L: int) -> np.ndarray:
    """Membership of the L-level refinement, indexed by mixed-radix codes."""
    width = (1 << structure.k) - 1
    total = L**width
    if total > _REFINE_CAP:
        raise ValueError("refined grid too large for exact mode")
    codes = np.arange(total, dtype=np.int64)
    l = structure.l
    coarse = np.zeros(total, dtype=np.int64)
    for i in range(width):
        d = (codes // L**i) % L
        coarse += (d * l // L) * l**i
    return structure.member_table()[coarse]


def _refined_rows(structure: CombinatorialStructure, L: int) -> np.ndarray:
    """Refined boxes of the structure as 0-based digit rows, shape (m, width)."""
    width = (1 << structure.k) - 1
    step = L // structure.l
    rows = []
    for cell in sorted(structure.cells):
        axes = [range((c - 1) * step, c * step) for c in cell]
        for combo in product(*axes):
            rows.append(combo)
    if not rows:
        return np.zeros((0, width), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def _shared(U: StepHypergraphon, W: StepHypergraphon):
    if U.k != W.k:
        raise ValueError("hypergraphons must share arity k")
    return lcm(U.l, W.l)


def d1(
    U: StepHypergraphon,
    W: StepHypergraphon,
    mode: str = "exact",
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> DistanceReport:
    """Measure of the symmetric difference of two step hypergraphons."""
    L = _shared(U, W)
    width = (1 << U.k) - 1
    if mode == "exact":
        mU = _refined_member(structure_of(U), L)
        mW = _refined_member(structure_of(W), L)
        diff = mU != mW
        count = int(diff.sum())
        witness = None
        if count:
            code = int(np.flatnonzero(diff)[0])
            witness = {
                "box": [int((code // L**i) % L) + 1 for i in range(width)],
                "levels": L,
            }
        return DistanceReport(
            value=Fraction(count, L**width),
            kind="exact",
            witness=witness,
            budget={"mode": "exact", "levels": L},
        )
    if mode != "montecarlo":
        raise ValueError("mode must be exact or montecarlo")
    n = 20000 if samples is None else int(samples)
    if n <= 0:
        raise ValueError("samples must be positive")
    key = rng.derive(0 if seed is None else seed, rng.TAG_MC)
    ctr = np.arange(n * width, dtype=np.uint64)
    h = rng.np_mix64(key, ctr).reshape(n, width)
    cU = np.zeros(n, dtype=np.int64)
    cW = np.zeros(n, dtype=np.int64)
    for i in range(width):
        cU += rng.np_level_of(h[:, i], U.l).astype(np.int64) * U.l**i
        cW += rng.np_level_of(h[:, i], W.l).astype(np.int64) * W.l**i
    inU = structure_of(U).member_table()[cU] != 0
    inW = structure_of(W).member_table()[cW] != 0
    est = float(np.mean(inU != inW))
    stderr = (est * (1 - est) / n) ** 0.5
    return DistanceReport(
        value=est,
        kind="estimate",
        budget={"mode": "montecarlo", "samples": n, "stderr": stderr},
        seed=seed,
    )


def delta_w_lower(U, W, family) -> DistanceReport:
    """Largest per-edge density gap over a finite family: a lower bound."""
    fams = sorted(family, key=lambda F: (F.n, len(F.edges), F.sorted_edges()))
    if not fams:
        raise ValueError("family must be nonempty")
    best = None
    best_F = None
    for F in fams:
        if not F.edges:
            raise ValueError("family members need at least one edge")
        tU = density(F, U, mode="exact")
        tW = density(F, W, mode="exact")
        gap = abs(tU - tW) / len(F.edges)
        if best is None or gap > best:
            best, best_F = gap, F
    return DistanceReport(
        value=best,
        kind="lower_bound",
        witness=best_F.to_obj(),
        budget={"family_size": len(fams)},
    )


def _density_gap(F, H1, H2, cache):
    key = (F.n, tuple(F.sorted_edges()))
    if key not in cache:
        cache[key] = abs(densities(F, H1).t - densities(F, H2).t)
    return cache[key]


def _metric_family(k: int, v: int, seed: int) -> list:
    if v <= 5:
        return list(enumerate_canonical(k, v))
    out = []
    for i in range(20):
        out.append(
            Hypergraph.random(k, v, Fraction(1, 2), seed=rng.derive(seed, rng.TAG_TRIAL, v, i))
        )
    return out


def delta_metric_estimate(
    H1: Hypergraph, H2: Hypergraph, max_size: int, seed: int = 0
) -> DistanceReport:
    """Smallest grid value eps = j/max_size whose defining condition holds.

    The condition couples the test-pattern size to eps: every enumerated F
    with |V(F)| <= 1/eps must satisfy |t(F,H1) - t(F,H2)| <= eps. Patterns
    are exhaustive up to 5 vertices and seeded random beyond.
    """
    if H1.k != H2.k:
        raise ValueError("hypergraphs must share arity k")
    if max_size < H1.k:
        raise ValueError("max_size must be at least k")
    k = H1.k
    if density_equivalent(H1, H2, check_size=max_size):
        return DistanceReport(
            value=Fraction(0),
            kind="estimate",
            budget={"max_size": max_size, "grid": "j/max_size"},
            seed=seed,
        )
    fam = {}
    for v in range(1, max_size + 1):
        fam[v] = _metric_family(k, v, seed)
    cache = {}
    prev_violator = None
    prev_gap = Fraction(0)
    for F in (F for v in fam for F in fam[v]):
        g = _density_gap(F, H1, H2, cache)
        if g > prev_gap:
            prev_gap, prev_violator = g, F
    for j in range(1, max_size + 1):
        eps = Fraction(j, max_size)
        vmax = max_size // j
        worst = None
        worst_gap = Fraction(0)
        for v in range(1, vmax + 1):
            for F in fam[v]:
                g = _density_gap(F, H1, H2, cache)
                if g > worst_gap:
                    worst_gap, worst = g, F
        if worst_gap <= eps:
            witness = None if prev_violator is None else prev_violator.to_obj()
            return DistanceReport(
                value=eps,
                kind="estimate",
                witness=witness,
                budget={"max_size": max_size, "grid": "j/max_size"},
                seed=seed,
            )
        prev_violator, prev_gap = worst, worst_gap
    return DistanceReport(
        value=Fraction(1),
        kind="estimate",
        witness=None if prev_violator is None else prev_violator.to_obj(),
        budget={"max_size": max_size, "grid": "j/max_size"},
        seed=seed,
    )


def _arity_of_digit(k: int) -> list:
    return [len(mask_bits(m)) for m in range(1, 1 << k)]


def _sym_diff_count(memU, rowsW, perms, arities, L) -> int:
    """|U Δ sigma(W)| by pushing W's refined boxes through the relabeling."""
    cnt_u = int(memU.sum())
    cnt_w = rowsW.shape[0]
    if cnt_w == 0:
        return cnt_u
    codes = np.zeros(cnt_w, dtype=np.int64)
    for i in range(rowsW.shape[1]):
        sig = perms[arities[i] - 1]
        codes += sig[rowsW[:, i]] * L**i
    overlap = int(memU[codes].sum())
    return cnt_u + cnt_w - 2 * overlap


def delta1_upper(
    U: StepHypergraphon,
    W: StepHypergraphon,
    budget: int = 4096,
    seed: int = 0,
) -> DistanceReport:
    """min d1 over per-arity level relabelings: an upper bound for the
    relabeling-invariant distance. Exhaustive when (L!)^k fits the budget,
    else hill-climbing over transpositions from seeded restarts."""
    L = _shared(U, W)
    k = U.k
    width = (1 << k) - 1
    if budget <= 0:
        raise ValueError("budget must be positive")
    memU = _refined_member(structure_of(U), L) != 0
    rowsW = _refined_rows(structure_of(W), L)
    arities = _arity_of_digit(k)
    denom = L**width

    def value_of(perms):
        return _sym_diff_count(memU, rowsW, perms, arities, L)

    total_space = factorial(L) ** k
    if total_space <= budget:
        best = None
        best_perms = None
        for combo in product(permutations(range(L)), repeat=k):
            perms = [np.array(p, dtype=np.int64) for p in combo]
            v = value_of(perms)
            key = tuple(tuple(int(x) for x in p) for p in combo)
            if best is None or v < best or (v == best and key < best_perms):
                best, best_perms = v, key
        return DistanceReport(
            value=Fraction(best, denom),
            kind="upper_bound",
            witness={"perms": [list(p) for p in best_perms], "levels": L},
            budget={"mode": "exhaustive", "evaluations": total_space},
            seed=seed,
        )

    evals = 0
    best = None
    best_perms = None
    ridx = 0
    while evals < budget:
        gen = np.random.Generator(np.random.PCG64(rng.derive(seed, rng.TAG_RESTART, ridx)))
        ridx += 1
        perms = [gen.permutation(L).astype(np.int64) for _ in range(k)]
        cur = value_of(perms)
        evals += 1
        improved = True
        while improved and evals < budget:
            improved = False
            for r in range(k):
                for a in range(L):
                    for b in range(a + 1, L):
                        perms[r][a], perms[r][b] = perms[r][b], perms[r][a]
                        v = value_of(perms)
                        evals += 1
                        if v < cur:
                            cur = v
                            improved = True
                        else:
                            perms[r][a], perms[r][b] = perms[r][b], perms[r][a]
                        if evals >= budget:
                            break
                    if evals >= budget:
                        break
                if evals >= budget:
                    break
        key = tuple(tuple(int(x) for x in p) for p in perms)
        if best is None or cur < best or (cur == best and key < best_perms):
            best, best_perms = cur, key
    return DistanceReport(
        value=Fraction(best, denom),
        kind="upper_bound",
        witness={"perms": [list(p) for p in best_perms], "levels": L},
        budget={"mode": "hill_climb", "evaluations": evals},
        seed=seed,
    )


def closeness(
    H: Hypergraph,
    C: CombinatorialStructure,
    hp,
    *,
    eps_cut: Fraction = Fraction(1, 10),
    cylinder_samples: int = 64,
    seed: int = 0,
):
    """Certify how well (hp, C) explains H: returns (eps, delta).

    eps is the edit density between H and the hypergraph the structure paints
    on the hyperpartition; delta bounds the partition quality, the worse of
    equitability and the sampled regularity deficit over every label class.
    """
    if H.k != C.k or hp.k != C.k or hp.n != H.n or hp.l != C.l:
        raise ValueError("hypergraph, structure and hyperpartition shapes must match")
    T = cells_union(hp, C)
    eps = hamming_density(H, T)
    delta = Fraction(0)
    delta = max(delta, hp.equitability_deficit())
    for r in range(2, hp.k + 1):
        for j in range(1, hp.l + 1):
            G = hp.class_hypergraph(r, j)
            d = regularity_deficit(
                G, cylinder_samples, eps_cut, seed=rng.derive(seed, rng.TAG_CYLINDER, r, j)
            )
            if d > delta:
                delta = d
    return eps, delta
