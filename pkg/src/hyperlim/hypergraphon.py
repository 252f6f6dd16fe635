"""Step hypergraphons: symmetric box unions in the cube of coordinates.

A step hypergraphon at resolution l owns a permutation-closed set of boxes,
each box a choice of one of l half-open level intervals per position mask.
Points of the cube are indexed by nonempty masks over the k positions;
membership of a point is membership of its level cell. General (non-step)
objects enter through a caller-supplied predicate and only support Monte
Carlo estimates.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import sqrt
from typing import Optional

import numpy as np

from . import kernels, rng
from .combinatorics import mask_bits, position_perms, subsets_colex
from .hypergraph import Hypergraph
from .hyperpartition import CombinatorialStructure, _cell_code

_BUILTIN_MAX_K = 4


class StepHypergraphon:
    """Union of half-open level boxes, closed under position permutations."""

    __slots__ = ("k", "l", "boxes", "_structure")

    def __init__(self, k: int, l: int, boxes, symmetrize: bool = False):
        structure = CombinatorialStructure(k, l, boxes, symmetrize=symmetrize)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "boxes", structure.cells)
        object.__setattr__(self, "_structure", structure)

    def __setattr__(self, name, value):
        raise AttributeError("StepHypergraphon is immutable")

    def __eq__(self, other):
        if not isinstance(other, StepHypergraphon):
            return NotImplemented
        return (self.k, self.l, self.boxes) == (other.k, other.l, other.boxes)

    def __hash__(self):
        return hash((self.k, self.l, self.boxes))

    def __repr__(self):
        return f"StepHypergraphon(k={self.k}, l={self.l}, boxes={len(self.boxes)})"

    @property
    def measure(self) -> Fraction:
        return self._structure.measure

    def member_table(self) -> np.ndarray:
        return self._structure.member_table()

    def complement(self) -> "StepHypergraphon":
        every = product(range(1, self.l + 1), repeat=(1 << self.k) - 1)
        return StepHypergraphon(
            self.k, self.l, (c for c in every if c not in self.boxes)
        )

    def to_obj(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "boxes": [
                {str(m + 1): c[m] for m in range(len(c))} for c in sorted(self.boxes)
            ],
        }

    @classmethod
    def from_obj(cls, obj, symmetrize: bool = False) -> "StepHypergraphon":
        if not isinstance(obj, dict):
            raise ValueError("hypergraphon object must be a mapping")
        for field in ("k", "l", "boxes"):
            if field not in obj:
                raise ValueError(f"hypergraphon object is missing field {field!r}")
        k = obj["k"]
        width = (1 << k) - 1
        boxes = []
        for i, c in enumerate(obj["boxes"]):
            if not isinstance(c, dict):
                raise ValueError(f"boxes[{i}] must be a mapping of mask to label")
            try:
                boxes.append(tuple(c[str(m)] for m in range(1, width + 1)))
            except KeyError as exc:
                raise ValueError(f"boxes[{i}] is missing mask {exc.args[0]}") from None
        return cls(k, obj["l"], boxes, symmetrize=symmetrize)


class GeneralHypergraphon:
    """Membership predicate over points; invariance is spot-checked.

    The predicate receives a dict mapping each nonempty position mask to a
    float in [0, 1). It must not depend on the order of the k positions; a
    seeded statistical check over random points and all permutations runs at
    construction and raises on a detected violation.
    """

    __slots__ = ("k", "membership")

    def __init__(self, k: int, membership, check_points: int = 64, seed: int = 0):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "membership", membership)
        if check_points:
            self._check_invariance(check_points, seed)

    def __setattr__(self, name, value):
        raise AttributeError("GeneralHypergraphon is immutable")

    def _check_invariance(self, points: int, seed: int):
        k = self.k
        width = (1 << k) - 1
        key = rng.derive(seed, rng.TAG_MC)
        for i in range(points):
            p = {
                m: rng.u01(rng.mix64(key, i * width + m - 1))
                for m in range(1, width + 1)
            }
            base = bool(self.membership(p))
            for perm in position_perms(k):
                q = {_mask_image_cached(m, perm, k): p[m] for m in p}
                if bool(self.membership(q)) != base:
                    raise ValueError(
                        "membership predicate is not invariant under position"
                        " permutations"
                    )

    def contains_point(self, p: dict) -> bool:
        return bool(self.membership(p))


def _mask_image_cached(m, perm, k):
    im = 0
    for i in range(k):
        if m >> i & 1:
            im |= 1 << perm[i]
    return im


def _point_levels(W: StepHypergraphon, values) -> tuple:
    """Exact level cell of a point given as mask-indexed values."""
    width = (1 << W.k) - 1
    if isinstance(values, dict):
        seq = [values[m] for m in range(1, width + 1)]
    else:
        seq = list(values)
    if len(seq) != width:
        raise ValueError(f"point needs {width} coordinates")
    cell = []
    for x in seq:
        fx = Fraction(x)
        if not 0 <= fx < 1:
            raise ValueError("point coordinates must lie in [0, 1)")
        cell.append(int(fx * W.l) + 1)
    return tuple(cell)


def contains(W, p) -> bool:
    """Pointwise membership; half-open boxes, exact at level boundaries."""
    if isinstance(W, StepHypergraphon):
        return _point_levels(W, p) in W.boxes
    return W.contains_point(p if isinstance(p, dict) else _as_point_dict(W.k, p))


def _as_point_dict(k, seq):
    seq = list(seq)
    return {m: seq[m - 1] for m in range(1, (1 << k))}


def builtin_w(kind: str, k: int) -> StepHypergraphon:
    """Named two-level step hypergraphons used across tests and the CLI.

    example1 constrains only the full mask to level 1; example2 constrains
    every mask of k-1 positions to level 1; full and empty are as named at
    l = 1.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if kind in ("example1", "example2") and k > _BUILTIN_MAX_K:
        raise ValueError(f"builtin {kind} capped at k <= {_BUILTIN_MAX_K}")
    width = (1 << k) - 1
    if kind == "full":
        return StepHypergraphon(k, 1, [tuple([1] * width)])
    if kind == "empty":
        return StepHypergraphon(k, 1, [])
    if kind == "example1":
        full_mask = (1 << k) - 1
        boxes = []
        for lower in product((1, 2), repeat=width - 1):
            cell = list(lower[: full_mask - 1]) + [1] + list(lower[full_mask - 1 :])
            boxes.append(tuple(cell))
        return StepHypergraphon(k, 2, boxes)
    if kind == "example2":
        if k < 2:
            raise ValueError("example2 requires k >= 2")
        pinned = {m for m in range(1, width + 1) if len(mask_bits(m)) == k - 1}
        free = [m for m in range(1, width + 1) if m not in pinned]
        boxes = []
        for assign in product((1, 2), repeat=len(free)):
            cell = [0] * width
            for m in pinned:
                cell[m - 1] = 1
            for m, lab in zip(free, assign):
                cell[m - 1] = lab
            boxes.append(tuple(cell))
        return StepHypergraphon(k, 2, boxes)
    raise ValueError(f"unknown builtin kind {kind!r}")


def step_from_structure(structure: CombinatorialStructure) -> StepHypergraphon:
    return StepHypergraphon(structure.k, structure.l, structure.cells)


def structure_of(W: StepHypergraphon) -> CombinatorialStructure:
    return W._structure


# ---------------------------------------------------------------------------
# densities


def _mc_constraint_arrays(F: Hypergraph, k: int, induced: bool):
    """Simplex list plus per-constraint full-cell index rows and flags."""
    if induced:
        cons = list(combinations(range(F.n), k))
        flags = [F.is_edge(c) for c in cons]
    else:
        cons = F.sorted_edges()
        flags = [True] * len(cons)
    simp = []
    for r in range(1, min(k, F.n) + 1):
        simp.extend(subsets_colex(F.n, r))
    index = {s: i for i, s in enumerate(simp)}
    width = (1 << k) - 1
    cidx = np.zeros((len(cons), width), dtype=np.int64)
    for ci, c in enumerate(cons):
        for m in range(1, width + 1):
            cidx[ci, m - 1] = index[tuple(c[b] for b in mask_bits(m))]
    return simp, cidx, np.array(flags, dtype=np.uint8), cons


def density(
    F: Hypergraph,
    W,
    mode: str = "exact",
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    *,
    induced: bool = False,
):
    """Density of pattern F in a hypergraphon.

    Exact mode (step only) returns the rational structure density of the box
    structure. Monte Carlo mode draws independent uniform levels for every
    simplex of the pattern's subset lattice and returns (estimate, stderr).
    With induced=True non-edges must fall outside W.
    """
    if F.k != W.k:
        raise ValueError(f"arity mismatch: pattern k={F.k}, hypergraphon k={W.k}")
    if mode == "exact":
        if not isinstance(W, StepHypergraphon):
            raise ValueError("exact densities need a step hypergraphon")
        from .hyperpartition import structure_density

        return structure_density(F, W._structure, induced=induced)
    if mode != "montecarlo":
        raise ValueError(f"unknown density mode {mode!r}")
    if samples is None or seed is None:
        raise ValueError("montecarlo mode needs samples and seed")
    simp, cidx, flags, cons = _mc_constraint_arrays(F, W.k, induced)
    nsim = len(simp)
    key = rng.derive(seed, rng.TAG_MC)
    if len(cons) == 0:
        return 1.0, 0.0
    if isinstance(W, StepHypergraphon):
        l = W.l
        width = (1 << W.k) - 1
        lpow = l ** np.arange(width, dtype=np.int64)
        hits = kernels.mc_step_count(
            samples, nsim, l, key, cidx, flags, W.member_table(), lpow
        )
    else:
        hits = 0
        width = (1 << W.k) - 1
        for s in range(samples):
            vals = [rng.u01(rng.mix64(key, s * nsim + i)) for i in range(nsim)]
            good = True
            for ci, c in enumerate(cons):
                p = {m: vals[cidx[ci, m - 1]] for m in range(1, width + 1)}
                if W.contains_point(p) != bool(flags[ci]):
                    good = False
                    break
            if good:
                hits += 1
    est = hits / samples
    stderr = sqrt(est * (1.0 - est) / samples)
    return est, stderr


def projected_value(W: StepHypergraphon, q) -> Fraction:
    """Measure of the fiber over a point with every mask but the full one.

    q maps each proper mask to a coordinate; the result is the fraction of
    full-mask levels whose completed cell is a box.
    """
    k, l = W.k, W.l
    width = (1 << k) - 1
    if isinstance(q, dict):
        seq = [q[m] for m in range(1, width)]
    else:
        seq = list(q)
    if len(seq) != width - 1:
        raise ValueError(f"projected point needs {width - 1} coordinates")
    cell = []
    for x in seq:
        fx = Fraction(x)
        if not 0 <= fx < 1:
            raise ValueError("point coordinates must lie in [0, 1)")
        cell.append(int(fx * l) + 1)
    hits = 0
    for top in range(1, l + 1):
        if tuple(cell) + (top,) in W.boxes:
            hits += 1
    return Fraction(hits, l)


def density_via_projection(F: Hypergraph, W: StepHypergraphon) -> Fraction:
    """Exact density through the projected grid; pairwise patterns only.

    Averages the product of projected fiber measures over all level
    assignments of the pattern's vertices; agrees with density() for k = 2.
    """
    if W.k != 2 or F.k != 2:
        raise ValueError("projection formula implemented for k = 2")
    l = W.l
    grid = {}
    for a in range(1, l + 1):
        for b in range(1, l + 1):
            hits = 0
            for top in range(1, l + 1):
                if (a, b, top) in W.boxes:
                    hits += 1
            grid[(a, b)] = Fraction(hits, l)
    total = Fraction(0)
    edges = sorted(F.edges)
    for assign in product(range(1, l + 1), repeat=F.n):
        p = Fraction(1)
        for u, v in edges:
            p *= grid[(assign[u], assign[v])]
            if p == 0:
                break
        total += p
    return total / l**F.n
