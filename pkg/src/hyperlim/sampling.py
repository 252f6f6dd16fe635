"""Seeded sampling of finite hypergraphs from hosts and hypergraphons.

Every coordinate is a pure function of (seed, subset counter), so samples
are reproducible byte for byte and independent of evaluation order. For a
step hypergraphon the edge decision is exact integer arithmetic on hashed
levels; floats only surface for general membership predicates and asserts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np

from . import kernels, rng
from .combinatorics import (
    arity_offsets,
    colex_matrix,
    colex_rank,
    colex_rank_rows,
    comb_table,
    mask_bits,
)
from .hypergraph import Hypergraph
from .hyperpartition import Hyperpartition
from .hypergraphon import GeneralHypergraphon, StepHypergraphon

_GENERAL_SUBSET_CAP = 2 * 10**5


class CoordinateSystem:
    """Lazy uniform coordinates for the subsets of range(n) of arity <= k.

    With a restricting hyperpartition, the value of S is confined to the
    g(S)-th of l half-open subintervals; its level at resolution l is then
    g(S) - 1 by construction.
    """

    __slots__ = ("n", "k", "seed", "restriction", "_key", "_offsets")

    def __init__(self, n, k, seed, restriction: Optional[Hyperpartition] = None):
        if restriction is not None and (restriction.n != n or restriction.k != k):
            raise ValueError("restriction must live on the same ground set")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "restriction", restriction)
        object.__setattr__(self, "_key", rng.derive(seed, rng.TAG_LEVELS))
        object.__setattr__(self, "_offsets", arity_offsets(n, k))

    def __setattr__(self, name, value):
        raise AttributeError("CoordinateSystem is immutable")

    def counter(self, subset) -> int:
        t = tuple(sorted(subset))
        if len(set(t)) != len(t) or not 1 <= len(t) <= self.k:
            raise ValueError("subset must have 1..k distinct vertices")
        if t[0] < 0 or t[-1] >= self.n:
            raise ValueError("subset leaves the vertex range")
        return self._offsets[len(t) - 1] + colex_rank(t)

    def exact_value(self, subset) -> Fraction:
        """The coordinate as an exact dyadic-over-l rational."""
        h = rng.mix64(self._key, self.counter(subset))
        u = Fraction(h, 1 << 64)
        if self.restriction is None:
            return u
        g = self.restriction.label(subset)
        return Fraction(g - 1 + u, self.restriction.l)

    def value(self, subset) -> float:
        # truncate like u01 so float comparisons agree with exact levels
        h = rng.mix64(self._key, self.counter(subset))
        u = rng.u01(h)
        if self.restriction is None:
            return u
        g = self.restriction.label(subset)
        return (g - 1 + u) / self.restriction.l

    def level(self, subset, l: int) -> int:
        """Exact level of the coordinate at resolution l."""
        x = self.exact_value(subset)
        return int(x * l)


@dataclass(frozen=True)
class SampleRecord:
    """A sampled hypergraph together with what produced it."""

    sample: Hypergraph
    seed: int
    source: dict

    def to_obj(self) -> dict:
        return {
            "sample": self.sample.to_obj(),
            "seed": self.seed,
            "source": self.source,
        }


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def sample_vertex(H: Hypergraph, n: int, seed: int) -> Hypergraph:
    """Random vertex sample: n iid uniform picks from V(H), with replacement.

    The k-set {i_1..i_k} is an edge iff the picked vertices are distinct and
    form an edge of H; k-sets hitting a repeated pick are non-edges.
    """
    if H.n == 0:
        raise ValueError("host must have at least one vertex")
    if n < 0:
        raise ValueError("n must be nonnegative")
    key = rng.derive(seed, rng.TAG_VERTEX)
    h = rng.np_mix64(key, np.arange(n, dtype=np.uint64))
    picks = (h % np.uint64(H.n)).astype(np.int64)
    k = H.k
    if comb(n, k) == 0:
        return Hypergraph(k, n)
    rows = picks[colex_matrix(n, k)]
    rows = np.sort(rows, axis=1)
    if k > 1:
        distinct = np.all(rows[:, 1:] != rows[:, :-1], axis=1)
    else:
        distinct = np.ones(rows.shape[0], dtype=bool)
    ct = comb_table(max(H.n, 1), k)
    ranks = colex_rank_rows(rows, ct)
    ranks[~distinct] = 0
    mask = distinct & (H.member_array()[ranks] != 0)
    out_rows = colex_matrix(n, k)[mask]
    return Hypergraph(k, n, (tuple(int(v) for v in r) for r in out_rows))


def _mask_arrays(k: int):
    width = (1 << k) - 1
    bits = np.zeros((width, k), dtype=np.int64)
    nbits = np.zeros(width, dtype=np.int64)
    for m in range(1, width + 1):
        bs = mask_bits(m)
        nbits[m - 1] = len(bs)
        for j, b in enumerate(bs):
            bits[m - 1, j] = b
    return bits, nbits


def _step_edge_mask(W: StepHypergraphon, n: int, key: int, hp) -> np.ndarray:
    k, l = W.k, W.l
    ksubs = colex_matrix(n, k)
    ct = comb_table(max(n, 1), k)
    offsets = np.array(arity_offsets(n, k)[:k], dtype=np.int64)
    bits, nbits = _mask_arrays(k)
    lpow = l ** np.arange((1 << k) - 1, dtype=np.int64)
    if hp is None:
        labels_flat = np.zeros(0, dtype=np.int64)
    else:
        labels_flat = hp.flat_labels()
    return kernels.sample_w_mask(
        ksubs, ct, offsets, key, l, W.member_table(), labels_flat, bits, nbits, lpow
    )


def sample_w_edge_count(
    W: StepHypergraphon, n: int, seed: int, hp: Optional[Hyperpartition] = None
) -> int:
    """Edge count of the step sample without materializing the hypergraph."""
    _validate_sample_w(W, n, hp)
    key = rng.derive(seed, rng.TAG_LEVELS)
    if comb(n, W.k) == 0:
        return 0
    return int(_step_edge_mask(W, n, key, hp).sum())


def _validate_sample_w(W, n, hp):
    if n < 0:
        raise ValueError("n must be nonnegative")
    if hp is not None:
        if not isinstance(W, StepHypergraphon):
            raise ValueError("hyperpartition restriction needs a step hypergraphon")
        if hp.n != n or hp.k != W.k or hp.l != W.l:
            raise ValueError("hyperpartition shape does not match (W, n)")


def sample_w(
    W,
    n: int,
    seed: int,
    hp: Optional[Hyperpartition] = None,
) -> SampleRecord:
    """Random hypergraph from a hypergraphon: one uniform per subset.

    Each subset S of arity <= k receives an independent coordinate (confined
    to its hyperpartition subinterval when hp is given); a k-set is an edge
    iff the point assembled from its subset coordinates lies in W.
    """
    _validate_sample_w(W, n, hp)
    k = W.k
    if isinstance(W, StepHypergraphon):
        key = rng.derive(seed, rng.TAG_LEVELS)
        if comb(n, k) == 0:
            sample = Hypergraph(k, n)
        else:
            mask = _step_edge_mask(W, n, key, hp) != 0
            rows = colex_matrix(n, k)[mask]
            sample = Hypergraph(k, n, (tuple(int(v) for v in r) for r in rows))
        if hp is not None:
            _assert_restricted(W, n, seed, hp)
        source = {
            "kind": "step",
            "n": n,
            "w": W.to_obj(),
            "restricted": hp is not None,
        }
        if hp is not None:
            source["hp_digest"] = _digest(hp.to_obj())
        return SampleRecord(sample=sample, seed=seed, source=source)
    if not isinstance(W, GeneralHypergraphon):
        raise ValueError("W must be a step or general hypergraphon")
    total = sum(comb(n, r) for r in range(1, k + 1))
    if total > _GENERAL_SUBSET_CAP:
        raise ValueError("general-predicate sampling capped at small n")
    coords = CoordinateSystem(n, k, seed)
    from itertools import combinations

    edges = []
    for e in combinations(range(n), k):
        p = {}
        for m in range(1, 1 << k):
            sub = tuple(e[b] for b in mask_bits(m))
            p[m] = coords.value(sub)
        if W.contains_point(p):
            edges.append(e)
    sample = Hypergraph(k, n, edges)
    source = {"kind": "general", "n": n, "k": k, "restricted": False}
    return SampleRecord(sample=sample, seed=seed, source=source)


def _assert_restricted(W, n, seed, hp):
    # spot-check the restriction invariant on a deterministic subset slice
    coords = CoordinateSystem(n, W.k, seed, restriction=hp)
    checked = 0
    for r in range(1, W.k + 1):
        m = comb(n, r)
        if m == 0:
            continue
        step = max(1, m // 512)
        km = colex_matrix(n, r)
        for i in range(0, m, step):
            sub = tuple(int(v) for v in km[i])
            x = coords.exact_value(sub)
            g = hp.label(sub)
            assert Fraction(g - 1, hp.l) <= x < Fraction(g, hp.l)
            checked += 1
            if checked >= 2048:
                return
