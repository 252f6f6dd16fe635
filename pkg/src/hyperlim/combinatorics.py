"""Subset indexing, position masks, and small-group combinatorics.

Vertex subsets are identified with their colex rank so per-arity label data
can live in flat numpy arrays. Subsets of the position set {1..k} are
bitmasks: bit i-1 set means position i is in the subset, so masks run from
1 to 2**k - 1 and cell coordinates are tuples indexed by mask - 1.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations
from math import comb

import numpy as np


def falling(n: int, r: int) -> int:
    """Falling factorial n (n-1) ... (n-r+1)."""
    out = 1
    for i in range(r):
        out *= n - i
    return out


def colex_rank(subset) -> int:
    """Rank of a strictly increasing vertex tuple in colex order."""
    r = 0
    for i, a in enumerate(subset):
        r += comb(a, i + 1)
    return r


def colex_unrank(rank: int, r: int) -> tuple:
    """Inverse of colex_rank for r-subsets."""
    out = []
    for i in range(r, 0, -1):
        a = i - 1
        while comb(a + 1, i) <= rank:
            a += 1
        out.append(a)
        rank -= comb(a, i)
    out.reverse()
    return tuple(out)


def subsets_colex(n: int, r: int):
    """Yield the r-subsets of range(n) in colex order."""
    if r == 0:
        yield ()
        return
    for last in range(r - 1, n):
        for rest in subsets_colex(last, r - 1):
            yield rest + (last,)


@lru_cache(maxsize=None)
def comb_table(n: int, r: int) -> np.ndarray:
    """Binomial table, shape (n+1, r+1); entry [a, b] is C(a, b)."""
    t = np.zeros((n + 1, r + 1), dtype=np.int64)
    t[:, 0] = 1
    for a in range(1, n + 1):
        for b in range(1, min(a, r) + 1):
            t[a, b] = t[a - 1, b - 1] + t[a - 1, b]
    t.setflags(write=False)
    return t


@lru_cache(maxsize=None)
def colex_matrix(n: int, r: int) -> np.ndarray:
    """All r-subsets of range(n) as rows in colex order, shape (C(n,r), r)."""
    if r == 0:
        m = np.zeros((1, 0), dtype=np.int64)
    elif r == 1:
        m = np.arange(n, dtype=np.int64).reshape(-1, 1)
    else:
        blocks = []
        for last in range(r - 1, n):
            sub = colex_matrix(last, r - 1)
            col = np.full((sub.shape[0], 1), last, dtype=np.int64)
            blocks.append(np.hstack([sub, col]))
        if blocks:
            m = np.vstack(blocks)
        else:
            m = np.zeros((0, r), dtype=np.int64)
    m.setflags(write=False)
    return m


def colex_rank_rows(rows: np.ndarray, ct: np.ndarray) -> np.ndarray:
    """Vectorized colex_rank over the rows of a sorted-subset matrix."""
    out = np.zeros(rows.shape[0], dtype=np.int64)
    for i in range(rows.shape[1]):
        out += ct[rows[:, i], i + 1]
    return out


def arity_offsets(n: int, k: int) -> list:
    """offsets[r-1] = number of subsets of arity < r; one slot per subset."""
    out = []
    acc = 0
    for r in range(1, k + 1):
        out.append(acc)
        acc += comb(n, r)
    out.append(acc)
    return out


def mask_bits(mask: int) -> tuple:
    """0-based positions set in a mask, ascending."""
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def mask_image(mask: int, perm) -> int:
    """Image of a position mask under a permutation of range(k)."""
    im = 0
    i = 0
    while mask >> i:
        if mask >> i & 1:
            im |= 1 << perm[i]
        i += 1
    return im


def permute_cell(cell: tuple, k: int, perm) -> tuple:
    """Push a cell coordinate forward along a position permutation.

    The image assigns to mask perm(m) the label the original assigned to m,
    so coordinates of permuted tuples match permuted coordinates.
    """
    out = [0] * len(cell)
    for m in range(1, 1 << k):
        out[mask_image(m, perm) - 1] = cell[m - 1]
    return tuple(out)


@lru_cache(maxsize=None)
def position_perms(k: int) -> tuple:
    return tuple(permutations(range(k)))


def cell_orbit(cell: tuple, k: int) -> frozenset:
    return frozenset(permute_cell(cell, k, p) for p in position_perms(k))


def set_partitions(items: tuple):
    """Yield all partitions of items as tuples of tuples."""
    items = tuple(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i, block in enumerate(part):
            yield part[:i] + ((first,) + block,) + part[i + 1 :]
        yield ((first,),) + part
