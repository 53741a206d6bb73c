"""Numpy implementation of the group kernels (the portable fallback)."""

from __future__ import annotations

import numpy as np

from . import Tables, pack, unpack

_IDENTITY = np.array([1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1], dtype=np.uint8)


def _as_mats(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.uint8)
    return a.reshape(-1, 16)


def mat_mul(a, b, tbl: Tables) -> np.ndarray:
    """Entrywise-index product of 4x4 matrices; a, b broadcast over rows."""
    a4 = _as_mats(a).reshape(-1, 4, 4)
    b4 = _as_mats(b).reshape(-1, 4, 4)
    if tbl.p == 2:
        # char 2: index addition is XOR
        term = tbl.mul[a4[:, :, :, None], b4[:, None, :, :]]  # (m, i, k, j)
        out = np.bitwise_xor.reduce(term, axis=2)
    elif tbl.n == 1:
        out = np.matmul(a4.astype(np.int64), b4.astype(np.int64)) % tbl.p
    else:
        term = tbl.mul[a4[:, :, :, None], b4[:, None, :, :]]
        out = term[:, :, 0, :]
        for k in range(1, 4):
            out = tbl.add[out, term[:, :, k, :]]
    return out.astype(np.uint8).reshape(-1, 16)


def mat_mul_cross(a, b, tbl: Tables) -> np.ndarray:
    """All pairwise products a_i * b_j, row-major in i then j."""
    a = _as_mats(a)
    b = _as_mats(b)
    ai = np.repeat(a, len(b), axis=0)
    bj = np.tile(b, (len(a), 1))
    return mat_mul(ai, bj, tbl)


def _lookup(packed_sorted: np.ndarray, keys: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(packed_sorted, keys)
    if (pos >= len(packed_sorted)).any() or (packed_sorted[pos] != keys).any():
        raise KeyError("element not in the enumerated set")
    return pos


def closure(gens, tbl: Tables, limit: int | None = None):
    """Subgroup closure by breadth-first products; returns mats and packed
    keys sorted ascending by key."""
    gens = _as_mats(gens)
    mats = [_IDENTITY.copy()]
    known = pack(_IDENTITY, tbl.bits)
    frontier = _IDENTITY[None, :]
    while len(frontier):
        prod = mat_mul_cross(frontier, gens, tbl)
        keys = pack(prod, tbl.bits)
        uniq, first = np.unique(keys, return_index=True)
        pos = np.searchsorted(known, uniq)
        pos = np.minimum(pos, len(known) - 1)
        fresh = known[pos] != uniq
        new_keys = uniq[fresh]
        new_mats = prod[first[fresh]]
        if limit is not None and len(known) + len(new_keys) > limit:
            raise MemoryError(f"closure exceeded the configured limit {limit}")
        if len(new_keys) == 0:
            break
        mats.append(new_mats)
        known = np.concatenate([known, new_keys])
        known.sort(kind="stable")
        frontier = new_mats
    all_mats = np.concatenate([m.reshape(-1, 16) for m in mats], axis=0)
    all_keys = pack(all_mats, tbl.bits)
    order = np.argsort(all_keys, kind="stable")
    return all_mats[order], all_keys[order]


def conj_partition(mats, packed, conjs, conj_invs, tbl: Tables) -> np.ndarray:
    """Partition the (sorted) element list into conjugation orbits under the
    given conjugator list.  Class ids are assigned in ascending order of the
    least packed element, so numbering is canonical."""
    mats = _as_mats(mats)
    n = len(mats)
    conjs = _as_mats(conjs)
    conj_invs = _as_mats(conj_invs)
    class_of = np.full(n, -1, dtype=np.int32)
    cls = 0
    for seed in range(n):
        if class_of[seed] >= 0:
            continue
        class_of[seed] = cls
        frontier = np.array([seed], dtype=np.int64)
        while len(frontier):
            x = mats[frontier]
            new_parts = []
            for g, gi in zip(conjs, conj_invs):
                y = mat_mul(mat_mul(g[None, :], x, tbl), gi[None, :], tbl)
                cand = np.unique(_lookup(packed, pack(y, tbl.bits)))
                fresh = cand[class_of[cand] < 0]
                class_of[fresh] = cls
                new_parts.append(fresh)
            frontier = np.unique(np.concatenate(new_parts)) if new_parts else np.array([], dtype=np.int64)
        cls += 1
    return class_of


def class_matrix_rows(inv_ci, reps, packed, class_of, n_classes, tbl: Tables) -> np.ndarray:
    """Histogram for one class matrix: given the inverses of the elements of
    a class C_i, count pairs (j, k) with x in C_i, x^{-1} z_k in C_j."""
    inv_ci = _as_mats(inv_ci)
    reps = _as_mats(reps)
    r = int(n_classes)
    out = np.zeros((r, r), dtype=np.int64)
    chunk = max(1, (1 << 22) // max(len(reps), 1))
    for lo in range(0, len(inv_ci), chunk):
        part = inv_ci[lo : lo + chunk]
        w = mat_mul_cross(part, reps, tbl)
        j = class_of[_lookup(packed, pack(w, tbl.bits))].astype(np.int64)
        k = np.tile(np.arange(r, dtype=np.int64), len(part))
        out += np.bincount(j * r + k, minlength=r * r).reshape(r, r)
    return out
