# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the group kernels.

Mirrors pybackend exactly: same element ordering, class numbering, and
histogram layout, so the two backends are interchangeable bit for bit.
"""

from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy

import numpy as np

ctypedef unsigned char u8
ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 _EMPTY = <u64> 0xFFFFFFFFFFFFFFFFULL


# ------------------------------------------------------------ matrix products

cdef inline void _mm16(const u8 *a, const u8 *b, u8 *out,
                       const u8 *add, const u8 *mul, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef u8 acc
    for i in range(4):
        for j in range(4):
            acc = mul[a[4 * i] * q + b[j]]
            for k in range(1, 4):
                acc = add[acc * q + mul[a[4 * i + k] * q + b[4 * k + j]]]
            out[4 * i + j] = acc


cdef inline u64 _pack16(const u8 *m, int bits) noexcept nogil:
    cdef u64 key = 0
    cdef Py_ssize_t t
    for t in range(16):
        key |= (<u64> m[t]) << (bits * t)
    return key


def _flat(a):
    return np.ascontiguousarray(a, dtype=np.uint8).reshape(-1, 16)


def mat_mul(a, b, tbl):
    """Entrywise-index product of 4x4 matrices; a, b broadcast over rows."""
    cdef const u8[:, ::1] av = _flat(a)
    cdef const u8[:, ::1] bv = _flat(b)
    cdef Py_ssize_t ma = av.shape[0], mb = bv.shape[0]
    if ma != mb and ma != 1 and mb != 1:
        raise ValueError("row counts are not broadcastable")
    cdef Py_ssize_t m = ma if ma >= mb else mb
    out_arr = np.empty((m, 16), dtype=np.uint8)
    cdef u8[:, ::1] ov = out_arr
    cdef const u8[:, ::1] addv = tbl.add
    cdef const u8[:, ::1] mulv = tbl.mul
    cdef const u8 *add = &addv[0, 0]
    cdef const u8 *mul = &mulv[0, 0]
    cdef Py_ssize_t q = tbl.q
    cdef Py_ssize_t i, ia, ib
    with nogil:
        for i in range(m):
            ia = i if ma > 1 else 0
            ib = i if mb > 1 else 0
            _mm16(&av[ia, 0], &bv[ib, 0], &ov[i, 0], add, mul, q)
    return out_arr


def mat_mul_cross(a, b, tbl):
    """All pairwise products a_i * b_j, row-major in i then j."""
    cdef const u8[:, ::1] av = _flat(a)
    cdef const u8[:, ::1] bv = _flat(b)
    cdef Py_ssize_t ma = av.shape[0], mb = bv.shape[0]
    out_arr = np.empty((ma * mb, 16), dtype=np.uint8)
    cdef u8[:, ::1] ov = out_arr
    cdef const u8[:, ::1] addv = tbl.add
    cdef const u8[:, ::1] mulv = tbl.mul
    cdef const u8 *add = &addv[0, 0]
    cdef const u8 *mul = &mulv[0, 0]
    cdef Py_ssize_t q = tbl.q
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(ma):
            for j in range(mb):
                _mm16(&av[i, 0], &bv[j, 0], &ov[i * mb + j, 0], add, mul, q)
    return out_arr


# ----------------------------------------------------------------- key lookup

cdef inline Py_ssize_t _bisect(const u64 *keys, Py_ssize_t n, u64 key) noexcept nogil:
    """Index of key in a sorted array, or -1."""
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < n and keys[lo] == key:
        return lo
    return -1


# ------------------------------------------------------------------- hash set

cdef struct KeySet:
    u64 *slots
    Py_ssize_t cap  # power of two
    Py_ssize_t size


cdef int _ks_init(KeySet *ks, Py_ssize_t cap) except -1:
    ks.slots = <u64 *> malloc(cap * sizeof(u64))
    if ks.slots == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(cap):
        ks.slots[i] = _EMPTY
    ks.cap = cap
    ks.size = 0
    return 0


cdef void _ks_free(KeySet *ks) noexcept:
    if ks.slots != NULL:
        free(ks.slots)
        ks.slots = NULL


cdef inline bint _ks_add_raw(u64 *slots, Py_ssize_t cap, u64 key) noexcept nogil:
    """Insert; returns 1 if the key was new."""
    cdef u64 h = key * <u64> 0x9E3779B97F4A7C15ULL
    cdef Py_ssize_t pos = <Py_ssize_t> (h & <u64> (cap - 1))
    while True:
        if slots[pos] == _EMPTY:
            slots[pos] = key
            return 1
        if slots[pos] == key:
            return 0
        pos = (pos + 1) & (cap - 1)


cdef int _ks_grow(KeySet *ks) except -1:
    cdef Py_ssize_t newcap = ks.cap * 2
    cdef u64 *fresh = <u64 *> malloc(newcap * sizeof(u64))
    if fresh == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(newcap):
        fresh[i] = _EMPTY
    for i in range(ks.cap):
        if ks.slots[i] != _EMPTY:
            _ks_add_raw(fresh, newcap, ks.slots[i])
    free(ks.slots)
    ks.slots = fresh
    ks.cap = newcap
    return 0


cdef inline int _ks_add(KeySet *ks, u64 key) except -1:
    if 2 * (ks.size + 1) > ks.cap:
        _ks_grow(ks)
    cdef bint fresh = _ks_add_raw(ks.slots, ks.cap, key)
    if fresh:
        ks.size += 1
    return fresh


# -------------------------------------------------------------------- closure

def closure(gens, tbl, limit=None):
    """Subgroup closure from the identity; returns (mats, packed) sorted
    ascending by packed key."""
    cdef const u8[:, ::1] gv = _flat(gens)
    cdef Py_ssize_t ng = gv.shape[0]
    cdef const u8[:, ::1] addv = tbl.add
    cdef const u8[:, ::1] mulv = tbl.mul
    cdef const u8 *add = &addv[0, 0]
    cdef const u8 *mul = &mulv[0, 0]
    cdef Py_ssize_t q = tbl.q
    cdef int bits = tbl.bits
    cdef Py_ssize_t cap_limit = -1 if limit is None else <Py_ssize_t> limit

    cdef KeySet ks
    _ks_init(&ks, 1 << 12)

    # growable store of discovered matrices
    cdef Py_ssize_t store_cap = 4096, n = 0
    cdef u8 *store = <u8 *> malloc(store_cap * 16)
    if store == NULL:
        _ks_free(&ks)
        raise MemoryError()

    cdef u8 ident[16]
    cdef Py_ssize_t t
    for t in range(16):
        ident[t] = 1 if t % 5 == 0 else 0

    cdef u8 prod[16]
    cdef u8 *grown
    cdef Py_ssize_t head = 0, g
    cdef u64 key
    try:
        memcpy(store, ident, 16)
        _ks_add(&ks, _pack16(ident, bits))
        n = 1
        while head < n:
            for g in range(ng):
                _mm16(&store[16 * head], &gv[g, 0], prod, add, mul, q)
                key = _pack16(prod, bits)
                if _ks_add(&ks, key):
                    if cap_limit >= 0 and n + 1 > cap_limit:
                        raise MemoryError(
                            f"closure exceeded the configured limit {limit}"
                        )
                    if n == store_cap:
                        store_cap *= 2
                        grown = <u8 *> realloc(store, store_cap * 16)
                        if grown == NULL:
                            raise MemoryError()
                        store = grown
                    memcpy(&store[16 * n], prod, 16)
                    n += 1
            head += 1
        out = np.empty((n, 16), dtype=np.uint8)
        _copy_out(out, store, n)
    finally:
        free(store)
        _ks_free(&ks)
    keys_arr = np.empty(n, dtype=np.uint64)
    cdef u64[::1] kv = keys_arr
    cdef const u8[:, ::1] outv = out
    for t in range(n):
        kv[t] = _pack16(&outv[t, 0], bits)
    order = np.argsort(keys_arr, kind="stable")
    return out[order], keys_arr[order]


cdef void _copy_out(u8[:, ::1] dest, const u8 *src, Py_ssize_t n) noexcept:
    if n > 0:
        memcpy(&dest[0, 0], src, n * 16)


# --------------------------------------------------------------- partitioning

def conj_partition(mats, packed, conjs, conj_invs, tbl):
    """Conjugation orbits, ids assigned in ascending order of least member."""
    cdef const u8[:, ::1] mv = _flat(mats)
    cdef const u64[::1] pv = np.ascontiguousarray(packed, dtype=np.uint64)
    cdef const u8[:, ::1] cv = _flat(conjs)
    cdef const u8[:, ::1] civ = _flat(conj_invs)
    cdef Py_ssize_t n = mv.shape[0], nc = cv.shape[0]
    cdef const u8[:, ::1] addv = tbl.add
    cdef const u8[:, ::1] mulv = tbl.mul
    cdef const u8 *add = &addv[0, 0]
    cdef const u8 *mul = &mulv[0, 0]
    cdef Py_ssize_t q = tbl.q
    cdef int bits = tbl.bits

    out = np.full(n, -1, dtype=np.int32)
    cdef int[::1] cls_of = out
    stack_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] stack = stack_arr

    cdef Py_ssize_t seed, top, x, g, pos
    cdef int cls = 0
    cdef u8 tmp[16]
    cdef u8 tmp2[16]
    cdef u64 key
    with nogil:
        for seed in range(n):
            if cls_of[seed] >= 0:
                continue
            cls_of[seed] = cls
            stack[0] = seed
            top = 1
            while top > 0:
                top -= 1
                x = <Py_ssize_t> stack[top]
                for g in range(nc):
                    _mm16(&cv[g, 0], &mv[x, 0], tmp, add, mul, q)
                    _mm16(tmp, &civ[g, 0], tmp2, add, mul, q)
                    key = _pack16(tmp2, bits)
                    pos = _bisect(&pv[0], n, key)
                    if pos < 0:
                        with gil:
                            raise KeyError("element not in the enumerated set")
                    if cls_of[pos] < 0:
                        cls_of[pos] = cls
                        stack[top] = pos
                        top += 1
            cls += 1
    return out


def class_matrix_rows(inv_ci, reps, packed, class_of, n_classes, tbl):
    """Histogram for one class matrix row block: counts of (j, k) with
    x in C_i and x^{-1} z_k in C_j."""
    cdef const u8[:, ::1] iv = _flat(inv_ci)
    cdef const u8[:, ::1] rv = _flat(reps)
    cdef const u64[::1] pv = np.ascontiguousarray(packed, dtype=np.uint64)
    cdef const int[::1] clv = np.ascontiguousarray(class_of, dtype=np.int32)
    cdef Py_ssize_t m = iv.shape[0], r = <Py_ssize_t> n_classes, nrep = rv.shape[0]
    cdef Py_ssize_t n = pv.shape[0]
    cdef const u8[:, ::1] addv = tbl.add
    cdef const u8[:, ::1] mulv = tbl.mul
    cdef const u8 *add = &addv[0, 0]
    cdef const u8 *mul = &mulv[0, 0]
    cdef Py_ssize_t q = tbl.q
    cdef int bits = tbl.bits

    out = np.zeros((r, r), dtype=np.int64)
    cdef i64[:, ::1] ov = out
    cdef Py_ssize_t x, k, pos
    cdef u8 tmp[16]
    cdef u64 key
    with nogil:
        for x in range(m):
            for k in range(nrep):
                _mm16(&iv[x, 0], &rv[k, 0], tmp, add, mul, q)
                key = _pack16(tmp, bits)
                pos = _bisect(&pv[0], n, key)
                if pos < 0:
                    with gil:
                        raise KeyError("element not in the enumerated set")
                ov[clv[pos], k] += 1
    return out
