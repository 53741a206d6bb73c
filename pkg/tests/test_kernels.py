"""Packing, kernel correctness, and cross-backend agreement."""

import subprocess
import sys

import numpy as np
import pytest

from gsp4bessel import kernels
from gsp4bessel.ffield import make_field
from gsp4bessel.gsp4 import (
    enumerate_group,
    group_order,
    gsp_generators,
    n_matrix,
    subgroup_N,
)

BACKENDS = kernels.available_backends()
PAIRS = [(a, b) for i, a in enumerate(BACKENDS) for b in BACKENDS[i + 1 :]]


def _rng():
    return np.random.default_rng(20260816)


def _random_mats(field, count):
    return _rng().integers(0, field.q, size=(count, 16), dtype=np.uint8)


@pytest.mark.parametrize("p,n", [(2, 1), (3, 1), (2, 2), (5, 1)])
def test_pack_unpack_roundtrip(p, n):
    f = make_field(p, n)
    tbl = kernels.tables_for(f)
    mats = _random_mats(f, 200)
    keys = kernels.pack(mats, tbl.bits)
    assert keys.dtype == np.uint64
    assert np.array_equal(kernels.unpack(keys, tbl.bits), mats)
    assert len(np.unique(keys)) == len(np.unique(mats, axis=0))


@pytest.mark.parametrize("p,n", [(2, 1), (3, 1), (2, 2)])
def test_mat_mul_against_reference(p, n):
    # 4x4 product over the field, computed the slow way
    f = make_field(p, n)
    tbl = kernels.tables_for(f)
    a = _random_mats(f, 40)
    b = _random_mats(f, 40)
    got = kernels.mat_mul(a, b, tbl)
    for t in range(40):
        for i in range(4):
            for j in range(4):
                acc = 0
                for k in range(4):
                    acc = f.add(acc, f.mul(int(a[t, 4 * i + k]), int(b[t, 4 * k + j])))
                assert int(got[t, 4 * i + j]) == acc


@pytest.mark.skipif(not PAIRS, reason="only one backend built")
@pytest.mark.parametrize("p,n", [(2, 1), (3, 1), (2, 2), (5, 1)])
def test_backends_agree_on_products(p, n):
    f = make_field(p, n)
    tbl = kernels.tables_for(f)
    a = _random_mats(f, 300)
    b = _random_mats(f, 300)
    small = _random_mats(f, 7)
    for x, y in PAIRS:
        bx, by = kernels.get_backend(x), kernels.get_backend(y)
        assert np.array_equal(bx.mat_mul(a, b, tbl), by.mat_mul(a, b, tbl))
        assert np.array_equal(
            bx.mat_mul_cross(small, a, tbl), by.mat_mul_cross(small, a, tbl)
        )


def test_mat_mul_cross_layout():
    # row i of the cross product block k is small[k] @ big[i]
    f = make_field(3, 1)
    tbl = kernels.tables_for(f)
    small = _random_mats(f, 3)
    big = _random_mats(f, 5)
    out = kernels.mat_mul_cross(small, big, tbl)
    assert out.shape == (15, 16)
    for k in range(3):
        block = out[5 * k : 5 * (k + 1)]
        one = kernels.mat_mul(np.repeat(small[k : k + 1], 5, axis=0), big, tbl)
        assert np.array_equal(block, one)


@pytest.mark.skipif(not PAIRS, reason="only one backend built")
@pytest.mark.parametrize("p,n", [(2, 1), (3, 1)])
def test_backends_agree_on_closure(p, n):
    f = make_field(p, n)
    tbl = kernels.tables_for(f)
    gens = gsp_generators(f)
    results = []
    for name in BACKENDS:
        mats, keys = kernels.get_backend(name).closure(gens, tbl)
        assert mats.shape[0] == group_order(f.q, "gsp")
        assert np.all(keys[1:] > keys[:-1])
        results.append((mats, keys))
    for mats, keys in results[1:]:
        assert np.array_equal(mats, results[0][0])
        assert np.array_equal(keys, results[0][1])


def test_closure_of_unipotent_generators():
    f = make_field(3, 1)
    tbl = kernels.tables_for(f)
    gens = np.stack(
        [n_matrix(f, 1, 0, 0), n_matrix(f, 0, 1, 0), n_matrix(f, 0, 0, 1)]
    )
    mats, keys = kernels.closure(gens, tbl)
    assert mats.shape[0] == f.q**3
    want = kernels.pack(subgroup_N(f).mats, tbl.bits)
    assert np.array_equal(np.sort(want), keys)


@pytest.mark.parametrize("name", BACKENDS)
def test_closure_limit(name):
    f = make_field(3, 1)
    tbl = kernels.tables_for(f)
    backend = kernels.get_backend(name)
    with pytest.raises(MemoryError):
        backend.closure(gsp_generators(f), tbl, limit=1000)


@pytest.mark.skipif(not PAIRS, reason="only one backend built")
def test_backends_agree_on_conjugacy(field2):
    gd = enumerate_group(field2, "gsp")
    gens = gsp_generators(field2)
    inv = gd.mats[gd.inv_index[gd.index_of(gens)]]
    results = [
        kernels.get_backend(name).conj_partition(gd.mats, gd.packed, gens, inv, gd.tbl)
        for name in BACKENDS
    ]
    for ids in results[1:]:
        assert np.array_equal(ids, results[0])


def test_backend_selection_env():
    # GSP4B_KERNELS must pin the backend at import time
    for name in BACKENDS:
        code = (
            "import gsp4bessel.kernels as k;"
            "print(k.backend_name())"
        )
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "GSP4B_KERNELS": name},
            check=True,
        )
        assert out.stdout.strip() == name


def test_unknown_backend_rejected():
    with pytest.raises(Exception):
        kernels.get_backend("fortran")
