"""Hot group kernels with a compiled core and a numpy fallback.

Everything operates on flat (m, 16) uint8 arrays of field indices (row-major
4x4 matrices) plus a Tables carrier holding the field's arithmetic tables.
The compiled Cython backend is selected automatically when built; set
GSP4B_KERNELS=py or =c to force one.  Both backends are bit-for-bit
equivalent: identical element ordering, class numbering, and histograms.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tables",
    "tables_for",
    "pack",
    "unpack",
    "backend_name",
    "available_backends",
    "get_backend",
    "mat_mul",
    "mat_mul_cross",
    "closure",
    "conj_partition",
    "class_matrix_rows",
]


@dataclass(frozen=True)
class Tables:
    """Arithmetic tables of one F_q, in the layout the kernels consume."""

    q: int
    p: int
    n: int
    bits: int
    add: np.ndarray  # (q, q) uint8
    mul: np.ndarray  # (q, q) uint8
    neg: np.ndarray  # (q,) uint8
    inv: np.ndarray  # (q,) uint8, inv[0] = 0 sentinel


_tables_cache: dict = {}


def tables_for(field) -> Tables:
    key = (field.p, field.n)
    t = _tables_cache.get(key)
    if t is None:
        bits = max(1, (field.q - 1).bit_length())
        t = Tables(field.q, field.p, field.n, bits, field.add_table, field.mul_table, field.neg_table, field.inv_table)
        _tables_cache[key] = t
    return t


def pack(mats: np.ndarray, bits: int) -> np.ndarray:
    """Encode (m, 16) index matrices as uint64 keys (row-major, entry 0 lowest)."""
    m = np.ascontiguousarray(mats, dtype=np.uint64).reshape(-1, 16)
    shifts = (bits * np.arange(16, dtype=np.uint64))[None, :]
    return np.bitwise_or.reduce(m << shifts, axis=1)


def unpack(keys: np.ndarray, bits: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1, 1)
    shifts = (bits * np.arange(16, dtype=np.uint64))[None, :]
    mask = np.uint64((1 << bits) - 1)
    return ((keys >> shifts) & mask).astype(np.uint8)


from . import pybackend  # noqa: E402

_BACKENDS = {"py": pybackend}
try:
    from . import _ck  # compiled extension, optional

    _BACKENDS["c"] = _ck
except ImportError:
    _ck = None

_pref = os.environ.get("GSP4B_KERNELS", "auto")
if _pref == "c" and "c" not in _BACKENDS:
    raise ImportError("GSP4B_KERNELS=c but the compiled kernels are not built")
if _pref == "auto":
    _impl = _BACKENDS.get("c", pybackend)
elif _pref in _BACKENDS:
    _impl = _BACKENDS[_pref]
else:
    raise ValueError(f"unknown GSP4B_KERNELS value {_pref!r}")


def backend_name() -> str:
    return "c" if _impl is _BACKENDS.get("c") else "py"


def available_backends():
    return tuple(sorted(_BACKENDS))


def get_backend(name: str):
    return _BACKENDS[name]


def mat_mul(a, b, tbl: Tables):
    return _impl.mat_mul(a, b, tbl)


def mat_mul_cross(a, b, tbl: Tables):
    return _impl.mat_mul_cross(a, b, tbl)


def closure(gens, tbl: Tables, limit: int | None = None):
    return _impl.closure(gens, tbl, limit)


def conj_partition(mats, packed, conjs, conj_invs, tbl: Tables):
    return _impl.conj_partition(mats, packed, conjs, conj_invs, tbl)


def class_matrix_rows(mats_inv_ci, reps, packed, class_of, n_classes, tbl: Tables):
    return _impl.class_matrix_rows(mats_inv_ci, reps, packed, class_of, n_classes, tbl)
