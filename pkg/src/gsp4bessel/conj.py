"""Conjugacy classes of the enumerated group, class-multiplication
constants, orbits of 2x2 blocks under the Levi action, and the type labels
of torus-times-unipotent products."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .ffield import Field, quadratic_extension
from .gsp4 import (
    DegenerateDatumError,
    GroupData,
    TorusStructure,
    _ix,
    batched_inverse,
    enumerate_group,
    gsp_generators,
    identity_matrix,
    member_multiplier,
    sp_generators,
)


class ClassData:
    """Partition of a GroupData into conjugacy classes.

    Class ids are ordered by the least packed encoding of their members, and
    the representative of each class is that least element.
    """

    def __init__(self, group: GroupData):
        self.group = group
        field = group.field
        gens = gsp_generators(field) if group.kind == "gsp" else sp_generators(field)
        gen_invs = batched_inverse(field, gens, member_multiplier(field, gens))
        conjs = np.concatenate([gens, gen_invs])
        conj_invs = np.concatenate([gen_invs, gens])

        self.class_of = kernels.conj_partition(
            group.mats, group.packed, conjs, conj_invs, group.tbl
        )
        self.n_classes = int(self.class_of.max()) + 1
        _, first = np.unique(self.class_of, return_index=True)
        self.reps = first.astype(np.int64)
        self.sizes = np.bincount(self.class_of, minlength=self.n_classes).astype(
            np.int64
        )
        self.identity_class = int(self.class_of[group.identity_index])
        self.inverse_class = self.class_of[group.inv_index[self.reps]].astype(
            np.int64
        )
        self.orders = np.array(
            [self._element_order(int(r)) for r in self.reps], dtype=np.int64
        )
        self._matrix_cache: dict = {}

        if self.sizes[self.identity_class] != 1:
            raise RuntimeError("identity class must be a singleton")
        if int(self.sizes.sum()) != group.size:
            raise RuntimeError("class sizes do not add up to the group order")

    def _element_order(self, idx: int) -> int:
        g = self.group.mats[idx]
        ident = identity_matrix(self.group.field)
        w = g.copy()
        k = 1
        while not (w == ident).all():
            w = kernels.mat_mul(w, g, self.group.tbl).reshape(16)
            k += 1
            if k > self.group.size:
                raise RuntimeError("order computation ran away")
        return k

    def members(self, i: int) -> np.ndarray:
        return np.nonzero(self.class_of == i)[0]

    def rep_mats(self) -> np.ndarray:
        return self.group.mats[self.reps]

    def lookup_class(self, mats) -> np.ndarray:
        return self.class_of[self.group.index_of(mats)]

    def class_matrix(self, i: int) -> np.ndarray:
        """Structure-constant matrix M_i with (M_i)[j, k] = number of ways
        to write the k-th representative as x*y with x in class i, y in
        class j."""
        if i not in self._matrix_cache:
            members = self.members(i)
            inv_mats = self.group.mats[self.group.inv_index[members]]
            self._matrix_cache[i] = kernels.class_matrix_rows(
                inv_mats,
                self.rep_mats(),
                self.group.packed,
                self.class_of,
                self.n_classes,
                self.group.tbl,
            )
        return self._matrix_cache[i]

    def class_constant(self, i: int, j: int, k: int) -> int:
        return int(self.class_matrix(i)[j, k])


def conjugacy_classes(field: Field, kind: str = "gsp") -> ClassData:
    group = enumerate_group(field, kind)
    if not hasattr(group, "_class_data"):
        group._class_data = ClassData(group)
    return group._class_data


def canonical_form_2x2(field: Field, x, y, z) -> str:
    """Orbit label of X = [[y, z], [x, y]] under X -> u * A * X * A'^{-1}."""
    f = field
    x, y, z = (_ix(f, v) for v in (x, y, z))
    det = f.sub(f.mul(y, y), f.mul(x, z))
    if x == y == z == 0:
        return "zero"
    if det == 0:
        return "rank1"
    if f.p != 2:
        return "det_square" if f.legendre(det) == 1 else "det_nonsquare"
    return "det_xz_zero" if x == z == 0 else "det_xz_nonzero"


def canonical_representatives(field: Field) -> dict:
    """The (x, y, z) parameters of one representative per nonzero orbit."""
    if field.p != 2:
        return {
            "rank1": (0, 0, 1),
            "det_square": (0, 1, 0),
            "det_nonsquare": (1, 0, field.neg(field.xi)),
        }
    return {
        "rank1": (0, 0, 1),
        "det_xz_zero": (0, 1, 0),
        "det_xz_nonzero": (0, 1, 1),
    }


def orbit_partition_exhaustive(field: Field) -> np.ndarray:
    """Orbit id per (x, y, z) triple (z fastest), computed by closing the
    full Levi action; independent of the canonical-form classifier."""
    f = field
    q = f.q
    mul, add = f.mul_table, f.add_table
    xs, ys, zs = np.meshgrid(
        np.arange(q), np.arange(q), np.arange(q), indexing="ij"
    )
    xs, ys, zs = xs.ravel(), ys.ravel(), zs.ravel()
    flat = (xs * q + ys) * q + zs

    parent = np.arange(q**3, dtype=np.int64)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    if f.sub(f.mul(a, d), f.mul(b, c)) == 0:
                        continue
                    ax = add[mul[a, ys], mul[b, xs]]  # (A X)_00
                    az = add[mul[a, zs], mul[b, ys]]  # (A X)_01
                    cx = add[mul[c, ys], mul[d, xs]]  # (A X)_10
                    cz = add[mul[c, zs], mul[d, ys]]  # (A X)_11
                    y2 = add[mul[ax, d], mul[az, c]]
                    z2 = add[mul[ax, b], mul[az, a]]
                    x2 = add[mul[cx, d], mul[cz, c]]
                    y2b = add[mul[cx, b], mul[cz, a]]
                    if not (y2 == y2b).all():
                        raise RuntimeError("Levi action broke the block shape")
                    for u in range(1, q):
                        tx, ty, tz = mul[u, x2], mul[u, y2], mul[u, z2]
                        tflat = (tx.astype(np.int64) * q + ty) * q + tz
                        for i, j in zip(flat, tflat):
                            ri, rj = find(i), find(j)
                            if ri != rj:
                                parent[max(ri, rj)] = min(ri, rj)

    roots = np.array([find(i) for i in range(q**3)], dtype=np.int64)
    _, ids = np.unique(roots, return_inverse=True)
    return ids


@dataclass(frozen=True)
class TNTypeLabel:
    family: str
    parameter: tuple


def tn_type(torus: TorusStructure, row: int, x, y, z) -> TNTypeLabel:
    """Conjugacy type of the product (torus element) * n(x, y, z), read off
    the parameters alone.

    s = 0 means the torus element is scalar; the product's class is then
    governed by the 2x2 orbit of the unipotent part, reported under the
    "central" family.
    """
    f = torus.field
    datum = torus.datum
    if datum.degenerate:
        raise DegenerateDatumError("type labels need a nondegenerate datum")
    x, y, z = (_ix(f, v) for v in (x, y, z))
    r, s = (int(v) for v in torus.rs[row])
    if s == 0:
        return TNTypeLabel(
            family="central", parameter=(r, canonical_form_2x2(f, x, y, z))
        )
    form = f.add(f.add(f.mul(datum.a, x), f.mul(datum.b, y)), f.mul(datum.c, z))
    if f.p != 2:
        if torus.split:
            family = "D0" if form == 0 else "D1"
            pair = sorted(int(v) for v in torus.alphas[row])
            return TNTypeLabel(family=family, parameter=tuple(pair))
        family = "F0" if form == 0 else "F1"
        ext = quadratic_extension(f)
        alpha = int(torus.alpha_ext[row])
        pair = sorted((alpha, ext.frobenius(alpha)))
        return TNTypeLabel(family=family, parameter=tuple(pair))

    i, modulus = _even_eigen_exponent(torus, row)
    if torus.split:
        family = "C2" if form == 0 else "D2"
    else:
        family = "C4" if form == 0 else "D4"
    return TNTypeLabel(family=family, parameter=(min(i, modulus - i), modulus))


def _even_eigen_exponent(torus: TorusStructure, row: int) -> tuple:
    """Exponent i of the eigenvalue pair of the similitude-normalized torus
    element: gamma^{+-i} when split, eta^{+-i} when not."""
    f = torus.field
    q = f.q
    ext = quadratic_extension(f)
    E = ext.ext
    b = torus.datum.b
    r, s = (int(v) for v in torus.rs[row])
    nu = f.sqrt(int(torus.mus[row]))
    tr = f.mul(f.mul(b, s), f.inv(nu))  # trace of the normalized 2x2 block
    tre = ext.embed(tr)
    lam = None
    for u in range(1, E.q):
        if E.add(E.add(E.mul(u, u), E.mul(tre, u)), 1) == 0:
            lam = u
            break
    if lam is None:
        raise RuntimeError("normalized block has no eigenvalue in F_{q^2}")
    d = int(E.dlog[lam])
    if torus.split:
        if d % (q + 1):
            raise RuntimeError("split eigenvalue is not a power of gamma")
        return d // (q + 1), q - 1
    if d % (q - 1):
        raise RuntimeError("nonsplit eigenvalue is not a power of eta")
    return d // (q - 1), q + 1
