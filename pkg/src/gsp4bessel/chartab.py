"""Character tables of the enumerated groups, computed from scratch.

The method is the classical one: work modulo a prime l with l = 1 (mod e)
where e is the group exponent, split the common eigenvectors of the
class-multiplication matrices, recover degrees from the orthogonality
relation mod l, then lift every value to an exact element of Z[zeta_e] via
the power maps.  Both orthogonality relations are re-verified exactly in
the cyclotomic ring before a table is handed out.
"""

from __future__ import annotations

import json
import math
import os
from functools import reduce

import numpy as np
from sympy import isprime, primitive_root
from sympy.ntheory.residue_ntheory import sqrt_mod

from . import kernels
from .conj import ClassData, conjugacy_classes
from .cyclotomic import CyclotomicRing, get_ring
from .ffield import Field
from .gsp4 import (
    GroupData,
    enumerate_group,
    identity_matrix,
    member_multiplier,
)

CACHE_FORMAT_VERSION = 1


def find_working_prime(e: int, group_order: int) -> int:
    """Least prime l with l = 1 (mod e) and l^2 > 4 |G|."""
    bound = math.isqrt(4 * group_order) + 1
    l = e + 1
    while l <= bound or not isprime(l):
        l += e
    return l


def _charpoly_mod(a: np.ndarray, l: int) -> np.ndarray:
    """Characteristic polynomial coefficients (ascending) of a mod l, via
    reduction to Hessenberg form."""
    h = a.copy() % l
    n = len(h)
    for j in range(n - 2):
        pivots = np.nonzero(h[j + 1 :, j] % l)[0]
        if len(pivots) == 0:
            continue
        p = j + 1 + int(pivots[0])
        if p != j + 1:
            h[[j + 1, p]] = h[[p, j + 1]]
            h[:, [j + 1, p]] = h[:, [p, j + 1]]
        inv = pow(int(h[j + 1, j]), -1, l)
        for i in range(j + 2, n):
            f = int(h[i, j]) * inv % l
            if f:
                h[i] = (h[i] - f * h[j + 1]) % l
                h[:, j + 1] = (h[:, j + 1] + f * h[:, i]) % l
    # p_k = charpoly of the leading k-by-k block
    polys = [np.array([1], dtype=np.int64)]
    for k in range(1, n + 1):
        d = int(h[k - 1, k - 1])
        prev = polys[k - 1]
        cur = np.zeros(k + 1, dtype=np.int64)
        cur[1:] += prev
        cur[:-1] -= d * prev
        run = 1
        for i in range(k - 2, -1, -1):
            run = run * int(h[i + 1, i]) % l
            coef = int(h[i, k - 1]) * run % l
            if coef:
                cur[: i + 1] -= coef * polys[i]
        polys.append(cur % l)
    return polys[n]


def _poly_roots_mod(coeffs: np.ndarray, l: int) -> list:
    """All roots in F_l of the polynomial, ascending."""
    xs = np.arange(l, dtype=np.int64)
    acc = np.zeros(l, dtype=np.int64)
    for c in coeffs[::-1]:
        acc = (acc * xs + int(c)) % l
    return [int(x) for x in np.nonzero(acc == 0)[0]]


def _rref_mod(a: np.ndarray, l: int):
    """Row-reduce a copy of a mod l; returns (matrix, pivot columns)."""
    m = a.copy() % l
    rows, cols = m.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if len(hits) == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = m[r] * pow(int(m[r, c]), -1, l) % l
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = (m[i] - m[i, c] * m[r]) % l
        piv.append(c)
        r += 1
    return m, piv


def _nullspace_mod(a: np.ndarray, l: int) -> np.ndarray:
    """Columns spanning the kernel of a mod l."""
    m, piv = _rref_mod(a, l)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in piv]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, fc in enumerate(free):
        basis[fc, j] = 1
        for r, pc in enumerate(piv):
            basis[pc, j] = (-int(m[r, fc])) % l
    return basis


def _solve_in_span(b: np.ndarray, y: np.ndarray, l: int) -> np.ndarray:
    """C with b @ C = y (mod l), for b of full column rank."""
    aug = np.concatenate([b, y], axis=1) % l
    m, piv = _rref_mod(aug, l)
    dim = b.shape[1]
    if piv[:dim] != list(range(dim)) or len(piv) != dim:
        raise RuntimeError("subspace is not invariant")
    return m[:dim, dim:]


def _split_eigenvectors(cd: ClassData, l: int) -> np.ndarray:
    """Common eigenvectors of the class matrices mod l, scaled to 1 at the
    identity class; one column per irreducible character."""
    r = cd.n_classes
    order = sorted(range(r), key=lambda i: (int(cd.sizes[i]), i))
    subspaces = [np.eye(r, dtype=np.int64)]
    for i in order:
        if i == cd.identity_class:
            continue
        if all(b.shape[1] == 1 for b in subspaces):
            break
        mi = cd.class_matrix(i) % l
        nxt = []
        for b in subspaces:
            if b.shape[1] == 1:
                nxt.append(b)
                continue
            c = _solve_in_span(b, mi @ b % l, l)
            found = 0
            for lam in _poly_roots_mod(_charpoly_mod(c, l), l):
                ker = _nullspace_mod(
                    (c - lam * np.eye(len(c), dtype=np.int64)) % l, l
                )
                if ker.shape[1]:
                    nxt.append(b @ ker % l)
                    found += ker.shape[1]
            if found != b.shape[1]:
                raise RuntimeError("class matrix failed to split semisimply")
        subspaces = nxt
    if any(b.shape[1] != 1 for b in subspaces):
        raise RuntimeError("class matrices did not separate all characters")
    vecs = np.concatenate([b for b in subspaces], axis=1).T % l  # (r, r)
    scale = vecs[:, cd.identity_class]
    if (scale == 0).any():
        raise RuntimeError("eigenvector vanishes at the identity class")
    inv = np.array([pow(int(s), -1, l) for s in scale], dtype=np.int64)
    return vecs * inv[:, None] % l


def _degrees_from_omega(cd: ClassData, omega: np.ndarray, l: int) -> np.ndarray:
    g_order = int(cd.sizes.sum())
    r = cd.n_classes
    inv_sizes = np.array(
        [pow(int(s), -1, l) for s in cd.sizes], dtype=np.int64
    )
    t = (omega * omega[:, cd.inverse_class] % l) * inv_sizes[None, :] % l
    t = t.sum(axis=1) % l
    degrees = np.zeros(r, dtype=np.int64)
    for i in range(r):
        rhs = g_order * pow(int(t[i]), -1, l) % l
        root = sqrt_mod(rhs, l, all_roots=True)
        if not root:
            raise RuntimeError("degree congruence has no square root")
        small = [x for x in root if 2 * x < l]
        if len(small) != 1:
            raise RuntimeError("degree is not determined mod l")
        degrees[i] = small[0]
    return degrees


def _power_classes(cd: ClassData, k: int) -> list:
    """Class index of rep_k^s for s = 0..order-1."""
    g = cd.group
    rep = g.mats[cd.reps[k]]
    out = [cd.identity_class]
    w = identity_matrix(g.field)
    for _ in range(int(cd.orders[k]) - 1):
        w = kernels.mat_mul(w, rep, g.tbl).reshape(16)
        out.append(int(cd.class_of[g.index_of_one(w)]))
    return out


def _lift_values(
    cd: ClassData, chi_mod: np.ndarray, degrees: np.ndarray, e: int, l: int
) -> np.ndarray:
    """Exact values from mod-l values via eigenvalue multiplicities.

    Returns an (r, r, e) array: entry [t, k, j] is the multiplicity with
    which zeta_e^j occurs in the value of character t at class k.
    """
    r = cd.n_classes
    z = pow(primitive_root(l), (l - 1) // e, l)
    values = np.zeros((r, r, e), dtype=np.int32)
    for k in range(r):
        o = int(cd.orders[k])
        pk = _power_classes(cd, k)
        zo = pow(z, e // o, l)  # order o
        # w[s, j] = zo^{-s j}
        js = np.outer(np.arange(o), np.arange(o)) % o
        tbl = np.ones(o, dtype=np.int64)
        zinv = pow(zo, -1, l)
        for t in range(1, o):
            tbl[t] = tbl[t - 1] * zinv % l
        w = tbl[js]
        inv_o = pow(o, -1, l)
        c = chi_mod[:, pk] @ w % l * inv_o % l  # (r, o)
        if (c > degrees[:, None]).any():
            raise RuntimeError("eigenvalue multiplicity exceeds the degree")
        if not (c.sum(axis=1) == degrees).all():
            raise RuntimeError("eigenvalue multiplicities do not add up")
        exps = (np.arange(o) * (e // o)) % e
        values[:, k, exps] = c.astype(np.int32)
    return values


def verify_orthogonality(
    values: np.ndarray,
    sizes: np.ndarray,
    inverse_class: np.ndarray,
    group_order: int,
    ring: CyclotomicRing,
) -> None:
    """Exact first and second orthogonality in Z[zeta_e]; raises on failure."""
    r, rk, e = values.shape
    if r != rk:
        raise RuntimeError("character count must match class count")
    red = ring.reduce_rows  # (e, deg)
    deg = red.shape[1]

    # rows: sum_k |C_k| chi_i(k) chi_j(k*) = delta_ij |G|
    acc = np.zeros((r * r, e), dtype=np.int64)
    for k in range(r):
        a = values[:, k, :]
        b = values[:, int(inverse_class[k]), :]
        ia, ea = np.nonzero(a)
        ib, eb = np.nonzero(b)
        if len(ia) == 0:
            continue
        va = a[ia, ea].astype(np.int64) * int(sizes[k])
        vb = b[ib, eb].astype(np.int64)
        rows = (ia[:, None] * r + ib[None, :]).ravel()
        cols = ((ea[:, None] + eb[None, :]) % e).ravel()
        vals = (va[:, None] * vb[None, :]).ravel()
        np.add.at(acc, (rows, cols), vals)
    got = acc @ red
    want = np.zeros((r * r, deg), dtype=np.int64)
    want[:: r + 1, 0] = group_order
    if not (got == want).all():
        raise RuntimeError("first orthogonality relation failed")

    # columns: sum_t chi_t(k) chi_t(l*) = delta_kl |G| / |C_k|
    acc = np.zeros((r * r, e), dtype=np.int64)
    for t in range(r):
        a = values[t]
        b = values[t][inverse_class]
        ka, ea = np.nonzero(a)
        kb, eb = np.nonzero(b)
        va = a[ka, ea].astype(np.int64)
        vb = b[kb, eb].astype(np.int64)
        rows = (ka[:, None] * r + kb[None, :]).ravel()
        cols = ((ea[:, None] + eb[None, :]) % e).ravel()
        vals = (va[:, None] * vb[None, :]).ravel()
        np.add.at(acc, (rows, cols), vals)
    got = acc @ red
    want = np.zeros((r * r, deg), dtype=np.int64)
    for k in range(r):
        want[k * r + k, 0] = group_order // int(sizes[k])
    if not (got == want).all():
        raise RuntimeError("second orthogonality relation failed")


def _conjugation_consistency(
    values: np.ndarray, inverse_class: np.ndarray, ring: CyclotomicRing
) -> None:
    """Value at the inverse class must be the complex conjugate; compared in
    reduced coordinates so any integer exponent-vector representation works."""
    e = values.shape[2]
    idx = (-np.arange(e)) % e
    red = ring.reduce_rows
    lhs = values[:, inverse_class, :].astype(np.int64) @ red
    rhs = values[:, :, idx].astype(np.int64) @ red
    if not (lhs == rhs).all():
        raise RuntimeError("inverse-class values are not conjugates")


class AssembledClasses:
    """Classes of the full similitude group in characteristic 2, indexed as
    (scalar exponent) * r_sp + (symplectic class)."""

    def __init__(self, field: Field, sp_classes: ClassData):
        self.field = field
        self.sp = sp_classes
        q = field.q
        self.z_count = q - 1
        r = sp_classes.n_classes
        self.n_classes = self.z_count * r
        self.sizes = np.tile(sp_classes.sizes, self.z_count)
        self.identity_class = sp_classes.identity_class
        orders = []
        for zi in range(self.z_count):
            zo = (q - 1) // math.gcd(zi, q - 1)
            orders.extend(
                math.lcm(zo, int(o)) for o in sp_classes.orders
            )
        self.orders = np.array(orders, dtype=np.int64)
        inv = []
        for zi in range(self.z_count):
            zj = (-zi) % self.z_count
            inv.extend(zj * r + sp_classes.inverse_class)
        self.inverse_class = np.array(inv, dtype=np.int64)
        self._sqrt = np.array([field.sqrt(x) for x in range(q)], dtype=np.uint8)

    def group_order(self) -> int:
        return self.sp.group.size * self.z_count

    def lookup_class(self, mats) -> np.ndarray:
        field = self.field
        tbl = self.sp.group.tbl
        mats = np.asarray(mats, dtype=np.uint8).reshape(-1, 16)
        mus = member_multiplier(field, mats)
        z = self._sqrt[mus]
        zi = field.dlog[z]
        zinv = tbl.inv[z]
        s = tbl.mul[zinv[:, None], mats]
        k = self.sp.lookup_class(s)
        return zi * self.sp.n_classes + k

    def rep_mats(self) -> np.ndarray:
        field = self.field
        tbl = self.sp.group.tbl
        reps = self.sp.rep_mats()
        out = []
        for zi in range(self.z_count):
            lam = np.uint8(field.exp_table[zi] if field.q > 2 else 1)
            out.append(tbl.mul[lam, reps])
        return np.concatenate(out, axis=0)


class CharacterTable:
    """Exact character table with values stored as multiplicity vectors over
    the e-th roots of unity.

    Rows are sorted by (degree, reduced coefficient sequence), which makes
    the table canonical for a given group.
    """

    def __init__(self, field, kind, classes, e, ell, degrees, values):
        self.field = field
        self.kind = kind
        self.classes = classes
        self.e = e
        self.ell = ell
        self.ring = get_ring(e)
        order = self._sort_order(degrees, values)
        self.degrees = degrees[order]
        self.values = values[order]
        self.n_chars = len(degrees)
        self.group_order = (
            classes.group_order()
            if isinstance(classes, AssembledClasses)
            else int(classes.sizes.sum())
        )

    def _sort_order(self, degrees, values):
        flat = values.reshape(len(values), -1).astype(np.int64)
        reduced = flat.reshape(len(values), -1, self.e) @ self.ring.reduce_rows
        keys = [
            (int(degrees[i]),) + tuple(reduced[i].ravel().tolist())
            for i in range(len(degrees))
        ]
        return sorted(range(len(degrees)), key=lambda i: keys[i])

    def reduced_values(self) -> np.ndarray:
        """(n_chars, n_classes, deg Phi_e) exact coefficient tensor."""
        flat = self.values.astype(np.int64)
        return flat @ self.ring.reduce_rows

    def value(self, t: int, k: int):
        return self.ring.reduce_vector(self.values[t, k].astype(np.int64))

    def verify(self) -> None:
        verify_orthogonality(
            self.values,
            self.classes.sizes,
            self.classes.inverse_class,
            self.group_order,
            self.ring,
        )
        _conjugation_consistency(
            self.values, self.classes.inverse_class, self.ring
        )
        ident = self.classes.identity_class
        at_one = self.values[:, ident, :].astype(np.int64) @ self.ring.reduce_rows
        ok = (at_one[:, 0] == self.degrees) & (at_one[:, 1:] == 0).all(axis=1)
        if not ok.all():
            raise RuntimeError("value at the identity is not the degree")

    def central_character_exponent(self, t: int) -> int:
        """w with value(scalar gamma) = degree * zeta_{q-1}^w."""
        f = self.field
        q = f.q
        if q == 2:
            return 0
        tbl = kernels.tables_for(f)
        gi = np.uint8(f.generator)
        zmat = tbl.mul[gi, identity_matrix(f)]
        k = int(self.classes.lookup_class(zmat[None, :])[0])
        vec = self.values[t, k].astype(np.int64)
        red = vec @ self.ring.reduce_rows
        step = self.e // (q - 1)
        for w in range(q - 1):
            target = int(self.degrees[t]) * self.ring.reduce_rows[w * step]
            if (red == target).all():
                return w
        raise RuntimeError("central character is not a (q-1)-th root of unity")


def dixon_schneider(cd: ClassData) -> CharacterTable:
    e = int(reduce(math.lcm, (int(o) for o in cd.orders), 1))
    group_order = int(cd.sizes.sum())
    ell = find_working_prime(e, group_order)
    omega = _split_eigenvectors(cd, ell)
    degrees = _degrees_from_omega(cd, omega, ell)
    inv_sizes = np.array(
        [pow(int(s), -1, ell) for s in cd.sizes], dtype=np.int64
    )
    chi_mod = omega * inv_sizes[None, :] % ell * degrees[:, None] % ell
    values = _lift_values(cd, chi_mod, degrees, e, ell)
    table = CharacterTable(
        field=cd.group.field,
        kind=cd.group.kind,
        classes=cd,
        e=e,
        ell=ell,
        degrees=degrees,
        values=values,
    )
    table.verify()
    return table


def assemble_even_table(field: Field, sp_table: CharacterTable) -> CharacterTable:
    """Tensor the symplectic table with the characters of the scalar group;
    in characteristic 2 the similitude group is their direct product."""
    q = field.q
    zc = q - 1
    sp_cd = sp_table.classes
    classes = AssembledClasses(field, sp_cd)
    e_sp = sp_table.e
    e = math.lcm(e_sp, zc) if zc > 1 else e_sp
    scale = e // e_sp
    r = sp_cd.n_classes
    n = sp_table.n_chars

    values = np.zeros((zc * n, zc * r, e), dtype=np.int32)
    sp_vals = sp_table.values  # (n, r, e_sp)
    lifted = np.zeros((n, r, e), dtype=np.int32)
    lifted[:, :, (np.arange(e_sp) * scale) % e] = sp_vals
    step = e // zc if zc > 1 else 0
    for j in range(zc):  # character of the scalar part
        for zi in range(zc):  # scalar part of the class
            roll = (j * zi * step) % e if zc > 1 else 0
            block = np.roll(lifted, roll, axis=2)
            values[j * n : (j + 1) * n, zi * r : (zi + 1) * r, :] = block
    degrees = np.tile(sp_table.degrees, zc)

    table = CharacterTable(
        field=field,
        kind="gsp",
        classes=classes,
        e=e,
        ell=sp_table.ell,
        degrees=degrees,
        values=values,
    )
    table.verify()
    return table


def build_character_table(
    field: Field, kind: str = "gsp", cache_path: str = None
) -> CharacterTable:
    """Character table of GSp(4, q) (or Sp(4, q) with kind="sp"), optionally
    persisted to / restored from a JSON cache."""
    if kind == "gsp" and field.p == 2:
        sp = build_character_table(field, "sp", cache_path=cache_path)
        return assemble_even_table(field, sp)

    if cache_path and os.path.exists(cache_path):
        try:
            return load_table(field, kind, cache_path)
        except Exception:
            pass  # unreadable or stale cache: rebuild and overwrite
    cd = conjugacy_classes(field, kind)
    table = dixon_schneider(cd)
    if cache_path:
        save_table(table, cache_path)
    return table


def save_table(table: CharacterTable, path: str) -> None:
    cd = table.classes
    if isinstance(cd, AssembledClasses):
        raise ValueError("persist the symplectic table, not the assembled one")
    payload = {
        "format_version": CACHE_FORMAT_VERSION,
        "p": table.field.p,
        "n": table.field.n,
        "kind": table.kind,
        "group_order": table.group_order,
        "e": table.e,
        "ell": table.ell,
        "class_reps_packed": [int(v) for v in cd.group.packed[cd.reps]],
        "class_sizes": cd.sizes.tolist(),
        "class_orders": cd.orders.tolist(),
        "degrees": table.degrees.tolist(),
        "values_reduced": table.reduced_values().tolist(),
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)


def load_table(field: Field, kind: str, path: str) -> CharacterTable:
    """Restore a table and re-verify it; the cache is never trusted blindly."""
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format_version") != CACHE_FORMAT_VERSION:
        raise ValueError("unsupported cache format")
    if (payload["p"], payload["n"]) != (field.p, field.n) or payload["kind"] != kind:
        raise ValueError("cache does not match the requested group")
    cd = conjugacy_classes(field, kind)
    if payload["group_order"] != int(cd.sizes.sum()):
        raise ValueError("cached group order mismatch")
    reps_packed = [int(v) for v in cd.group.packed[cd.reps]]
    if payload["class_reps_packed"] != reps_packed:
        raise ValueError("cached class representatives mismatch")
    if payload["class_sizes"] != cd.sizes.tolist():
        raise ValueError("cached class sizes mismatch")
    if payload["class_orders"] != cd.orders.tolist():
        raise ValueError("cached class orders mismatch")
    e = int(payload["e"])
    ring = get_ring(e)
    reduced = np.array(payload["values_reduced"], dtype=np.int64)
    n, r, deg = reduced.shape
    if deg != ring.degree or n != r or r != cd.n_classes:
        raise ValueError("cached value tensor has the wrong shape")
    values = np.zeros((n, r, e), dtype=np.int32)
    values[:, :, :deg] = reduced
    table = CharacterTable(
        field=field,
        kind=kind,
        classes=cd,
        e=e,
        ell=int(payload["ell"]),
        degrees=np.array(payload["degrees"], dtype=np.int64),
        values=values,
    )
    table.verify()
    return table
