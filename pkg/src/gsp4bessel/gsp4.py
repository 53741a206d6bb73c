"""Construction of GSp(4, q): element enumeration, distinguished subgroups,
and the data (a, b, c) defining a character of the unipotent radical N.

Matrices are stored as length-16 arrays of field element indices, row major.
Integer arguments to the constructors below are element indices (0..q-1);
0 and 1 always denote the additive and multiplicative identities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .ffield import Field, FieldElement, FieldError, quadratic_extension


class DegenerateDatumError(ValueError):
    """The binary form attached to (a, b, c) is degenerate, so there is no
    torus to build."""


def _ix(field: Field, v) -> int:
    if isinstance(v, FieldElement):
        if v.field != field:
            raise FieldError("element from a different field")
        return v.index
    v = int(v)
    if not 0 <= v < field.q:
        raise FieldError(f"element index {v} out of range for q={field.q}")
    return v


def mat4(field: Field, rows) -> np.ndarray:
    flat = [_ix(field, v) for row in rows for v in row]
    if len(flat) != 16:
        raise ValueError("expected a 4x4 matrix")
    return np.array(flat, dtype=np.uint8)


def identity_matrix(field: Field) -> np.ndarray:
    return mat4(field, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def j_matrix(field: Field) -> np.ndarray:
    """The fixed antisymmetric form: rows (e4, e3, -e2, -e1)."""
    l = field.neg(1)
    return mat4(field, [[0, 0, 0, 1], [0, 0, 1, 0], [0, l, 0, 0], [l, 0, 0, 0]])


def multiplier(field: Field, mat) -> Optional[int]:
    """Similitude factor of mat, or None if mat is not in the group.

    Checks the full defining relation (transpose * J * mat == mu * J), not
    just one entry of it.
    """
    tbl = kernels.tables_for(field)
    g = np.asarray(mat, dtype=np.uint8).reshape(16)
    jm = j_matrix(field)
    gt = g.reshape(4, 4).T.reshape(16).copy()
    w = kernels.mat_mul(kernels.mat_mul(gt, jm, tbl), g, tbl).reshape(4, 4)
    mu = int(w[0, 3])
    if mu == 0:
        return None
    target = np.zeros((4, 4), dtype=np.uint8)
    target[0, 3] = target[1, 2] = mu
    target[2, 1] = target[3, 0] = field.neg(mu)
    if not (w == target).all():
        return None
    return mu


def member_multiplier(field: Field, mats) -> np.ndarray:
    """Similitude factors for matrices already known to lie in the group,
    via one entry of the defining relation."""
    tbl = kernels.tables_for(field)
    a = np.asarray(mats, dtype=np.uint8).reshape(-1, 4, 4)
    t1 = tbl.mul[a[:, 0, 0], a[:, 3, 3]]
    t2 = tbl.mul[a[:, 1, 0], a[:, 2, 3]]
    t3 = tbl.mul[a[:, 2, 0], a[:, 1, 3]]
    t4 = tbl.mul[a[:, 3, 0], a[:, 0, 3]]
    return tbl.add[tbl.add[t1, t2], tbl.neg[tbl.add[t3, t4]]]


def batched_inverse(field: Field, mats, mus) -> np.ndarray:
    """Inverses via the form: g^{-1} = mu^{-1} * (-J) * transpose(g) * J."""
    tbl = kernels.tables_for(field)
    mats = np.asarray(mats, dtype=np.uint8).reshape(-1, 16)
    jm = j_matrix(field)
    neg_j = tbl.neg[jm]
    gt = np.ascontiguousarray(
        mats.reshape(-1, 4, 4).transpose(0, 2, 1)
    ).reshape(-1, 16)
    w = kernels.mat_mul(kernels.mat_mul(neg_j[None, :], gt, tbl), jm[None, :], tbl)
    mu_inv = tbl.inv[np.asarray(mus, dtype=np.uint8)]
    return tbl.mul[mu_inv[:, None], w]


def m_levi(field: Field, a, b, c, d, u) -> np.ndarray:
    """Levi element: block diag(A, u*A') with A = [[a,b],[c,d]] and
    A' = det(A)^{-1} [[a,-b],[-c,d]]."""
    a, b, c, d, u = (_ix(field, v) for v in (a, b, c, d, u))
    det = field.sub(field.mul(a, d), field.mul(b, c))
    if det == 0 or u == 0:
        raise ValueError("Levi block must be invertible with unit similitude")
    w = field.mul(u, field.inv(det))
    return mat4(
        field,
        [
            [a, b, 0, 0],
            [c, d, 0, 0],
            [0, 0, field.mul(w, a), field.neg(field.mul(w, b))],
            [0, 0, field.neg(field.mul(w, c)), field.mul(w, d)],
        ],
    )


def n_matrix(field: Field, x, y, z) -> np.ndarray:
    x, y, z = (_ix(field, v) for v in (x, y, z))
    return mat4(
        field,
        [[1, 0, y, z], [0, 1, x, y], [0, 0, 1, 0], [0, 0, 0, 1]],
    )


def gsp_generators(field: Field) -> np.ndarray:
    g = field.generator
    extra = m_levi(field, 1, 0, 0, 1, g)
    return np.concatenate([sp_generators(field), extra[None, :]])


def sp_generators(field: Field) -> np.ndarray:
    g = field.generator
    return np.stack(
        [
            m_levi(field, 1, 1, 0, 1, 1),
            m_levi(field, 1, 0, 1, 1, 1),
            m_levi(field, g, 0, 0, 1, 1),
            n_matrix(field, 1, 0, 0),
            n_matrix(field, 0, 1, 0),
            n_matrix(field, 0, 0, 1),
            j_matrix(field),
        ]
    )


def group_order(q: int, kind: str = "gsp") -> int:
    base = q**4 * (q * q - 1) * (q**4 - 1)
    if kind == "gsp":
        return base * (q - 1)
    if kind == "sp":
        return base
    raise ValueError(f"unknown group kind {kind!r}")


# rough per-element cost of GroupData plus enumeration scratch, in bytes
_BYTES_PER_ELEMENT = 64
DEFAULT_MEM_BUDGET = 4 << 30


@dataclass(frozen=True)
class GroupElement:
    field: Field
    entries: tuple  # 16 element indices, row major
    multiplier: int
    packed: int

    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.uint8)


class GroupData:
    """Fully enumerated group, sorted by packed encoding."""

    def __init__(self, field: Field, kind: str, mats, packed, mus, inv_index):
        self.field = field
        self.kind = kind
        self.tbl = kernels.tables_for(field)
        self.mats = mats
        self.packed = packed
        self.mus = mus
        self.inv_index = inv_index
        self.size = len(mats)
        self.identity_index = self.index_of_one(identity_matrix(field))

    def index_of(self, mats) -> np.ndarray:
        keys = kernels.pack(np.asarray(mats, dtype=np.uint8), self.tbl.bits)
        pos = np.searchsorted(self.packed, keys)
        if (pos >= self.size).any() or (self.packed[pos] != keys).any():
            raise KeyError("matrix is not a group member")
        return pos

    def index_of_one(self, mat) -> int:
        return int(self.index_of(np.asarray(mat, dtype=np.uint8).reshape(1, 16))[0])

    def contains(self, mat) -> bool:
        try:
            self.index_of_one(mat)
            return True
        except KeyError:
            return False

    def element(self, i: int) -> GroupElement:
        return GroupElement(
            field=self.field,
            entries=tuple(int(v) for v in self.mats[i]),
            multiplier=int(self.mus[i]),
            packed=int(self.packed[i]),
        )


_group_cache: dict = {}


def enumerate_group(
    field: Field, kind: str = "gsp", *, mem_budget: int = DEFAULT_MEM_BUDGET
) -> GroupData:
    key = (field.p, field.n, kind)
    if key in _group_cache:
        return _group_cache[key]
    expected = group_order(field.q, kind)
    if expected * _BYTES_PER_ELEMENT > mem_budget:
        raise MemoryError(
            f"group of order {expected} exceeds the memory budget {mem_budget}"
        )
    tbl = kernels.tables_for(field)
    gens = gsp_generators(field) if kind == "gsp" else sp_generators(field)
    mats, packed = kernels.closure(gens, tbl, limit=expected)
    if len(mats) != expected:
        raise RuntimeError(
            f"closure produced {len(mats)} elements, expected {expected}"
        )
    mus = member_multiplier(field, mats)
    if (mus == 0).any():
        raise RuntimeError("degenerate similitude factor in enumerated group")
    inv = batched_inverse(field, mats, mus)

    data = GroupData(field, kind, mats, packed, mus, None)
    inv_index = data.index_of(inv)
    data.inv_index = inv_index

    # closure under inverses and correctness of the inverse formula
    check = min(len(mats), 1 << 14)
    sel = np.linspace(0, len(mats) - 1, check).astype(np.int64)
    prod = kernels.mat_mul(mats[sel], inv[sel], tbl)
    if not (prod == identity_matrix(field)[None, :]).all():
        raise RuntimeError("inverse formula failed")
    _group_cache[key] = data
    return data


@dataclass(frozen=True)
class BesselDatum:
    """Coefficients (a, b, c) of the linear form a*x + b*y + c*z on N,
    together with the class of its attached binary form."""

    field: Field
    a: int
    b: int
    c: int
    rank_class: str
    split: bool

    @property
    def degenerate(self) -> bool:
        if self.field.p == 2:
            return self.b == 0
        f = self.field
        four = f.add(f.add(1, 1), f.add(1, 1))
        return f.sub(f.mul(self.b, self.b), f.mul(four, f.mul(self.a, self.c))) == 0

    def pair_with(self, xs, ys, zs) -> np.ndarray:
        """Indices of a*x + b*y + c*z, vectorized over parameter arrays."""
        f = self.field
        add, mul = f.add_table, f.mul_table
        return add[
            add[mul[self.a, xs], mul[self.b, ys]],
            mul[self.c, zs],
        ]


def classify_datum(field: Field, a, b, c) -> BesselDatum:
    a, b, c = (_ix(field, v) for v in (a, b, c))
    f = field
    if f.p != 2:
        four = f.add(f.add(1, 1), f.add(1, 1))
        disc = f.sub(f.mul(b, b), f.mul(four, f.mul(a, c)))
        if a == b == c == 0:
            rank_class, split = "rank0", False
        elif disc == 0:
            rank_class, split = "rank1", False
        elif f.legendre(disc) == 1:
            rank_class, split = "rank2_square", True
        else:
            rank_class, split = "rank2_nonsquare", False
    else:
        if a == b == c == 0:
            rank_class, split = "all_zero", False
        elif b == 0:
            rank_class, split = "b_zero_ac_nonzero", False
        else:
            e = f.epsilon(f.mul(f.mul(a, c), f.inv(f.mul(b, b))))
            if e == 1:
                rank_class, split = "b_nonzero_eps_plus", True
            else:
                rank_class, split = "b_nonzero_eps_minus", False
    return BesselDatum(field=field, a=a, b=b, c=c, rank_class=rank_class, split=split)


@dataclass
class SubgroupN:
    """The abelian unipotent radical, indexed by (x, y, z) with z fastest."""

    field: Field
    mats: np.ndarray  # (q^3, 16)
    xyz: np.ndarray  # (q^3, 3)

    def flat_index(self, x: int, y: int, z: int) -> int:
        q = self.field.q
        return (x * q + y) * q + z


def subgroup_N(field: Field) -> SubgroupN:
    q = field.q
    xyz = np.stack(
        np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij"),
        axis=-1,
    ).reshape(-1, 3)
    mats = np.stack([n_matrix(field, x, y, z) for x, y, z in xyz])
    return SubgroupN(field=field, mats=mats, xyz=xyz.astype(np.uint8))


class TorusStructure:
    """The stabilizing torus of a nondegenerate datum, with its structure
    maps: eigenvalue coordinates when split over F_q, a single coordinate in
    the quadratic extension when not, and the similitude-1 part in
    characteristic 2."""

    def __init__(self, field: Field, datum: BesselDatum):
        if datum.degenerate:
            raise DegenerateDatumError(
                f"(a,b,c)=({datum.a},{datum.b},{datum.c}) has no torus"
            )
        self.field = field
        self.datum = datum
        self.split = datum.split
        f = field
        q = f.q
        a, b, c = datum.a, datum.b, datum.c

        rows = []
        params = []
        mus = []
        for r in range(q):
            for s in range(q):
                mu = f.add(
                    f.sub(f.mul(r, r), f.mul(b, f.mul(r, s))),
                    f.mul(f.mul(a, c), f.mul(s, s)),
                )
                if mu == 0:
                    continue
                rbs = f.sub(r, f.mul(b, s))
                a_s = f.mul(a, s)
                c_s = f.mul(c, s)
                rows.append(
                    mat4(
                        f,
                        [
                            [rbs, f.neg(a_s), 0, 0],
                            [c_s, r, 0, 0],
                            [0, 0, rbs, a_s],
                            [0, 0, f.neg(c_s), r],
                        ],
                    )
                )
                params.append((r, s))
                mus.append(mu)
        self.mats = np.stack(rows)
        self.rs = np.array(params, dtype=np.uint8)
        self.mus = np.array(mus, dtype=np.uint8)
        self.order = len(rows)
        expected = (q - 1) ** 2 if self.split else q * q - 1
        if self.order != expected:
            raise RuntimeError(f"torus order {self.order}, expected {expected}")

        if f.p != 2:
            self._init_odd()
        else:
            self._init_even()

    # odd characteristic: eigenvalues via the square root of b^2 - 4ac
    def _init_odd(self):
        f = self.field
        a, b, c = self.datum.a, self.datum.b, self.datum.c
        four = f.add(f.add(1, 1), f.add(1, 1))
        disc = f.sub(f.mul(b, b), f.mul(four, f.mul(a, c)))
        inv2 = f.inv(f.add(1, 1))
        if self.split:
            delta = f.sqrt(disc)
            alphas = np.zeros((self.order, 2), dtype=np.uint8)
            for i, (r, s) in enumerate(self.rs):
                tr = f.sub(f.add(int(r), int(r)), f.mul(b, int(s)))
                sd = f.mul(int(s), delta)
                alphas[i, 0] = f.mul(inv2, f.add(tr, sd))
                alphas[i, 1] = f.mul(inv2, f.sub(tr, sd))
            self.alphas = alphas
            self.t_plus = np.nonzero(alphas[:, 1] == 1)[0]
            self.t_minus = np.nonzero(alphas[:, 0] == 1)[0]
        else:
            ext = quadratic_extension(f)
            delta = ext.sqrt_base(disc)
            inv2e = ext.ext.inv(ext.embed(f.add(1, 1)))
            alpha = np.zeros(self.order, dtype=np.int64)
            for i, (r, s) in enumerate(self.rs):
                tr = f.sub(f.add(int(r), int(r)), f.mul(b, int(s)))
                val = ext.ext.add(
                    ext.embed(tr), ext.ext.mul(ext.embed(int(s)), delta)
                )
                alpha[i] = ext.ext.mul(inv2e, val)
                if ext.norm(int(alpha[i])) != int(self.mus[i]):
                    raise RuntimeError("eigenvalue norm mismatch")
            self.alpha_ext = alpha

    # characteristic 2: split off the scalar part and take a cyclic log on
    # the similitude-1 part
    def _init_even(self):
        f = self.field
        tbl = kernels.tables_for(f)
        packed = kernels.pack(self.mats, tbl.bits)

        sp_mask = self.mus == 1
        self.sp_part = np.nonzero(sp_mask)[0]
        m = len(self.sp_part)  # q-1 split, q+1 nonsplit

        ident = identity_matrix(f)
        by_packed = {}
        gen_pos = None
        for i in self.sp_part:
            w = self.mats[i]
            k = 1
            while not (w == ident).all():
                w = kernels.mat_mul(w, self.mats[i], tbl).reshape(16)
                k += 1
            if k == m:
                gen_pos = int(i)
                break
        if gen_pos is None:
            raise RuntimeError("similitude-1 torus part is not cyclic")
        self.sp_generator = gen_pos

        w = ident.copy()
        for k in range(m):
            by_packed[int(kernels.pack(w, tbl.bits)[0])] = k
            w = kernels.mat_mul(w, self.mats[gen_pos], tbl).reshape(16)

        z_log = np.zeros(self.order, dtype=np.int64)
        sp_log = np.zeros(self.order, dtype=np.int64)
        for i in range(self.order):
            z = f.sqrt(int(self.mus[i]))
            zi = f.inv(z)
            s_mat = tbl.mul[np.uint8(zi), self.mats[i]]
            z_log[i] = int(f.dlog[z])
            sp_log[i] = by_packed[int(kernels.pack(s_mat, tbl.bits)[0])]
        self.z_log = z_log
        self.sp_log = sp_log
        self.sp_order = m

    def t_d(self, d) -> int:
        """Row index of the unique split-torus element with eigenvalue pair
        (d, 1); odd characteristic only."""
        d = _ix(self.field, d)
        if self.field.p == 2 or not self.split:
            raise ValueError("t_d is defined for split tori in odd characteristic")
        hits = np.nonzero((self.alphas[:, 0] == d) & (self.alphas[:, 1] == 1))[0]
        if len(hits) != 1:
            raise RuntimeError(f"expected a unique element for d={d}")
        return int(hits[0])


def subgroup_T(field: Field, datum: BesselDatum) -> TorusStructure:
    return TorusStructure(field, datum)


@dataclass
class RStructure:
    """Products t*n in torus-major order: row i*q^3 + j is torus row i times
    the j-th element of N."""

    torus: TorusStructure
    n: SubgroupN
    mats: np.ndarray

    def factor_index(self, flat: int):
        n3 = len(self.n.mats)
        return divmod(flat, n3)


def subgroup_R(field: Field, datum: BesselDatum) -> RStructure:
    torus = subgroup_T(field, datum)
    n = subgroup_N(field)
    tbl = kernels.tables_for(field)
    mats = kernels.mat_mul_cross(torus.mats, n.mats, tbl)
    keys = kernels.pack(mats, tbl.bits)
    if len(np.unique(keys)) != len(keys):
        raise RuntimeError("t*n factorization is not unique")
    return RStructure(torus=torus, n=n, mats=mats)


def auxiliary_subgroups(field: Field) -> dict:
    """Z (scalars), the Siegel parabolic P, the full upper unitriangular
    subgroup U, and the Klingen radical, as matrix arrays."""
    f = field
    q = f.q
    tbl = kernels.tables_for(f)
    gd = enumerate_group(f, "gsp")

    zmats = np.stack(
        [tbl.mul[np.uint8(lam), identity_matrix(f)] for lam in range(1, q)]
    )

    grid = gd.mats.reshape(-1, 4, 4)
    lower_zero = (
        (grid[:, 1, 0] == 0)
        & (grid[:, 2, 0] == 0)
        & (grid[:, 2, 1] == 0)
        & (grid[:, 3, 0] == 0)
        & (grid[:, 3, 1] == 0)
        & (grid[:, 3, 2] == 0)
    )
    unit_diag = (
        (grid[:, 0, 0] == 1)
        & (grid[:, 1, 1] == 1)
        & (grid[:, 2, 2] == 1)
        & (grid[:, 3, 3] == 1)
    )
    u_mask = lower_zero & unit_diag
    umats = gd.mats[u_mask]
    if len(umats) != q**4:
        raise RuntimeError(f"|U| = {len(umats)}, expected {q**4}")

    kl_mask = u_mask & (grid[:, 1, 2] == 0)
    klmats = gd.mats[kl_mask]
    if len(klmats) != q**3:
        raise RuntimeError(f"Klingen radical size {len(klmats)}, expected {q**3}")

    levi = []
    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    if f.sub(f.mul(a, d), f.mul(b, c)) == 0:
                        continue
                    for u in range(1, q):
                        levi.append(m_levi(f, a, b, c, d, u))
    nmats = subgroup_N(f).mats
    pmats = kernels.mat_mul_cross(np.stack(levi), nmats, tbl)
    keys = kernels.pack(pmats, tbl.bits)
    order = np.argsort(keys, kind="stable")
    pmats = pmats[order]
    if len(np.unique(keys)) != len(keys):
        raise RuntimeError("Siegel parabolic factorization is not unique")
    n_gl2 = (q * q - 1) * (q * q - q)
    if len(pmats) != n_gl2 * (q - 1) * q**3:
        raise RuntimeError("unexpected Siegel parabolic order")

    return {"Z": zmats, "P": pmats, "U": umats, "klingen_radical": klmats}
