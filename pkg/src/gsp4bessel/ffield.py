"""Exact arithmetic in small finite fields.

An element of F_q (q = p^n) is an integer index in [0, q): index k encodes
the polynomial sum c_i X^i whose coefficients c_i are the base-p digits of k.
The modulus is the monic irreducible of degree n with the least integer
encoding of its non-leading coefficients, so every field here is a fixed,
reproducible object.  All arithmetic is table-driven; base fields are capped
at q = 16, quadratic extensions at q^2 = 256.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import isprime

MAX_Q = 16

__all__ = [
    "MAX_Q",
    "FieldError",
    "Field",
    "FieldElement",
    "ComplexRoot",
    "CyclicCharacter",
    "QuadraticExtension",
    "make_field",
    "quadratic_extension",
    "unit_character",
]


class FieldError(ValueError):
    pass


# ---------------------------------------------------------------- polynomials
# Little-endian coefficient tuples over Z/p, used only to build the tables.


def _trim(f):
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mul(f, g, p):
    out = [0] * (len(f) + len(g) - 1) if f and g else []
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return _trim(out)


def _poly_mod(f, m, p):
    f = list(f)
    dm = len(m) - 1
    lead_inv = pow(m[-1], -1, p)
    while len(f) - 1 >= dm and f:
        c = (f[-1] * lead_inv) % p
        shift = len(f) - 1 - dm
        for i, a in enumerate(m):
            f[shift + i] = (f[shift + i] - c * a) % p
        f = _trim(f)
    return f


def _poly_gcd(f, g, p):
    f, g = _trim(f), _trim(g)
    while g:
        f, g = g, _poly_mod(f, g, p)
    return f


def _poly_pow_mod(f, k, m, p):
    result = [1]
    base = _poly_mod(f, m, p)
    while k:
        if k & 1:
            result = _poly_mod(_poly_mul(result, base, p), m, p)
        base = _poly_mod(_poly_mul(base, base, p), m, p)
        k >>= 1
    return result


def _poly_sub(f, g, p):
    m = max(len(f), len(g))
    f = list(f) + [0] * (m - len(f))
    g = list(g) + [0] * (m - len(g))
    return _trim([(a - b) % p for a, b in zip(f, g)])


def _is_irreducible(f, p):
    """Rabin test: f monic of degree n over Z/p."""
    n = len(f) - 1
    if n == 1:
        return True
    x = [0, 1]
    xq = _poly_pow_mod(x, p**n, f, p)
    if _poly_sub(xq, x, p):
        return False
    for r in {d for d in range(2, n + 1) if n % d == 0 and isprime(d)}:
        xr = _poly_pow_mod(x, p ** (n // r), f, p)
        g = _poly_gcd(f, _poly_sub(xr, x, p), p)
        if len(g) - 1 > 0:
            return False
    return True


def _digits(k, p, n):
    out = []
    for _ in range(n):
        out.append(k % p)
        k //= p
    return out


def _index(digits, p):
    out = 0
    for c in reversed(digits):
        out = out * p + c
    return out


def _find_modulus(p, n):
    """Least monic irreducible of degree n (by integer encoding of the tail)."""
    for k in range(p**n):
        f = _digits(k, p, n) + [1]
        if _is_irreducible(f, p):
            return tuple(f)
    raise FieldError(f"no irreducible of degree {n} over Z/{p}")  # unreachable


# --------------------------------------------------------------- roots of one


@dataclass(frozen=True)
class ComplexRoot:
    """The exact root of unity zeta_order^exponent, stored in lowest terms."""

    order: int
    exponent: int

    def __post_init__(self):
        m, k = self.order, self.exponent % self.order
        g = math.gcd(m, k) if k else m
        object.__setattr__(self, "order", m // g)
        object.__setattr__(self, "exponent", k // g)

    def __mul__(self, other: "ComplexRoot") -> "ComplexRoot":
        m = math.lcm(self.order, other.order)
        return ComplexRoot(m, self.exponent * (m // self.order) + other.exponent * (m // other.order))

    def __pow__(self, k: int) -> "ComplexRoot":
        return ComplexRoot(self.order, self.exponent * k)

    def conjugate(self) -> "ComplexRoot":
        return ComplexRoot(self.order, -self.exponent)

    @property
    def is_one(self) -> bool:
        return self.order == 1

    def exponent_in(self, e: int) -> int:
        """Exponent of this root on the zeta_e scale (requires order | e)."""
        if e % self.order:
            raise ValueError(f"order {self.order} does not divide {e}")
        return (self.exponent * (e // self.order)) % e

    def as_complex(self) -> complex:
        return complex(np.exp(2j * np.pi * self.exponent / self.order))


@dataclass(frozen=True)
class CyclicCharacter:
    """Character of a cyclic group of a given order: g^k -> zeta^(index*k)."""

    order: int
    index: int

    def at_power(self, k: int) -> ComplexRoot:
        return ComplexRoot(self.order, self.index * k)


# --------------------------------------------------------------------- fields


class Field:
    """F_q with all arithmetic as precomputed numpy tables over indices."""

    def __init__(self, p: int, n: int, _token=None):
        if _token is not _FIELD_TOKEN:
            raise FieldError("use make_field()")
        self.p = p
        self.n = n
        self.q = q = p**n
        self.modulus = _find_modulus(p, n)
        self.zero, self.one = 0, 1

        digits = np.array([_digits(k, p, n) for k in range(q)], dtype=np.int64)
        powers = p ** np.arange(n, dtype=np.int64)
        self.add_table = (((digits[:, None, :] + digits[None, :, :]) % p) @ powers).astype(np.uint8)
        self.neg_table = (((-digits) % p) @ powers).astype(np.uint8)

        mul = np.zeros((q, q), dtype=np.uint8)
        polys = [_trim(_digits(k, p, n)) for k in range(q)]
        for i in range(q):
            for j in range(i, q):
                prod = _poly_mod(_poly_mul(polys[i], polys[j], p), list(self.modulus), p)
                v = _index(prod + [0] * (n - len(prod)), p)
                mul[i, j] = mul[j, i] = v
        self.mul_table = mul

        # generator: least index of multiplicative order q-1
        self.generator = self._find_generator()
        self.dlog = np.full(q, -1, dtype=np.int64)
        self.exp_table = np.zeros(max(q - 1, 1), dtype=np.uint8)
        acc = 1
        for k in range(q - 1):
            self.exp_table[k] = acc
            self.dlog[acc] = k
            acc = int(mul[acc, self.generator])
        self.inv_table = np.zeros(q, dtype=np.uint8)
        for x in range(1, q):
            self.inv_table[x] = self.exp_table[(q - 1 - self.dlog[x]) % (q - 1)]

        # absolute trace to the prime field, as an integer in [0, p)
        self.trace_table = np.zeros(q, dtype=np.uint8)
        for x in range(q):
            t, y = 0, x
            for _ in range(n):
                t = int(self.add_table[t, y])
                y = self.pow_(y, p)
            if t >= p:
                raise FieldError("trace left the prime field")  # cannot happen
            self.trace_table[x] = t

        if p != 2:
            self.legendre_table = np.zeros(q, dtype=np.int8)
            for x in range(1, q):
                self.legendre_table[x] = 1 if self.dlog[x] % 2 == 0 else -1
            self.q_circle = None
            self.xi = int(np.nonzero(self.legendre_table == -1)[0][0])
        else:
            # image of x -> x^2 + x, an index-2 additive subgroup
            circle = {int(self.add_table[mul[x, x], x]) for x in range(q)}
            self.q_circle = frozenset(circle)
            self.epsilon_table = np.array([1 if x in circle else -1 for x in range(q)], dtype=np.int8)
            self.legendre_table = None
            self.xi = min(x for x in range(q) if x not in circle)

        self._ext = None

    def _find_generator(self) -> int:
        target = self.q - 1
        for g in range(1, self.q):
            x, order = g, 1
            while x != 1:
                x = int(self.mul_table[x, g])
                order += 1
            if order == target:
                return g
        raise FieldError("no generator found")  # unreachable

    # scalar index arithmetic -------------------------------------------------

    def add(self, x: int, y: int) -> int:
        return int(self.add_table[x, y])

    def sub(self, x: int, y: int) -> int:
        return int(self.add_table[x, self.neg_table[y]])

    def neg(self, x: int) -> int:
        return int(self.neg_table[x])

    def mul(self, x: int, y: int) -> int:
        return int(self.mul_table[x, y])

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of 0")
        return int(self.inv_table[x])

    def div(self, x: int, y: int) -> int:
        return self.mul(x, self.inv(y))

    def pow_(self, x: int, k: int) -> int:
        if x == 0:
            if k == 0:
                return 1
            if k < 0:
                raise ZeroDivisionError("0 to a negative power")
            return 0
        return int(self.exp_table[(int(self.dlog[x]) * k) % (self.q - 1)])

    def trace(self, x: int) -> int:
        return int(self.trace_table[x])

    def sqrt(self, x: int) -> int:
        """A square root in F_q; for odd q raises if x is not a square.

        Even q: squaring is a bijection, the root is x^(q/2).  Odd q: the
        root with the smaller index is returned.
        """
        if self.p == 2:
            return self.pow_(x, self.q // 2)
        if x == 0:
            return 0
        if self.legendre(x) < 0:
            raise FieldError(f"{x} is not a square in F_{self.q}")
        r = int(self.exp_table[int(self.dlog[x]) // 2])
        return min(r, self.neg(r))

    # structure ---------------------------------------------------------------

    def legendre(self, x: int) -> int:
        """Square-class of x: 0, +1 (nonzero square) or -1 (nonsquare). Odd q."""
        if self.p == 2:
            raise FieldError("square classes degenerate in characteristic 2")
        return int(self.legendre_table[x])

    def epsilon(self, x: int) -> int:
        """+1 on the image of y -> y^2 + y, -1 off it. Even q only."""
        if self.p != 2:
            raise FieldError("epsilon is an even-characteristic notion")
        return int(self.epsilon_table[x])

    def psi(self, x: int, scale: int = 1) -> ComplexRoot:
        """Additive character zeta_p^Tr(scale*x)."""
        return ComplexRoot(self.p, self.trace(self.mul(scale, x)))

    def unit_order(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("0 has no multiplicative order")
        return (self.q - 1) // math.gcd(self.q - 1, int(self.dlog[x]))

    def element(self, index: int) -> "FieldElement":
        if not 0 <= index < self.q:
            raise FieldError(f"index {index} out of range for F_{self.q}")
        return FieldElement(self, index)

    def elements(self):
        return [FieldElement(self, k) for k in range(self.q)]

    def units(self):
        return range(1, self.q)

    def poly_str(self, v) -> str:
        """Render an element index as a polynomial in the adjoined root x;
        prime-field elements render as plain integers."""
        v = int(v)
        if not 0 <= v < self.q:
            raise FieldError(f"element index {v} out of range for q={self.q}")
        if self.n == 1:
            return str(v)
        terms = []
        for i in reversed(range(self.n)):
            c = (v // self.p**i) % self.p
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append("x" if c == 1 else f"{c}x")
            else:
                terms.append(f"x^{i}" if c == 1 else f"{c}x^{i}")
        return "+".join(terms) if terms else "0"

    def modulus_str(self) -> str:
        """The defining polynomial, rendered like poly_str."""
        coeffs = list(self.modulus)
        terms = []
        for i in reversed(range(len(coeffs))):
            c = coeffs[i] % self.p
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append("x" if c == 1 else f"{c}x")
            else:
                terms.append(f"x^{i}" if c == 1 else f"{c}x^{i}")
        return "+".join(terms) if terms else "0"

    def __repr__(self):
        return f"Field(p={self.p}, n={self.n})"

    def __hash__(self):
        return hash((self.p, self.n))

    def __eq__(self, other):
        return isinstance(other, Field) and (self.p, self.n) == (other.p, other.n)


_FIELD_TOKEN = object()


@lru_cache(maxsize=None)
def _build_field(p: int, n: int) -> Field:
    return Field(p, n, _token=_FIELD_TOKEN)


def make_field(p: int, n: int, *, max_q: int = MAX_Q) -> Field:
    """Construct F_{p^n}.  Bounded (default q <= 16) to keep tables small."""
    if not isprime(p):
        raise FieldError(f"{p} is not prime")
    if n < 1:
        raise FieldError("n must be >= 1")
    if p**n > max_q:
        raise FieldError(f"q = {p**n} exceeds the configured bound {max_q}")
    return _build_field(p, n)


@dataclass(frozen=True)
class FieldElement:
    """Convenience wrapper over an element index, with operator overloads."""

    field: Field
    index: int

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError("elements of different fields")
            return other.index
        if isinstance(other, int):
            return other % self.field.p  # prime-subfield literal
        return NotImplemented

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.index, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.index, self._coerce(other)))

    def __rsub__(self, other):
        return FieldElement(self.field, self.field.sub(self._coerce(other), self.index))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.index))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.index, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.field, self.field.div(self.index, self._coerce(other)))

    def __rtruediv__(self, other):
        return FieldElement(self.field, self.field.div(self._coerce(other), self.index))

    def __pow__(self, k: int):
        return FieldElement(self.field, self.field.pow_(self.index, k))

    def __int__(self):
        return self.index

    def __bool__(self):
        return self.index != 0

    def __repr__(self):
        return f"F{self.field.q}({self.index})"


def unit_character(field: Field, j: int):
    """Character of F_q^x sending the field generator to zeta_{q-1}^j."""
    m = field.q - 1

    def chi(x: int) -> ComplexRoot:
        if x == 0:
            raise ZeroDivisionError("unit character at 0")
        return ComplexRoot(m, j * int(field.dlog[x]))

    return chi


# ---------------------------------------------------------------- extensions


class QuadraticExtension:
    """F_{q^2} over F_q with a fixed embedding, norm, and reference units.

    gamma and eta are fixed elements of F_{q^2}^x of orders q-1 and q+1
    (powers of the extension-field generator, so the choice is deterministic).
    """

    def __init__(self, base: Field):
        self.base = base
        q = base.q
        self.ext = _build_field(base.p, 2 * base.n)
        if self.ext.q != q * q:
            raise FieldError("bad extension degree")  # unreachable

        # deterministic root of the base modulus inside the extension
        self.root = next(
            t for t in range(self.ext.q) if self._eval_base_modulus(t) == 0
        )
        embed = []
        for k in range(q):
            acc, tpow = 0, 1
            for c in _digits(k, base.p, base.n):
                if c:
                    # c is a prime-field index, valid in the extension too
                    acc = self.ext.add(acc, self.ext.mul(c, tpow))
                tpow = self.ext.mul(tpow, self.root)
            embed.append(acc)
        self.embed_table = np.array(embed, dtype=np.int64)
        self._back = {e: k for k, e in enumerate(embed)}
        if len(self._back) != q:
            raise FieldError("embedding not injective")  # unreachable

        g = self.ext.generator
        self.gamma = self.ext.pow_(g, q + 1)  # order q-1
        self.eta = self.ext.pow_(g, q - 1)  # order q+1

        # least square root in F_{q^2} of each base element (always exists)
        roots = np.full(q, -1, dtype=np.int64)
        for y in range(self.ext.q - 1, -1, -1):
            sq = self.ext.mul(y, y)
            b = self._back.get(sq)
            if b is not None:
                roots[b] = y
        if (roots < 0).any():
            raise FieldError("missing square root")  # unreachable
        self.sqrt_table = roots

    def _eval_base_modulus(self, t: int) -> int:
        acc = 0
        for c in reversed(self.base.modulus):
            acc = self.ext.add(self.ext.mul(acc, t), c)
        return acc

    def embed(self, x: int) -> int:
        return int(self.embed_table[x])

    def in_base(self, xe: int):
        """Base-field index of xe, or None if xe lies outside F_q."""
        return self._back.get(xe)

    def frobenius(self, xe: int) -> int:
        return self.ext.pow_(xe, self.base.q)

    def norm(self, xe: int) -> int:
        nrm = self.ext.pow_(xe, self.base.q + 1)
        b = self._back.get(nrm)
        if b is None:
            raise FieldError("norm left the base field")  # cannot happen
        return b

    def sqrt_base(self, x: int) -> int:
        """Least y in F_{q^2} with y^2 = x (x given as a base index)."""
        return int(self.sqrt_table[x])


def quadratic_extension(field: Field) -> QuadraticExtension:
    if field._ext is None:
        field._ext = QuadraticExtension(field)
    return field._ext
