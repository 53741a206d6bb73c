"""Exact arithmetic in Z[zeta_e].

A value is stored reduced into the power basis 1, zeta, ..., zeta^(phi(e)-1)
of the e-th cyclotomic field, with arbitrary-precision integer coefficients.
Hot loops elsewhere accumulate "root multisets" instead: integer vectors of
length e where slot k counts zeta_e^k; reduce_vector collapses those to the
canonical form.  Equality, hashing and a total order (lexicographic on the
reduced coefficients) make values usable as dict keys and sort keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import Poly, Symbol, cyclotomic_poly

__all__ = ["Cyclotomic", "CyclotomicRing", "get_ring"]


class CyclotomicRing:
    """Z[zeta_e]: reduction data for a fixed conductor e."""

    def __init__(self, e: int):
        if e < 1:
            raise ValueError("conductor must be >= 1")
        self.e = e
        x = Symbol("x")
        coeffs = Poly(cyclotomic_poly(e, x), x).all_coeffs()  # big-endian
        self.phi_coeffs = tuple(int(c) for c in reversed(coeffs))  # little-endian
        self.degree = len(self.phi_coeffs) - 1

        # row k = coefficients of zeta^k in the power basis
        rows = np.zeros((e, self.degree), dtype=np.int64)
        cur = [0] * self.degree
        cur[0] = 1
        for k in range(e):
            rows[k] = cur
            # multiply by zeta: shift, then eliminate the zeta^degree term
            lead = cur[-1]
            cur = [0] + cur[:-1]
            if lead:
                for i in range(self.degree):
                    cur[i] -= lead * self.phi_coeffs[i]
        self.reduce_rows = rows
        self._max_row = int(np.abs(rows).max())

        # conjugation zeta^k -> zeta^(e-k) as a matrix on the power basis
        conj = np.zeros((self.degree, self.degree), dtype=np.int64)
        for k in range(self.degree):
            conj[k] = rows[(e - k) % e]
        self.conj_matrix = conj

    def reduce_vector(self, vec) -> "Cyclotomic":
        """Collapse a length-e root multiset (int vector) to canonical form."""
        vec = np.asarray(vec)
        if vec.shape != (self.e,):
            raise ValueError(f"expected length-{self.e} vector")
        # int64 is safe while |vec| * max|row| * e stays below 2^63
        bound = int(np.abs(vec).max(initial=0)) * self._max_row * self.e
        if vec.dtype == object or bound >= 2**62:
            coeffs = [sum(int(vec[k]) * int(self.reduce_rows[k, i]) for k in range(self.e)) for i in range(self.degree)]
        else:
            coeffs = (vec.astype(np.int64) @ self.reduce_rows).tolist()
        return Cyclotomic(self, tuple(int(c) for c in coeffs))

    def zeta(self, k: int = 1) -> "Cyclotomic":
        return Cyclotomic(self, tuple(int(c) for c in self.reduce_rows[k % self.e]))

    def from_int(self, m: int) -> "Cyclotomic":
        return Cyclotomic(self, (m,) + (0,) * (self.degree - 1))

    @property
    def zero(self) -> "Cyclotomic":
        return self.from_int(0)

    @property
    def one(self) -> "Cyclotomic":
        return self.from_int(1)

    def from_root(self, order: int, exponent: int) -> "Cyclotomic":
        """zeta_order^exponent inside this ring (requires order | e)."""
        if self.e % order:
            raise ValueError(f"order {order} does not divide conductor {self.e}")
        return self.zeta((exponent % order) * (self.e // order))

    def __repr__(self):
        return f"CyclotomicRing(e={self.e})"


@lru_cache(maxsize=None)
def get_ring(e: int) -> CyclotomicRing:
    return CyclotomicRing(e)


@dataclass(frozen=True)
class Cyclotomic:
    """An element of Z[zeta_e] in reduced power-basis coordinates."""

    ring: CyclotomicRing
    coeffs: tuple

    def _check(self, other) -> "Cyclotomic":
        if not isinstance(other, Cyclotomic):
            if isinstance(other, int):
                return self.ring.from_int(other)
            return NotImplemented
        if other.ring.e != self.ring.e:
            raise ValueError("mixed conductors")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return Cyclotomic(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return Cyclotomic(self.ring, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return self.ring.from_int(other) - self

    def __neg__(self):
        return Cyclotomic(self.ring, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            return Cyclotomic(self.ring, tuple(a * other for a in self.coeffs))
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        e, d = self.ring.e, self.ring.degree
        # convolve, fold exponents mod e, then reduce mod Phi_e
        folded = [0] * e
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        folded[(i + j) % e] += a * b
        return self.ring.reduce_vector(np.array(folded, dtype=object if max(map(abs, folded), default=0) >= 2**62 else np.int64))

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclotomic":
        vec = np.array(self.coeffs, dtype=object)
        out = [sum(int(vec[k]) * int(self.ring.conj_matrix[k, i]) for k in range(self.ring.degree)) for i in range(self.ring.degree)]
        return Cyclotomic(self.ring, tuple(out))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def as_int(self) -> int:
        if not self.is_rational:
            raise ValueError(f"not a rational integer: {self}")
        return self.coeffs[0]

    def divide_exact(self, m: int) -> "Cyclotomic":
        if any(c % m for c in self.coeffs):
            raise ValueError(f"not divisible by {m}: {self}")
        return Cyclotomic(self.ring, tuple(c // m for c in self.coeffs))

    def as_complex(self) -> complex:
        e = self.ring.e
        z = np.exp(2j * np.pi / e)
        return complex(sum(c * z ** k for k, c in enumerate(self.coeffs)))

    def sort_key(self) -> tuple:
        return self.coeffs

    def __lt__(self, other):
        other = self._check(other)
        return self.coeffs < other.coeffs

    def __le__(self, other):
        other = self._check(other)
        return self.coeffs <= other.coeffs

    def __hash__(self):
        return hash((self.ring.e, self.coeffs))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_rational and self.coeffs[0] == other
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        return self.ring.e == other.ring.e and self.coeffs == other.coeffs

    def __repr__(self):
        if self.is_rational:
            return str(self.coeffs[0])
        terms = [f"{c}*z^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"Cyc{self.ring.e}({' + '.join(terms)})"
