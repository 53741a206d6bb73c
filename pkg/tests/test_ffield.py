"""Finite-field table construction, characters, and quadratic extensions."""

import pytest

from gsp4bessel.ffield import FieldError, make_field, quadratic_extension

SMALL = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)]
ODD = [(3, 1), (5, 1), (7, 1), (3, 2)]
EVEN = [(2, 1), (2, 2), (2, 3)]


@pytest.mark.parametrize("p,n", SMALL)
def test_field_axioms(p, n):
    f = make_field(p, n)
    q = f.q
    assert q == p**n and f.p == p and f.n == n
    assert f.zero == 0 and f.one == 1
    for a in range(q):
        assert f.add(a, 0) == a
        assert f.mul(a, 1) == a
        assert f.add(a, f.neg(a)) == 0
        if a:
            assert f.mul(a, f.inv(a)) == 1
    for a in range(q):
        for b in range(q):
            assert f.add(a, b) == f.add(b, a)
            assert f.mul(a, b) == f.mul(b, a)
            assert f.sub(a, b) == f.add(a, f.neg(b))
            for c in range(q):
                assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
                assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
                assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))


@pytest.mark.parametrize("p,n", SMALL)
def test_generator_and_dlog(p, n):
    f = make_field(p, n)
    assert f.unit_order(f.generator) == f.q - 1
    seen = set()
    for a in f.units():
        k = int(f.dlog[a])
        assert 0 <= k < f.q - 1
        assert f.pow_(f.generator, k) == a
        assert int(f.exp_table[k]) == a
        seen.add(k)
    assert len(seen) == f.q - 1


@pytest.mark.parametrize("p,n", SMALL)
def test_trace_is_additive_and_onto(p, n):
    f = make_field(p, n)
    images = set()
    for a in range(f.q):
        images.add(f.trace(a))
        for b in range(f.q):
            assert f.trace(f.add(a, b)) == (f.trace(a) + f.trace(b)) % p
    assert images == set(range(p))


@pytest.mark.parametrize("p,n", SMALL)
def test_psi_is_an_additive_character(p, n):
    f = make_field(p, n)
    nontrivial = False
    for a in range(f.q):
        ea = f.psi(a).exponent_in(p)
        if ea % p:
            nontrivial = True
        for b in range(f.q):
            esum = f.psi(f.add(a, b)).exponent_in(p)
            assert esum % p == (ea + f.psi(b).exponent_in(p)) % p
    assert nontrivial


@pytest.mark.parametrize("p,n", ODD)
def test_legendre_odd(p, n):
    f = make_field(p, n)
    squares = {f.mul(a, a) for a in f.units()}
    assert len(squares) == (f.q - 1) // 2
    assert f.legendre(0) == 0
    for a in f.units():
        assert f.legendre(a) == (1 if a in squares else -1)
        for b in f.units():
            assert f.legendre(f.mul(a, b)) == f.legendre(a) * f.legendre(b)
    assert f.legendre(f.xi) == -1
    assert f.q_circle is None


@pytest.mark.parametrize("p,n", EVEN)
def test_epsilon_even(p, n):
    f = make_field(p, n)
    circle = frozenset(f.add(f.mul(x, x), x) for x in range(f.q))
    assert f.q_circle == circle
    assert len(f.q_circle) == f.q // 2
    for a in range(f.q):
        assert f.epsilon(a) == (1 if a in circle else -1)
    assert f.epsilon(0) == 1


@pytest.mark.parametrize("p,n", SMALL)
def test_sqrt(p, n):
    f = make_field(p, n)
    for a in range(f.q):
        sq = f.mul(a, a)
        s = f.sqrt(sq)
        assert f.mul(s, s) == sq
    if p != 2:
        with pytest.raises(FieldError):
            f.sqrt(f.xi)


@pytest.mark.parametrize("p,n", ODD)
def test_norm_one_circle_has_q_plus_one_points(p, n):
    # points on y^2 - xi x^2 = 1
    f = make_field(p, n)
    count = sum(
        1
        for x in range(f.q)
        for y in range(f.q)
        if f.sub(f.mul(y, y), f.mul(f.xi, f.mul(x, x))) == f.one
    )
    assert count == f.q + 1


@pytest.mark.parametrize("p,n", [(2, 1), (3, 1), (5, 1), (2, 2)])
def test_quadratic_extension(p, n):
    f = make_field(p, n)
    ext = quadratic_extension(f)
    big = ext.ext
    assert big.q == f.q**2
    for a in range(f.q):
        for b in range(f.q):
            assert ext.embed(f.add(a, b)) == big.add(ext.embed(a), ext.embed(b))
            assert ext.embed(f.mul(a, b)) == big.mul(ext.embed(a), ext.embed(b))
    for u in big.units():
        fr = ext.frobenius(u)
        assert ext.frobenius(fr) == u
        nm = ext.norm(u)
        assert ext.embed(nm) == big.mul(u, fr)
    # norm is multiplicative and onto the base units
    norms = {ext.norm(u) for u in big.units()}
    assert norms == set(f.units())
    assert big.unit_order(ext.gamma) == f.q - 1 or f.q == 2
    assert big.unit_order(ext.eta) == f.q + 1


def test_poly_str_rendering():
    f4 = make_field(2, 2)
    assert [f4.poly_str(v) for v in range(4)] == ["0", "1", "x", "x+1"]
    assert f4.modulus_str() == "x^2+x+1"
    f8 = make_field(2, 3)
    assert f8.modulus_str() == "x^3+x+1"
    f9 = make_field(3, 2)
    assert f9.modulus_str() == "x^2+1"
    f3 = make_field(3, 1)
    assert f3.poly_str(2) == "2"


def test_unsupported_fields_rejected():
    with pytest.raises(FieldError):
        make_field(4, 1)  # not a prime characteristic
    with pytest.raises(FieldError):
        make_field(6, 1)
    with pytest.raises(FieldError):
        make_field(2, 5)  # q = 32 above the supported range
    with pytest.raises(FieldError):
        make_field(17, 1)
