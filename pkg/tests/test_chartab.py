"""Character tables: frozen degree data, orthogonality, caching."""

import numpy as np
import pytest

from conftest import reduced_values
from gsp4bessel.chartab import build_character_table, find_working_prime, load_table
from gsp4bessel.ffield import make_field

Q2_DEGREES = [1, 1, 5, 5, 5, 5, 9, 9, 10, 10, 16]
Q3_DEGREES = [1, 1, 6, 6, 8, 10, 15, 15, 15, 15, 20, 20, 20, 20, 20, 24, 24, 30,
              30, 40, 40, 60, 60, 60, 60, 60, 64, 64, 64, 64, 72, 80, 80, 80, 81,
              81, 90, 120]
Q3_CENTRAL = [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0,
              1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 1, 0, 0, 0, 1]


def test_q2_table_shape(table2):
    assert table2.n_chars == 11
    assert sorted(table2.degrees.tolist()) == Q2_DEGREES
    assert table2.e == 60
    assert table2.ell == 61
    assert table2.group_order == 720
    assert sum(d * d for d in table2.degrees.tolist()) == 720


def test_q3_table_shape(table3):
    assert table3.n_chars == 38
    assert table3.degrees.tolist() == Q3_DEGREES
    assert table3.e == 360
    assert table3.ell == 1801
    assert table3.group_order == 103680
    assert sum(d * d for d in table3.degrees.tolist()) == 103680


def test_q3_central_character_exponents(table3):
    got = [table3.central_character_exponent(t) for t in range(table3.n_chars)]
    assert got == Q3_CENTRAL


def test_q2_central_characters_trivial(table2):
    # GSp(4,2) has a trivial center, so every central exponent is zero
    assert all(
        table2.central_character_exponent(t) == 0 for t in range(table2.n_chars)
    )


@pytest.mark.parametrize("fixture", ["table2", "table3"])
def test_orthogonality(fixture, request):
    request.getfixturevalue(fixture).verify()


@pytest.mark.parametrize("fixture", ["table2", "table3"])
def test_values_at_identity_and_inversion(fixture, request):
    table = request.getfixturevalue(fixture)
    cd = table.classes
    for t in range(table.n_chars):
        assert table.value(t, cd.identity_class).as_int() == int(table.degrees[t])
        for k in range(cd.n_classes):
            assert table.value(t, int(cd.inverse_class[k])) == table.value(t, k).conjugate()


def test_second_orthogonality_spot(table2):
    # column norm: sum_t |chi_t(g)|^2 = |C_G(g)|
    cd = table2.classes
    ring = table2.ring
    for k in range(cd.n_classes):
        total = ring.zero
        for t in range(table2.n_chars):
            v = table2.value(t, k)
            total = total + v * v.conjugate()
        assert total == ring.from_int(720 // int(cd.sizes[k]))


def test_working_prime_contract():
    from sympy import isprime

    for e, order in [(60, 720), (360, 103680)]:
        ell = find_working_prime(e, order)
        assert isprime(ell)
        assert ell % e == 1
        assert ell * ell > 4 * order


def test_cache_roundtrip(tmp_path, table2):
    f2 = make_field(2, 1)
    path = str(tmp_path / "table.json")
    fresh = build_character_table(f2, "gsp", cache_path=path)
    assert (tmp_path / "table.json").exists()
    loaded = build_character_table(f2, "gsp", cache_path=path)
    assert np.array_equal(reduced_values(fresh), reduced_values(loaded))
    assert np.array_equal(reduced_values(loaded), reduced_values(table2))
    assert loaded.degrees.tolist() == fresh.degrees.tolist()
    # the persisted table is the symplectic one the assembly starts from
    sp = load_table(f2, "sp", path)
    assert sp.kind == "sp"


def test_corrupt_cache_falls_back_to_rebuild(tmp_path, table2):
    f2 = make_field(2, 1)
    path = str(tmp_path / "table.json")
    build_character_table(f2, "gsp", cache_path=path)
    with open(path, "w") as fh:
        fh.write("{ definitely not json")
    rebuilt = build_character_table(f2, "gsp", cache_path=path)
    assert np.array_equal(reduced_values(rebuilt), reduced_values(table2))
    # the bad file was replaced with a good one
    load_table(f2, "sp", path)


def test_wrong_field_cache_is_ignored(tmp_path):
    f2 = make_field(2, 1)
    f3 = make_field(3, 1)
    path = str(tmp_path / "table.json")
    build_character_table(f2, "gsp", cache_path=path)
    with pytest.raises(Exception):
        load_table(f3, "gsp", path)


def test_sp_table_at_q2_matches_gsp(table2):
    # the similitude group at q=2 is the symplectic group itself
    f2 = make_field(2, 1)
    sp = build_character_table(f2, "sp")
    assert sorted(sp.degrees.tolist()) == Q2_DEGREES
    assert sp.group_order == 720
