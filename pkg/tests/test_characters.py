import json

import pytest

from efl.characters_data import (
    CharacterError,
    CharacterSpec,
    build_character,
    character_from_label,
    conductor_of,
    enumerate_characters,
    euler_phi,
    factorize,
    load_character,
    orthogonality_sum,
    primitive_characters,
    standard_generators,
    trivial_character,
)
from efl.cli import data_dir
from efl.padic import Place, localize_dirichlet


def legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def test_quadratic_mod5_is_legendre():
    chi = build_character(CharacterSpec(5, ((2, 2, 4),)))
    assert [round(v.real) for v in chi.values()] == [legendre(a, 5) for a in range(5)]
    assert chi.is_real and chi.parity == 0


def test_mod4_odd():
    chi = build_character(CharacterSpec(4, ((3, 1, 2),)))
    assert chi(3) == pytest.approx(-1)
    assert chi.parity == 1


def test_modulus_one():
    chi = build_character(CharacterSpec(1, ()))
    assert chi.is_trivial and chi.modulus == 1


def test_inconsistent_exponents():
    # 4 = 2^2 mod 5: images of 2 and 4 that disagree
    with pytest.raises(CharacterError):
        build_character(CharacterSpec(5, ((2, 1, 4), (4, 1, 4))))


def test_generators_must_span():
    with pytest.raises(CharacterError):
        build_character(CharacterSpec(8, ((5, 1, 2),)))


def test_standard_generators():
    assert standard_generators(5) == [2]
    assert standard_generators(16) == [15, 5]
    assert standard_generators(9) == [2]


def test_conductor_examples():
    assert conductor_of(trivial_character(1)) == 1
    assert conductor_of(character_from_label("mod:5:gen:2:exp:2")) == 5
    induced = character_from_label("mod:8:gen:7:exp:1:gen:5:exp:0")
    assert induced(3) == pytest.approx(-1)
    assert conductor_of(induced) == 4


@pytest.mark.parametrize("m", [3, 4, 5, 7, 8, 9, 12, 15, 16, 20])
def test_orthogonality(m):
    chars = list(enumerate_characters(m))
    assert len(chars) == euler_phi(m)
    for i, chi in enumerate(chars):
        for j, psi in enumerate(chars):
            want = euler_phi(m) if i == j else 0
            assert abs(orthogonality_sum(chi, psi) - want) < 1e-12


@pytest.mark.parametrize("m", [4, 5, 8, 12, 15, 21, 24, 40])
def test_conductor_equals_local_product(m):
    for chi in enumerate_characters(m):
        c = conductor_of(chi)
        prim = [x for x in primitive_characters(c)
                if all(x.turn(a) == chi.turn(a) for a in range(m) if chi.turn(a) is not None)]
        assert len(prim) == 1
        prod = 1
        for p in factorize(c):
            prod *= p ** localize_dirichlet(prim[0], Place.finite(p)).conductor
        assert prod == c


def test_label_round_trip():
    for m in (5, 8, 12):
        for chi in enumerate_characters(m):
            assert character_from_label(chi.label()) == chi


def test_bundled_character_files():
    folder = data_dir() / "characters"
    files = sorted(folder.glob("*.json"))
    assert files
    for path in files:
        chi = load_character(path)
        spec = CharacterSpec.from_json(json.loads(path.read_text()))
        assert CharacterSpec.from_json(spec.to_json()) == spec
        assert chi.primitive
