import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cuspidal
from efl.characters_data import character_from_label, primitive_characters
from efl.kernel import QuadratureConfig
from efl.log_fourier import REAL_TAGS, COMPLEX_TAGS
from efl.padic import (
    ArchCharacter,
    BruhatFunction,
    LocalCharacter,
    NotCuspidalError,
    Place,
    localize_dirichlet,
)
from efl.test_functions import make_bump, make_spline
from efl.weil_local import (
    IdeleLocalComponent,
    WeilError,
    check_cuspidal,
    conductor_integral,
    conductor_operator_apply,
    eigenfunction,
    expected_eigenvalue,
    k_shift_term,
    op_I,
    op_A,
    op_R,
    pairing,
    weil_term_arch,
    weil_term_finite,
    weil_term_mellin,
    weil_term_real_u_form,
)

REAL, CPLX = Place.real(), Place.complex()
CFG = QuadratureConfig(1e-13, 1e-12)


def local(label, p):
    return localize_dirichlet(character_from_label(label), Place.finite(p))


# ---------------------------------------------------------------------------
# finite places


def test_support_avoiding_prime_powers():
    comp = IdeleLocalComponent(Place.finite(2), make_bump(0.6, 1.5))
    assert weil_term_finite(comp, "both") == 0


def test_single_prime_power():
    # f supported near 2 with f(2) = 1: only the |u| = 1/2 annulus contributes
    f = make_bump(1.5, 2.5)
    f = f * (1 / float(f(2.0)))
    comp = IdeleLocalComponent(Place.finite(2), f)
    assert weil_term_finite(comp, "both") == pytest.approx(math.log(2), abs=1e-13)


def test_ramified_mod5():
    f = make_bump(0.9, 1.1)
    f = f * (1 / float(f(1.0)))
    comp = IdeleLocalComponent(Place.finite(5), f, local("mod:5:gen:2:exp:2", 5))
    assert weil_term_finite(comp, "both") == pytest.approx(-math.log(5), abs=1e-12)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
@pytest.mark.parametrize("ab", [(0.5, 2), (0.2, 3.5), (0.3, 1.0), (1.0, 9.0)])
def test_annulus_and_convolution_agree(p, ab):
    for f in (make_bump(*ab), make_spline(*ab)):
        comp = IdeleLocalComponent(Place.finite(p), f)
        a = weil_term_finite(comp, "annulus")
        b = weil_term_finite(comp, "convolution")
        assert abs(a - b) < 1e-12 * (1 + abs(a))


@pytest.mark.parametrize("m", [4, 5, 8, 9, 12])
def test_two_paths_ramified(m):
    f = make_bump(0.2, 5.0)
    for chi in primitive_characters(m):
        for p in (2, 3, 5):
            if m % p:
                continue
            comp = IdeleLocalComponent(Place.finite(p), f, localize_dirichlet(chi, Place.finite(p)))
            a = weil_term_finite(comp, "annulus")
            b = weil_term_finite(comp, "convolution")
            assert abs(a - b) < 1e-12 * (1 + abs(a))


def test_unramified_theta_two_paths():
    chi = LocalCharacter.unramified(Place.finite(3), theta=0.7)
    comp = IdeleLocalComponent(Place.finite(3), make_bump(0.1, 10), chi)
    a = weil_term_finite(comp, "annulus")
    b = weil_term_finite(comp, "convolution")
    assert abs(a - b) < 1e-12 and abs(a.imag) > 1e-3


def test_delta_shift():
    f = make_bump(0.9, 1.1)
    place = Place.finite(3, 2)
    comp = IdeleLocalComponent(place, f)
    a = weil_term_finite(comp, "both")
    assert a == pytest.approx(-2 * math.log(3) * float(f(1.0)), abs=1e-12)


def test_finite_mellin_oracle():
    f = make_bump(0.3, 3.0)
    for chi in (None, local("mod:5:gen:2:exp:1", 5)):
        place = Place.finite(5) if chi else Place.finite(2)
        comp = IdeleLocalComponent(place, f, chi)
        exact = weil_term_finite(comp)
        assert abs(weil_term_mellin(comp, cfg=CFG, height=400) - exact) < 1e-7


def test_conductor_integral_examples():
    assert conductor_integral(LocalCharacter.unramified(Place.finite(5))) == 0
    assert conductor_integral(local("mod:5:gen:2:exp:2", 5)) == pytest.approx(math.log(5), abs=1e-13)
    assert conductor_integral(local("mod:8:gen:7:exp:1:gen:5:exp:1", 2)) == pytest.approx(
        3 * math.log(2), abs=1e-13)


@pytest.mark.parametrize("m", [4, 8, 9, 16, 25, 27, 32])
def test_conductor_integral_is_f_log_q(m):
    p = min(q for q in (2, 3, 5) if m % q == 0)
    for chi in primitive_characters(m):
        loc = localize_dirichlet(chi, Place.finite(p))
        assert conductor_integral(loc) == pytest.approx(loc.conductor * math.log(p), abs=1e-12)


# ---------------------------------------------------------------------------
# archimedean places


def test_real_tags_agree():
    comp = IdeleLocalComponent(REAL, make_bump(0.5, 2))
    vals = [weil_term_arch(comp, tag, CFG) for tag in REAL_TAGS]
    assert max(vals, key=lambda v: v.real).real - min(vals, key=lambda v: v.real).real < 1e-7


def test_real_three_paths():
    for ab in ((0.5, 2), (0.4, 3.5)):
        comp = IdeleLocalComponent(REAL, make_bump(*ab))
        conv = weil_term_arch(comp, "realIndicator", CFG)
        uform = weil_term_real_u_form(comp, CFG)
        mel = weil_term_mellin(comp, cfg=CFG, height=400)
        assert abs(conv - uform) < 1e-8
        assert abs(conv - mel) < 1e-7


def test_sign_character():
    comp = IdeleLocalComponent(REAL, make_bump(0.5, 2), ArchCharacter(REAL, 1))
    conv = weil_term_arch(comp, "realIndicator", CFG)
    assert abs(conv - weil_term_real_u_form(comp, CFG)) < 1e-8
    assert abs(conv - weil_term_mellin(comp, cfg=CFG, height=400)) < 1e-7


def test_complex_place():
    comp = IdeleLocalComponent(CPLX, make_bump(0.5, 2))
    vals = [weil_term_arch(comp, tag, CFG) for tag in COMPLEX_TAGS]
    assert abs(vals[0] - vals[-1]) < 1e-7
    assert abs(vals[0] - weil_term_mellin(comp, cfg=CFG, height=400)) < 1e-6


def test_arch_rejects_finite():
    with pytest.raises(WeilError):
        weil_term_arch(IdeleLocalComponent(Place.finite(2), make_bump(0.5, 2)))
    with pytest.raises(WeilError):
        weil_term_finite(IdeleLocalComponent(REAL, make_bump(0.5, 2)))


# ---------------------------------------------------------------------------
# k shifts


def test_k_shift_identity():
    f = make_bump(0.5, 2)
    comp = IdeleLocalComponent(Place.finite(3), f)
    assert k_shift_term(comp, 1) == pytest.approx(weil_term_finite(comp), abs=1e-13)


def test_k_shift_examples():
    f = make_bump(0.5, 2)
    F1 = float(f(1.0))
    c2 = IdeleLocalComponent(Place.finite(2), f)
    diff = k_shift_term(c2, 2) - weil_term_finite(c2)
    assert diff == pytest.approx(-math.log(2) * F1, abs=1e-12)
    cr = IdeleLocalComponent(REAL, f)
    diff = k_shift_term(cr, 2.0, "realIndicator", CFG) - weil_term_arch(cr, "realIndicator", CFG)
    assert abs(diff - math.log(2) * F1) < 1e-8
    with pytest.raises(WeilError):
        k_shift_term(c2, 0)


# ---------------------------------------------------------------------------
# conductor operator


@pytest.mark.parametrize("label,p", [("mod:5:gen:2:exp:2", 5), ("mod:5:gen:2:exp:1", 5),
                                     ("mod:8:gen:7:exp:1:gen:5:exp:1", 2), ("mod:4:gen:3:exp:1", 2),
                                     ("mod:9:gen:2:exp:1", 3)])
@pytest.mark.parametrize("v", [0, 1, -2])
def test_eigenfunctions(label, p, v):
    chi = local(label, p)
    phi = eigenfunction(chi, v)
    lam = expected_eigenvalue(chi)
    assert conductor_operator_apply(phi.place, phi).isclose(phi.scale(lam), atol=1e-12)


def test_eigenfunction_delta():
    place = Place.finite(5, 1)
    chi = localize_dirichlet(character_from_label("mod:5:gen:2:exp:2"), place)
    phi = eigenfunction(chi)
    assert conductor_operator_apply(place, phi).isclose(phi.scale(2 * math.log(5)), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_H_commutes_with_fourier(p, seed):
    phi = random_cuspidal(p, random.Random(seed))
    lhs = conductor_operator_apply(phi.place, phi.fourier())
    rhs = conductor_operator_apply(phi.place, phi).fourier()
    assert lhs.isclose(rhs, atol=1e-11 * max(1, phi.max_abs()))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_H_symmetric(p, seed):
    rng = random.Random(seed)
    phi, psi = random_cuspidal(p, rng), random_cuspidal(p, rng)
    H = lambda g: conductor_operator_apply(g.place, g)
    assert abs(pairing(H(phi), psi) - pairing(phi, H(psi))) < 1e-11 * (1 + abs(pairing(phi, psi)))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6), st.integers(-2, 2), st.integers(1, 20))
def test_H_commutes_with_dilation(p, seed, v, u):
    if u % p == 0:
        u += 1
    scale = Fraction(u) * Fraction(p) ** v
    phi = random_cuspidal(p, random.Random(seed))
    H = lambda g: conductor_operator_apply(g.place, g)
    assert H(op_R(phi, scale)).isclose(op_R(H(phi), scale), atol=1e-11 * max(1, phi.max_abs()))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_A_anticommutes_with_inversion(p, seed):
    phi = random_cuspidal(p, random.Random(seed))
    assert op_A(op_I(phi)).isclose(op_I(op_A(phi)).scale(-1), atol=1e-12 * max(1, phi.max_abs()))


def test_check_cuspidal_errors():
    place = Place.finite(3)
    with pytest.raises(NotCuspidalError, match="phi\\(0\\)"):
        check_cuspidal(BruhatFunction.unit_ball(place))
    with pytest.raises(NotCuspidalError, match="Fourier"):
        check_cuspidal(BruhatFunction.annulus(place, 0))
    check_cuspidal(random_cuspidal(3, random.Random(0)))
