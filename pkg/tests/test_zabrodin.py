import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import frac_part
from efl.padic import BruhatFunction, Place, valuation
from efl.zabrodin_action import (
    ActionError,
    action_equality_check,
    action_momentum,
    action_momentum_tree,
    action_position,
    position_constant,
    random_bruhat,
    refine,
)


def closed_form_unit_ball(q):
    # 2 * vol(Z_p) * int_{|y|>1} |y|^-2 dy, times the position constant; delta drops out
    return (q - 1) / (2 * (q + 1) * math.log(q))


def brute_force_position(place, phi, top, depth):
    """Double sum over a uniform partition of p^top Z_p into balls of level
    ``depth`` (phi must be constant on each), plus the exterior term."""
    p = place.p
    cells = [Fraction(j) * Fraction(p) ** top for j in range(p ** (depth - top))]
    vals = [phi(c).real for c in cells]
    vol = phi.ball_volume(depth)
    total = 0.0
    for i, ci in enumerate(cells):
        for j in range(i + 1, len(cells)):
            d = vals[i] - vals[j]
            if d:
                total += 2 * d * d * vol * vol * float(p) ** (2 * valuation(ci - cells[j], p))
    outside = place.unit_volume() * float(p) ** (top - 1)
    total += 2 * sum(v * v for v in vals) * vol * outside
    return position_constant(place) * total


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_unit_ball(p):
    phi = BruhatFunction.unit_ball(Place.finite(p))
    val = action_equality_check(phi.place, phi)
    assert val.momentum_form == pytest.approx(closed_form_unit_ball(p), rel=1e-13)
    assert val.position_form == pytest.approx(closed_form_unit_ball(p), rel=1e-13)


def test_p2_value():
    phi = BruhatFunction.unit_ball(Place.finite(2))
    assert action_momentum(phi.place, phi) == pytest.approx(1 / (6 * math.log(2)), rel=1e-14)


def test_delta_one_q3():
    place = Place.finite(3, 1)
    phi = BruhatFunction.unit_ball(place)
    want = 1 / (4 * math.log(3))
    assert action_momentum(place, phi) == pytest.approx(want, rel=1e-13)
    assert action_position(place, phi) == pytest.approx(want, rel=1e-13)


def test_zero_and_errors():
    place = Place.finite(3)
    assert action_momentum(place, BruhatFunction.zero(place)) == 0
    assert action_position(place, BruhatFunction.zero(place)) == 0
    with pytest.raises(ActionError):
        action_momentum(place, BruhatFunction.unit_ball(place).scale(1j))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.sampled_from([0, 1, 2]), st.integers(0, 10**6))
def test_forms_agree(p, delta, seed):
    place = Place.finite(p, delta)
    phi = random_bruhat(place, random.Random(seed))
    v = action_equality_check(place, phi)
    assert abs(v.difference) <= 1e-12 * max(1.0, abs(v.momentum_form))
    assert v.momentum_form >= -1e-14
    assert action_momentum_tree(place, phi) == pytest.approx(v.momentum_form, rel=1e-12, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 10**6))
def test_refinement_oracle(p, seed):
    place = Place.finite(p)
    phi = random_bruhat(place, random.Random(seed), n_terms=3, val_range=(-1, 1), radius_range=(-1, 2))
    top = min(0, *(b.n for b, _ in phi.terms),
              *(valuation(b.center, p) for b, _ in phi.terms if b.center != 0))
    depth = max(b.n for b, _ in phi.terms) + 2
    if p ** (depth - top) > 600:
        depth = max(b.n for b, _ in phi.terms)
    want = brute_force_position(place, phi, top, depth)
    assert action_position(place, phi) == pytest.approx(want, rel=1e-11, abs=1e-14)
    assert action_momentum(place, phi) == pytest.approx(want, rel=1e-11, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_refined_input_same_value(p, seed):
    place = Place.finite(p)
    phi = random_bruhat(place, random.Random(seed))
    fine = BruhatFunction.from_terms(place, [(a, b.center, b.n) for b, a in refine(phi, 2)])
    assert action_momentum(place, fine) == pytest.approx(action_momentum(place, phi), rel=1e-12, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_homogeneous_degree_two(p, seed):
    place = Place.finite(p)
    phi = random_bruhat(place, random.Random(seed))
    assert action_momentum(place, phi.scale(3)) == pytest.approx(9 * action_momentum(place, phi), rel=1e-12, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6), st.integers(1, 50), st.integers(-3, 3))
def test_translation_and_dilation_invariance(p, seed, u, v):
    place = Place.finite(p)
    phi = random_bruhat(place, random.Random(seed))
    base = action_momentum(place, phi)
    a = Fraction(u) * Fraction(p) ** v
    assert action_momentum(place, phi.translate(a)) == pytest.approx(base, rel=1e-12, abs=1e-14)
    assert action_position(place, phi.dilate(a)) == pytest.approx(base, rel=1e-12, abs=1e-14)


def test_seeded_random_is_reproducible():
    place = Place.finite(5)
    a = random_bruhat(place, random.Random(7))
    b = random_bruhat(place, random.Random(7))
    assert a.terms == b.terms
    assert frac_part(Fraction(1, 5), 5) == Fraction(1, 5)
