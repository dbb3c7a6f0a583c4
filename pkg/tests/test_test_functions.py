import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efl.kernel import QuadratureConfig
from efl.test_functions import (
    INDICATOR,
    TestFunctionError,
    combine,
    make_bump,
    make_indicator,
    make_spline,
    mellin,
    mellin_derivative,
    parse_test_function,
    zero_function,
)


def test_bump_values():
    f = make_bump(0.5, 2)
    assert f(1.0) == 1.0
    assert f(2.0) == 0.0 and f(3.0) == 0.0 and f(0.4) == 0.0
    assert np.all(f(np.linspace(0.51, 1.99, 50)) > 0)


def test_bump_bad_support():
    with pytest.raises(TestFunctionError):
        make_bump(2, 1)


def test_indicator_mellin():
    f = make_indicator(1.0, math.e)
    assert f.tag == INDICATOR
    assert abs(mellin(f, 1.0) - (math.e - 1)) < 1e-12


def test_zero_mellin():
    assert mellin(zero_function(), 0.3 + 4j) == 0


def test_bump_symmetry():
    f = make_bump(0.5, 2)
    assert abs(mellin(f, 0.3) - mellin(f, -0.3)) < 1e-10


def test_mellin_against_mpmath():
    f = make_bump(0.5, 2)
    mid, half = 0.0, math.log(2)
    mpmath.mp.dps = 25

    def ref(s):
        g = lambda u: mpmath.exp(1 - 1 / (1 - ((u - mid) / half) ** 2)) * mpmath.exp(s * u)
        return complex(mpmath.quad(g, mpmath.linspace(-half, half, 41)))

    for s in (0.5 + 14.134725j, 0.5 + 236.5242297j, 1.0, 0.2 - 3j):
        s_mp = mpmath.mpc(s.real, s.imag) if isinstance(s, complex) else mpmath.mpf(s)
        assert abs(mellin(f, s, QuadratureConfig(1e-14, 1e-13)) - ref(s_mp)) < 1e-12


def test_mellin_vectorized_matches_scalar():
    f = make_spline(0.5, 3)
    s = np.array([0.5 + 1j, 0.5 + 40j, 2.0])
    vec = mellin(f, s)
    assert np.allclose(vec, [mellin(f, z) for z in s], atol=1e-13)


def test_mellin_derivative_finite_difference():
    f = make_bump(0.6, 1.8)
    s, h = 0.5 + 3j, 1e-5
    fd = (mellin(f, s + h) - mellin(f, s - h)) / (2 * h)
    assert abs(mellin_derivative(f, s) - fd) < 1e-8


def test_cauchy_riemann_residual_shrinks():
    f = make_bump(0.5, 2)
    s0 = 0.5 + 2j
    res = []
    for h in (1e-1, 1e-2):
        dx = (mellin(f, s0 + h) - mellin(f, s0 - h)) / (2 * h)
        dy = (mellin(f, s0 + 1j * h) - mellin(f, s0 - 1j * h)) / (2 * h)
        res.append(abs(dx + 1j * dy))
    assert res[1] < res[0] / 50


@pytest.mark.parametrize("c", [0.0, 0.5, 1.0])
def test_rapid_decay(c):
    f = make_bump(0.5, 2)
    ts = np.geomspace(10, 300, 24)
    vals = np.abs(mellin(f, c + 1j * ts)) * ts**2
    # envelope over the last third vs the first third
    assert vals[-8:].max() < 0.05 * vals[:8].max()
    assert vals[-1] < 1e-3 * vals[:8].max()


def test_scaling():
    f = make_bump(0.5, 2)
    s = 0.5 + 1j
    assert abs(mellin(f.dilate(2.0), s) - 2.0**s * mellin(f, s)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(1.1, 5.0), st.floats(-3, 3), st.floats(-2, 2))
def test_mellin_linear(a, b, x, y):
    f, g = make_bump(a, b), make_spline(a * 1.1, b)
    s = 0.5 + 2j
    h = combine([(x, f), (y, g)])
    assert abs(mellin(h, s) - x * mellin(f, s) - y * mellin(g, s)) < 1e-10 * (1 + abs(x) + abs(y))


def test_parse():
    assert parse_test_function("bump:0.5:2").support == (0.5, 2.0)
    assert parse_test_function("indicator:1:2").tag == INDICATOR
    with pytest.raises(TestFunctionError):
        parse_test_function("gauss:1:2")
