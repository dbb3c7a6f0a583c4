"""Compactly supported test functions on (0, inf) and their Mellin transforms

    f^(s) = integral_0^inf f(t) t^s dt / t.

Profiles are defined in the normalized log coordinate
w = (log t - log sqrt(ab)) / log sqrt(b/a), which maps the support [a, b]
onto [-1, 1]; the Mellin integral is computed in u = log t, where dt/t is
Lebesgue measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kernel import DEFAULT_CONFIG, QuadratureConfig, integrate_adaptive

SMOOTH = "smoothBump"
SPLINE = "spline"
INDICATOR = "rawIndicator"
_RANK = {SMOOTH: 0, SPLINE: 1, INDICATOR: 2}


class TestFunctionError(ValueError):
    __test__ = False


@dataclass(frozen=True)
class TestFunction:
    """Real function on (0, inf) vanishing outside ``support``.

    ``evaluator`` maps a float array of t > 0 to real values.  ``breakpoints``
    lists points (in t) where the function is not smooth, used as
    quadrature breakpoints.
    """

    __test__ = False  # keep pytest from collecting this class

    evaluator: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    tag: str = SMOOTH
    description: str = ""
    breakpoints: tuple = field(default=())

    def __post_init__(self):
        a, b = self.support
        if not 0 < a < b < math.inf:
            raise TestFunctionError(f"support must satisfy 0 < a < b < inf, got {self.support}")
        if self.tag not in _RANK:
            raise TestFunctionError(f"unknown smoothness tag {self.tag!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a, b = self.support
        inside = (t >= a) & (t <= b)
        out = np.zeros(t.shape)
        if np.any(inside):
            out[inside] = self.evaluator(t[inside])
        return out if out.ndim else float(out)

    @property
    def log_support(self) -> tuple[float, float]:
        return math.log(self.support[0]), math.log(self.support[1])

    @property
    def is_smooth(self) -> bool:
        return self.tag == SMOOTH

    def dilate(self, lam: float) -> "TestFunction":
        """t -> f(t / lam)."""
        if lam <= 0:
            raise TestFunctionError("dilation factor must be positive")
        a, b = self.support
        ev = self.evaluator
        return TestFunction(
            lambda t: ev(np.asarray(t) / lam),
            (a * lam, b * lam),
            self.tag,
            f"{self.description} dilated by {lam:g}",
            tuple(x * lam for x in self.breakpoints),
        )

    def __mul__(self, c: float) -> "TestFunction":
        return combine([(float(c), self)])

    __rmul__ = __mul__

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return combine([(1.0, self), (-1.0, other)])

    def __neg__(self) -> "TestFunction":
        return combine([(-1.0, self)])


def _log_coordinates(a: float, b: float):
    if not 0 < a < b:
        raise TestFunctionError(f"need 0 < a < b, got a={a}, b={b}")
    mid = 0.5 * (math.log(a) + math.log(b))
    half = 0.5 * (math.log(b) - math.log(a))
    return mid, half


def make_bump(a: float, b: float) -> TestFunction:
    """C-infinity bump exp(1 - 1/(1 - w^2)); equals 1 at sqrt(ab)."""
    mid, half = _log_coordinates(a, b)

    def ev(t):
        w = (np.log(t) - mid) / half
        out = np.zeros(np.shape(w))
        inner = np.abs(w) < 1
        wi = w[inner]
        out[inner] = np.exp(1.0 - 1.0 / (1.0 - wi * wi))
        return out

    return TestFunction(ev, (a, b), SMOOTH, f"bump:{a:g}:{b:g}")


def make_indicator(a: float, b: float) -> TestFunction:
    """Indicator of [a, b]; for closed-form checks only."""
    _log_coordinates(a, b)
    return TestFunction(lambda t: np.ones(np.shape(t)), (a, b), INDICATOR,
                        f"indicator:{a:g}:{b:g}", (a, b))


def make_spline(a: float, b: float) -> TestFunction:
    """Cubic B-spline in w, C^2, peak 1 at sqrt(ab)."""
    mid, half = _log_coordinates(a, b)

    def ev(t):
        x = np.abs(2.0 * (np.log(t) - mid) / half)
        inner = 2.0 / 3.0 - x**2 + 0.5 * x**3
        outer = (2.0 - x) ** 3 / 6.0
        out = np.where(x <= 1, inner, np.where(x < 2, outer, 0.0))
        return 1.5 * out

    knots = tuple(math.exp(mid + k * half / 2) for k in (-1, 0, 1))
    return TestFunction(ev, (a, b), SPLINE, f"spline:{a:g}:{b:g}", knots)


def zero_function() -> TestFunction:
    return TestFunction(lambda t: np.zeros(np.shape(t)), (0.5, 2.0), SMOOTH, "zero")


def combine(terms: Sequence[tuple[float, TestFunction]]) -> TestFunction:
    """Linear combination sum c_i f_i."""
    terms = [(float(c), f) for c, f in terms]
    if not terms:
        return zero_function()
    lo = min(f.support[0] for _, f in terms)
    hi = max(f.support[1] for _, f in terms)
    tag = max((f.tag for _, f in terms), key=_RANK.__getitem__)
    bps = set()
    for _, f in terms:
        bps.update(f.breakpoints)
        bps.update(f.support)

    def ev(t):
        return sum(c * f(t) for c, f in terms)

    desc = " + ".join(f"{c:g}*({f.description})" for c, f in terms)
    return TestFunction(ev, (lo, hi), tag, desc, tuple(sorted(bps - {lo, hi})))


def parse_test_function(text: str) -> TestFunction:
    """``bump:A:B``, ``indicator:A:B`` or ``spline:A:B``."""
    parts = text.strip().split(":")
    makers = {"bump": make_bump, "indicator": make_indicator, "spline": make_spline}
    if parts == ["zero"]:
        return zero_function()
    if len(parts) != 3 or parts[0] not in makers:
        raise TestFunctionError(f"cannot parse test function {text!r} (expected bump:A:B)")
    try:
        a, b = float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise TestFunctionError(f"bad support in {text!r}") from exc
    return makers[parts[0]](a, b)


def _mellin_integral(f: TestFunction, s, cfg: QuadratureConfig, weight_power: int = 0):
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    ua, ub = f.log_support
    points = [math.log(x) for x in f.breakpoints if f.support[0] < x < f.support[1]]
    # width of ~1 in Im(s) * du keeps panels from under-resolving oscillation
    span = ub - ua
    n_osc = int(min(400, math.ceil(span * float(np.max(np.abs(s_arr.imag))) / (2 * math.pi))))
    if n_osc > 1:
        points += list(np.linspace(ua, ub, n_osc + 1)[1:-1])

    def integrand(u):
        u = np.asarray(u)
        vals = f(np.exp(u))
        out = vals[:, None] * np.exp(np.outer(u, s_arr))
        if weight_power:
            out = out * (u**weight_power)[:, None]
        return out

    res = integrate_adaptive(integrand, ua, ub, cfg, points=sorted(set(points)))
    res = np.asarray(res, dtype=complex)
    return res if np.ndim(s) else complex(res[0])


def mellin(f: TestFunction, s, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """f^(s) for a scalar or array of complex s."""
    return _mellin_integral(f, s, cfg)


def mellin_derivative(f: TestFunction, s, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """d f^/ds = integral f(e^u) u e^(su) du."""
    return _mellin_integral(f, s, cfg, weight_power=1)
