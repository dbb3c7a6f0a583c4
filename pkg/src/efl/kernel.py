"""Numerical primitives: adaptive quadrature, complex Gamma/digamma and
vertical-line contour integrals.

Everything here is deterministic.  The adaptive integrator always bisects the
panel with the largest error estimate (ties broken by position) and sums the
final panels from left to right, so identical inputs give bit-identical
outputs.
"""
from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

EULER_GAMMA = 0.57721566490153286060651209008240243


class QuadratureError(RuntimeError):
    """Adaptive integration did not reach the requested tolerance.

    The best available estimate is kept on ``partial`` together with the
    error estimate in ``error``.
    """

    def __init__(self, message: str, partial=None, error: float = math.inf):
        super().__init__(message)
        self.partial = partial
        self.error = error


class GammaPoleError(ValueError):
    """Argument is a pole of the classical Gamma function."""


class DecayError(RuntimeError):
    """Integrand does not decay fast enough along a vertical line."""


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 10**6
    truncation_height: float | None = None

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")
        if self.truncation_height is not None and self.truncation_height <= 0:
            raise ValueError("truncation_height must be positive")


DEFAULT_CONFIG = QuadratureConfig()

_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(20)


def _panel(f, a: float, b: float):
    """Return (20-point estimate, |20-point - 10-point|) on [a, b]."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x_hi = mid + half * _GL_HI[0]
    x_lo = mid + half * _GL_LO[0]
    y_hi = np.asarray(f(x_hi))
    y_lo = np.asarray(f(x_lo))
    w_hi = _GL_HI[1].reshape((-1,) + (1,) * (y_hi.ndim - 1))
    w_lo = _GL_LO[1].reshape((-1,) + (1,) * (y_lo.ndim - 1))
    hi = half * np.sum(w_hi * y_hi, axis=0)
    lo = half * np.sum(w_lo * y_lo, axis=0)
    err = float(np.max(np.abs(hi - lo)))
    if not np.all(np.isfinite(hi)):
        raise FloatingPointError(f"non-finite integrand value on [{a}, {b}]")
    return hi, err


def _ordered_sum(panels):
    total = 0.0
    for lo in sorted(panels):
        total = total + panels[lo][1]
    return total


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    points: Sequence[float] = (),
    singular: Sequence[float] = (),
):
    """Globally adaptive Gauss-Legendre quadrature of ``f`` over [a, b].

    ``f`` receives a 1-D array of nodes and returns values of shape
    ``(n,)`` or ``(n, m)``; vector-valued integrands share one panel
    structure and the error is measured in the max norm.  ``points`` are
    interior breakpoints (kinks, support edges).  The integrand is never
    evaluated at a panel endpoint.

    ``singular`` flags points (endpoints included) carrying an integrable
    singularity such as |x - x0|^-1/2 or log|x - x0|.  Each segment next to
    a flagged point is mapped by x = x0 + (x1 - x0) w^8, which smooths power
    singularities enough for the error estimate to be trusted.

    Returns a complex scalar (or complex array for vector integrands).
    """
    if singular:
        return _integrate_singular(f, a, b, cfg, points, singular)
    if a == b:
        probe = np.asarray(f(np.array([0.5 * (a + b)])))
        return np.zeros(probe.shape[1:], dtype=complex) if probe.ndim > 1 else 0j
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = [a] + sorted(float(p) for p in points if a < p < b) + [b]
    # panels keyed by left endpoint; heap ordered by (-error, left endpoint)
    panels: dict[float, tuple[float, object, float]] = {}
    heap: list[tuple[float, float]] = []
    err_total = 0.0
    running = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = _panel(f, lo, hi)
        panels[lo] = (hi, val, err)
        heapq.heappush(heap, (-err, lo))
        err_total += err
        running = running + val

    n_sub = 0
    while True:
        scale = float(np.max(np.abs(running)))
        if err_total <= max(cfg.abs_tol, cfg.rel_tol * scale):
            break
        if n_sub >= cfg.max_subdivisions:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {n_sub} subdivisions "
                f"(error estimate {err_total:.3e})",
                partial=sign * _ordered_sum(panels),
                error=err_total,
            )
        _, lo = heapq.heappop(heap)
        hi, val, err = panels[lo]
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            raise QuadratureError(
                f"panel [{lo}, {hi}] cannot be bisected further",
                partial=sign * _ordered_sum(panels),
                error=err_total,
            )
        lval, lerr = _panel(f, lo, mid)
        rval, rerr = _panel(f, mid, hi)
        panels[lo] = (mid, lval, lerr)
        panels[mid] = (hi, rval, rerr)
        heapq.heappush(heap, (-lerr, lo))
        heapq.heappush(heap, (-rerr, mid))
        err_total += lerr + rerr - err
        running = running + (lval + rval - val)
        n_sub += 1
        if n_sub % 256 == 0:
            # re-sum to keep drift of the running totals out of the stopping test
            err_total = sum(v[2] for v in panels.values())
            running = _ordered_sum(panels)

    total = _ordered_sum(panels)
    result = sign * total
    if np.ndim(result):
        return np.asarray(result, dtype=complex)
    return complex(result)


def _integrate_singular(f, a, b, cfg, points, singular):
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    flagged = sorted({float(x) for x in singular if a <= x <= b})
    cuts = sorted({a, b, *(float(x) for x in points if a < x < b), *flagged})
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        left, right = lo in flagged, hi in flagged
        if left and right:
            mid = 0.5 * (lo + hi)
            pieces += [(lo, mid), (hi, mid)]
        elif right:
            pieces.append((hi, lo))
        elif left:
            pieces.append((lo, hi))
        else:
            pieces.append((lo, hi, None))
    sub_cfg = QuadratureConfig(
        abs_tol=cfg.abs_tol / len(pieces),
        rel_tol=cfg.rel_tol,
        max_subdivisions=cfg.max_subdivisions,
    )
    total = 0.0
    for piece in pieces:
        if len(piece) == 3:
            total = total + integrate_adaptive(f, piece[0], piece[1], sub_cfg)
            continue
        x0, x1 = piece
        span = x1 - x0

        def mapped(w, x0=x0, span=span):
            w = np.asarray(w)
            y = np.asarray(f(x0 + span * w**8))
            jac = (8.0 * abs(span) * w**7).reshape((-1,) + (1,) * (y.ndim - 1))
            return y * jac

        total = total + integrate_adaptive(mapped, 0.0, 1.0, sub_cfg)
    return sign * total


# ---------------------------------------------------------------------------
# Gamma and digamma

def _check_pole(s: complex):
    if s.imag == 0.0 and s.real <= 0.0 and s.real == math.floor(s.real):
        raise GammaPoleError(f"Gamma has a pole at s = {s.real:g}")


def log_gamma(s: complex) -> complex:
    """Principal branch of log Gamma(s) (scipy.special.loggamma)."""
    s = complex(s)
    _check_pole(s)
    return complex(special.loggamma(s))


def digamma(s: complex) -> complex:
    s = complex(s)
    _check_pole(s)
    return complex(special.psi(s))


def gamma(s: complex) -> complex:
    return cmath.exp(log_gamma(s))


def complex_gamma_digamma(s: complex) -> tuple[complex, complex]:
    """Classical Gamma(s) and Gamma'(s)/Gamma(s).

    Accuracy envelope: at least 12 significant digits on |Re s| <= 10,
    |Im s| <= 300 (checked against mpmath in the test-suite).
    """
    return gamma(s), digamma(s)


# ---------------------------------------------------------------------------
# Vertical lines


@dataclass(frozen=True)
class LineIntegral:
    value: complex
    truncation_bound: float
    height: float


def vertical_line_integral(
    g: Callable[[np.ndarray], np.ndarray],
    c: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    height: float | None = None,
) -> LineIntegral:
    """(1/2 pi i) * integral of g(s) ds over the line Re s = c.

    ``g`` is called with arrays of complex points ``c + i t``.  The line is
    cut at ``|t| = height`` (``height`` argument, else
    ``cfg.truncation_height``, else 200).  The neglected tails are bounded
    by fitting a power law |g| ~ C |t|^-alpha to samples from the last decade
    [height/10, height]; a fitted alpha <= 1.05 means the integrand does not
    decay fast enough and raises :class:`DecayError`.
    """
    if not 0.0 < c < 1.0:
        raise ValueError("abscissa c must lie in (0, 1)")
    T = height or cfg.truncation_height or 200.0

    def integrand(t):
        return np.asarray(g(c + 1j * np.asarray(t)), dtype=complex)

    # panels of width ~2 so oscillatory integrands start well resolved
    n_cut = max(1, int(math.ceil(T)))
    points = np.linspace(-T, T, n_cut + 1)[1:-1]
    raw = integrate_adaptive(integrand, -T, T, cfg, points=points)
    value = complex(raw) / (2.0 * math.pi)

    bound = _tail_bound(integrand, T)
    return LineIntegral(value=value, truncation_bound=bound, height=T)


def _tail_bound(integrand, T: float) -> float:
    ts = np.geomspace(T / 10.0, T, 41)
    mags = np.maximum(np.abs(integrand(ts)), np.abs(integrand(-ts)))
    if not np.all(np.isfinite(mags)):
        raise DecayError("integrand is not finite near the truncation height")
    if np.max(mags) == 0.0:
        return 0.0
    # envelope: running max from the right so oscillation zeros do not fool the fit
    env = np.maximum.accumulate(mags[::-1])[::-1]
    tiny = np.finfo(float).tiny
    if env[-1] <= 1e-300:
        return 0.0
    logt = np.log(ts)
    loge = np.log(np.maximum(env, tiny))
    slope = np.polyfit(logt, loge, 1)[0]
    alpha = -slope
    if alpha <= 1.05:
        raise DecayError(
            f"integrand decays like |t|^{-alpha:.3f} near |t| = {T:g}; "
            "a decay exponent above 1 is required"
        )
    # both tails, divided by 2 pi
    return 2.0 * env[-1] * T / (alpha - 1.0) / (2.0 * math.pi)
