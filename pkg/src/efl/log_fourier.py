"""The distribution G_v = FT(-log|x|_v) and its regularizations.

For a reference function omega with omega(0) = 1,

    G(phi) = gamma * P_omega(phi) + G(omega) * phi(0),
    P_omega(phi) = integral (phi(x) - phi(0) omega(x)) dx / |x|,

and G(omega) = gamma P(omega) + tau, where P(omega) is the constant term at
s = 0 of Delta_s(omega) = integral omega(x) |x|^(s-1) dx = R/s + P(omega) + ...
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.special import exp1, sici

from .kernel import DEFAULT_CONFIG, EULER_GAMMA, QuadratureConfig, integrate_adaptive
from .padic import BruhatFunction, Place, haar_integral, valuation

FINITE_TAGS = ("finiteUnitBall", "finiteOmega1")
REAL_TAGS = ("realGaussian", "realIndicator", "realSinc", "realSincSquared")
COMPLEX_TAGS = ("complexGaussian", "complexUnitDisc")
ALL_TAGS = FINITE_TAGS + REAL_TAGS + COMPLEX_TAGS
DEFAULT_TAG = {"finite": "finiteOmega1", "real": "realIndicator", "complex": "complexUnitDisc"}

_LOG2PI = math.log(2 * math.pi)
_LOGPI = math.log(math.pi)


class RegularizationError(ValueError):
    pass


@dataclass(frozen=True)
class RegularizationConstants:
    place: str
    omega_tag: str
    R: float
    gamma: float
    P_omega: float
    G_omega: float
    tau: float

    def to_json(self) -> dict:
        return asdict(self)


def _tags_for(place: Place):
    return {"finite": FINITE_TAGS, "real": REAL_TAGS, "complex": COMPLEX_TAGS}[place.kind]


def constants_for(place: Place, tag: str | None = None) -> RegularizationConstants:
    tag = tag or DEFAULT_TAG[place.kind]
    if tag not in _tags_for(place):
        raise RegularizationError(f"tag {tag!r} does not belong to the {place.kind} place")
    R = place.R
    gamma = 1.0 / R
    if place.kind == "finite":
        q, d = place.p, place.delta
        lq = math.log(q)
        P = 0.5 * lq * R
        G = lq / (q - 1) - d * lq
        tau = G - gamma * P
        if tag == "finiteOmega1":
            P -= q ** (-d / 2 - 1)
            G = -d * lq
    elif place.kind == "real":
        tau = _LOG2PI + EULER_GAMMA
        P = {
            "realGaussian": -(_LOGPI + EULER_GAMMA),
            "realIndicator": 0.0,
            "realSinc": 2 * (1 - _LOGPI - EULER_GAMMA),
            "realSincSquared": 2 * (1.5 - _LOG2PI - EULER_GAMMA),
        }[tag]
        G = {
            "realGaussian": (_LOGPI + EULER_GAMMA + 2 * math.log(2)) / 2,
            "realIndicator": tau,
            "realSinc": 1 + math.log(2),
            "realSincSquared": 1.5,
        }[tag]
    else:
        tau = 2 * (_LOG2PI + EULER_GAMMA)
        if tag == "complexGaussian":
            P = -2 * math.pi * (_LOGPI + EULER_GAMMA)
            G = math.log(4 * math.pi) + EULER_GAMMA
        else:
            P, G = 0.0, tau
    return RegularizationConstants(place.label(), tag, R, gamma, P, G, tau)


# ---------------------------------------------------------------------------
# finite places


def omega1(place: Place) -> BruhatFunction:
    """1_O minus the indicator of 1 + pZ_p."""
    return BruhatFunction.from_terms(place, [(1.0, 0, 0), (-1.0, 1, 1)])


def g_eval_finite(place: Place, phi: BruhatFunction) -> complex:
    """G(phi) = gamma * integral (phi - phi(0) omega_1) dx/|x| - delta log q phi(0).

    The integrand vanishes near 0, so this is an exact finite sum.
    """
    if phi.place != place:
        raise ValueError("phi lives on a different place")
    phi0 = phi.value_at_zero()
    rest = phi - omega1(place).scale(phi0) if phi0 != 0 else phi
    return haar_integral(rest, "multiplicative") - place.delta * math.log(place.p) * phi0


def _neg_log_ball_integral(place: Place, n: int) -> float:
    """integral over p^n Z_p of -log|y| dy."""
    p = place.p
    x = 1.0 / p
    return place.unit_volume() * math.log(p) * x**n * (n + x / (1 - x))


def g_oracle_finite(place: Place, phi: BruhatFunction) -> complex:
    """integral -log|y| FT(phi)(y) dy, summed exactly over the balls of FT(phi)."""
    ft = phi.fourier()
    p = place.p
    total = 0j
    for ball, a in ft.terms:
        if ball.contains_zero():
            total += a * _neg_log_ball_integral(place, ball.n)
        else:
            total += a * valuation(ball.center, p) * math.log(p) * ft.ball_volume(ball.n)
    return total


# ---------------------------------------------------------------------------
# archimedean places


@dataclass(frozen=True)
class ArchFunction:
    """A function on R (real arrays) or C (complex arrays) for G-evaluation.

    ``radius``: phi vanishes (or is negligible) for |x| > radius (Euclidean
    |x| at the complex place).  ``breakpoints``: radii where phi is not
    smooth.  ``fourier``: optional closed-form Fourier transform.
    """

    func: Callable[[np.ndarray], np.ndarray]
    radius: float
    breakpoints: tuple = ()
    fourier: Callable | None = None
    fourier_radius: float | None = None

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x)), dtype=complex)

    def value_at_zero(self) -> complex:
        return complex(self(np.array([0.0]))[0])

    def dilate(self, t: float) -> "ArchFunction":
        """x -> phi(t x) for real t != 0."""
        f, ft = self.func, self.fourier
        at = abs(t)
        new_ft = None
        if ft is not None:
            new_ft = lambda y: ft(np.asarray(y) / t) / at
        return ArchFunction(
            lambda x: f(t * np.asarray(x)),
            self.radius / at,
            tuple(b / at for b in self.breakpoints),
            new_ft,
            None if self.fourier_radius is None else self.fourier_radius * at,
        )

    def __add__(self, other: "ArchFunction") -> "ArchFunction":
        f, g = self.func, other.func
        ft = None
        if self.fourier is not None and other.fourier is not None:
            ft = lambda y, a=self.fourier, b=other.fourier: a(y) + b(y)
        fr = None
        if self.fourier_radius is not None and other.fourier_radius is not None:
            fr = max(self.fourier_radius, other.fourier_radius)
        return ArchFunction(lambda x: f(x) + g(x), max(self.radius, other.radius),
                            tuple(sorted(set(self.breakpoints) | set(other.breakpoints))), ft, fr)

    def scale(self, c: complex) -> "ArchFunction":
        f, ft = self.func, self.fourier
        return ArchFunction(lambda x: c * f(x), self.radius, self.breakpoints,
                            None if ft is None else (lambda y: c * ft(y)), self.fourier_radius)


def real_gaussian() -> ArchFunction:
    """e^(-pi x^2), its own transform."""
    g = lambda x: np.exp(-np.pi * np.asarray(x, dtype=float) ** 2)
    return ArchFunction(g, 7.0, (), g, 7.0)


def complex_gaussian() -> ArchFunction:
    """e^(-2 pi z zbar), self-dual for the complex-place conventions."""
    g = lambda z: np.exp(-2 * np.pi * np.abs(np.asarray(z)) ** 2)
    return ArchFunction(g, 5.0, (), g, 5.0)


def _omega_real(tag: str, x: np.ndarray) -> np.ndarray:
    if tag == "realGaussian":
        return np.exp(-np.pi * x * x)
    if tag == "realIndicator":
        return (np.abs(x) <= 1).astype(float)
    if tag == "realSinc":
        return np.sinc(x)
    return np.sinc(x) ** 2


def _omega_real_tail(tag: str, X: float) -> float:
    """integral_X^inf omega(x) dx / x for X >= 1."""
    if tag == "realIndicator":
        return 0.0
    if tag == "realGaussian":
        return 0.5 * float(exp1(math.pi * X * X))
    A = math.pi * X
    if tag == "realSinc":
        return math.sin(A) / A - float(sici(A)[1])

    def cos_t3(b):
        # integral_A^inf cos(b t) / t^3 dt
        return math.cos(b * A) / (2 * A * A) - 0.5 * b * (math.sin(b * A) / A - b * float(sici(b * A)[1]))

    return 1.0 / (4 * A * A) - 0.5 * cos_t3(2.0)


def _radial_cuts(phi: ArchFunction, X: float, width: float) -> list[float]:
    pts = set(float(b) for b in phi.breakpoints if 0 < b < X)
    pts.add(1.0)
    pts.update(np.arange(width, X, width).tolist())
    return sorted(p for p in pts if 0 < p < X)


def g_eval_arch(place: Place, phi: ArchFunction, tag: str | None = None,
                cfg: QuadratureConfig = DEFAULT_CONFIG, n_angles: int = 256) -> complex:
    """G(phi) at the real or complex place with regularization ``tag``."""
    if place.is_finite:
        raise ValueError("use g_eval_finite at finite places")
    const = constants_for(place, tag)
    tag = const.omega_tag
    phi0 = phi.value_at_zero()
    X = float(max(1, math.ceil(phi.radius)))
    if place.kind == "real":

        def integrand(x):
            x = np.asarray(x, dtype=float)
            even = 0.5 * (phi(x) + phi(-x))
            return (even - phi0 * _omega_real(tag, x)) / x

        width = 0.5 if tag in ("realSinc", "realSincSquared") else 1.0
        body = integrate_adaptive(integrand, 0.0, X, cfg, points=_radial_cuts(phi, X, width))
        # gamma = 1/2 and dx/|x| over both half-lines gives 2 * (1/2) = 1
        tail = -phi0 * _omega_real_tail(tag, X)
        return complex(body + tail + const.G_omega * phi0)

    e = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)

    def radial(r):
        r = np.asarray(r, dtype=float)
        vals = phi(np.outer(r, e)).mean(axis=1)
        om = np.exp(-np.pi * r * r) if tag == "complexGaussian" else (r <= 1).astype(float)
        return 2.0 * (vals - phi0 * om) / r

    body = integrate_adaptive(radial, 0.0, X, cfg, points=_radial_cuts(phi, X, 1.0))
    tail = -phi0 * float(exp1(math.pi * X * X)) if tag == "complexGaussian" else 0.0
    return complex(body + tail + const.G_omega * phi0)


def numeric_fourier_real(phi: ArchFunction, y: np.ndarray, cfg: QuadratureConfig) -> np.ndarray:
    """integral phi(x) e^(-2 pi i x y) dx by quadrature, vectorized in y."""
    y = np.asarray(y, dtype=float)
    R = phi.radius
    n = int(min(2000, max(8, math.ceil(2 * R * (1 + float(np.max(np.abs(y), initial=0.0)))))))
    pts = sorted(set(np.linspace(-R, R, n + 1)[1:-1].tolist())
                 | {b for b in phi.breakpoints if -R < b < R}
                 | {-b for b in phi.breakpoints if -R < -b < R})

    def integrand(x):
        x = np.asarray(x, dtype=float)
        return phi(x)[:, None] * np.exp(-2j * np.pi * np.outer(x, y))

    return np.asarray(integrate_adaptive(integrand, -R, R, cfg, points=pts))


def g_oracle_via_delta(place: Place, phi, cfg: QuadratureConfig = DEFAULT_CONFIG,
                       fourier_cutoff: float = 60.0) -> complex:
    """G(phi) = integral -log|y| FT(phi)(y) dy, computed from the transform.

    Exact at finite places.  At the real place the transform is
    ``phi.fourier`` when given, else quadrature on |y| <= fourier_cutoff; the
    complex place needs ``phi.fourier``.
    """
    if place.is_finite:
        return g_oracle_finite(place, phi)
    Y = phi.fourier_radius or fourier_cutoff
    if place.kind == "real":
        if phi.fourier is not None:
            ft = lambda y: np.asarray(phi.fourier(y), dtype=complex)
        else:
            ft = lambda y: numeric_fourier_real(phi, y, cfg)

        def integrand(y):
            y = np.asarray(y, dtype=float)
            return -np.log(y) * (ft(y) + ft(-y))

        cuts = list(np.arange(1.0, Y, 1.0))
        return complex(integrate_adaptive(integrand, 0.0, Y, cfg, points=cuts, singular=[0.0]))
    if phi.fourier is None:
        raise ValueError("the complex-place oracle needs a closed-form Fourier transform")
    e = np.exp(2j * np.pi * np.arange(256) / 256)

    def radial(r):
        r = np.asarray(r, dtype=float)
        vals = np.asarray(phi.fourier(np.outer(r, e)), dtype=complex).mean(axis=1)
        # -log|y| with |y| = r^2, dy = 2 r dr dtheta
        return -2.0 * np.log(r) * vals * 2.0 * r * 2 * np.pi

    return complex(integrate_adaptive(radial, 0.0, Y, cfg, points=list(np.arange(1.0, Y, 1.0)),
                                      singular=[0.0]))


def g_eval(place: Place, phi, tag: str | None = None, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    if place.is_finite:
        if tag not in (None, *FINITE_TAGS):
            raise RegularizationError(f"tag {tag!r} does not belong to a finite place")
        return g_eval_finite(place, phi)
    return g_eval_arch(place, phi, tag, cfg)
