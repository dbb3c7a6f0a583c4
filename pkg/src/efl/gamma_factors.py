"""Local Gamma functions Gamma_v(chi, s), defined by

    FT(chi(x) |x|^(s-1)) = Gamma_v(chi, s) chi^-1(y) |y|^-s,

their negative logarithmic derivatives Lambda_v, and an oracle evaluating
the defining ratio of distribution pairings directly.

Fourier conventions: finite places use exp(2 pi i {p^delta x y}) with the
self-dual measure; the real place uses exp(-2 pi i x y) and dx; the complex
place uses exp(-2 pi i 2 Re(zw)) with dz = 2 dx dy and |z| = z zbar.
"""
from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass

import numpy as np

from .kernel import (
    GammaPoleError,
    QuadratureConfig,
    digamma,
    integrate_adaptive,
    log_gamma,
)
from .padic import (
    ArchCharacter,
    BruhatFunction,
    LocalCharacter,
    Place,
    integrate_quasicharacter,
)


class OracleError(ValueError):
    """The chosen probe gives a vanishing pairing."""


def _default_character(place: Place, char):
    if char is None:
        if place.is_finite:
            return LocalCharacter.unramified(place)
        return ArchCharacter(place, 0)
    if place.is_finite and not isinstance(char, LocalCharacter):
        raise TypeError("finite places take a LocalCharacter")
    if not place.is_finite and not isinstance(char, ArchCharacter):
        raise TypeError("archimedean places take an ArchCharacter")
    if char.place != place:
        raise ValueError("character lives on a different place")
    return char


@dataclass(frozen=True)
class GammaFactor:
    place: Place
    character: object
    branch: str

    def __call__(self, s) -> complex:
        return gamma_factor(self.place, self.character, s)

    def log_derivative(self, s) -> complex:
        return lambda_log_derivative(self.place, self.character, s)


def branch_of(place: Place, char) -> str:
    char = _default_character(place, char)
    if place.is_finite:
        return "finite-ramified" if char.is_ramified else "finite-unramified"
    if place.kind == "real":
        return "real-sign" if char.twist else "real-trivial"
    return "complex-twist"


# ---------------------------------------------------------------------------
# ramified constant cache

_CONST_CACHE: dict = {}
_CONST_LOCK = threading.Lock()


def _cache_key(place: Place, char: LocalCharacter):
    return (place, round(char.theta, 15), char.conductor, char.table)


def ramified_constant(place: Place, char: LocalCharacter) -> complex:
    """c_chi with Gamma(chi, s) = c_chi q^((f + delta) s), fixed by the oracle
    at s = 1/2."""
    key = _cache_key(place, char)
    with _CONST_LOCK:
        if key not in _CONST_CACHE:
            g = gamma_numeric_oracle(place, char, 0.5)
            _CONST_CACHE[key] = g * place.p ** (-(char.conductor + place.delta) * 0.5)
        return _CONST_CACHE[key]


# ---------------------------------------------------------------------------
# closed forms


def _check_arch_poles(*args):
    for z in args:
        if z.real <= 0 and abs(z.imag) < 1e-14 and abs(z.real - round(z.real)) < 1e-14:
            raise GammaPoleError(f"classical Gamma has a pole at {z}")


def gamma_factor(place: Place, char, s) -> complex:
    s = complex(s)
    char = _default_character(place, char)
    if place.is_finite:
        p, d = place.p, place.delta
        if char.is_ramified:
            return ramified_constant(place, char) * p ** ((char.conductor + d) * s)
        a = cmath.exp(-1j * char.theta)  # chi^-1(p)
        b = cmath.exp(1j * char.theta)  # chi(p)
        den = 1 - b * p ** (-s)
        if abs(den) < 1e-300:
            raise GammaPoleError(f"local Gamma factor has a pole at s = {s}")
        return a**d * p ** (d * (s - 0.5)) * (1 - a * p ** (s - 1)) / den
    if place.kind == "real":
        if char.twist == 0:
            _check_arch_poles(s / 2, (1 - s) / 2)
            return cmath.exp((0.5 - s) * math.log(math.pi) + log_gamma(s / 2) - log_gamma((1 - s) / 2))
        _check_arch_poles((1 + s) / 2, (2 - s) / 2)
        return -1j * cmath.exp(
            (0.5 - s) * math.log(math.pi) + log_gamma((1 + s) / 2) - log_gamma((2 - s) / 2)
        )
    n = abs(char.twist)
    _check_arch_poles(s + n / 2, 1 - s + n / 2)
    return (-1j) ** n * cmath.exp(
        (1 - 2 * s) * math.log(2 * math.pi) + log_gamma(s + n / 2) - log_gamma(1 - s + n / 2)
    )


def lambda_log_derivative(place: Place, char, s) -> complex:
    """Lambda_v(chi, s) = -d/ds log Gamma_v(chi, s)."""
    s = complex(s)
    char = _default_character(place, char)
    if place.is_finite:
        p, d = place.p, place.delta
        lq = math.log(p)
        if char.is_ramified:
            return complex(-(char.conductor + d) * lq)
        x = cmath.exp(-1j * char.theta) * p ** (s - 1)
        y = cmath.exp(1j * char.theta) * p ** (-s)
        return -d * lq + lq * (x / (1 - x) + y / (1 - y))
    lpi = math.log(math.pi)
    if place.kind == "real":
        if char.twist == 0:
            _check_arch_poles(s / 2, (1 - s) / 2)
            return lpi - 0.5 * digamma(s / 2) - 0.5 * digamma((1 - s) / 2)
        _check_arch_poles((1 + s) / 2, (2 - s) / 2)
        return lpi - 0.5 * digamma((1 + s) / 2) - 0.5 * digamma((2 - s) / 2)
    n = abs(char.twist)
    _check_arch_poles(s + n / 2, 1 - s + n / 2)
    return 2 * math.log(2 * math.pi) - digamma(s + n / 2) - digamma(1 - s + n / 2)


def lambda_array(place: Place, char, s_values) -> np.ndarray:
    return np.array([lambda_log_derivative(place, char, s) for s in np.ravel(s_values)])


# ---------------------------------------------------------------------------
# oracle


def default_probe(place: Place, char: LocalCharacter, which: int = 0) -> BruhatFunction:
    """Probe for the finite-place oracle.

    Unramified: 1_{Z_p} (which=0) or the indicator of |y| = 1/p (which=1).
    Ramified: chi on the units (which=0) or chi on |y| = 1/p (which=1).
    """
    p = place.p
    v = 0 if which == 0 else 1
    if not char.is_ramified:
        if which == 0:
            return BruhatFunction.unit_ball(place)
        return BruhatFunction.annulus(place, 1)
    f = char.conductor
    step = p**f
    terms = []
    for u in range(1, step):
        if u % p:
            terms.append((char.unit_value(u), u * p**v, f + v))
    return BruhatFunction.from_terms(place, terms)


def _finite_oracle(place: Place, char: LocalCharacter, s: complex, probe) -> complex:
    if probe is None:
        probe = default_probe(place, char)
    if probe.place != place:
        raise ValueError("probe lives on a different place")
    den = integrate_quasicharacter(probe, char.inverse(), -s)
    if abs(den) < 1e-14 * max(1.0, probe.max_abs()):
        raise OracleError("probe pairs to zero with chi^-1 |y|^-s; choose another probe")
    num = integrate_quasicharacter(probe.fourier(), char, s - 1)
    return num / den


def _mellin_ray(g, a: complex, cfg: QuadratureConfig) -> complex:
    """integral_0^inf r^(a-1) g(r) dr for g analytic and Gaussian-decaying in a
    sector, along the rotated ray r = rho e^(i phi).

    The rotation phi = 0.6 sign(Im a) turns the oscillating factor
    r^(i Im a) into a decaying one, so no cancellation occurs even for
    |Im a| ~ 20.  Gaussians stay decaying for |phi| < pi/4.  The piece
    below u = -40 is taken as g(0) e^(a u) in closed form.
    """
    phi = 0.6 * math.copysign(1.0, a.imag) if abs(a.imag) > 1e-12 else 0.0
    rot = cmath.exp(1j * phi)
    g0 = complex(g(np.array([0.0 + 0j]))[0])
    U_lo, U_hi = -40.0, 4.0

    def integrand(u):
        u = np.asarray(u, dtype=float)
        z = np.exp(u) * rot
        return np.exp(a * u) * g(z)

    body = integrate_adaptive(integrand, U_lo, U_hi, cfg,
                              points=list(np.arange(-39.0, 4.0, 1.0)))
    tail = g0 * cmath.exp(a * U_lo) / a
    return rot**a * (body + tail)


def _real_oracle(char: ArchCharacter, s: complex, cfg: QuadratureConfig) -> complex:
    # probe x^eps e^(-pi x^2), Fourier transform (-i)^eps y^eps e^(-pi y^2)
    eps = char.twist
    probe = lambda z: z**eps * np.exp(-np.pi * z * z)
    probe_ft = lambda z: (-1j) ** eps * z**eps * np.exp(-np.pi * z * z)
    # integrand is even after multiplying by the character, so integrate x > 0 twice
    num = 2.0 * _mellin_ray(probe_ft, s, cfg)
    den = 2.0 * _mellin_ray(probe, 1 - s, cfg)
    if abs(den) < 1e-300:
        raise OracleError("vanishing denominator pairing")
    return num / den


def _complex_oracle(char: ArchCharacter, s: complex, cfg: QuadratureConfig,
                    n_angles: int = 32) -> complex:
    """Probe P(z) e^(-2 pi z zbar) with P = z^n (n >= 0) or zbar^|n|; its
    transform is (-i)^|n| P(wbar) e^(-2 pi w wbar).  The angular integral is
    a trapezoid rule (exact for these trigonometric polynomials), the radial
    one runs along a rotated ray."""
    n = char.twist
    k = abs(n)
    P = (lambda z: z**k) if n >= 0 else (lambda z: np.conj(z) ** k)
    e = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    chi = e**n
    # angular factors; dz = 2 r dr dtheta and |z|^(s-1) = r^(2s-2)
    ang_num = 2 * np.pi * (-1j) ** k * np.mean(chi * P(np.conj(e)))
    ang_den = 2 * np.pi * np.mean(np.conj(chi) * P(e))
    g = lambda r: 2.0 * np.exp(-2 * np.pi * r * r)
    num = ang_num * _mellin_ray(g, 2 * s + k, cfg)
    den = ang_den * _mellin_ray(g, 2 - 2 * s + k, cfg)
    if abs(den) < 1e-300:
        raise OracleError("vanishing denominator pairing")
    return num / den


def gamma_numeric_oracle(place: Place, char, s, probe=None,
                         cfg: QuadratureConfig | None = None) -> complex:
    """Gamma_v(chi, s) as <chi |x|^(s-1), FT(probe)> / <chi^-1 |y|^-s, probe>.

    Exact at finite places (Bruhat probes); quadrature at archimedean
    places, with Gaussian-type probes whose transforms are known in closed
    form.
    """
    s = complex(s)
    if not 0 < s.real < 1:
        raise ValueError("the oracle needs 0 < Re s < 1")
    char = _default_character(place, char)
    if place.is_finite:
        return _finite_oracle(place, char, s, probe)
    cfg = cfg or QuadratureConfig(abs_tol=1e-15, rel_tol=1e-13)
    if place.kind == "real":
        return _real_oracle(char, s, cfg)
    return _complex_oracle(char, s, cfg)
