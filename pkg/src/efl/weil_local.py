"""Weil local terms W_v(chi, f) = (G_v * F_v)(1), the conductor integral and
the conductor operator H = A + B.

F_v(x) = f(|x|_v) chi_v^-1(x).  At a finite place F_v is an exact Bruhat
function, one annulus per power of p inside the support of f.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from .gamma_factors import lambda_array
from .kernel import DEFAULT_CONFIG, QuadratureConfig, integrate_adaptive, vertical_line_integral
from .log_fourier import ArchFunction, constants_for, g_eval_arch, g_eval_finite
from .padic import (
    ArchCharacter,
    BruhatFunction,
    LocalCharacter,
    NotCuspidalError,
    PadicError,
    Place,
    p_power,
    valuation,
)
from .test_functions import TestFunction, mellin

EXACT_TOL = 1e-12


class WeilError(ValueError):
    pass


@dataclass(frozen=True)
class IdeleLocalComponent:
    place: Place
    f: TestFunction
    character: object = None

    def __post_init__(self):
        if self.character is None:
            ch = (LocalCharacter.unramified(self.place) if self.place.is_finite
                  else ArchCharacter(self.place, 0))
            object.__setattr__(self, "character", ch)

    def F(self, x) -> complex:
        """F_v at a single point (rational or PadicNumber at finite places)."""
        if self.place.is_finite:
            if x == 0:
                return 0j
            return float(self.f(self.place.module(x))) * self.character.inverse()(x)
        return complex(self.arch_evaluator()(np.array([x]))[0])

    def annulus_range(self) -> range:
        """k with p^-k in the support of f."""
        p = self.place.p
        a, b = self.f.support
        lo = math.ceil(-math.log(b) / math.log(p) - 1e-12)
        hi = math.floor(-math.log(a) / math.log(p) + 1e-12)
        return range(lo, hi + 1)

    def realization(self) -> BruhatFunction:
        """Exact Bruhat form of F_v at a finite place."""
        if not self.place.is_finite:
            raise WeilError("Bruhat realization only exists at finite places")
        place, chi = self.place, self.character
        p = place.p
        depth = max(chi.conductor, 1)
        inv = chi.inverse()
        terms = []
        for k in self.annulus_range():
            val = float(self.f(float(p) ** (-k)))
            if val == 0.0:
                continue
            pk = p_power(p, k)
            for u in range(1, p**depth):
                if u % p:
                    terms.append((val * inv(u * pk), u * pk, k + depth))
        return BruhatFunction.from_terms(place, terms)

    def arch_evaluator(self):
        """x -> F_v(x) at the real (real arrays) or complex (complex arrays) place."""
        f, chi = self.f, self.character
        if self.place.kind == "real":
            eps = chi.twist

            def F(x):
                x = np.asarray(x, dtype=float)
                val = f(np.abs(x)).astype(complex)
                return val * np.where(x < 0, -1.0, 1.0) if eps else val

            return F
        n = chi.twist

        def F(z):
            z = np.asarray(z, dtype=complex)
            r = np.abs(z)
            val = f(r * r).astype(complex)
            if n:
                with np.errstate(invalid="ignore", divide="ignore"):
                    ph = np.where(r > 0, z / np.where(r > 0, r, 1.0), 1.0)
                val = val * ph ** (-n)
            return val

        return F


# ---------------------------------------------------------------------------
# finite places


def conductor_integral(chi: LocalCharacter) -> float:
    """integral over |u| = 1 of (1 - chi(u)) d^x u / |1 - u|, summed exactly
    over cosets of 1 + p^(f+1) Z_p; equals f log q for ramified chi and 0
    otherwise."""
    if not chi.is_ramified:
        return 0.0
    place = chi.place
    p, f = place.p, chi.conductor
    m = f + 1
    mod = p**m
    coset = place.gamma * place.unit_volume() * float(p) ** (-m)
    total = 0j
    for u in range(2, mod + 1):
        if u % p == 0 or (u - 1) % mod == 0:
            continue
        j = valuation(u - 1, p)
        total += (1 - chi.unit_value(u % p**f)) * float(p) ** j
    total *= coset
    return float(total.real)


def _character_average(chi: LocalCharacter) -> float:
    return 1.0 if not chi.is_ramified else 0.0


def weil_term_finite_annulus(comp: IdeleLocalComponent) -> complex:
    """Unit-circle integral plus the |u| != 1 annuli, each a closed finite sum."""
    place, chi, f = comp.place, comp.character, comp.f
    p = place.p
    lq = math.log(p)
    avg = _character_average(chi)
    total = 0j
    if avg:
        a, b = f.support
        kmax = math.floor(max(math.log(b), -math.log(a)) / lq + 1e-12)
        for k in range(1, kmax + 1):
            ph = complex(math.cos(chi.theta * k), math.sin(chi.theta * k))
            # |u| = p^-k: |1 - u| = 1 and F(1/u) = f(p^k) chi(u)
            total += lq * ph * float(f(float(p) ** k))
            # |u| = p^k: |1 - u| = p^k and F(1/u) = f(p^-k) chi(u)
            total += lq * ph.conjugate() * float(p) ** (-k) * float(f(float(p) ** (-k)))
    f1 = float(f(1.0))
    total -= f1 * conductor_integral(chi)
    total -= place.delta * lq * f1
    return total


def weil_term_finite_convolution(comp: IdeleLocalComponent) -> complex:
    """g_eval_finite applied to x -> F_v(1 - x)."""
    F = comp.realization()
    phi = F.translate(-1).reflect()
    return g_eval_finite(comp.place, phi)


def weil_term_finite(comp: IdeleLocalComponent, path: str = "annulus") -> complex:
    """W_v for a finite place; ``path`` is "annulus", "convolution" or "both"
    (both computed, agreement enforced)."""
    if not comp.place.is_finite:
        raise WeilError("weil_term_finite needs a finite place")
    if path == "annulus":
        return weil_term_finite_annulus(comp)
    if path == "convolution":
        return weil_term_finite_convolution(comp)
    if path == "both":
        a = weil_term_finite_annulus(comp)
        b = weil_term_finite_convolution(comp)
        if abs(a - b) > EXACT_TOL * (1 + abs(a)):
            raise WeilError(f"annulus path {a} and convolution path {b} disagree")
        return a
    raise ValueError(f"unknown path {path!r}")


# ---------------------------------------------------------------------------
# archimedean places


def convolution_function(comp: IdeleLocalComponent, k: float = 1.0) -> ArchFunction:
    """x -> F_v^(k)(k - x) = F_v(1 - x/k) as an ArchFunction."""
    F = comp.arch_evaluator()
    a, b = comp.f.support
    if comp.place.kind == "real":
        scale = abs(k)
        bps = sorted({abs(k * (1 - e)) for e in (a, b, -a, -b)} | {abs(k)})
        return ArchFunction(lambda x: F(1 - np.asarray(x) / k), scale * (1 + b), tuple(bps))
    # the radial average has kinks where |z| = |k| |1 +- sqrt(a or b)|
    ak = abs(k)
    bps = {ak * abs(1 + e * math.sqrt(r)) for r in (a, b) for e in (1, -1)} | {ak}
    return ArchFunction(lambda z: F(1 - np.asarray(z) / k), ak * (1 + math.sqrt(b)),
                        tuple(sorted(bps - {0.0})))


def weil_term_arch(comp: IdeleLocalComponent, tag: str | None = None,
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """(G_v * F_v)(1) with the regularization ``tag``."""
    if comp.place.is_finite:
        raise WeilError("weil_term_arch needs an archimedean place")
    return g_eval_arch(comp.place, convolution_function(comp), tag, cfg)


def weil_term_real_u_form(comp: IdeleLocalComponent, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Real place, after x -> 1 - 1/u:

        int_{u >= 1/2} (F(1/u) - F(1)) d^x u/|1-u| + int_{u < 1/2} F(1/u) d^x u/|1-u|
        + (log 2 pi + gamma_e) F(1),    d^x u = du / 2|u|.
    """
    if comp.place.kind != "real":
        raise WeilError("u-form is implemented at the real place")
    F = comp.arch_evaluator()
    a, b = comp.f.support
    F1 = complex(F(np.array([1.0]))[0])
    U = max(1.0 / a, 1.0) + 1.0

    def right(u):
        u = np.asarray(u, dtype=float)
        return (F(1.0 / u) - F1) / (2 * u * np.abs(1 - u))

    def left(u):
        u = np.asarray(u, dtype=float)
        return F(1.0 / u) / (2 * np.abs(u) * np.abs(1 - u))

    pts = sorted({1.0 / b, 1.0 / a, 1.0})
    body = integrate_adaptive(right, 0.5, U, cfg, points=[x for x in pts if 0.5 < x < U])
    tail = -F1 * 0.5 * math.log(U / (U - 1))
    # F(1/u) vanishes unless 1/b <= |u| <= 1/a
    lo_pos = (1.0 / b, min(1.0 / a, 0.5))
    neg = integrate_adaptive(left, -1.0 / a, -1.0 / b, cfg)
    pos = integrate_adaptive(left, *lo_pos, cfg) if lo_pos[0] < lo_pos[1] else 0j
    tau = constants_for(comp.place, "realIndicator").tau
    return complex(body + tail + neg + pos + tau * F1)


def weil_term_mellin(comp: IdeleLocalComponent, c: float = 0.5,
                     cfg: QuadratureConfig = DEFAULT_CONFIG, height: float = 200.0) -> complex:
    """(1/2 pi i) int_{Re s = c} f^(s) Lambda_v(chi, s) ds."""

    def g(s):
        return mellin(comp.f, s, cfg) * lambda_array(comp.place, comp.character, s)

    return vertical_line_integral(g, c, cfg, height=height).value


def weil_term(comp: IdeleLocalComponent, tag: str | None = None,
              cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    if comp.place.is_finite:
        return weil_term_finite(comp)
    return weil_term_arch(comp, tag, cfg)


def k_shift_term(comp: IdeleLocalComponent, k, tag: str | None = None,
                 cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """(G_v * F_v^(k))(k) with F_v^(k)(x) = F_v(x / k), evaluated directly."""
    if k == 0:
        raise WeilError("k must be nonzero")
    if comp.place.is_finite:
        k = Fraction(k)
        Fk = comp.realization().dilate(1 / k)
        phi = Fk.translate(-k).reflect()
        return g_eval_finite(comp.place, phi)
    return g_eval_arch(comp.place, convolution_function(comp, float(k)), tag, cfg)


# ---------------------------------------------------------------------------
# conductor operator


def op_A(phi: BruhatFunction) -> BruhatFunction:
    """Multiplication by log|x|."""
    return phi.log_multiply()


def op_B(phi: BruhatFunction) -> BruhatFunction:
    """FT A FT^-1."""
    return op_A(phi.inverse_fourier()).fourier()


def check_cuspidal(phi: BruhatFunction) -> None:
    """Raise NotCuspidalError unless phi and FT^-1(phi) both vanish near 0."""
    if phi.value_at_zero() != 0:
        raise NotCuspidalError("phi does not vanish near 0 (phi(0) != 0)")
    if abs(phi.integral()) > EXACT_TOL * max(1.0, phi.max_abs()):
        raise NotCuspidalError(
            "the Fourier transform of phi does not vanish near 0 (phi^(0) = integral of phi != 0)"
        )


def conductor_operator_apply(place: Place, phi: BruhatFunction) -> BruhatFunction:
    """H phi = log|x| phi + FT(log|x| FT^-1(phi)), exactly."""
    if phi.place != place:
        raise ValueError("phi lives on a different place")
    check_cuspidal(phi)
    return op_A(phi) + op_B(phi)


def op_R(phi: BruhatFunction, u) -> BruhatFunction:
    """R(u) phi(x) = |u|^(1/2) phi(u x)."""
    return phi.rotate(u)


def op_I(phi: BruhatFunction) -> BruhatFunction:
    """I phi(x) = phi(1/x) / |x|."""
    return phi.inversion()


def pairing(phi: BruhatFunction, psi: BruhatFunction) -> complex:
    """<phi, psi> = integral phi conj(psi) dx."""
    return phi.inner(psi)


def eigenfunction(chi: LocalCharacter, v: int = 0) -> BruhatFunction:
    """chi(x) on the annulus |x| = p^-v; H-eigenvalue (f + delta) log q."""
    if not chi.is_ramified:
        raise PadicError("eigenfunctions of this family need a ramified character")
    place = chi.place
    p, f = place.p, chi.conductor
    pv = p_power(p, v)
    terms = [(chi(u * pv), u * pv, v + f) for u in range(1, p**f) if u % p]
    return BruhatFunction.from_terms(place, terms)


def expected_eigenvalue(chi: LocalCharacter) -> float:
    return (chi.conductor + chi.place.delta) * math.log(chi.place.p)
