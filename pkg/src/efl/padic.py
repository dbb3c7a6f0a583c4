"""Exact p-adic analysis: places, p-adic numbers, Bruhat functions and local
characters of Q_p.

Ball centers are kept as rationals with p-power denominators.  The ball
``{x : |x - c| <= p^-n}`` is stored with the canonical center
``c mod p^n``, the unique element of Z[1/p] in [0, p^n) congruent to ``c``,
so two balls are equal iff their (n, center) pairs are equal.

Synthetic differential exponent delta: the additive character is
``x -> exp(2 pi i {p^delta x})`` and the additive measure gives Z_p the volume
``p^(-delta/2)``; this measure is self-dual for that character.  delta = 0
is Q_p itself.
"""
from __future__ import annotations

import cmath
import json
import math
from collections import defaultdict
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .characters_data import (
    CharacterError,
    DirichletCharacter,
    factorize,
    is_prime,
    prime_component,
)

DEFAULT_PRECISION = 64
# relative size below which Bruhat coefficients count as zero / equal
COEFF_RTOL = 1e-12
MAX_GRID = 2_000_000


class PadicError(ValueError):
    pass


class DivergenceError(PadicError):
    """A multiplicative integral diverges at 0."""


class NotCuspidalError(PadicError):
    pass


# ---------------------------------------------------------------------------
# places


@dataclass(frozen=True)
class Place:
    kind: str  # "finite" | "real" | "complex"
    p: int | None = None
    delta: int = 0

    def __post_init__(self):
        if self.kind not in ("finite", "real", "complex"):
            raise ValueError(f"unknown place kind {self.kind!r}")
        if self.kind == "finite":
            if self.p is None or not is_prime(self.p):
                raise ValueError(f"finite place needs a prime, got {self.p}")
            if self.delta < 0:
                raise ValueError("differential exponent must be >= 0")

    @classmethod
    def finite(cls, p: int, delta: int = 0) -> "Place":
        return cls("finite", p, delta)

    @classmethod
    def real(cls) -> "Place":
        return cls("real")

    @classmethod
    def complex(cls) -> "Place":
        return cls("complex")

    @classmethod
    def parse(cls, text: str) -> "Place":
        """``p:5``, ``p:3:delta:1``, ``real`` or ``complex``."""
        parts = text.strip().lower().split(":")
        if parts == ["real"]:
            return cls.real()
        if parts == ["complex"]:
            return cls.complex()
        if parts[0] == "p" and len(parts) in (2, 4):
            delta = 0
            if len(parts) == 4:
                if parts[2] != "delta":
                    raise ValueError(f"cannot parse place {text!r}")
                delta = int(parts[3])
            return cls.finite(int(parts[1]), delta)
        raise ValueError(f"cannot parse place {text!r}")

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def q(self) -> int | None:
        return self.p

    @property
    def log_q(self) -> float:
        return math.log(self.p)

    def module(self, x) -> float:
        """Normalized absolute value |x|_v (|z| = z zbar at a complex place)."""
        if self.kind == "real":
            return abs(float(x))
        if self.kind == "complex":
            return abs(complex(x)) ** 2
        if isinstance(x, PadicNumber):
            return x.abs()
        x = Fraction(x)
        if x == 0:
            return 0.0
        return float(self.p) ** (-valuation(x, self.p))

    def unit_volume(self) -> float:
        """Additive volume of Z_p, p^(-delta/2)."""
        return self.p ** (-self.delta / 2.0)

    @property
    def R(self) -> float:
        """Residue of Delta_s at s = 0; its inverse normalizes d^x u."""
        if self.kind == "real":
            return 2.0
        if self.kind == "complex":
            return 2.0 * math.pi
        return self.unit_volume() * (1.0 - 1.0 / self.p) / math.log(self.p)

    @property
    def gamma(self) -> float:
        return 1.0 / self.R

    def label(self) -> str:
        if self.kind != "finite":
            return self.kind
        return f"p:{self.p}" + (f":delta:{self.delta}" if self.delta else "")


# ---------------------------------------------------------------------------
# rationals as p-adic numbers


def valuation(x, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        raise PadicError("valuation of 0")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


@lru_cache(maxsize=4096)
def _p_exponent(den: int, p: int) -> int | None:
    """e with den = p^e, or None."""
    e = 0
    while den % p == 0:
        den //= p
        e += 1
    return e if den == 1 else None


def reduce_mod(x, p: int, n: int) -> Fraction:
    """Canonical representative of x in Q_p / p^n Z_p: the element of
    Z[1/p] in [0, p^n) congruent to x."""
    if not isinstance(x, Fraction):
        x = Fraction(x)
    num, den = x.numerator, x.denominator
    if num == 0:
        return _ZERO
    e = 0 if den == 1 else _p_exponent(den, p)
    if e is not None:
        # x = num / p^e
        k = n + e
        if k <= 0:
            return _ZERO
        return Fraction(num % p**k, den)
    v = valuation(x, p)
    if v >= n:
        return _ZERO
    k = n - v
    if v >= 0:
        num //= p**v
    else:
        den //= p ** (-v)
    u = (num * pow(den, -1, p**k)) % p**k
    return Fraction(u) * Fraction(p) ** v


_ZERO = Fraction(0)


def p_power(p: int, n: int) -> Fraction:
    return Fraction(p) ** n


@dataclass(frozen=True)
class PadicNumber:
    """x = p^valuation * unit, with the unit known modulo p^precision."""

    p: int
    valuation: int = 0
    unit: int = 0
    precision: int = DEFAULT_PRECISION
    is_zero: bool = False

    def __post_init__(self):
        if not self.is_zero:
            if self.unit % self.p == 0:
                raise PadicError("unit part must not be divisible by p")
            object.__setattr__(self, "unit", self.unit % self.p**self.precision)

    @classmethod
    def zero(cls, p: int, precision: int = DEFAULT_PRECISION) -> "PadicNumber":
        return cls(p, 0, 0, precision, True)

    @classmethod
    def from_rational(cls, x, p: int, precision: int = DEFAULT_PRECISION) -> "PadicNumber":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, precision)
        v = valuation(x, p)
        u = x / p_power(p, v)
        mod = p**precision
        unit = (u.numerator * pow(u.denominator, -1, mod)) % mod
        return cls(p, v, unit, precision)

    @classmethod
    def from_digits(cls, p: int, valuation: int, digits: Sequence[int],
                    precision: int | None = None) -> "PadicNumber":
        digits = list(digits)
        precision = precision or max(DEFAULT_PRECISION, len(digits))
        if not digits or all(d == 0 for d in digits):
            return cls.zero(p, precision)
        if any(not 0 <= d < p for d in digits):
            raise PadicError(f"digits must lie in [0, {p})")
        lead = next(i for i, d in enumerate(digits) if d)
        unit = sum(d * p**i for i, d in enumerate(digits[lead:]))
        return cls(p, valuation + lead, unit, precision)

    @property
    def digits(self) -> list[int]:
        if self.is_zero:
            return []
        out, u = [], self.unit
        for _ in range(self.precision):
            out.append(u % self.p)
            u //= self.p
        return out

    def abs(self) -> float:
        return 0.0 if self.is_zero else float(self.p) ** (-self.valuation)

    def truncate(self, n: int) -> Fraction:
        """Canonical representative of self mod p^n."""
        if self.is_zero or self.valuation >= n:
            return Fraction(0)
        if n - self.valuation > self.precision:
            raise PadicError(
                f"precision {self.precision} too small for radius exponent {n} "
                f"at valuation {self.valuation}"
            )
        k = n - self.valuation
        return Fraction(self.unit % self.p**k) * p_power(self.p, self.valuation)

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * p_power(self.p, self.valuation)

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise PadicError("mismatched primes")
            return other
        return PadicNumber.from_rational(other, self.p, self.precision)

    def _prec(self, other: "PadicNumber") -> int:
        return min(self.precision, other.precision)

    def __neg__(self):
        if self.is_zero:
            return self
        return PadicNumber(self.p, self.valuation, -self.unit, self.precision)

    def __add__(self, other):
        other = self._coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        v = min(self.valuation, other.valuation)
        prec = self._prec(other)
        top = v + prec  # absolute precision of the sum
        a = self.unit * self.p ** (self.valuation - v)
        b = other.unit * self.p ** (other.valuation - v)
        s = (a + b) % self.p**prec
        if s == 0:
            return PadicNumber.zero(self.p, prec)
        shift = 0
        while s % self.p == 0:
            s //= self.p
            shift += 1
        # relative precision drops by the cancelled digits
        return PadicNumber(self.p, v + shift, s, max(1, top - (v + shift)))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero or other.is_zero:
            return PadicNumber.zero(self.p, self._prec(other))
        prec = self._prec(other)
        return PadicNumber(self.p, self.valuation + other.valuation,
                           self.unit * other.unit, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.is_zero:
            raise ZeroDivisionError("inverse of p-adic zero")
        mod = self.p**self.precision
        return PadicNumber(self.p, -self.valuation, pow(self.unit, -1, mod), self.precision)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __eq__(self, other):
        if not isinstance(other, PadicNumber):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        prec = self._prec(other)
        return (self.valuation == other.valuation
                and (self.unit - other.unit) % self.p**prec == 0)

    def __hash__(self):
        return hash((self.p, self.valuation, self.is_zero))


# ---------------------------------------------------------------------------
# Bruhat functions


def _char_phase(turn) -> complex:
    return cmath.exp(2j * math.pi * float(turn))


@dataclass(frozen=True)
class Ball:
    n: int  # radius p^-n
    center: Fraction  # canonical, in [0, p^n)

    def contains_point(self, x: Fraction, p: int) -> bool:
        return reduce_mod(x, p, self.n) == self.center

    def contains(self, other: "Ball", p: int) -> bool:
        return other.n >= self.n and reduce_mod(other.center, p, self.n) == self.center

    def contains_zero(self) -> bool:
        return self.center == 0


@dataclass(frozen=True)
class BruhatFunction:
    """Finite combination of ball indicators on Q_p, in canonical form.

    ``terms`` holds (Ball, coefficient) pairs over pairwise-disjoint balls,
    each a maximal ball on which the function is constant and nonzero.  Build
    instances with :meth:`from_terms`, which canonicalizes.
    """

    place: Place
    terms: tuple = ()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_terms(cls, place: Place, terms: Iterable) -> "BruhatFunction":
        """``terms``: iterable of (coefficient, center, radius_exponent)."""
        if not place.is_finite:
            raise PadicError("Bruhat functions live on finite places")
        return cls(place, _canonicalize(place.p, terms))

    @classmethod
    def zero(cls, place: Place) -> "BruhatFunction":
        return cls(place, ())

    @classmethod
    def ball(cls, place: Place, center=0, n: int = 0, coeff: complex = 1.0) -> "BruhatFunction":
        return cls.from_terms(place, [(coeff, center, n)])

    @classmethod
    def unit_ball(cls, place: Place) -> "BruhatFunction":
        return cls.ball(place, 0, 0)

    @classmethod
    def annulus(cls, place: Place, v: int, coeff: complex = 1.0) -> "BruhatFunction":
        """Indicator of {|x| = p^-v}."""
        p = place.p
        pv = p_power(p, v)
        return cls.from_terms(place, [(coeff, j * pv, v + 1) for j in range(1, p)])

    @property
    def p(self) -> int:
        return self.place.p

    # -- evaluation -------------------------------------------------------

    def __call__(self, x) -> complex:
        if isinstance(x, PadicNumber):
            for ball, a in self.terms:
                if x.truncate(ball.n) == ball.center:
                    return a
            return 0j
        x = Fraction(x)
        for ball, a in self.terms:
            if reduce_mod(x, self.p, ball.n) == ball.center:
                return a
        return 0j

    def value_at_zero(self) -> complex:
        for ball, a in self.terms:
            if ball.contains_zero():
                return a
        return 0j

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def max_abs(self) -> float:
        return max((abs(a) for _, a in self.terms), default=0.0)

    def radius_exponents(self) -> list[int]:
        return [b.n for b, _ in self.terms]

    # -- algebra ----------------------------------------------------------

    def _raw(self):
        return [(a, b.center, b.n) for b, a in self.terms]

    def _same(self, other: "BruhatFunction"):
        if self.place != other.place:
            raise PadicError("Bruhat functions on different places")

    def __add__(self, other: "BruhatFunction") -> "BruhatFunction":
        self._same(other)
        return BruhatFunction.from_terms(self.place, self._raw() + other._raw())

    def __neg__(self) -> "BruhatFunction":
        return BruhatFunction(self.place, tuple((b, -a) for b, a in self.terms))

    def __sub__(self, other: "BruhatFunction") -> "BruhatFunction":
        return self + (-other)

    def scale(self, c: complex) -> "BruhatFunction":
        if c == 0:
            return BruhatFunction.zero(self.place)
        return BruhatFunction(self.place, tuple((b, c * a) for b, a in self.terms))

    def __mul__(self, other):
        if isinstance(other, BruhatFunction):
            return self.pointwise(other)
        return self.scale(complex(other))

    __rmul__ = __mul__

    def conj(self) -> "BruhatFunction":
        return BruhatFunction(self.place, tuple((b, a.conjugate()) for b, a in self.terms))

    def _isometric_image(self, images) -> "BruhatFunction":
        # a similarity of Q_p maps maximal disjoint balls to maximal disjoint
        # balls, so the image of a canonical form is canonical after sorting
        p = self.p
        terms = [(Ball(n, reduce_mod(c, p, n)), a) for a, c, n in images]
        terms.sort(key=lambda t: (t[0].n, t[0].center))
        return BruhatFunction(self.place, tuple(terms))

    def translate(self, a) -> "BruhatFunction":
        """x -> phi(x - a)."""
        if isinstance(a, PadicNumber):
            return self._isometric_image(
                [(c, b.center + a.truncate(b.n), b.n) for b, c in self.terms])
        a = Fraction(a)
        return self._isometric_image([(c, b.center + a, b.n) for b, c in self.terms])

    def dilate(self, t) -> "BruhatFunction":
        """x -> phi(t x) for a nonzero rational t."""
        t = Fraction(t)
        if t == 0:
            raise PadicError("dilation by 0")
        v = valuation(t, self.p)
        return self._isometric_image([(c, b.center / t, b.n - v) for b, c in self.terms])

    def reflect(self) -> "BruhatFunction":
        """x -> phi(-x)."""
        return self.dilate(-1)

    def pointwise(self, other: "BruhatFunction") -> "BruhatFunction":
        self._same(other)
        p = self.p
        out = []
        for first, second, strict in ((self, other, False), (other, self, True)):
            index = {(b.n, b.center): a for b, a in second.terms}
            ns = sorted({b.n for b, _ in second.terms})
            for b, a in first.terms:
                # the ball of `second` containing b, if any (terms are disjoint);
                # equal balls are matched in the first pass only
                for n in ns:
                    if n > b.n or (strict and n == b.n):
                        break
                    key = (n, reduce_mod(b.center, p, n))
                    if key in index:
                        out.append((a * index[key], b.center, b.n))
                        break
        # products carry no cancellation noise: merge exact ties only
        return BruhatFunction(self.place, _canonicalize(p, out, rtol=0.0))

    def inversion(self) -> "BruhatFunction":
        """x -> phi(1/x) / |x|; phi must vanish near 0."""
        p = self.p
        terms = []
        for b, a in self.terms:
            if b.contains_zero():
                raise NotCuspidalError("inversion needs phi to vanish near 0")
            v = valuation(b.center, p)
            terms.append((a * float(p) ** (-v), 1 / b.center, b.n - 2 * v))
        return BruhatFunction.from_terms(self.place, terms)

    def log_multiply(self) -> "BruhatFunction":
        """x -> log|x| * phi(x); phi must vanish near 0."""
        p = self.p
        out = []
        for b, a in self.terms:
            if b.contains_zero():
                raise NotCuspidalError("log|x| * phi is not locally constant unless phi vanishes near 0")
            v = valuation(b.center, p)
            if v:
                out.append((b, -v * math.log(p) * a))
        return BruhatFunction(self.place, _canonicalize(p, [(a, b.center, b.n) for b, a in out]))

    def rotate(self, u) -> "BruhatFunction":
        """R(u) phi (x) = |u|^(1/2) phi(u x)."""
        return self.dilate(u).scale(self.place.module(u) ** 0.5)

    # -- Fourier ----------------------------------------------------------

    def fourier(self) -> "BruhatFunction":
        return bruhat_fourier(self)

    def inverse_fourier(self) -> "BruhatFunction":
        return bruhat_fourier(self).reflect()

    # -- integrals --------------------------------------------------------

    def ball_volume(self, n: int) -> float:
        return self.place.unit_volume() * float(self.p) ** (-n)

    def integral(self) -> complex:
        return sum((a * self.ball_volume(b.n) for b, a in self.terms), 0j)

    def multiplicative_integral(self) -> complex:
        return haar_integral(self, "multiplicative")

    def inner(self, other: "BruhatFunction") -> complex:
        """<phi, psi> = integral of phi * conj(psi) dx."""
        return self.pointwise(other.conj()).integral()

    # -- comparison / IO --------------------------------------------------

    def isclose(self, other: "BruhatFunction", atol: float = 1e-12) -> bool:
        diff = BruhatFunction(self.place, _canonicalize(self.p, self._raw() + (-other)._raw(), rtol=0.0))
        return diff.max_abs() <= atol

    def to_json(self) -> dict:
        terms = []
        for b, a in self.terms:
            x = PadicNumber.from_rational(b.center, self.p, max(1, b.n - _val_or(b.center, self.p, b.n)))
            terms.append({
                "re": float(a.real),
                "im": float(a.imag),
                "center_valuation": 0 if x.is_zero else x.valuation,
                "center_digits": [] if x.is_zero else _digits_of(b.center, self.p, b.n),
                "radius_exp": b.n,
            })
        return {"p": self.p, "delta": self.place.delta, "terms": terms}

    @classmethod
    def from_json(cls, data: dict) -> "BruhatFunction":
        place = Place.finite(int(data["p"]), int(data.get("delta", 0)))
        terms = []
        for t in data["terms"]:
            digits = t.get("center_digits", [])
            val = int(t.get("center_valuation", 0))
            center = sum((Fraction(d) * p_power(place.p, val + i) for i, d in enumerate(digits)), Fraction(0))
            terms.append((complex(t.get("re", 0.0), t.get("im", 0.0)), center, int(t["radius_exp"])))
        return cls.from_terms(place, terms)

    @classmethod
    def load(cls, path) -> "BruhatFunction":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _val_or(x: Fraction, p: int, default: int) -> int:
    return default if x == 0 else valuation(x, p)


def _digits_of(x: Fraction, p: int, n: int) -> list[int]:
    v = valuation(x, p)
    u = int(x / p_power(p, v))
    out = []
    for _ in range(n - v):
        out.append(u % p)
        u //= p
    return out


# ---------------------------------------------------------------------------
# canonicalization


def _canonicalize(p: int, terms, rtol: float = COEFF_RTOL) -> tuple:
    acc: dict[tuple[int, Fraction], complex] = defaultdict(complex)
    for coeff, center, n in terms:
        coeff = complex(coeff)
        if coeff == 0:
            continue
        acc[(int(n), reduce_mod(center, p, int(n)))] += coeff
    if not acc:
        return ()
    scale = max(abs(a) for a in acc.values())
    tol = rtol * scale

    keys = sorted(acc, key=lambda k: (k[0], k[1]))
    levels = sorted({k[0] for k in keys})
    keyset = set(keys)

    # group every ball under its outermost ancestor in the set
    roots: dict[tuple, list] = defaultdict(list)
    for key in keys:
        n, c = key
        root = key
        for m in levels:
            if m >= n:
                break
            anc = (m, reduce_mod(c, p, m))
            if anc in keyset:
                root = anc
                break
        if root != key:
            roots[root].append(key)
        else:
            roots.setdefault(key, [])

    emitted: dict[tuple[int, Fraction], complex] = {}

    def region(ball, value, inside):
        if not inside:
            emitted[ball] = value
            return
        n, c = ball
        step = p_power(p, n)
        groups = defaultdict(list)
        for key in inside:
            groups[reduce_mod(key[1], p, n + 1)].append(key)
        for k in range(p):
            cc = c + k * step
            child = (n + 1, cc)
            sub = groups.get(cc, [])
            if child in keyset:
                region(child, value + acc[child], [x for x in sub if x != child])
            else:
                region(child, value, sub)

    for root, inside in roots.items():
        region(root, acc[root], inside)

    # merge complete sibling sets with equal values, deepest level first
    # (merges may climb above the shallowest input level)
    if emitted:
        n = max(k[0] for k in emitted)
        while n >= min(k[0] for k in emitted):
            by_parent = defaultdict(list)
            level = [k for k in emitted if k[0] == n]
            n -= 1
            for key in level:
                by_parent[reduce_mod(key[1], p, n)].append(key)
            for parent_c, kids in by_parent.items():
                if len(kids) != p:
                    continue
                v0 = emitted[kids[0]]
                if all(abs(emitted[k] - v0) <= tol for k in kids):
                    for k in kids:
                        del emitted[k]
                    emitted[(n, parent_c)] = v0
    out = [
        (Ball(n, c), complex(v))
        for (n, c), v in sorted(emitted.items(), key=lambda kv: (kv[0][0], kv[0][1]))
        if abs(v) > tol
    ]
    return tuple(out)


def canonicalize_grid(place: Place, values: np.ndarray, top: int, depth: int,
                      rtol: float = COEFF_RTOL) -> BruhatFunction:
    """Canonical form of a function given on the cosets of p^(depth - top) Z_p
    inside p^-top Z_p.  ``values[j]`` is the value on the coset of j p^-top."""
    p = place.p
    values = np.asarray(values, dtype=complex)
    if values.shape != (p**depth,):
        raise PadicError("grid has the wrong number of cosets")
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if scale == 0.0:
        return BruhatFunction.zero(place)
    tol = rtol * scale
    vals = [None] * (depth + 1)
    const = [None] * (depth + 1)
    vals[depth] = values
    const[depth] = np.ones(values.shape, dtype=bool)
    for t in range(depth - 1, -1, -1):
        v = vals[t + 1].reshape((p**t, p), order="F")
        c = const[t + 1].reshape((p**t, p), order="F")
        first = v[:, :1]
        same = np.all(np.abs(v - first) <= tol, axis=1) & np.all(c, axis=1)
        vals[t] = v[:, 0]
        const[t] = same
    terms = []
    base = p_power(p, -top)
    for t in range(depth + 1):
        mask = const[t] & (np.abs(vals[t]) > tol)
        if t > 0:
            parent = np.arange(p**t) % p ** (t - 1)
            mask &= ~const[t - 1][parent]
        for r in np.nonzero(mask)[0]:
            terms.append((Ball(t - top, int(r) * base), complex(vals[t][r])))
    terms.sort(key=lambda bc: (bc[0].n, bc[0].center))
    return BruhatFunction(place, tuple(terms))


# ---------------------------------------------------------------------------
# Fourier transform


def _phase_turns(centers: Sequence[Fraction], p: int, delta: int, top: int, count: int):
    """{p^delta c * j p^-top} for j in range(count), as float turns, one row per c."""
    rows = []
    j = np.arange(count, dtype=object)
    for c in centers:
        w = Fraction(c) * p_power(p, delta - top)
        num, den = w.numerator, w.denominator
        if den == 1:
            rows.append(np.zeros(count))
            continue
        if abs(num) * count < 2**62:
            jj = np.arange(count, dtype=np.int64)
            rows.append(((num % den) * jj % den).astype(float) / den)
        else:
            rows.append(np.array([float(Fraction(int(x) * num % den, den)) for x in j]))
    return rows


def fourier_grid(phi: BruhatFunction):
    """Values of the Fourier transform of a nonzero phi on a coset grid.

    Returns (top, depth, values): the transform vanishes off p^-top Z_p and is
    constant on each coset j p^-top + p^(depth - top) Z_p, with value
    values[j].  A ball c + p^n Z_p maps to p^(-delta/2 - n) exp(2 pi i
    {p^delta c y}) on |y| <= p^(n + delta), whose phase is constant on
    cosets of p^(-delta - v(c)) Z_p.
    """
    place = phi.place
    p, delta = place.p, place.delta
    ns = [b.n for b, _ in phi.terms]
    top = max(ns) + delta
    fine = [-n - delta for n in ns]
    fine += [-valuation(b.center, p) - delta for b, _ in phi.terms if b.center != 0]
    depth = top + max(fine)
    if p**depth > MAX_GRID:
        raise PadicError(f"Fourier grid of {p}^{depth} cosets exceeds the size limit")
    count = p**depth
    values = np.zeros(count, dtype=complex)
    jj = np.arange(count, dtype=np.int64)
    turns = _phase_turns([b.center for b, _ in phi.terms], p, delta, top, count)
    for (b, a), tr in zip(phi.terms, turns):
        vol = place.unit_volume() * float(p) ** (-b.n)
        # support |y| <= p^(n + delta)  <=>  j divisible by p^(top - n - delta)
        mask = jj % p ** (top - b.n - delta) == 0
        values += np.where(mask, a * vol * np.exp(2j * np.pi * tr), 0.0)
    return top, depth, values


def bruhat_fourier(phi: BruhatFunction) -> BruhatFunction:
    """Exact additive Fourier transform,
    phi~(y) = integral phi(x) exp(2 pi i {p^delta x y}) dx,
    evaluated on the coset grid of :func:`fourier_grid` and compressed to
    canonical form."""
    if phi.is_zero:
        return phi
    top, depth, values = fourier_grid(phi)
    return canonicalize_grid(phi.place, values, top, depth)


def bruhat_canonicalize(phi: BruhatFunction) -> BruhatFunction:
    return BruhatFunction.from_terms(phi.place, phi._raw())


# ---------------------------------------------------------------------------
# integrals


def haar_integral(phi: BruhatFunction, measure: str = "additive") -> complex:
    """Exact integral of phi against dx or d^x u = gamma dx / |x|.

    d^x u gives the units the volume log p.  A ball around 0 makes the
    multiplicative integral diverge and raises :class:`DivergenceError`.
    """
    if measure == "additive":
        return phi.integral()
    if measure != "multiplicative":
        raise ValueError(f"unknown measure {measure!r}")
    p = phi.p
    total = 0j
    for b, a in phi.terms:
        if b.contains_zero():
            raise DivergenceError(
                "multiplicative integral diverges: phi is nonzero near 0"
            )
        v = valuation(b.center, p)
        total += a * phi.ball_volume(b.n) * float(p) ** v
    return phi.place.gamma * total


# ---------------------------------------------------------------------------
# local characters


@dataclass(frozen=True)
class LocalCharacter:
    """Unitary character of Q_p^x.

    chi(p) = exp(i theta); on units chi(u) = exp(2 pi i table[u mod p^f]),
    with ``table`` indexed by residues mod p^f (None at non-units).
    """

    place: Place
    theta: float = 0.0
    conductor: int = 0
    table: tuple = (Fraction(0),)

    def __post_init__(self):
        p = self.place.p
        if len(self.table) != p**self.conductor:
            raise CharacterError("unit table must cover the residues mod p^f")
        if self.conductor >= 1:
            # minimality: nontrivial on 1 + p^(f-1) Z_p
            step = p ** (self.conductor - 1)
            if all(self.table[(1 + k * step) % p**self.conductor] == 0 for k in range(p)):
                raise CharacterError(
                    f"conductor exponent {self.conductor} is not minimal"
                )

    @classmethod
    def unramified(cls, place: Place, theta: float = 0.0) -> "LocalCharacter":
        return cls(place, float(theta) % (2 * math.pi), 0, (Fraction(0),))

    @property
    def is_ramified(self) -> bool:
        return self.conductor > 0

    @property
    def modulus(self) -> int:
        return self.place.p ** self.conductor

    def unit_turn(self, u: int) -> Fraction:
        r = self.table[u % self.modulus]
        if r is None:
            raise CharacterError(f"{u} is not a unit")
        return r

    def unit_value(self, u: int) -> complex:
        return _char_phase(self.unit_turn(u))

    def __call__(self, x) -> complex:
        p = self.place.p
        if isinstance(x, PadicNumber):
            if x.is_zero:
                raise PadicError("character evaluated at 0")
            v = x.valuation
            u = x.unit % self.modulus
        else:
            x = Fraction(x)
            if x == 0:
                raise PadicError("character evaluated at 0")
            v = valuation(x, p)
            w = x / p_power(p, v)
            u = (w.numerator * pow(w.denominator, -1, self.modulus)) % self.modulus if self.modulus > 1 else 0
        return cmath.exp(1j * self.theta * v) * self.unit_value(u)

    def inverse(self) -> "LocalCharacter":
        return LocalCharacter(
            self.place,
            (-self.theta) % (2 * math.pi),
            self.conductor,
            tuple(None if r is None else (-r) % 1 for r in self.table),
        )

    def unit_average(self) -> complex:
        vals = [self.unit_value(u) for u in range(self.modulus) if self.table[u] is not None]
        return sum(vals) / len(vals)

    def on_ball(self, ball: Ball) -> complex | None:
        """Constant value on ``ball`` if chi is constant there, else None."""
        p = self.place.p
        if ball.contains_zero():
            return None
        v = valuation(ball.center, p)
        if ball.n - v < max(self.conductor, 1) and self.conductor > 0:
            return None
        return self(ball.center)

    def label(self) -> str:
        return f"{self.place.label()}:f={self.conductor}:theta={self.theta:.12g}"


def local_character_from_dirichlet_component(chi_p: DirichletCharacter, place: Place,
                                             theta: float = 0.0) -> LocalCharacter:
    """Unit part given by the inverse of a primitive character mod p^f."""
    p = place.p
    f = factorize(chi_p.modulus).get(p, 0) if chi_p.modulus > 1 else 0
    table = tuple(None if r is None else (-r) % 1 for r in chi_p.turns)
    if f == 0:
        table = (Fraction(0),)
    return LocalCharacter(place, theta % (2 * math.pi), f, table)


@dataclass(frozen=True)
class ArchCharacter:
    """Character of R^x (twist 0 trivial, 1 sign) or C^x ((z/|z|)^twist)."""

    place: Place
    twist: int = 0

    def __post_init__(self):
        if self.place.is_finite:
            raise ValueError("archimedean character on a finite place")
        if self.place.kind == "real" and self.twist not in (0, 1):
            raise ValueError("real characters: twist 0 (trivial) or 1 (sign)")

    def __call__(self, x):
        x = np.asarray(x)
        if self.place.kind == "real":
            return np.where(x < 0, -1.0, 1.0) if self.twist else np.ones_like(x, dtype=float)
        ang = np.angle(x)
        return np.exp(1j * self.twist * ang)

    def inverse(self) -> "ArchCharacter":
        if self.place.kind == "real":
            return self
        return ArchCharacter(self.place, -self.twist)

    @property
    def is_ramified(self) -> bool:
        return False

    def label(self) -> str:
        if self.place.kind == "real":
            return "sign" if self.twist else "trivial"
        return f"twist:{self.twist}"


def localize_dirichlet(chi: DirichletCharacter, place: Place):
    """Local component of the idele class character attached to a primitive
    Dirichlet character.

    Normalization: the global character is trivial on Q^x.  For p not
    dividing m, chi_p is unramified with chi_p(p) = chi(p).  For p | m the
    unit part is the inverse of the p-primary CRT factor chi_(p) and
    chi_p(p) is the product of the other factors at p.  At the real place
    chi_inf is the sign character iff chi is odd.
    """
    if not chi.primitive:
        raise CharacterError(
            "character is not primitive; replace it by the primitive character "
            "inducing it first"
        )
    if place.kind == "real":
        return ArchCharacter(place, chi.parity)
    if place.kind == "complex":
        raise CharacterError("Q has no complex place")
    p, m = place.p, chi.modulus
    if m % p:
        r = chi.turn(p)
        return LocalCharacter.unramified(place, 2 * math.pi * float(r))
    comp = prime_component(chi, p)
    theta_turn = Fraction(0)
    for ell in factorize(m):
        if ell != p:
            theta_turn += prime_component(chi, ell).turn(p)
    return local_character_from_dirichlet_component(comp, place, 2 * math.pi * float(theta_turn % 1))


def eval_local_character(chi: LocalCharacter, x) -> complex:
    return chi(x)


def integrate_quasicharacter(phi: BruhatFunction, chi: LocalCharacter, sigma: complex) -> complex:
    """Exact value of the integral of phi(x) chi(x) |x|^sigma dx (Re sigma > -1).

    Balls around 0 are summed as geometric series over annuli; elsewhere chi
    is refined to conductor depth.
    """
    place = phi.place
    p = place.p
    sigma = complex(sigma)
    if sigma.real <= -1:
        raise PadicError("integral diverges at 0 for Re(sigma) <= -1")
    vol0 = place.unit_volume()
    total = 0j
    for b, a in phi.terms:
        if b.contains_zero():
            if chi.is_ramified:
                continue
            # sum over v >= n of chi(p)^v p^(-v sigma) vol(annulus v)
            r = cmath.exp(1j * chi.theta) * p ** (-(sigma + 1))
            total += a * vol0 * (1 - 1 / p) * r**b.n / (1 - r)
            continue
        v = valuation(b.center, p)
        mod = p ** (-v * sigma)
        depth = v + max(chi.conductor, 1)
        if b.n >= depth or not chi.is_ramified:
            total += a * phi.ball_volume(b.n) * mod * chi(b.center)
            continue
        step = p_power(p, b.n)
        sub_vol = phi.ball_volume(depth)
        acc = 0j
        for k in range(p ** (depth - b.n)):
            acc += chi(b.center + k * step)
        total += a * sub_vol * mod * acc
    return total
