"""The non-archimedean action

    S(phi) = (R/2) int |k| phi^(k) phi^(-k) dk
           = q (q-1) q^delta / (4 (q+1) log q) int int (phi(x) - phi(y))^2 / |x-y|^2 dx dy

evaluated exactly on real Bruhat functions.
"""
from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .padic import Ball, BruhatFunction, Place, fourier_grid, p_power, reduce_mod, valuation


class ActionError(ValueError):
    pass


@dataclass(frozen=True)
class ActionValue:
    momentum_form: float
    position_form: float
    place: str

    @property
    def difference(self) -> float:
        return abs(self.momentum_form - self.position_form)

    def to_json(self) -> dict:
        d = asdict(self)
        d["difference"] = self.difference
        return d


def _require_real(phi: BruhatFunction, tol: float = 1e-14):
    if any(abs(a.imag) > tol * max(1.0, abs(a)) for _, a in phi.terms):
        raise ActionError("the action is defined for real-valued phi")


def _abs_moment_ball(place: Place, n: int) -> float:
    """int over p^n Z_p of |k| dk."""
    p = place.p
    return place.unit_volume() * (1 - 1 / p) * float(p) ** (-2 * n) / (1 - float(p) ** -2)


def _p_valuation_array(j: np.ndarray, p: int) -> np.ndarray:
    v = np.zeros(j.shape, dtype=np.int64)
    j = j.copy()
    live = j != 0
    while np.any(live):
        div = live & (j % p == 0)
        if not np.any(div):
            break
        v[div] += 1
        j[div] //= p
        live = div
    return v


def action_momentum(place: Place, phi: BruhatFunction) -> float:
    """(R/2) sum over the Fourier coset grid of |k| phi^(k) phi^(-k) dk."""
    _require_real(phi)
    if phi.is_zero:
        return 0.0
    p = place.p
    top, depth, values = fourier_grid(phi)
    count = p**depth
    j = np.arange(count, dtype=np.int64)
    mirrored = values[(-j) % count]
    leaf = depth - top
    weights = np.empty(count)
    v = _p_valuation_array(j[1:], p)
    weights[1:] = place.unit_volume() * float(p) ** (-leaf) * np.power(float(p), top - v)
    weights[0] = _abs_moment_ball(place, leaf)
    total = np.sum(weights * values * mirrored)
    return float((0.5 * place.R * total).real)


def action_momentum_tree(place: Place, phi: BruhatFunction) -> float:
    """Same quantity from the canonical transform (slower; used as a check)."""
    _require_real(phi)
    if phi.is_zero:
        return 0.0
    ft = phi.fourier()
    prod = ft.pointwise(ft.reflect())
    total = 0j
    for ball, a in prod.terms:
        if ball.contains_zero():
            total += a * _abs_moment_ball(place, ball.n)
        else:
            v = valuation(ball.center, place.p)
            total += a * float(place.p) ** (-v) * prod.ball_volume(ball.n)
    return float((0.5 * place.R * total).real)


def position_constant(place: Place) -> float:
    q, d = place.p, place.delta
    return q * (q - 1) * q**d / (4 * (q + 1) * math.log(q))


def partition_with_zeros(phi: BruhatFunction, top: int | None = None):
    """Balls of phi together with the maximal zero-valued balls that fill the
    enclosing ball p^top Z_p; returns (top, [(Ball, value)])."""
    p = phi.p
    if top is None:
        top = min(0, *(b.n for b, _ in phi.terms),
                  *(valuation(b.center, p) for b, _ in phi.terms if b.center != 0))
    keys = {(b.n, b.center): a for b, a in phi.terms}
    out = []

    def region(n, c, inside):
        if (n, c) in keys:
            out.append((Ball(n, c), keys[(n, c)]))
            return
        if not inside:
            out.append((Ball(n, c), 0j))
            return
        step = p_power(p, n)
        groups = {}
        for key in inside:
            groups.setdefault(reduce_mod(key[1], p, n + 1), []).append(key)
        for k in range(p):
            cc = c + k * step
            region(n + 1, cc, groups.get(cc, []))

    region(top, Fraction(0), list(keys))
    return top, out


def action_position(place: Place, phi: BruhatFunction) -> float:
    _require_real(phi)
    if phi.is_zero:
        return 0.0
    p = place.p
    top, parts = partition_with_zeros(phi)
    vals = np.array([a.real for _, a in parts])
    vols = np.array([phi.ball_volume(b.n) for b, _ in parts])
    centers = [b.center for b, _ in parts]
    n = len(parts)
    # |c_i - c_j| for distinct disjoint balls is the distance between the balls
    dist2 = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = valuation(centers[i] - centers[j], p)
            d = float(p) ** (-2 * v)
            dist2[i, j] = dist2[j, i] = d
    diff2 = (vals[:, None] - vals[None, :]) ** 2
    inner = diff2 * np.outer(vols, vols) / dist2
    np.fill_diagonal(inner, 0.0)
    # y outside U = p^top Z_p: |x - y| = |y| for every x in U
    outside = place.unit_volume() * float(p) ** (top - 1)
    total = inner.sum() + 2.0 * float(np.sum(vals**2 * vols)) * outside
    return position_constant(place) * float(total)


def action_equality_check(place: Place, phi: BruhatFunction) -> ActionValue:
    return ActionValue(action_momentum(place, phi), action_position(place, phi), place.label())


def refine(phi: BruhatFunction, extra: int) -> list:
    """Raw term list with every ball split ``extra`` levels deeper."""
    p = phi.p
    out = []
    for b, a in phi.terms:
        step = p_power(p, b.n)
        for k in range(p**extra):
            out.append((Ball(b.n + extra, b.center + k * step), a))
    return out


def random_bruhat(place: Place, rng: random.Random, n_terms: int = 5,
                  val_range=(-3, 3), radius_range=(-3, 3)) -> BruhatFunction:
    """Seeded random real Bruhat function: centers of valuation in val_range,
    radius exponents in radius_range, rational coefficients in [-2, 2]."""
    p = place.p
    terms = []
    for _ in range(n_terms):
        n = rng.randint(*radius_range)
        v = rng.randint(*val_range)
        if v >= n:
            center = Fraction(0)
        else:
            digits = [rng.randrange(1, p)] + [rng.randrange(p) for _ in range(n - v - 1)]
            center = sum((Fraction(d) * p_power(p, v + i) for i, d in enumerate(digits)), Fraction(0))
        coeff = Fraction(rng.randint(-8, 8), 4)
        if coeff == 0:
            coeff = Fraction(1, 4)
        terms.append((float(coeff), center, n))
    return BruhatFunction.from_terms(place, terms)
