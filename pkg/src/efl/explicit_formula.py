"""Global assembly over Q: the zero side Z from a zero table and the pole
terms, the prime side W = sum_v W_v, and the verification report.

Sign convention: poles and zeros sit on the same side,

    Z = f^(0) + f^(1) - sum_rho f^(rho)      (pole terms only for trivial chi)
      = sum_p W_p + W_R.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .characters_data import DirichletCharacter, factorize, is_prime, trivial_character
from .kernel import QuadratureConfig, log_gamma
from .log_fourier import DEFAULT_TAG
from .padic import Place, localize_dirichlet
from .test_functions import INDICATOR, TestFunction, mellin, mellin_derivative
from .weil_local import IdeleLocalComponent, k_shift_term, weil_term_arch, weil_term_finite

EF_CONFIG = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-12)
ORDINATE_PRECISION = 1e-9


class ZeroTableError(ValueError):
    pass


class ExplicitFormulaError(ValueError):
    pass


@dataclass(frozen=True)
class ZeroTable:
    """Positive ordinates gamma_k (zeros at 1/2 +- i gamma_k), ascending,
    with multiplicities from repeated entries."""

    ordinates: tuple = ()
    multiplicities: tuple = ()
    label: str = ""
    provenance: str = ""

    def __post_init__(self):
        if not self.multiplicities:
            object.__setattr__(self, "multiplicities", tuple(1 for _ in self.ordinates))
        if len(self.multiplicities) != len(self.ordinates):
            raise ZeroTableError("one multiplicity per ordinate")
        prev = 0.0
        for g in self.ordinates:
            if not g > prev:
                raise ZeroTableError("ordinates must be positive and strictly increasing")
            prev = g

    def __len__(self) -> int:
        return len(self.ordinates)

    @property
    def max_height(self) -> float:
        return self.ordinates[-1] if self.ordinates else 0.0

    @classmethod
    def from_values(cls, values: Sequence[float], label: str = "", provenance: str = "") -> "ZeroTable":
        ords, mults = [], []
        for v in values:
            v = float(v)
            if ords and v == ords[-1]:
                mults[-1] += 1
            else:
                ords.append(v)
                mults.append(1)
        return cls(tuple(ords), tuple(mults), label, provenance)


def load_zeros(path, label: str | None = None) -> ZeroTable:
    """Text file: '#' comments, positive decimal ordinates in ascending order,
    separated by newlines, commas or whitespace.  Repeated values add
    multiplicity."""
    path = Path(path)
    values: list[float] = []
    notes: list[str] = []
    prev = 0.0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line.startswith("#"):
                notes.append(line.lstrip("#").strip())
                continue
            line = line.split("#", 1)[0]
            for tok in re.split(r"[,\s]+", line):
                if not tok:
                    continue
                try:
                    v = float(tok)
                except ValueError:
                    raise ZeroTableError(f"{path}:{lineno}: cannot parse {tok!r}") from None
                if not math.isfinite(v) or v <= 0:
                    raise ZeroTableError(f"{path}:{lineno}: ordinate {tok} is not positive")
                if v < prev:
                    raise ZeroTableError(
                        f"{path}:{lineno}: ordinate {tok} is smaller than the previous one ({prev})"
                    )
                prev = v
                values.append(v)
    return ZeroTable.from_values(values, label or path.stem, " ".join(notes))


# ---------------------------------------------------------------------------
# characters


def _as_character(chi) -> DirichletCharacter:
    if chi is None or chi == "trivial":
        return trivial_character(1)
    if not isinstance(chi, DirichletCharacter):
        raise TypeError("expected a DirichletCharacter or 'trivial'")
    if not chi.primitive:
        raise ExplicitFormulaError("character must be primitive")
    return chi


def _check_test_function(f: TestFunction):
    if f.tag == INDICATOR:
        raise ExplicitFormulaError(
            "raw indicators are not admissible test functions for the explicit formula"
        )


# ---------------------------------------------------------------------------
# zero side


@dataclass
class ZeroSum:
    value: complex
    poles: complex
    increments: np.ndarray  # |terms| per zero, multiplicity included
    zeros_used: int
    ordinates: np.ndarray
    warnings: list = field(default_factory=list)


def _zero_sum(f: TestFunction, chi: DirichletCharacter, zeros: ZeroTable, max_zeros: int,
              cfg: QuadratureConfig) -> ZeroSum:
    warnings = []
    if max_zeros < 0:
        raise ExplicitFormulaError("max_zeros must be >= 0")
    if max_zeros > len(zeros):
        warnings.append(f"max_zeros={max_zeros} exceeds the table length {len(zeros)}; clamped")
        max_zeros = len(zeros)
    gam = np.array(zeros.ordinates[:max_zeros], dtype=float)
    mult = np.array(zeros.multiplicities[:max_zeros], dtype=float)
    poles = 0j
    if chi.modulus == 1:
        pv = mellin(f, np.array([0.0, 1.0]), cfg)
        poles = complex(pv[0] + pv[1])
    if max_zeros:
        up = mellin(f, 0.5 + 1j * gam, cfg)
        down = mellin(f, 0.5 - 1j * gam, cfg)
        terms = mult * (up + down)
        incr = mult * (np.abs(up) + np.abs(down))
    else:
        terms = np.zeros(0, dtype=complex)
        incr = np.zeros(0)
    total = poles - complex(np.sum(terms))
    return ZeroSum(total, poles, incr, max_zeros, gam, warnings)


def zero_side(f: TestFunction, chi, zeros: ZeroTable, max_zeros: int,
              cfg: QuadratureConfig = EF_CONFIG) -> complex:
    """f^(0) + f^(1) (trivial chi) - sum over the first max_zeros table
    entries of f^(1/2 + i g) + f^(1/2 - i g)."""
    chi = _as_character(chi)
    return _zero_sum(f, chi, zeros, max_zeros, cfg).value


# ---------------------------------------------------------------------------
# prime side


def contributing_primes(f: TestFunction, chi) -> list[int]:
    """Primes p <= max(b, 1/a), plus the primes dividing the modulus."""
    chi = _as_character(chi)
    a, b = f.support
    cutoff = max(b, 1.0 / a)
    primes = [p for p in range(2, int(math.floor(cutoff + 1e-12)) + 1) if is_prime(p)]
    return sorted(set(primes) | set(factorize(chi.modulus)))


def local_component(f: TestFunction, chi, place: Place) -> IdeleLocalComponent:
    chi = _as_character(chi)
    return IdeleLocalComponent(place, f, localize_dirichlet(chi, place))


def prime_side_terms(f: TestFunction, chi, cfg: QuadratureConfig = EF_CONFIG,
                     tag: str | None = None) -> dict:
    """Local terms keyed by place label, in place order (primes, then real)."""
    chi = _as_character(chi)
    out = {}
    for p in contributing_primes(f, chi):
        place = Place.finite(p)
        out[place.label()] = weil_term_finite(local_component(f, chi, place))
    real = Place.real()
    out[real.label()] = weil_term_arch(local_component(f, chi, real), tag or DEFAULT_TAG["real"], cfg)
    return out


def prime_side(f: TestFunction, chi, cfg: QuadratureConfig = EF_CONFIG) -> complex:
    terms = prime_side_terms(f, chi, cfg)
    total = 0j
    for v in terms.values():
        total += v
    return total


def k_shifted_terms(f: TestFunction, chi, k, cfg: QuadratureConfig = EF_CONFIG) -> dict:
    """(G_v * F_v^(k))(k) at every place that can contribute."""
    from fractions import Fraction

    chi = _as_character(chi)
    k = Fraction(k)
    primes = set(contributing_primes(f, chi))
    primes |= set(factorize(abs(k.numerator))) | set(factorize(k.denominator))
    out = {}
    for p in sorted(primes):
        place = Place.finite(p)
        out[place.label()] = k_shift_term(local_component(f, chi, place), k)
    real = Place.real()
    out[real.label()] = k_shift_term(local_component(f, chi, real), float(k), None, cfg)
    return out


def log_abs_exponents(k) -> dict:
    """log|k|_v as an exact integer combination {p: e} of log p, per place."""
    from fractions import Fraction

    k = Fraction(k)
    if k == 0:
        raise ValueError("k must be nonzero")
    num, den = factorize(abs(k.numerator)), factorize(k.denominator)
    out = {"real": {**num, **{p: -e for p, e in den.items()}}}
    for p, e in num.items():
        out[f"p:{p}"] = {p: -e}
    for p, e in den.items():
        out[f"p:{p}"] = {p: e}
    return out


def log_abs_over_places(k) -> dict:
    """Numeric log|k|_v at every place where it is nonzero (plus the real place)."""
    return {v: sum(e * math.log(p) for p, e in comb.items())
            for v, comb in log_abs_exponents(k).items()}


def product_formula_exact(k) -> bool:
    """sum_v log|k|_v = 0, checked on the integer coefficients of log p."""
    total: dict = {}
    for comb in log_abs_exponents(k).values():
        for p, e in comb.items():
            total[p] = total.get(p, 0) + e
    return all(e == 0 for e in total.values())


# ---------------------------------------------------------------------------
# report


@dataclass
class EFReport:
    zero_side: float
    prime_side: float
    residual: float
    tail_bound: float
    zeros_used: int
    places_used: list
    zero_side_imag: float = 0.0
    prime_side_imag: float = 0.0
    tail_estimate: float = 0.0
    numerical_floor: float = 0.0
    sensitivity: float = 0.0
    local_terms: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tail_bound

    def to_json(self) -> dict:
        d = {_camel(k): v for k, v in asdict(self).items()}
        d["passed"] = self.passed
        return d

    @classmethod
    def from_json(cls, data: dict) -> "EFReport":
        data = {_snake(k): v for k, v in data.items() if k != "passed"}
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(w.title() for w in rest)


def _snake(name: str) -> str:
    return re.sub(r"([A-Z])", lambda m: "_" + m.group(1).lower(), name)


def tail_estimate(increments: np.ndarray, window: int = 10) -> float:
    """Extrapolated size of the neglected zero terms.

    The increments are replaced by their running maximum from the right (an
    envelope that ignores oscillation), a geometric ratio r per zero is
    fitted over the last ``window`` entries, and the remaining series is
    summed as e_K r / (1 - r).  With a ratio >= 1 the tail is unbounded.
    """
    inc = np.asarray(increments, dtype=float)
    if inc.size < 3:
        return math.inf if inc.size else 0.0
    env = np.maximum.accumulate(inc[::-1])[::-1]
    w = min(window, inc.size - 1)
    last, first = env[-1], env[-1 - w]
    if last <= 0:
        return 0.0
    r = (last / first) ** (1.0 / w) if first > 0 else 0.0
    if r >= 1.0:
        return math.inf
    return float(last * r / (1.0 - r))


def verify_explicit_formula(f: TestFunction, chi, zeros: ZeroTable, max_zeros: int,
                            cfg: QuadratureConfig = EF_CONFIG) -> EFReport:
    chi = _as_character(chi)
    _check_test_function(f)
    if not chi.is_real:
        raise ExplicitFormulaError(
            "zero tables hold positive ordinates only, which describes the zeros of "
            "L(s, chi) only for real chi; complex characters are not supported"
        )
    zs = _zero_sum(f, chi, zeros, max_zeros, cfg)
    local = prime_side_terms(f, chi, cfg)
    W = sum(local.values(), 0j)
    Z = zs.value
    residual = abs(Z - W)
    n = zs.zeros_used
    if n:
        tail = tail_estimate(zs.increments) if n >= 3 else 0.0
        deriv = mellin_derivative(f, 0.5 + 1j * zs.ordinates, cfg)
        sens = float(2 * np.sum(np.abs(deriv))) * ORDINATE_PRECISION
    else:
        tail, sens = 0.0, 0.0
    if n < 3:
        zs.warnings.append("fewer than 3 zeros: the tail of the zero sum cannot be estimated")
    floor = (2 * n + 2 + len(local)) * max(cfg.abs_tol, cfg.rel_tol * max(1.0, abs(W)))
    bound = tail + floor + sens
    return EFReport(
        zero_side=float(Z.real),
        prime_side=float(W.real),
        residual=float(residual),
        tail_bound=float(bound),
        zeros_used=n,
        places_used=list(local),
        zero_side_imag=float(Z.imag),
        prime_side_imag=float(W.imag),
        tail_estimate=float(tail),
        numerical_floor=float(floor),
        sensitivity=float(sens),
        local_terms={k: float(v.real) for k, v in local.items()},
        warnings=zs.warnings,
        config={
            "test_function": f.description,
            "character": chi.label(),
            "zero_table": zeros.label,
            "max_zeros": max_zeros,
            "abs_tol": cfg.abs_tol,
            "rel_tol": cfg.rel_tol,
        },
    )


# ---------------------------------------------------------------------------
# zeros of L(s, chi mod 4), for self-contained smoke tests

_BERNOULLI_2K = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
                 -3617 / 510, 43867 / 798, -174611 / 330]


def hurwitz_zeta(s: complex, a: float, N: int | None = None) -> complex:
    """zeta(s, a) by Euler-Maclaurin summation (Re s > 0, s != 1)."""
    s = complex(s)
    if N is None:
        N = int(abs(s.imag)) + 30
    n = np.arange(N) + a
    head = complex(np.sum(np.exp(-s * np.log(n))))
    x = N + a
    total = head + x ** (1 - s) / (s - 1) + 0.5 * x ** (-s)
    poch = s  # s (s+1) ... (s + 2k - 2)
    fact = 2.0  # (2k)!
    for k, b in enumerate(_BERNOULLI_2K, 1):
        total += b / fact * poch * x ** (-s - 2 * k + 1)
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
    return total


def l_chi4(s: complex) -> complex:
    """L(s, chi_4) = 4^-s (zeta(s, 1/4) - zeta(s, 3/4))."""
    return 4.0 ** (-complex(s)) * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75))


def hardy_z_chi4(t: float) -> float:
    """Real function of t whose zeros are the zeros of L(1/2 + it, chi_4):
    the completed L-function (4/pi)^((s+1)/2) Gamma((s+1)/2) L(s) divided
    by the modulus of its gamma factor."""
    s = 0.5 + 1j * t
    w = (s + 1) / 2
    phase = (w * math.log(4 / math.pi) + log_gamma(w)).imag
    return float((complex(math.cos(phase), math.sin(phase)) * l_chi4(s)).real)


def chi4_zeros(height: float, step: float = 0.05) -> ZeroTable:
    """Ordinates in (0, height] found by sign changes of hardy_z_chi4."""
    ts = np.arange(step, height + step, step)
    vals = np.array([hardy_z_chi4(t) for t in ts])
    roots = []
    for i in range(len(ts) - 1):
        if vals[i] == 0:
            roots.append(ts[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(hardy_z_chi4, ts[i], ts[i + 1], xtol=1e-13, rtol=1e-15))
    return ZeroTable.from_values(
        roots, "L(s, chi_4)",
        f"sign changes of the completed L-function on the critical line, step {step}",
    )


# ---------------------------------------------------------------------------
# inversion lemma at the real place


def inversion_lemma(f: TestFunction, x: float, c: float = 0.5, height: float = 400.0,
                    cfg: QuadratureConfig = EF_CONFIG) -> tuple[complex, complex, float]:
    """Both sides of

        (1/2 pi i) int_{Re s = c} f^(s) |x|^(s-1) / Gamma_R(s) ds
            = int f(|y|) e^(2 pi i x y) dy = 2 int_0^inf f(y) cos(2 pi x y) dy

    for the trivial character; returns (line integral, inverse transform,
    truncation bound of the line integral)."""
    from .gamma_factors import gamma_factor
    from .kernel import integrate_adaptive, vertical_line_integral

    real = Place.real()
    ax = abs(x)

    def g(s):
        s = np.asarray(s, dtype=complex)
        gam = np.array([gamma_factor(real, None, z) for z in s])
        return mellin(f, s, cfg) * np.exp((s - 1) * math.log(ax)) / gam

    line = vertical_line_integral(g, c, cfg, height=height)
    a, b = f.support
    pts = [t for t in f.breakpoints if a < t < b]
    n = int(math.ceil(2 * ax * (b - a)))
    pts += list(np.linspace(a, b, n + 2)[1:-1]) if n > 0 else []
    rhs = 2 * integrate_adaptive(lambda y: f(y) * np.cos(2 * math.pi * x * y), a, b, cfg,
                                 points=sorted(set(pts)))
    return complex(line.value), complex(rhs), float(line.truncation_bound)
