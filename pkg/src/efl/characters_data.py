"""Dirichlet characters with exact root-of-unity values.

A value chi(a) = exp(2 pi i r) is stored as the rational turn ``r`` in
[0, 1), so multiplicativity, orthogonality and conductor searches are exact.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterable, Iterator


class CharacterError(ValueError):
    pass


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def multiplicative_order(a: int, m: int) -> int:
    if m == 1:
        return 1
    if math.gcd(a, m) != 1:
        raise CharacterError(f"{a} is not a unit modulo {m}")
    k, x = 1, a % m
    while x != 1:
        x = (x * a) % m
        k += 1
    return k


def _least_primitive_root(p: int, k: int) -> int:
    m = p**k
    order = euler_phi(m)
    for g in range(2, m):
        if math.gcd(g, p) == 1 and multiplicative_order(g, m) == order:
            return g
    raise CharacterError(f"no primitive root modulo {m}")  # pragma: no cover


def _prime_power_generators(p: int, k: int) -> list[int]:
    """Standard generators of (Z/p^k)^x, as residues mod p^k."""
    m = p**k
    if p == 2:
        if k == 1:
            return []
        if k == 2:
            return [3]
        return [m - 1, 5]
    return [_least_primitive_root(p, k)]


def _crt_lift(residue: int, q: int, m: int) -> int:
    """Unique x mod m with x = residue mod q and x = 1 mod m/q."""
    rest = m // q
    if rest == 1:
        return residue % m
    # x = residue + q*t, want = 1 mod rest
    t = ((1 - residue) * pow(q, -1, rest)) % rest
    return (residue + q * t) % m


def standard_generators(m: int) -> list[int]:
    """Generators of (Z/m)^x in canonical order, lifted to residues mod m.

    Prime powers in increasing order; least primitive root for odd p^k and
    {-1, 5} for 2^k with k >= 3.
    """
    gens = []
    for p, k in sorted(factorize(m).items()):
        q = p**k
        gens += [_crt_lift(g, q, m) for g in _prime_power_generators(p, k)]
    return gens


@dataclass(frozen=True)
class DirichletCharacter:
    """Dirichlet character mod ``modulus``; ``turns[a]`` is None when gcd(a, m) > 1."""

    modulus: int
    turns: tuple

    def __post_init__(self):
        if len(self.turns) != self.modulus:
            raise CharacterError("value table must have one entry per residue")

    def __call__(self, a: int) -> complex:
        r = self.turns[a % self.modulus]
        if r is None:
            return 0j
        return cmath.exp(2j * math.pi * float(r))

    def turn(self, a: int) -> Fraction | None:
        return self.turns[a % self.modulus]

    @property
    def is_trivial(self) -> bool:
        return all(r in (None, 0) for r in self.turns)

    @property
    def parity(self) -> int:
        """0 if chi(-1) = 1 (even), 1 if chi(-1) = -1 (odd)."""
        r = self.turns[(self.modulus - 1) % self.modulus]
        if r is None:  # modulus 1 or 2
            return 0
        return 0 if r == 0 else 1

    @property
    def is_real(self) -> bool:
        return all(r is None or r in (0, Fraction(1, 2)) for r in self.turns)

    @property
    def conductor(self) -> int:
        return conductor_of(self)

    @property
    def primitive(self) -> bool:
        return self.conductor == self.modulus

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.modulus, tuple(None if r is None else (-r) % 1 for r in self.turns)
        )

    def values(self) -> list[complex]:
        return [self(a) for a in range(self.modulus)]

    def label(self) -> str:
        if self.modulus == 1:
            return "trivial"
        gens = standard_generators(self.modulus)
        parts = [f"mod:{self.modulus}"]
        for g in gens:
            r = self.turns[g]
            order = multiplicative_order(g, self.modulus)
            parts += [f"gen:{g}", f"exp:{int(r * order)}"]
        return ":".join(parts)


def trivial_character(modulus: int = 1) -> DirichletCharacter:
    return DirichletCharacter(
        modulus,
        tuple(Fraction(0) if math.gcd(a, modulus) == 1 else None for a in range(modulus)),
    )


@dataclass(frozen=True)
class CharacterSpec:
    """Images of generators: chi(g) = exp(2 pi i num/den)."""

    modulus: int
    images: tuple  # of (g, num, den)

    @classmethod
    def from_json(cls, data: dict) -> "CharacterSpec":
        return cls(
            int(data["modulus"]),
            tuple((int(d["g"]), int(d["num"]), int(d["den"])) for d in data["generators"]),
        )

    def to_json(self) -> dict:
        return {
            "modulus": self.modulus,
            "generators": [{"g": g, "num": n, "den": d} for g, n, d in self.images],
        }


def build_character(spec: CharacterSpec) -> DirichletCharacter:
    """Full value table from generator images.

    The images are propagated over the subgroup they generate; a conflict
    (two words for the same residue with different values) or a generating
    set that misses part of (Z/m)^x raises :class:`CharacterError`.
    """
    m = spec.modulus
    if m < 1:
        raise CharacterError("modulus must be positive")
    if m == 1:
        return trivial_character(1)
    table: dict[int, Fraction] = {1 % m: Fraction(0)}
    gens = []
    for g, num, den in spec.images:
        if den <= 0:
            raise CharacterError("exponent denominator must be positive")
        if math.gcd(g, m) != 1:
            raise CharacterError(f"generator {g} is not a unit modulo {m}")
        gens.append((g % m, Fraction(num, den) % 1))
    frontier = [1 % m]
    while frontier:
        nxt = []
        for a in frontier:
            for g, r in gens:
                b = (a * g) % m
                val = (table[a] + r) % 1
                if b in table:
                    if table[b] != val:
                        raise CharacterError(
                            f"inconsistent generator exponents: residue {b} gets "
                            f"turns {table[b]} and {val}"
                        )
                else:
                    table[b] = val
                    nxt.append(b)
        frontier = nxt
    units = [a for a in range(m) if math.gcd(a, m) == 1]
    if len(table) != len(units):
        raise CharacterError(
            f"generators span {len(table)} of {len(units)} units modulo {m}"
        )
    return DirichletCharacter(m, tuple(table.get(a) for a in range(m)))


def character_from_label(label: str) -> DirichletCharacter:
    """Parse ``trivial`` or ``mod:M:gen:G:exp:E[:gen:G2:exp:E2...]``.

    Each exponent E is taken over the multiplicative order of its generator:
    chi(G) = exp(2 pi i E / ord(G)).
    """
    label = label.strip()
    if label == "trivial":
        return trivial_character(1)
    parts = label.split(":")
    if len(parts) < 2 or parts[0] != "mod":
        raise CharacterError(f"cannot parse character {label!r}")
    m = int(parts[1])
    rest = parts[2:]
    if len(rest) % 4:
        raise CharacterError(f"cannot parse character {label!r}")
    images = []
    for i in range(0, len(rest), 4):
        if rest[i] != "gen" or rest[i + 2] != "exp":
            raise CharacterError(f"cannot parse character {label!r}")
        g, e = int(rest[i + 1]), int(rest[i + 3])
        images.append((g, e, multiplicative_order(g, m)))
    return build_character(CharacterSpec(m, tuple(images)))


def enumerate_characters(m: int) -> Iterator[DirichletCharacter]:
    """All characters mod m, via exponents on the standard generators."""
    gens = standard_generators(m)
    orders = [multiplicative_order(g, m) for g in gens]
    for exps in product(*(range(o) for o in orders)):
        yield build_character(
            CharacterSpec(m, tuple((g, e, o) for g, e, o in zip(gens, exps, orders)))
        )


def primitive_characters(m: int) -> list[DirichletCharacter]:
    return [chi for chi in enumerate_characters(m) if chi.primitive]


def conductor_of(chi: DirichletCharacter) -> int:
    """Smallest d | m such that chi(a) = 1 whenever a = 1 mod d."""
    m = chi.modulus
    for d in sorted(d for d in range(1, m + 1) if m % d == 0):
        if all(
            chi.turns[a] == 0
            for a in range(1, m, d) if math.gcd(a, m) == 1
        ):
            return d
    return m  # pragma: no cover


def prime_component(chi: DirichletCharacter, p: int) -> DirichletCharacter:
    """The p-part chi_(p) mod p^k (p^k || m) in the CRT factorization."""
    m = chi.modulus
    k = factorize(m).get(p, 0)
    q = p**k
    if q == 1:
        return trivial_character(1)
    return DirichletCharacter(
        q,
        tuple(
            chi.turns[_crt_lift(a, q, m)] if a % p else None for a in range(q)
        ),
    )


def orthogonality_sum(chi: DirichletCharacter, psi: DirichletCharacter) -> complex:
    if chi.modulus != psi.modulus:
        raise CharacterError("characters must share a modulus")
    total = 0j
    for a in range(chi.modulus):
        r, s = chi.turns[a], psi.turns[a]
        if r is not None:
            total += cmath.exp(2j * math.pi * float((r - s) % 1))
    return total


def load_character(path) -> DirichletCharacter:
    with open(path) as fh:
        return build_character(CharacterSpec.from_json(json.load(fh)))


def character_product(chars: Iterable[DirichletCharacter]) -> DirichletCharacter:
    chars = list(chars)
    m = reduce(lambda a, b: a * b // math.gcd(a, b), (c.modulus for c in chars), 1)
    turns = []
    for a in range(m):
        vals = [c.turns[a % c.modulus] for c in chars]
        turns.append(None if any(v is None for v in vals) or math.gcd(a, m) != 1
                     else sum(vals, Fraction(0)) % 1)
    return DirichletCharacter(m, tuple(turns))
