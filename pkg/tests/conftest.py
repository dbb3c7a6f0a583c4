import random
from fractions import Fraction

from hypothesis import strategies as st

from efl.padic import BruhatFunction, Place
from efl.zabrodin_action import random_bruhat


def frac_part(x: Fraction, p: int) -> Fraction:
    """p-adic fractional part {x}_p of a rational."""
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    k = 0
    while den % p == 0:
        den //= p
        k += 1
    if k == 0:
        return Fraction(0)
    mod = p**k
    return Fraction((num * pow(den, -1, mod)) % mod, mod)


@st.composite
def bruhat_functions(draw, primes=(2, 3, 5), n_terms=(1, 5), real=True, delta=0):
    p = draw(st.sampled_from(primes))
    seed = draw(st.integers(0, 10**9))
    n = draw(st.integers(*n_terms))
    phi = random_bruhat(Place.finite(p, delta), random.Random(seed), n_terms=n)
    if not real:
        phi = phi + random_bruhat(Place.finite(p, delta), random.Random(seed + 1), n_terms=n).scale(1j)
    return phi


def sample_points(p: int, rng: random.Random, count: int = 30):
    pts = [Fraction(0)]
    for _ in range(count):
        v = rng.randint(-4, 4)
        u = rng.randint(1, p**6)
        pts.append(Fraction(u) * Fraction(p) ** v)
    return pts


def unit_ball(p, delta=0):
    return BruhatFunction.unit_ball(Place.finite(p, delta))


def random_cuspidal(p, rng, n_terms=4):
    """Balls around units p^v u, with the last coefficient fixed so the integral vanishes."""
    place = Place.finite(p)
    terms = []
    for _ in range(n_terms):
        v = rng.randint(-2, 2)
        u = rng.choice([x for x in range(1, p * p) if x % p])
        c = Fraction(u) * Fraction(p) ** v
        terms.append((rng.uniform(-2, 2), c, v + rng.randint(1, 3)))
    phi = BruhatFunction.from_terms(place, terms)
    c = Fraction(p + 1) * Fraction(p) ** 1
    fix = BruhatFunction.from_terms(place, [(1.0, c, 3)])
    phi = phi + fix.scale(-phi.integral() / fix.integral())
    return phi
