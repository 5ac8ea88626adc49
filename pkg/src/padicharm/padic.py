"""Finite-precision model of the local field Q_p for odd p.

Elements are pairs (valuation, unit class mod p^N).  The additive character
psi has conductor Z_p: psi(x) = exp(2*pi*i*frac(x)) with frac the p-adic
fractional part.  Unit groups (Z/p^N)^x are cyclic for odd p; we fix the
smallest generator and ship discrete logarithms with the enumeration.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class PadicError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class LocalFieldConfig:
    p: int
    default_level: int = 2
    numeric_tolerance: float = 1e-9

    def __post_init__(self):
        if not _is_prime(self.p):
            raise PadicError(f"p = {self.p} is not prime")
        if self.p == 2:
            raise PadicError("p = 2 is not supported (odd residue characteristic required)")
        if self.default_level < 1:
            raise PadicError("default_level must be >= 1")

    @property
    def q(self) -> int:
        return self.p


def load_config(path) -> LocalFieldConfig:
    """Read a key=value config file with keys p, level, tolerance."""
    vals = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            vals[key.strip()] = val.strip()
    return LocalFieldConfig(
        p=int(vals.get("p", 3)),
        default_level=int(vals.get("level", 2)),
        numeric_tolerance=float(vals.get("tolerance", 1e-9)),
    )


@dataclass(frozen=True)
class PadicElement:
    """x = unit * p^valuation with unit known mod p^level."""

    p: int
    valuation: int
    unit: int
    level: int

    def __post_init__(self):
        if self.level < 1:
            raise PadicError("level must be >= 1")
        u = self.unit % self.p**self.level
        if u % self.p == 0:
            raise PadicError("unit part must be coprime to p")
        object.__setattr__(self, "unit", u)

    @classmethod
    def from_rational(cls, x, p: int, level: int) -> "PadicElement":
        x = Fraction(x)
        if x == 0:
            raise PadicError("valuation undefined: zero input")
        v = 0
        num, den = x.numerator, x.denominator
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = p**level
        unit = num * pow(den, -1, mod) % mod
        return cls(p=p, valuation=v, unit=unit, level=level)

    def __mul__(self, other: "PadicElement") -> "PadicElement":
        if self.p != other.p:
            raise PadicError("mixed primes")
        lvl = min(self.level, other.level)
        return PadicElement(self.p, self.valuation + other.valuation,
                            (self.unit * other.unit) % self.p**lvl, lvl)

    def abs_value(self) -> Fraction:
        return Fraction(1, self.p) ** self.valuation


def ord_abs_ac(x: PadicElement):
    """(ord(x), |x|, ac(x)) with ac(x) = x * p^{-ord(x)} mod p^level."""
    return x.valuation, x.abs_value(), x.unit


def psi_eval(x: PadicElement, sign: int = 1) -> complex:
    """Additive character of conductor Z_p: exp(sign * 2*pi*i * frac(x)).

    frac(x) is determined mod 1 by the unit class as long as
    valuation >= -level; deeper poles would need more digits.
    """
    if sign not in (1, -1):
        raise PadicError("sign must be +1 or -1")
    v = x.valuation
    if v >= 0:
        return 1.0 + 0.0j
    if -v > x.level:
        raise PadicError(
            f"insufficient precision: need level >= {-v}, have {x.level}")
    den = x.p ** (-v)
    num = x.unit % den
    return cmath.exp(sign * 2j * cmath.pi * num / den)


def psi_frac(p: int, num: int, den_pow: int, sign: int = 1) -> complex:
    """psi(num / p^den_pow) for integer num; den_pow >= 0."""
    if den_pow <= 0:
        return 1.0 + 0.0j
    den = p**den_pow
    return cmath.exp(sign * 2j * cmath.pi * (num % den) / den)


@lru_cache(maxsize=None)
def unit_group(p: int, level: int):
    """Enumeration of (Z/p^level)^x: (elements, generator, dlog table).

    The group is cyclic of order (p-1)p^(level-1) for odd p.  dlog maps a
    unit to its exponent with respect to the returned generator.
    """
    if level < 1:
        raise PadicError("level must be >= 1")
    if p == 2:
        raise PadicError("p = 2 unsupported")
    mod = p**level
    order = (p - 1) * p ** (level - 1)
    gen = None
    for g in range(2, mod):
        if g % p == 0:
            continue
        # g generates iff g^(order/ell) != 1 for prime ell | order
        ok = True
        for ell in _prime_factors(order):
            if pow(g, order // ell, mod) == 1:
                ok = False
                break
        if ok:
            gen = g
            break
    if gen is None:
        raise PadicError("no generator found (should not happen for odd p)")
    elements = []
    dlog = {}
    x = 1
    for k in range(order):
        elements.append(x)
        dlog[x] = k
        x = x * gen % mod
    return tuple(elements), gen, dlog


def _prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def unit_order(p: int, level: int) -> int:
    return (p - 1) * p ** (level - 1)


def coset_volume(p: int, level: int) -> Fraction:
    """d*t-volume of a coset of 1 + p^level Z_p inside Z_p^x (vol(Z_p^x)=1)."""
    return Fraction(1, unit_order(p, level))
