"""Characters of Z_p^x and the abelian local factors L, epsilon, gamma.

Characters are normalized by chi(p) = 1, so a quasi-character chi_s is the
pair (chi restricted to units, z = q^(-s)).  All factors are returned as
RationalFunctionZ in z:

    L(s,chi)       = 1/(1-z) unramified, 1 otherwise
    eps(s,chi,psi) = G(chi,psi) z^e, G the Gauss sum over (Z/p^e)^x
    gamma          = eps * L(1-s, chi^{-1}) / L(s, chi)
    beta(n)        = gamma(s-(2n-1)/2) * prod_{r=1..n} gamma(2s-2n+2r, chi^2)

and the whole stack is cross-checked by a shell-sum Tate integral oracle
that never touches the closed forms.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .padic import psi_frac, unit_group, unit_order
from .ratfunc import RationalFunctionZ


class CharacterError(ValueError):
    pass


@dataclass(frozen=True)
class UnitCharacter:
    """Character of (Z/p^level)^x given by its exponent on the fixed generator."""

    p: int
    level: int
    exponent: int

    def __post_init__(self):
        order = unit_order(self.p, self.level)
        object.__setattr__(self, "exponent", self.exponent % order)

    @property
    def order_of_group(self) -> int:
        return unit_order(self.p, self.level)

    def value(self, u: int) -> complex:
        _, _, dlog = unit_group(self.p, self.level)
        k = dlog[u % self.p**self.level]
        n = self.order_of_group
        return cmath.exp(2j * cmath.pi * self.exponent * k / n)

    def value_table(self) -> dict:
        elements, _, dlog = unit_group(self.p, self.level)
        n = self.order_of_group
        return {u: cmath.exp(2j * cmath.pi * self.exponent * dlog[u] / n) for u in elements}

    @property
    def is_trivial(self) -> bool:
        return self.exponent == 0

    def inverse(self) -> "UnitCharacter":
        return UnitCharacter(self.p, self.level, -self.exponent)

    def square(self) -> "UnitCharacter":
        return UnitCharacter(self.p, self.level, 2 * self.exponent)

    def at_level(self, level: int) -> "UnitCharacter":
        """The same character seen on (Z/p^level)^x; level must be >= conductor."""
        if level == self.level:
            return self
        if level < conductor(self):
            raise CharacterError("cannot lower level below the conductor")
        # match values on the generator of the target group
        _, gen, _ = unit_group(self.p, level)
        target = UnitCharacter(self.p, level, 0)
        n_t = target.order_of_group
        want = self.value(gen)
        for j in range(n_t):
            cand = cmath.exp(2j * cmath.pi * j / n_t)
            if abs(cand - want) < 1e-9:
                return UnitCharacter(self.p, level, j)
        raise CharacterError("no consistent lift found")

    def value_minus_one(self) -> complex:
        return self.value(-1 % self.p**self.level)

    @classmethod
    def from_table(cls, p: int, level: int, table: dict, tol=1e-8) -> "UnitCharacter":
        """Build from an explicit value table, validating multiplicativity."""
        mod = p**level
        elements, gen, dlog = unit_group(p, level)
        for u in elements:
            for v in elements[: min(len(elements), 12)]:
                if abs(table[u] * table[v] - table[u * v % mod]) > tol:
                    raise CharacterError("value table is not multiplicative")
        n = unit_order(p, level)
        gval = table[gen]
        for j in range(n):
            if abs(cmath.exp(2j * cmath.pi * j / n) - gval) < tol:
                return cls(p, level, j)
        raise CharacterError("generator image is not a root of unity of the right order")


def characters(p: int, level: int):
    """All characters of (Z/p^level)^x."""
    return [UnitCharacter(p, level, j) for j in range(unit_order(p, level))]


@lru_cache(maxsize=None)
def conductor(chi: UnitCharacter) -> int:
    """Smallest e with chi trivial on 1 + p^e Z_p; e = 0 means unramified.

    With chi(p) = 1, e = 0 forces chi to be the trivial character, which is
    what makes eps = 1 and L = 1/(1-z) in the unramified case.
    """
    if chi.is_trivial:
        return 0
    p, N = chi.p, chi.level
    mod = p**N
    for e in range(1, N + 1):
        # trivial on 1 + p^e O iff trivial on all units congruent 1 mod p^e
        ok = all(
            abs(chi.value(1 + p**e * t) - 1.0) < 1e-9
            for t in range(p ** (N - e))
        )
        if ok:
            return e
    return N


@dataclass(frozen=True)
class QuasiCharacterSymbol:
    """chi_s = chi(ac(x)) z^{ord(x)} under the chi(p) = 1 convention."""

    unit_part: UnitCharacter

    def evaluate(self, ord_x: int, ac_x: int, z: complex) -> complex:
        return self.unit_part.value(ac_x) * z**ord_x


# ---------------------------------------------------------------- factors

def L_factor(chi: UnitCharacter) -> RationalFunctionZ:
    if conductor(chi) == 0:
        return RationalFunctionZ([1.0], [1.0, -1.0])
    return RationalFunctionZ.one()


def gauss_sum(chi: UnitCharacter, sign: int = 1) -> complex:
    """G = sum over u in (Z/p^e)^x of chi^{-1}(u) psi(u/p^e), e = conductor."""
    e = conductor(chi)
    if e == 0:
        return 1.0 + 0.0j
    p = chi.p
    chi_inv = chi.inverse()
    total = 0.0 + 0.0j
    for u in range(1, p**e):
        if u % p == 0:
            continue
        total += chi_inv.value(u) * psi_frac(p, u, e, sign)
    return total


def epsilon_factor(chi: UnitCharacter, sign: int = 1) -> RationalFunctionZ:
    """eps(s,chi,psi) = q^{e(1/2-s)} eps(1/2,chi,psi) = G(chi,psi) z^e."""
    e = conductor(chi)
    if e == 0:
        return RationalFunctionZ.one()
    return RationalFunctionZ.z_power(e) * gauss_sum(chi, sign)


def epsilon_half(chi: UnitCharacter, sign: int = 1) -> complex:
    """eps(1/2,chi,psi) = q^{-e/2} G(chi,psi); modulus 1 for unitary chi."""
    e = conductor(chi)
    return gauss_sum(chi, sign) * chi.p ** (-e / 2.0)


def gamma_factor(chi: UnitCharacter, sign: int = 1) -> RationalFunctionZ:
    """gamma(s,chi,psi) = eps(s,chi,psi) L(1-s,chi^{-1}) / L(s,chi)."""
    q = chi.p
    eps = epsilon_factor(chi, sign)
    l_s = L_factor(chi)
    # L(1-s, chi^{-1}): substitute z -> q^{-1}/z in L(s, chi^{-1})
    l_dual = L_factor(chi.inverse()).substitute("scale", 1.0 / q).substitute("invert")
    return eps * l_dual / l_s


def gamma_factor_shifted(chi: UnitCharacter, shift: Fraction, sign: int = 1,
                         doubled: bool = False) -> RationalFunctionZ:
    """gamma(s + shift, chi, psi), or gamma(2s + shift, chi, psi) if doubled."""
    q = chi.p
    g = gamma_factor(chi, sign)
    g = g.substitute("scale", float(q) ** (-float(shift)))
    if doubled:
        g = g.substitute("square")
    return g


def beta_factor(n: int, chi: UnitCharacter, sign: int = 1) -> RationalFunctionZ:
    """beta_psi(chi_s) = gamma(s-(2n-1)/2, chi, psi) prod_r gamma(2s-2n+2r, chi^2, psi).

    The n = 0 case is the empty product: gamma(s + 1/2, chi, psi).
    """
    out = gamma_factor_shifted(chi, Fraction(-(2 * n - 1), 2), sign)
    chi2 = chi.square()
    for r in range(1, n + 1):
        out = out * gamma_factor_shifted(chi2, Fraction(-2 * n + 2 * r), sign, doubled=True)
    return out


def beta_factor_inverse_argument(n: int, chi: UnitCharacter, sign: int = 1) -> RationalFunctionZ:
    """beta_psi(chi_s^{-1}) as a rational function of z = q^{-s}."""
    return beta_factor(n, chi.inverse(), sign).substitute("invert")


def ab_factors(m: int, chi: UnitCharacter):
    """(a_m, b_m): products of abelian L-factors along the Siegel orbit.

    a_m(s,chi) = L(s-(m-1)/2, chi) prod_{r=1..floor(m/2)} L(2s-m+2r, chi^2)
    b_m(s,chi) = L(s+(m+1)/2, chi) prod_{r=1..floor(m/2)} L(2s+2r-1, chi^2)
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    q = float(chi.p)
    chi2 = chi.square()

    def l_shift(character, shift, doubled=False):
        f = L_factor(character).substitute("scale", q ** (-float(shift)))
        return f.substitute("square") if doubled else f

    a = l_shift(chi, Fraction(-(m - 1), 2))
    b = l_shift(chi, Fraction(m + 1, 2))
    for r in range(1, m // 2 + 1):
        a = a * l_shift(chi2, Fraction(-m + 2 * r), doubled=True)
        b = b * l_shift(chi2, Fraction(2 * r - 1), doubled=True)
    return a, b


def twist_by_pi_value(R: RationalFunctionZ, chi_at_pi: complex) -> RationalFunctionZ:
    """Recover a general chi(p) from the chi(p)=1 normal form: z -> chi(p) z."""
    return R.substitute("scale", chi_at_pi)


# ---------------------------------------------------------------- oracle

class OracleError(RuntimeError):
    pass


def _shell_zeta(s: complex, chi: UnitCharacter, f, k_lo: int, k_hi: int) -> complex:
    """sum_k z^k avg_u f(p^k u) chi(u) over shells k_lo..k_hi, level = chi.level."""
    p, N = chi.p, chi.level
    z = complex(p) ** (-s)
    elements, _, _ = unit_group(p, N)
    table = chi.value_table()
    total = 0.0 + 0.0j
    for k in range(k_lo, k_hi + 1):
        sh = sum(f(k, u) * table[u] for u in elements) / len(elements)
        total += z**k * sh
    return total


def tate_gamma_oracle(chi: UnitCharacter, s: complex, sign: int = 1,
                      truncation: int = 48, tol: float = 1e-6) -> complex:
    """Z(1-s, f^, chi^{-1}) / Z(s, f, chi) by brute shell sums.

    Uses f = ch(Z_p) and f = ch(1 + p^N Z_p) with closed-form Fourier
    transforms; the two ratios must agree (functional-equation uniqueness)
    and the truncation must have stabilized, else OracleError.
    """
    if not 0.0 < complex(s).real < 1.0:
        raise OracleError("sample s outside the common convergence strip 0 < Re(s) < 1")
    p, N = chi.p, chi.level
    chi_inv = chi.inverse()

    def ch_O(k, u):
        return 1.0 if k >= 0 else 0.0

    # ch_O is self-dual for psi of conductor Z_p
    def ch_O_hat(k, u):
        return 1.0 if k >= 0 else 0.0

    def coset(u0):
        # ch of u0 (1 + p^N O); hat(y) = q^{-N} psi(u0 y) ch_{p^{-N} O}(y)
        def f(k, u):
            return 1.0 if (k == 0 and u % p**N == u0 % p**N) else 0.0

        def fhat(k, u):
            if k < -N:
                return 0.0
            if k >= 0:
                return p ** (-float(N))
            return p ** (-float(N)) * psi_frac(p, u0 * u, -k, sign)

        return f, fhat

    _, gen, _ = unit_group(p, N)
    if chi.is_trivial:
        pairs = ((ch_O, ch_O_hat), coset(1))
    else:
        # Z(s, ch_O, chi) = 0 for ramified chi; use two coset translates instead
        pairs = (coset(1), coset(gen))

    ratios = []
    for f, fhat in pairs:
        za1 = _shell_zeta(1 - s, chi_inv, fhat, -N, truncation)
        za2 = _shell_zeta(1 - s, chi_inv, fhat, -N, truncation + 6)
        zb = _shell_zeta(s, chi, f, -N, truncation + 6)
        if abs(za1 - za2) > tol * max(abs(za2), 1.0):
            raise OracleError(
                f"truncation not stabilized at K={truncation}: |delta|={abs(za1 - za2):.3g}")
        if abs(zb) < 1e-14:
            raise OracleError("denominator zeta integral vanished at this sample")
        ratios.append(za2 / zb)
    if abs(ratios[0] - ratios[1]) > tol * max(abs(ratios[0]), 1.0):
        raise OracleError(
            f"gamma ratio depends on the test function: {ratios[0]} vs {ratios[1]}")
    return ratios[0]
