"""Shell-function model of smooth functions on F^x and its Mellin calculus.

An FxFunction holds finitely many shell values f(p^k u) (k in a window,
u running over unit cosets mod p^level) together with an asymptotic tail
for small |x|:

    plus  tail: a0(u) + sum_i ( ap_i(u) |x|^(i+1/2) + am_i(u) |x|^(i+1/2) (-1)^ord(x) )
    minus tail: a0(u) |x|^n + sum_i ( ap_i(u) |x|^i + am_i(u) |x|^i (-1)^ord(x) )

optionally times a global power |x|^power_shift.  The Mellin transform per
unit character is then a rational function of z whose poles sit at

    plus:  z in {1, +-q^(i+1/2)}        minus: z in {q^n, +-q^i}

and the whole dictionary FxFunction <-> MellinData is exact in both
directions (geometric summation one way, residues at z = 0 the other).

On top of that dictionary sit the kernel eta (residues of beta against
monomials), the Fourier operator on the plus space, principal-value
convolution, and the functional-equation / Paley-Wiener verifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .abelian import (UnitCharacter, beta_factor, beta_factor_inverse_argument,
                      conductor)
from .padic import unit_group, unit_order
from .ratfunc import RationalFunctionZ


class FxError(ValueError):
    pass


class StabilizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TailSpec:
    kind: str          # "compact" | "plus" | "minus"
    n: int = 0
    a0: tuple = ()     # complex per unit coset, in unit_group order
    ap: tuple = ()     # ap[i] is a tuple over cosets, i = 0..n-1
    am: tuple = ()

    @classmethod
    def compact(cls):
        return cls(kind="compact")


@dataclass(frozen=True)
class FxFunction:
    p: int
    level: int
    k_min: int
    k_tail: int
    values: dict = field(default_factory=dict)   # (k, u) -> complex, k_min <= k < k_tail
    tail: TailSpec = field(default_factory=TailSpec.compact)
    power_shift: Fraction = Fraction(0)

    @property
    def cosets(self):
        return unit_group(self.p, self.level)[0]

    def evaluate(self, k: int, u: int) -> complex:
        u = u % self.p**self.level
        if k < self.k_min:
            return 0.0 + 0.0j
        if k < self.k_tail or self.tail.kind == "compact":
            return complex(self.values.get((k, u), 0.0))
        return self._tail_value(k, u)

    def _tail_value(self, k: int, u: int) -> complex:
        q = float(self.p)
        idx = self.cosets.index(u)
        shift = q ** (-k * float(self.power_shift))
        t = self.tail
        if t.kind == "plus":
            out = t.a0[idx]
            for i in range(t.n):
                out = out + (t.ap[i][idx] + (-1) ** k * t.am[i][idx]) * q ** (-k * (i + 0.5))
            return shift * out
        if t.kind == "minus":
            out = t.a0[idx] * q ** (-k * t.n)
            for i in range(t.n):
                out = out + (t.ap[i][idx] + (-1) ** k * t.am[i][idx]) * q ** (-k * i)
            return shift * out
        raise FxError(f"unknown tail kind {t.kind}")

    def scale_by_power(self, c) -> "FxFunction":
        """Multiply by |x|^c (c rational, half-integers allowed)."""
        c = Fraction(c)
        q = float(self.p)
        vals = {(k, u): v * q ** (-k * float(c)) for (k, u), v in self.values.items()}
        return FxFunction(self.p, self.level, self.k_min, self.k_tail, vals,
                          self.tail, self.power_shift + c)

    def at_level(self, level: int) -> "FxFunction":
        """The same function seen at a finer invariance level."""
        if level == self.level:
            return self
        if level < self.level:
            raise FxError("cannot coarsen the level")
        fine = unit_group(self.p, level)[0]
        mod = self.p**self.level
        vals = {}
        for (k, u), v in self.values.items():
            for w in fine:
                if w % mod == u:
                    vals[(k, w)] = v
        t = self.tail
        if t.kind == "compact":
            tail = t
        else:
            coarse = self.cosets
            idx = {u: i for i, u in enumerate(coarse)}

            def lift(row):
                return tuple(row[idx[w % mod]] for w in fine)

            tail = TailSpec(t.kind, t.n, lift(t.a0),
                            tuple(lift(r) for r in t.ap),
                            tuple(lift(r) for r in t.am))
        return FxFunction(self.p, level, self.k_min, self.k_tail, vals, tail,
                          self.power_shift)

    def reflect(self) -> dict:
        """Pointwise values of f(x^{-1}) on the shells where f is known exactly.

        Only usable for compact tails; general reflection is done at call
        sites through evaluate().
        """
        if self.tail.kind != "compact":
            raise FxError("reflect() needs compact support")
        mod = self.p**self.level
        return {(-k, pow(u, -1, mod)): v for (k, u), v in self.values.items()}

    def __add__(self, other: "FxFunction") -> "FxFunction":
        if (self.p, self.level) != (other.p, other.level):
            raise FxError("incompatible levels")
        if self.tail.kind != "compact" or other.tail.kind != "compact":
            # general addition goes through Mellin data at call sites
            raise FxError("direct addition only for compact functions")
        k_min = min(self.k_min, other.k_min)
        k_tail = max(self.k_tail, other.k_tail)
        vals = {}
        for k in range(k_min, k_tail):
            for u in self.cosets:
                v = self.evaluate(k, u) + other.evaluate(k, u)
                if v != 0:
                    vals[(k, u)] = v
        return FxFunction(self.p, self.level, k_min, k_tail, vals, TailSpec.compact())

    def __mul__(self, c) -> "FxFunction":
        vals = {ku: v * c for ku, v in self.values.items()}
        t = self.tail
        if t.kind == "compact":
            tail = t
        else:
            tail = TailSpec(t.kind, t.n,
                            tuple(a * c for a in t.a0),
                            tuple(tuple(a * c for a in row) for row in t.ap),
                            tuple(tuple(a * c for a in row) for row in t.am))
        return FxFunction(self.p, self.level, self.k_min, self.k_tail, vals,
                          tail, self.power_shift)

    def to_json(self) -> dict:
        t = self.tail
        tail: dict = {"kind": t.kind, "n": t.n}
        if t.kind != "compact":
            tail["a0"] = [[v.real, v.imag] for v in t.a0]
            tail["ap"] = [[[v.real, v.imag] for v in row] for row in t.ap]
            tail["am"] = [[[v.real, v.imag] for v in row] for row in t.am]
        return {
            "p": self.p,
            "level": self.level,
            "k_min": self.k_min,
            "k_tail": self.k_tail,
            "power_shift": [self.power_shift.numerator, self.power_shift.denominator],
            "shells": [
                {"k": k, "coset": u, "re": complex(v).real, "im": complex(v).imag}
                for (k, u), v in sorted(self.values.items())
            ],
            "tail": tail,
        }

    @classmethod
    def from_json(cls, obj) -> "FxFunction":
        t = obj["tail"]
        if t["kind"] == "compact":
            tail = TailSpec.compact()
        else:
            tail = TailSpec(
                t["kind"], t["n"],
                tuple(complex(a, b) for a, b in t["a0"]),
                tuple(tuple(complex(a, b) for a, b in row) for row in t["ap"]),
                tuple(tuple(complex(a, b) for a, b in row) for row in t["am"]),
            )
        vals = {(s["k"], s["coset"]): complex(s["re"], s["im"]) for s in obj["shells"]}
        num, den = obj.get("power_shift", [0, 1])
        return cls(obj["p"], obj["level"], obj["k_min"], obj["k_tail"], vals, tail,
                   Fraction(num, den))


def indicator_coset(p: int, level: int, k: int, u: int, value=1.0) -> FxFunction:
    return FxFunction(p, level, k, k + 1, {(k, u % p**level): complex(value)},
                      TailSpec.compact())


def one_k(p: int, k: int, level: int | None = None) -> FxFunction:
    """Normalized indicator of 1 + p^k Z_p (d*-volume 1), at the given level >= k."""
    if k < 1:
        raise FxError("one_k needs k >= 1")
    level = k if level is None else level
    if level < k:
        raise FxError("level must be >= k")
    mod = p**level
    vals = {(0, u): complex(unit_order(p, k)) for u in unit_group(p, level)[0]
            if u % p**k == 1}
    return FxFunction(p, level, 0, 1, vals, TailSpec.compact())


def indicator_units(p: int, level: int) -> FxFunction:
    vals = {(0, u): 1.0 + 0.0j for u in unit_group(p, level)[0]}
    return FxFunction(p, level, 0, 1, vals, TailSpec.compact())


def indicator_integers(p: int, level: int) -> FxFunction:
    """ch(Z_p - 0) as an FxFunction: plus-class tail with a0 = 1."""
    cosets = unit_group(p, level)[0]
    ones = tuple(1.0 + 0.0j for _ in cosets)
    return FxFunction(p, level, 0, 0, {}, TailSpec("plus", 0, ones, (), ()))


# ------------------------------------------------------------- Mellin data

@dataclass
class MellinData:
    p: int
    level: int
    comps: dict          # exponent j -> RationalFunctionZ
    pole_class: tuple | None = None   # ("plus"|"minus", n) hint

    def character(self, j: int) -> UnitCharacter:
        return UnitCharacter(self.p, self.level, j)

    def component(self, chi: UnitCharacter) -> RationalFunctionZ:
        chi = chi.at_level(self.level)
        return self.comps.get(chi.exponent, RationalFunctionZ.zero())

    def __add__(self, other: "MellinData") -> "MellinData":
        if (self.p, self.level) != (other.p, other.level):
            raise FxError("incompatible Mellin data")
        comps = dict(self.comps)
        for j, R in other.comps.items():
            comps[j] = comps[j] + R if j in comps else R
        return MellinData(self.p, self.level, comps, self.pole_class)

    def scale(self, c) -> "MellinData":
        return MellinData(self.p, self.level,
                          {j: R * c for j, R in self.comps.items()}, self.pole_class)

    def is_zero(self, tol=1e-10) -> bool:
        return all(R.is_zero(tol) for R in self.comps.values())


def mellin_transform(f: FxFunction) -> MellinData:
    """M(f)(z, chi) = sum_k z^k (1/phi(p^N)) sum_u f(p^k u) chi(u), closed form."""
    p, N = f.p, f.level
    cosets = unit_group(p, N)[0]
    order = len(cosets)
    q = float(p)
    comps = {}
    for j in range(order):
        chi = UnitCharacter(p, N, j)
        table = chi.value_table()
        # window (Laurent polynomial)
        R = RationalFunctionZ.zero()
        window: dict[int, complex] = {}
        for k in range(f.k_min, f.k_tail):
            sh = sum(f.values.get((k, u), 0.0) * table[u] for u in cosets) / order
            if sh != 0:
                window[k] = sh
        R = RationalFunctionZ.from_laurent(window)
        # tail (geometric closed forms)
        t = f.tail
        if t.kind != "compact":
            T = f.k_tail
            sigma = float(f.power_shift)

            def avg(coeffs):
                return sum(c * table[u] for c, u in zip(coeffs, cosets)) / order

            if t.kind == "plus":
                ratios = [(avg(t.a0), q ** -sigma)]
                for i in range(t.n):
                    ratios.append((avg(t.ap[i]), q ** (-sigma - i - 0.5)))
                    ratios.append((avg(t.am[i]), -q ** (-sigma - i - 0.5)))
            else:
                ratios = [(avg(t.a0), q ** (-sigma - t.n))]
                for i in range(t.n):
                    ratios.append((avg(t.ap[i]), q ** (-sigma - i)))
                    ratios.append((avg(t.am[i]), -q ** (-sigma - i)))
            for coef, ratio in ratios:
                if coef != 0:
                    R = R + RationalFunctionZ.geometric(ratio, T) * coef
        comps[j] = R
    klass = None if f.tail.kind == "compact" else (f.tail.kind, f.tail.n)
    return MellinData(p, N, comps, klass)


def mellin_inverse(Z: MellinData, k: int, u: int) -> complex:
    """f(p^k u) = sum_chi Res_{z=0}(Z(z,chi) z^(-k-1)) chi(u)^{-1}."""
    p, N = Z.p, Z.level
    u = u % p**N
    total = 0.0 + 0.0j
    for j, R in Z.comps.items():
        if R.is_zero(1e-14):
            continue
        chi_inv = UnitCharacter(p, N, -j)
        total += R.laurent_coeff_at_zero(k) * chi_inv.value(u)
    return total


def allowed_alphas(kind: str, n: int, q: float):
    """Pole data as (alpha, slot) with slot in {('a0',), ('ap', i), ('am', i)}."""
    out = []
    if kind == "plus":
        out.append((1.0, ("a0",)))
        for i in range(n):
            out.append((q ** -(i + 0.5), ("ap", i)))
            out.append((-(q ** -(i + 0.5)), ("am", i)))
    elif kind == "minus":
        out.append((q ** -float(n), ("a0",)))
        for i in range(n):
            out.append((q ** -float(i), ("ap", i)))
            out.append((-(q ** -float(i)), ("am", i)))
    else:
        raise FxError(f"unknown class kind {kind}")
    return out


def fx_from_mellin(Z: MellinData, kind: str, n: int, tol=1e-7) -> FxFunction:
    """Materialize the shell function with the stated pole class (power shift 0)."""
    p, N = Z.p, Z.level
    q = float(p)
    cosets = unit_group(p, N)[0]
    order = len(cosets)
    slots = allowed_alphas(kind, n, q)

    lo, hi = 0, 0
    per_slot: dict[tuple, dict[int, complex]] = {}
    for j, R in Z.comps.items():
        if R.is_zero(1e-13):
            continue
        laurent, poles = R.partial_fractions()
        scale = max([abs(c) for c in laurent.values()]
                    + [abs(b) for _, bs in poles for b in bs] + [1e-300])
        # canceled factors of an unreduced fraction show up as poles with
        # negligible residues; drop them before the class check
        poles = [(alpha, bs) for alpha, bs in poles
                 if max(abs(b) for b in bs) > tol * scale]
        if laurent:
            lo = min(lo, min(laurent))
            hi = max(hi, max(laurent))
        for alpha, bs in poles:
            if len(bs) > 1 and abs(bs[1]) > tol * max(scale, abs(bs[0])):
                raise FxError(f"double pole at alpha={alpha} not allowed in S_{kind}")
            b = bs[0]
            match = None
            for a_ref, slot in slots:
                if abs(alpha - a_ref) < 1e-6 * max(1.0, abs(a_ref)):
                    match = slot
                    break
            if match is None:
                raise FxError(
                    f"pole at z = {1.0/alpha:.6g} violates the {kind}({n}) class "
                    f"(chi exponent {j})")
            per_slot.setdefault(match, {})[j] = per_slot.setdefault(match, {}).get(j, 0) + b
    k_min, k_tail = lo, hi + 1

    vals = {}
    for k in range(k_min, k_tail):
        for u in cosets:
            v = mellin_inverse(Z, k, u)
            if v != 0:
                vals[(k, u)] = v

    def coset_fn(slot):
        data = per_slot.get(slot, {})
        out = []
        for u in cosets:
            s = 0.0 + 0.0j
            for j, b in data.items():
                s += b * UnitCharacter(p, N, -j).value(u)
            out.append(s)
        return tuple(out)

    a0 = coset_fn(("a0",))
    ap = tuple(coset_fn(("ap", i)) for i in range(n))
    am = tuple(coset_fn(("am", i)) for i in range(n))
    tail = TailSpec(kind, n, a0, ap, am)
    return FxFunction(p, N, k_min, k_tail, vals, tail, Fraction(0))


# --------------------------------------------------- Paley-Wiener checking

def class_denominator(chi: UnitCharacter, kind: str, n: int,
                      beta_restricted: bool = True) -> RationalFunctionZ:
    """The L-product a Mellin component of the given class must divide into."""
    q = float(chi.p)
    D = RationalFunctionZ.one()
    e, e2 = conductor(chi), conductor(chi.square())
    if kind == "plus":
        if not beta_restricted or e == 0:
            D = D * RationalFunctionZ([1.0], [1.0, -1.0])
        for i in range(n):
            if not beta_restricted or e2 == 0:
                D = D * RationalFunctionZ([1.0], [1.0, 0.0, -q ** -(2 * i + 1)])
    elif kind == "minus":
        if not beta_restricted or e == 0:
            D = D * RationalFunctionZ([1.0], [1.0, -q ** -float(n)])
        for i in range(n):
            if not beta_restricted or e2 == 0:
                D = D * RationalFunctionZ([1.0], [1.0, 0.0, -q ** -float(2 * i)])
    else:
        raise FxError(f"unknown class kind {kind}")
    return D


def check_paley_wiener(Z: MellinData, kind: str, n: int,
                       beta_restricted: bool = True, tol=1e-8):
    """True iff every component over its class L-product is a Laurent polynomial.

    Returns (ok, witness); the witness names the offending character exponent
    and pole location.
    """
    for j, R in Z.comps.items():
        if R.is_zero(1e-13):
            continue
        chi = Z.character(j)
        D = class_denominator(chi, kind, n, beta_restricted)
        quotient = R / D
        w = quotient.laurent_polynomial_witness(tol)
        if w is not None:
            return False, {"chi_exponent": j, "pole": w,
                           "conductor": conductor(chi),
                           "conductor_sq": conductor(chi.square())}
    return True, None


# ----------------------------------------------------------- eta and L-op

@lru_cache(maxsize=None)
def _beta_inv_cached(n: int, p: int, level: int, j: int, sign: int) -> RationalFunctionZ:
    return beta_factor_inverse_argument(n, UnitCharacter(p, level, j), sign)


@lru_cache(maxsize=None)
def _eta_coeff(n: int, p: int, level: int, j: int, sign: int, k: int) -> complex:
    return _beta_inv_cached(n, p, level, j, sign).laurent_coeff_at_zero(k)


def eta_kernel(n: int, sign: int, k: int, u: int, p: int, level: int,
               max_level: int = 6, tol: float = 1e-9) -> complex:
    """eta(x) = sum_chi chi(ac x)^{-1} Res_{z=0} beta_psi(chi_s^{-1}) z^{-ord(x)-1}.

    The character sum is summed at increasing levels until two consecutive
    levels agree (it is finite for each shell: ramified chi^2 contributes a
    single band at ord(x) = -e(chi) - 2n e(chi^2)).
    """
    def partial(L):
        total = 0.0 + 0.0j
        uL = u % p**L
        for j in range(unit_order(p, L)):
            c = _eta_coeff(n, p, L, j, sign, k)
            if c != 0:
                total += c * UnitCharacter(p, L, -j).value(uL)
        return total

    prev = partial(max(1, level))
    for L in range(max(1, level) + 1, max_level + 1):
        cur = partial(L)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise StabilizationError(
        f"eta character sum did not stabilize by level {max_level} at shell {k}")


def eta_smoothed(n: int, sign: int, k: int, u: int, p: int, invariance_level: int,
                 max_level: int = 6, tol: float = 1e-9) -> complex:
    """(eta * 1_N^v)(x): eta averaged over the coset x (1 + p^N Z_p).

    Convolving with the normalized indicator 1_N projects eta onto its
    conductor <= N character components, which is what makes the pairing
    against chi_s converge shell by shell.
    """
    N = invariance_level
    prev = None
    for L in range(max(N, 1), max_level + 1):
        mod = p**L
        reps = [v for v in range(1, mod) if v % p and v % p**N == 1]
        val = sum(eta_kernel(n, sign, k, u * v % mod, p, L, max_level=max_level + 2)
                  for v in reps) / len(reps)
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
    raise StabilizationError(
        f"smoothed eta did not stabilize by level {max_level} at shell {k}")


def fourier_L(f: FxFunction, n: int, sign: int = 1) -> FxFunction:
    """The Fourier operator on the plus space via the Mellin route:

    L(f)(t) = |t|^{(2n+1)/2} M^{-1}( beta_psi(chi_s^{-1})
                                     M(f |.|^{(2n+1)/2})(z^{-1}, chi^{-1}) )(t).
    """
    p, N = f.p, f.level
    q = float(p)
    ok, witness = check_paley_wiener(mellin_transform(f.scale_by_power(2 * n)),
                                     "plus", n, beta_restricted=True)
    if not ok:
        raise FxError(f"input is not in the pvs plus space: {witness}")
    Zg = mellin_transform(f.scale_by_power(Fraction(2 * n + 1, 2)))
    order = unit_order(p, N)
    comps = {}
    for j in range(order):
        chi = UnitCharacter(p, N, j)
        mirror = Zg.comps.get(-j % order, RationalFunctionZ.zero())
        if mirror.is_zero(1e-13):
            continue
        comps[j] = beta_factor_inverse_argument(n, chi, sign) * mirror.substitute("invert")
    # comps is M(L(f) |.|^{-(2n+1)/2}); L(f) lands in |.|^{n+1} S^-_{n,beta},
    # so shift by |.|^{-1/2} more to reach the shift-free minus class
    V = MellinData(p, N, {j: R.substitute("scale", q**0.5) for j, R in comps.items()},
                   ("minus", n))
    ok, witness = check_paley_wiener(V, "minus", n, beta_restricted=True)
    if not ok:
        raise FxError(f"transform left the minus class (this should not happen): {witness}")
    out = fx_from_mellin(V, "minus", n)
    return out.scale_by_power(Fraction(n + 1))


def pv_convolve(kernel, f: FxFunction, k0: int, u0: int, K_max: int,
                tol: float = 1e-9):
    """Principal-value convolution sum_shells kernel(x) f(x^{-1} t), t = p^k0 u0.

    kernel is a callable (k, u) -> complex at f's level.  Returns
    (value, k_stable, partial_sums); stability means three consecutive
    truncations within tol.
    """
    p, N = f.p, f.level
    mod = p**N
    cosets = unit_group(p, N)[0]
    order = len(cosets)
    u0 = u0 % mod
    partial_sums = []
    total = 0.0 + 0.0j
    # radii that have not yet swept past the support window of f cannot be
    # trusted for stabilization (leading zeros are not convergence)
    K_start = max(2, abs(k0 - f.k_min), abs(k0 - (f.k_tail - 1)))
    for K in range(K_max + 1):
        band = [K] if K == 0 else [K, -K]
        for i in band:
            sh = 0.0 + 0.0j
            for u in cosets:
                fv = f.evaluate(k0 - i, u0 * pow(u, -1, mod) % mod)
                if fv != 0:
                    sh += kernel(i, u) * fv
            total += sh / order
        partial_sums.append(total)
        if K >= K_start:
            a, b, c = partial_sums[-3], partial_sums[-2], partial_sums[-1]
            scale = max(1.0, abs(c))
            if abs(a - b) <= tol * scale and abs(b - c) <= tol * scale:
                return total, K, partial_sums
    raise StabilizationError(
        f"pv convolution did not stabilize by K={K_max}; trace={partial_sums}")


def check_fe_gl1(f: FxFunction, n: int, chi: UnitCharacter, sign: int = 1,
                 z_samples=None) -> dict:
    """Compare M(L(f) |.|^{-(2n+1)/2})(z^{-1}, chi^{-1}) with
    beta_psi(chi_s) M(f |.|^{(2n+1)/2})(z, chi), as rational functions."""
    p = f.p
    chi = chi.at_level(f.level)
    Lf = fourier_L(f, n, sign)
    A = mellin_transform(Lf.scale_by_power(Fraction(-(2 * n + 1), 2)))
    lhs = A.component(chi.inverse()).substitute("invert")
    B = mellin_transform(f.scale_by_power(Fraction(2 * n + 1, 2)))
    rhs = beta_factor(n, chi, sign) * B.component(chi)
    if z_samples is None:
        q = float(p)
        z_samples = [0.45 * q ** -0.5, 0.8 * q ** -0.5 * 1j,
                     (0.3 + 0.4j) * q ** -0.5, -0.22, 0.15 - 0.33j]
    dev = lhs.max_relative_deviation(rhs, z_samples)
    return {
        "max_deviation": dev,
        "ratfunc_equal": lhs.equals(rhs, tol=1e-8),
        "lhs": lhs,
        "rhs": rhs,
    }


# ----------------------------------------------------------- tail fitting

def fit_fx_from_shell_data(p: int, level: int, shells: dict, k_tail: int,
                           kind: str, n: int, power_shift=Fraction(0),
                           residual_tol: float = 1e-8) -> FxFunction:
    """Build an FxFunction from exact shell data, fitting the tail by
    solving the asymptotic-expansion linear system on the shells >= k_tail
    (at least 2n+1 of them per unit coset; extra shells become residual
    checks)."""
    import numpy as np

    q = float(p)
    cosets = unit_group(p, level)[0]
    sigma = float(power_shift)
    ks = sorted({k for (k, _) in shells})
    fit_ks = [k for k in ks if k >= k_tail]
    if len(fit_ks) < 2 * n + 1:
        raise FxError(
            f"insufficient shells for the tail fit: need {2*n+1}, have {len(fit_ks)}")
    if kind == "plus":
        exps = [0.0] + [i + 0.5 for i in range(n)] + [i + 0.5 for i in range(n)]
    elif kind == "minus":
        exps = [float(n)] + [float(i) for i in range(n)] + [float(i) for i in range(n)]
    else:
        raise FxError(f"unknown tail kind {kind}")
    signs = [0] + [0] * n + [1] * n   # 1 marks the (-1)^k family

    a0, ap, am = [], [[] for _ in range(n)], [[] for _ in range(n)]
    for u in cosets:
        A = np.zeros((len(fit_ks), 2 * n + 1), dtype=complex)
        rhs = np.zeros(len(fit_ks), dtype=complex)
        for r, k in enumerate(fit_ks):
            rhs[r] = complex(shells.get((k, u), 0.0))
            for c, (e, sg) in enumerate(zip(exps, signs)):
                A[r, c] = q ** (-k * (e + sigma)) * ((-1) ** k if sg else 1.0)
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        resid = np.max(np.abs(A @ sol - rhs)) if len(fit_ks) else 0.0
        scale = max(1.0, float(np.max(np.abs(rhs))))
        if resid > residual_tol * scale:
            raise FxError(f"tail fit residual {resid:.3g} exceeds {residual_tol}")
        a0.append(complex(sol[0]))
        for i in range(n):
            ap[i].append(complex(sol[1 + i]))
            am[i].append(complex(sol[1 + n + i]))
    tail = TailSpec(kind, n, tuple(a0), tuple(map(tuple, ap)), tuple(map(tuple, am)))
    vals = {(k, u): complex(v) for (k, u), v in shells.items() if k < k_tail}
    k_min = min([k for k in ks if k < k_tail], default=k_tail)
    return FxFunction(p, level, k_min, k_tail, vals, tail, Fraction(power_shift))
