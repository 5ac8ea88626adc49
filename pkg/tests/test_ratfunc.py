import random

import numpy as np
import pytest

from padicharm.ratfunc import PoleError, RationalFunctionZ


def test_laurent_coeff_geometric():
    R = RationalFunctionZ([1.0], [1.0, -1.0])  # 1/(1-z)
    assert abs(R.laurent_coeff_at_zero(5) - 1.0) < 1e-12
    # 1/(1 - z^2/3), coefficient of z^4 is 1/9
    R2 = RationalFunctionZ([1.0], [1.0, 0.0, -1.0 / 3.0])
    assert abs(R2.laurent_coeff_at_zero(4) - 1.0 / 9.0) < 1e-12
    # z^3 has no z^2 coefficient
    R3 = RationalFunctionZ.z_power(3)
    assert abs(R3.laurent_coeff_at_zero(2)) < 1e-12


def test_laurent_coeff_with_z_power_denominator():
    R = RationalFunctionZ.z_power(-2)  # 1/z^2
    assert abs(R.laurent_coeff_at_zero(-2) - 1.0) < 1e-12
    assert abs(R.laurent_coeff_at_zero(-3)) < 1e-12
    assert abs(R.laurent_coeff_at_zero(0)) < 1e-12


def test_substitutions():
    R = RationalFunctionZ([1.0], [1.0, -1.0])
    S = R.substitute("scale", 1.0 / 3.0)  # 1/(1 - z/3)
    assert S.equals(RationalFunctionZ([1.0], [1.0, -1.0 / 3.0]))
    T = RationalFunctionZ.z_power(1).substitute("invert")
    assert T.equals(RationalFunctionZ.z_power(-1))
    U = R.substitute("square")
    assert U.equals(RationalFunctionZ([1.0], [1.0, 0.0, -1.0]))


def test_substitution_commutes_with_evaluation():
    rng = random.Random(3)
    for _ in range(25):
        num = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(rng.randint(1, 4))]
        den = [1.0] + [complex(rng.uniform(-0.4, 0.4)) for _ in range(rng.randint(0, 3))]
        R = RationalFunctionZ(num, den)
        c = complex(rng.uniform(0.2, 1.5))
        S = R.substitute("scale", c)
        for z in [0.3 + 0.1j, -0.45, 0.9j]:
            assert abs(S(z) - R(c * z)) < 1e-9 * max(1.0, abs(R(c * z)))
        Q = R.substitute("square")
        for z in [0.4, 0.2 - 0.3j]:
            assert abs(Q(z) - R(z * z)) < 1e-9 * max(1.0, abs(R(z * z)))
        V = R.substitute("invert")
        for z in [1.7, 2.0 + 0.5j]:
            assert abs(V(z) - R(1.0 / z)) < 1e-9 * max(1.0, abs(R(1.0 / z)))


def test_scaling_property_of_laurent_coeffs():
    # coeff_m(R(cz)) = c^m coeff_m(R)
    rng = random.Random(5)
    for _ in range(20):
        num = [complex(rng.uniform(-1, 1)) for _ in range(3)]
        den = [1.0, complex(rng.uniform(-0.5, 0.5)), complex(rng.uniform(-0.3, 0.3))]
        R = RationalFunctionZ(num, den)
        c = complex(rng.uniform(0.5, 2.0))
        S = R.substitute("scale", c)
        for m in range(6):
            assert abs(S.laurent_coeff_at_zero(m) - c**m * R.laurent_coeff_at_zero(m)) < 1e-9


def test_partial_fractions_simple():
    # 1/((1-z)(1+z)) = (1/2)/(1-z) + (1/2)/(1+z)
    R = RationalFunctionZ([1.0], np.convolve([1.0, -1.0], [1.0, 1.0]))
    laurent, poles = R.partial_fractions()
    assert not laurent
    got = {round(alpha.real, 6): bs[0] for alpha, bs in poles}
    assert abs(got[1.0] - 0.5) < 1e-9
    assert abs(got[-1.0] - 0.5) < 1e-9


def test_partial_fractions_split_of_even_L_factor():
    # 1/(1 - z^2/q) with q = 9 splits as (1/2)/(1 - z/3) + (1/2)/(1 + z/3)
    R = RationalFunctionZ([1.0], [1.0, 0.0, -1.0 / 9.0])
    laurent, poles = R.partial_fractions()
    got = {round(alpha.real, 6): bs[0] for alpha, bs in poles}
    assert abs(got[round(1.0 / 3.0, 6)] - 0.5) < 1e-9
    assert abs(got[round(-1.0 / 3.0, 6)] - 0.5) < 1e-9


def test_partial_fractions_with_polynomial_part():
    R = RationalFunctionZ.z_power(1) + RationalFunctionZ([1.0], [1.0, -1.0])
    laurent, poles = R.partial_fractions()
    assert abs(laurent.get(1, 0.0) - 1.0) < 1e-9
    assert len(poles) == 1
    alpha, bs = poles[0]
    assert abs(alpha - 1.0) < 1e-9 and abs(bs[0] - 1.0) < 1e-9


def test_partial_fractions_resum_roundtrip():
    rng = random.Random(11)
    for _ in range(100):
        deg_n = rng.randint(0, 6)
        num = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(deg_n + 1)]
        # well-separated real poles
        alphas = rng.sample([0.2, 0.35, 0.6, -0.4, -0.75, 1.2, -1.6], rng.randint(1, 3))
        den = np.array([1.0], dtype=complex)
        for a in alphas:
            den = np.convolve(den, [1.0, -a])
        R = RationalFunctionZ(num, den)
        laurent, poles = R.partial_fractions()
        S = R.resum(laurent, poles)
        assert R.equals(S, tol=1e-7)


def test_partial_fractions_double_pole():
    # 1/(1-z)^2 + extra simple pole
    den = np.convolve(np.convolve([1.0, -1.0], [1.0, -1.0]), [1.0, 0.5])
    R = RationalFunctionZ([1.0, 0.3], den)
    laurent, poles = R.partial_fractions()
    S = R.resum(laurent, poles)
    assert R.equals(S, tol=1e-7)


def test_partial_fractions_with_z_power_denominator():
    # (1 + z)/(z^2 (1 - z/2)): Laurent part with negative exponents plus one pole
    den = np.convolve([0.0, 0.0, 1.0], [1.0, -0.5])
    R = RationalFunctionZ([1.0, 1.0], den)
    laurent, poles = R.partial_fractions()
    S = R.resum(laurent, poles)
    assert R.equals(S, tol=1e-7)


def test_ill_conditioned_poles_raise():
    den = np.convolve(np.convolve([1.0, -1.0], [1.0, -1.0 - 1e-9]), [1.0, -1.0 + 1e-9])
    R = RationalFunctionZ([1.0], den)
    with pytest.raises(PoleError):
        R.partial_fractions()


def test_laurent_polynomial_witness():
    # (1-z)(1+2z)/(1-z) is a polynomial
    R = RationalFunctionZ(np.convolve([1.0, -1.0], [1.0, 2.0]), [1.0, -1.0])
    assert R.is_laurent_polynomial()
    # 1/(1-z) is not; witness should be z = 1
    S = RationalFunctionZ([1.0], [1.0, -1.0])
    w = S.laurent_polynomial_witness()
    assert w is not None and abs(w - 1.0) < 1e-6


def test_json_roundtrip():
    R = RationalFunctionZ([1.0, 2.0 + 1.0j], [1.0, 0.0, -0.25])
    S = RationalFunctionZ.from_json(R.to_json())
    assert R.equals(S, tol=1e-12)


def test_equality_by_cross_multiplication():
    R = RationalFunctionZ([1.0, 1.0], [1.0, -0.5])
    S = RationalFunctionZ(np.convolve([1.0, 1.0], [2.0, 1.0]),
                          np.convolve([1.0, -0.5], [2.0, 1.0]))
    assert R.equals(S)
    assert not R.equals(R + 1e-4)
