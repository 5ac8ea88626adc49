import cmath

import numpy as np
import pytest

from padicharm.abelian import (CharacterError, OracleError, UnitCharacter,
                               ab_factors, beta_factor,
                               beta_factor_inverse_argument, characters,
                               conductor, epsilon_factor, epsilon_half,
                               gamma_factor, gauss_sum, tate_gamma_oracle,
                               twist_by_pi_value)
from padicharm.ratfunc import RationalFunctionZ


def quad3():
    # the order-2 character of (Z/3)^x
    return UnitCharacter(3, 1, 1)


def test_conductors():
    assert conductor(UnitCharacter(3, 1, 0)) == 0
    assert conductor(quad3()) == 1
    # at level 2: order-2 character has conductor 1, order-3 characters conductor 2
    assert conductor(UnitCharacter(3, 2, 3)) == 1
    assert conductor(UnitCharacter(3, 2, 2)) == 2
    assert conductor(UnitCharacter(3, 2, 1)) == 2


def test_from_table_validates():
    chi = quad3()
    table = chi.value_table()
    assert UnitCharacter.from_table(3, 1, table) == chi
    bad = dict(table)
    bad[2] = 0.5
    with pytest.raises(CharacterError):
        UnitCharacter.from_table(3, 1, bad)


def test_L_factor():
    from padicharm.abelian import L_factor
    triv = UnitCharacter(3, 1, 0)
    assert L_factor(triv).equals(RationalFunctionZ([1.0], [1.0, -1.0]))
    assert L_factor(quad3()).equals(RationalFunctionZ.one())
    # chi^2 of the quadratic character is trivial; the 2s substitution gives 1/(1-z^2)
    sq = quad3().square()
    assert L_factor(sq).substitute("square").equals(
        RationalFunctionZ([1.0], [1.0, 0.0, -1.0]))


def test_gauss_sum_quadratic():
    chi = quad3()
    G = gauss_sum(chi)
    assert abs(G - (cmath.exp(2j * cmath.pi / 3) - cmath.exp(4j * cmath.pi / 3))) < 1e-12
    assert abs(abs(epsilon_half(chi)) - 1.0) < 1e-12
    # full factor G z^1 = sqrt(3) eps(1/2) z
    eps = epsilon_factor(chi)
    assert eps.equals(RationalFunctionZ([0.0, G]))


def test_epsilon_unramified_is_one():
    triv = UnitCharacter(3, 2, 0)
    assert epsilon_factor(triv).equals(RationalFunctionZ.one())


def test_epsilon_identities():
    # conj(eps(s,chi,psi)) at real s = chi(-1) eps(s,chi^{-1},psi)
    # eps(s,chi,psi) = chi(-1) eps(s,chi,psi^{-1})
    for p in (3, 5):
        for chi in characters(p, 2):
            e = conductor(chi)
            eps_p = epsilon_factor(chi, 1)
            eps_m = epsilon_factor(chi, -1)
            eps_inv = epsilon_factor(chi.inverse(), 1)
            cm1 = chi.value_minus_one()
            for s in (0.3, 0.71, 1.2):
                z = p ** (-s)
                assert abs(eps_p(z).conjugate() - cm1 * eps_inv(z)) < 1e-9
                assert abs(eps_p(z) - cm1 * eps_m(z)) < 1e-9
            if conductor(chi) > 0:
                assert abs(abs(epsilon_half(chi)) - 1.0) < 1e-9
            assert e == conductor(chi)


def test_gamma_trivial_closed_form():
    triv = UnitCharacter(3, 1, 0)
    g = gamma_factor(triv)
    # z(1-z)/(z - 1/q)
    expected = RationalFunctionZ([0.0, 1.0, -1.0], [-1.0 / 3.0, 1.0])
    assert g.equals(expected)


def test_gamma_ramified_is_epsilon():
    chi = quad3()
    assert gamma_factor(chi).equals(epsilon_factor(chi))


def test_gamma_against_oracle_all_small_conductors():
    for p in (3, 5):
        for chi in characters(p, 2):
            g = gamma_factor(chi)
            for s in (0.5, 0.33, 0.61 + 0.2j):
                z = complex(p) ** (-s)
                got = tate_gamma_oracle(chi, s)
                assert abs(got - g(z)) < 1e-6 * max(1.0, abs(g(z)))


def test_gamma_reflection_identity():
    # gamma(s,chi,psi) gamma(1-s,chi^{-1},psi^{-1}) = 1
    for p in (3, 5):
        for chi in characters(p, 1):
            g = gamma_factor(chi, 1)
            gd = gamma_factor(chi.inverse(), -1)
            for s in (0.4, 0.8):
                z = p ** (-s)
                zd = p ** (-(1 - s))
                assert abs(g(z) * gd(zd) - 1.0) < 1e-9


def test_oracle_rejects_bad_region():
    with pytest.raises(OracleError):
        tate_gamma_oracle(UnitCharacter(3, 1, 0), 1.7)


def test_beta_n0_is_shifted_gamma():
    triv = UnitCharacter(3, 1, 0)
    b = beta_factor(0, triv)
    g = gamma_factor(triv).substitute("scale", 3 ** (-0.5))
    assert b.equals(g)


def test_beta_n1_trivial_product_form():
    triv = UnitCharacter(3, 1, 0)
    b = beta_factor(1, triv)
    g1 = gamma_factor(triv).substitute("scale", 3 ** 0.5)           # gamma(s - 1/2)
    g2 = gamma_factor(triv).substitute("square")                    # gamma(2s)
    assert b.equals(g1 * g2)


def test_beta_monomial_when_chi_squared_ramified():
    # order-3 character at p=3 level 2: chi^2 ramified (conductor 2)
    chi = UnitCharacter(3, 2, 2)
    assert conductor(chi.square()) == 2
    b = beta_factor(1, chi)
    laurent, poles = b.partial_fractions()
    assert not poles
    degs = sorted(k for k, c in laurent.items() if abs(c) > 1e-9)
    e, e2 = conductor(chi), conductor(chi.square())
    assert degs == [e + 2 * e2]


def test_ab_factors():
    triv = UnitCharacter(3, 1, 0)
    a1, b1 = ab_factors(1, triv)
    assert a1.equals(RationalFunctionZ([1.0], [1.0, -1.0]))
    a3, _ = ab_factors(3, triv)
    # L(s-1) L(2s-1) = 1/((1-3z)(1-3z^2))
    expected = RationalFunctionZ([1.0], np.convolve([1.0, -3.0], [1.0, 0.0, -3.0]))
    assert a3.equals(expected)
    # chi^2 ramified => a_m = 1
    chi = UnitCharacter(3, 2, 2)
    am, _ = ab_factors(3, chi)
    assert am.equals(RationalFunctionZ.one())
    # b_{2n} formula: n=1, trivial: L(s+3/2) L(2s+1)
    _, b2 = ab_factors(2, triv)
    q = 3.0
    expected_b = (RationalFunctionZ([1.0], [1.0, -q ** -1.5])
                  * RationalFunctionZ([1.0], [1.0, 0.0, -1.0 / q]))
    assert b2.equals(expected_b)


def test_twist_helper():
    triv = UnitCharacter(3, 1, 0)
    from padicharm.abelian import L_factor
    twisted = twist_by_pi_value(L_factor(triv), -1.0)
    assert twisted.equals(RationalFunctionZ([1.0], [1.0, 1.0]))


def test_beta_inverse_argument_consistency():
    chi = quad3()
    b = beta_factor(1, chi)
    binv = beta_factor_inverse_argument(1, chi)
    for s in (0.37, 0.9):
        z = 3 ** (-s)
        # beta(chi_s^{-1}) evaluated at z equals beta for chi^{-1} at 1/z
        direct = beta_factor(1, chi.inverse())(1.0 / z)
        assert abs(binv(z) - direct) < 1e-9 * max(1.0, abs(direct))
