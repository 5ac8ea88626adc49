import random
from fractions import Fraction

import pytest

from padicharm.symplectic import (J, SymplecticError, abelianization_delta,
                                  c0_constant, cayley, cayley_inv, det,
                                  doubling_embed, eye, is_symplectic,
                                  levi_block_of_p_std, mat, mat_eq, mul,
                                  random_symplectic, scale, siegel_factorize,
                                  sp_order, standard_elements, sub, transpose,
                                  zeros)


def test_is_symplectic_basics():
    assert is_symplectic(eye(2), 1)
    assert is_symplectic(J(1), 1)
    assert is_symplectic([[2, 0], [0, Fraction(1, 2)]], 1)
    assert not is_symplectic([[2, 0], [0, 2]], 1)
    with pytest.raises(SymplecticError):
        is_symplectic(eye(3), 1)


def test_standard_elements_identities():
    for n in (1, 2):
        std = standard_elements(n)   # construction itself asserts the identities
        w = std["w_delta"]
        assert mat_eq(mul(w, w), eye(4 * n))
        assert det(std["g0"]) in (Fraction(1), Fraction(-1))


def test_g0_entries_at_n1():
    std = standard_elements(1)
    g0 = std["g0"]
    h = Fraction(1, 2)
    expected = [
        [0, 0, -h, -h],
        [h, -h, 0, 0],
        [1, 1, 0, 0],
        [0, 0, 1, -1],
    ]
    assert mat_eq(g0, mat(expected))


def test_doubling_embed():
    n = 1
    assert mat_eq(doubling_embed(eye(2), eye(2), n), eye(4))
    rng = random.Random(3)
    h = random_symplectic(n, rng)
    e = doubling_embed(h, eye(2), n)
    assert is_symplectic(e, 2 * n)
    # identity blocks in the M/Q positions
    assert e[1][1] == 1 and e[3][3] == 1 and e[1][3] == 0
    # homomorphism on random pairs
    for _ in range(20):
        h1, h2 = random_symplectic(n, rng), random_symplectic(n, rng)
        g1, g2 = random_symplectic(n, rng), random_symplectic(n, rng)
        lhs = doubling_embed(mul(h1, g1), mul(h2, g2), n)
        rhs = mul(doubling_embed(h1, h2, n), doubling_embed(g1, g2, n))
        assert mat_eq(lhs, rhs)
    with pytest.raises(SymplecticError):
        doubling_embed([[2, 0], [0, 2]], eye(2), 1)


def test_cayley_examples_and_roundtrip():
    n = 1
    h = cayley(zeros(2), n)
    assert mat_eq(h, scale(eye(2), -1))
    rng = random.Random(5)
    done = 0
    while done < 100:
        X = [[0] * 2 for _ in range(2)]
        for i in range(2):
            for j in range(i, 2):
                X[i][j] = X[j][i] = rng.randint(-3, 3)
        try:
            h = cayley(X, n)
        except SymplecticError:
            continue
        done += 1
        assert is_symplectic(h, n)
        assert mat_eq(cayley_inv(h, n), mat(X))


def test_cayley_pole():
    # X with det(2JX - I) = 0: for n=1, J X = [[c,d],[-a,-b]] with X=[[a,b],[b,d]]
    # choose X = [[0,1/2],[1/2,0]]: 2JX = [[1,0],[0,-1]], det(2JX - I) = 0
    with pytest.raises(SymplecticError, match="Cayley pole"):
        cayley([[0, Fraction(1, 2)], [Fraction(1, 2), 0]], 1)


def test_cayley_inv_lie_algebra_relation():
    # (X J) J + J (X J)^t = 0, i.e. J X lies in sp_2n
    rng = random.Random(7)
    n = 1
    for _ in range(30):
        h = random_symplectic(n, rng)
        try:
            X = cayley_inv(h, n)
        except SymplecticError:
            continue
        XJ = mul(X, J(n))
        lhs = mul(XJ, J(n))
        rhs = mul(J(n), transpose(XJ))
        assert mat_eq(lhs, scale(rhs, -1))


def test_siegel_factorization():
    rng = random.Random(11)
    for n, trials in ((1, 100), (2, 20)):
        done = 0
        while done < trials:
            X = [[0] * (2 * n) for _ in range(2 * n)]
            for i in range(2 * n):
                for j in range(i, 2 * n):
                    X[i][j] = X[j][i] = rng.randint(-3, 3)
            try:
                p_std, h = siegel_factorize(X, n)
            except SymplecticError:
                continue
            done += 1
            # Levi part matches diag((1/2)(h^t - I), 2(h-I)^{-1})
            levi = levi_block_of_p_std(h, n)
            for i in range(2 * n):
                for j in range(2 * n):
                    assert p_std[i][j] == levi[i][j]
                    assert p_std[2 * n + i][2 * n + j] == levi[2 * n + i][2 * n + j]
                    assert p_std[2 * n + i][j] == 0
            # abelianization: det of the upper Levi block = 2^{-2n} det(h - I)
            upper = [row[:2 * n] for row in p_std[:2 * n]]
            assert det(upper) == Fraction(1, 2 ** (2 * n)) * det(sub(h, eye(2 * n)))


def test_abelianization_delta():
    d, q = abelianization_delta(eye(3), 1, p=3)
    assert d == 1 and q == 1
    d, q = abelianization_delta([[3, 0], [0, 1]], 1, p=3)
    assert d == 3 and q == Fraction(1, 27)
    rng = random.Random(13)
    for _ in range(20):
        A = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        B = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        if det(mat(A)) == 0 or det(mat(B)) == 0:
            continue
        dA, _ = abelianization_delta(A, 1)
        dB, _ = abelianization_delta(B, 1)
        dAB, _ = abelianization_delta(mul(mat(A), mat(B)), 1)
        assert dAB == dA * dB


def test_sp_order():
    order, c0 = sp_order(1, 3, mode="bruteforce")
    assert order == 24 and c0 == Fraction(24, 27)
    order_f, c0_f = sp_order(1, 3, mode="formula")
    assert order_f == 24 and c0_f == c0
    order, c0 = sp_order(1, 5, mode="bruteforce")
    assert order == 120 and c0 == Fraction(120, 125)
    order, _ = sp_order(2, 3, mode="formula")
    assert order == 3**4 * 8 * 80 == 51840
    # c0 = prod (1 - q^{-2i})
    for n, q in ((1, 3), (1, 5), (2, 3)):
        _, c0 = sp_order(n, q)
        assert c0 == c0_constant(n, q)
    with pytest.raises(SymplecticError):
        sp_order(2, 3, mode="bruteforce")
