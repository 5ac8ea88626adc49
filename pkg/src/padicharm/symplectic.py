"""Exact rational matrix algebra for the doubling geometry.

All identities here are polynomial identities over Q, so everything is
Fraction arithmetic: the symplectic form J_n, the doubling embedding of
Sp_2n x Sp_2n into Sp_4n, the base-change element g0 relating the standard
and diagonal Siegel parabolics, the Cayley transform

    h = (2 J X + I)(2 J X - I)^{-1},   X = (1/2) J (I - h)^{-1} (I + h),

the Siegel factorization w_std n_std(X) = p_std g0 (h, I) g0^{-1}, the
abelianization det with modular character |det|^(2n+1), and the group
order |Sp_2n(F_q)| = q^(n^2) prod (q^(2i) - 1) behind the Jacobian
constant c0 = prod 1/zeta_F(2i) = prod (1 - q^(-2i)).
"""

from __future__ import annotations

from fractions import Fraction


class SymplecticError(ValueError):
    pass


Matrix = list  # list of list of Fraction


def mat(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def eye(m: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]


def zeros(m: int, ncol=None) -> Matrix:
    return [[Fraction(0) for _ in range(ncol or m)] for _ in range(m)]


def mul(A: Matrix, B: Matrix) -> Matrix:
    inner = len(B)
    return [[sum(A[i][t] * B[t][j] for t in range(inner)) for j in range(len(B[0]))]
            for i in range(len(A))]


def add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def sub(A: Matrix, B: Matrix) -> Matrix:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def scale(A: Matrix, c) -> Matrix:
    c = Fraction(c)
    return [[c * x for x in row] for row in A]


def transpose(A: Matrix) -> Matrix:
    return [[A[j][i] for j in range(len(A))] for i in range(len(A[0]))]


def mat_eq(A: Matrix, B: Matrix) -> bool:
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def det(A: Matrix) -> Fraction:
    M = [row[:] for row in A]
    m = len(M)
    out = Fraction(1)
    for col in range(m):
        piv = next((r for r in range(col, m) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            out = -out
        out *= M[col][col]
        inv = Fraction(1) / M[col][col]
        for r in range(col + 1, m):
            f = M[r][col] * inv
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return out


def inverse(A: Matrix) -> Matrix:
    m = len(A)
    M = [row[:] + eye(m)[i] for i, row in enumerate(mat(A))]
    for col in range(m):
        piv = next((r for r in range(col, m) if M[r][col] != 0), None)
        if piv is None:
            raise SymplecticError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1) / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(m):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[m:] for row in M]


def block(rows_of_blocks) -> Matrix:
    out = []
    for row_blocks in rows_of_blocks:
        height = len(row_blocks[0])
        for r in range(height):
            out.append([x for blk in row_blocks for x in blk[r]])
    return out


def J(n: int) -> Matrix:
    """The form matrix [[0, I], [-I, 0]] of Sp_2n."""
    return block([[zeros(n), eye(n)], [scale(eye(n), -1), zeros(n)]])


def is_symplectic(g: Matrix, n: int) -> bool:
    g = mat(g)
    if len(g) != 2 * n or any(len(row) != 2 * n for row in g):
        raise SymplecticError(f"expected a {2*n}x{2*n} matrix")
    return mat_eq(mul(mul(transpose(g), J(n)), g), J(n))


def _blocks(h: Matrix, n: int):
    A = [row[:n] for row in h[:n]]
    B = [row[n:] for row in h[:n]]
    C = [row[:n] for row in h[n:]]
    D = [row[n:] for row in h[n:]]
    return A, B, C, D


def doubling_embed(h1: Matrix, h2: Matrix, n: int) -> Matrix:
    """(h1, h2) in Sp_2n x Sp_2n into Sp_4n, with the sign pattern
    (A,B;C,D),(M,N;P,Q) -> [[A,,B,],[,M,,-N],[C,,D,],[,-P,,Q]]."""
    h1, h2 = mat(h1), mat(h2)
    for h in (h1, h2):
        if not is_symplectic(h, n):
            raise SymplecticError("doubling_embed needs symplectic inputs")
    A, B, C, D = _blocks(h1, n)
    M, N, P, Q = _blocks(h2, n)
    z = zeros(n)
    return block([
        [A, z, B, z],
        [z, M, z, scale(N, -1)],
        [C, z, D, z],
        [z, scale(P, -1), z, Q],
    ])


def standard_elements(n: int) -> dict:
    """The fixed matrices of the doubling geometry: g0, g0^{-1}, w_Delta,
    w_std, J_{2n}; all verified symplectic and mutually consistent."""
    I_n, z = eye(n), zeros(n)
    half = Fraction(1, 2)
    g0 = block([
        [z, z, scale(I_n, -half), scale(I_n, -half)],
        [scale(I_n, half), scale(I_n, -half), z, z],
        [I_n, I_n, z, z],
        [z, z, I_n, scale(I_n, -1)],
    ])
    g0_inv = block([
        [z, I_n, scale(I_n, half), z],
        [z, scale(I_n, -1), scale(I_n, half), z],
        [scale(I_n, -1), z, z, scale(I_n, half)],
        [scale(I_n, -1), z, z, scale(I_n, -half)],
    ])
    w_delta = block([
        [I_n, z, z, z],
        [z, scale(I_n, -1), z, z],
        [z, z, I_n, z],
        [z, z, z, scale(I_n, -1)],
    ])
    w_std = block([
        [z, z, z, scale(I_n, -half)],
        [z, z, scale(I_n, half), z],
        [z, scale(I_n, 2), z, z],
        [scale(I_n, -2), z, z, z],
    ])
    out = {"g0": g0, "g0_inv": g0_inv, "w_delta": w_delta, "w_std": w_std,
           "J2n": J(2 * n)}
    if not mat_eq(mul(g0, g0_inv), eye(4 * n)):
        raise SymplecticError("g0 inverse mismatch")
    for name in ("g0", "w_delta", "w_std"):
        if not is_symplectic(out[name], 2 * n):
            raise SymplecticError(f"{name} is not symplectic")
    if not mat_eq(w_delta, mul(mul(g0_inv, w_std), g0)):
        raise SymplecticError("w_delta != g0^{-1} w_std g0")
    return out


def cayley(X: Matrix, n: int) -> Matrix:
    """h = (2 J X + I)(2 J X - I)^{-1} for symmetric X of size 2n."""
    X = mat(X)
    if not mat_eq(X, transpose(X)):
        raise SymplecticError("Cayley transform needs a symmetric matrix")
    JX2 = scale(mul(J(n), X), 2)
    den = sub(JX2, eye(2 * n))
    if det(den) == 0:
        raise SymplecticError("Cayley pole: det(2JX - I) = 0")
    h = mul(add(JX2, eye(2 * n)), inverse(den))
    if not is_symplectic(h, n):
        raise SymplecticError("Cayley image failed the form identity")
    return h


def cayley_inv(h: Matrix, n: int) -> Matrix:
    """X = (1/2) J (I - h)^{-1} (I + h); inverse to cayley on its domain."""
    h = mat(h)
    I = eye(2 * n)
    den = sub(I, h)
    if det(den) == 0:
        raise SymplecticError("Cayley pole: h has eigenvalue 1")
    X = scale(mul(mul(J(n), inverse(den)), add(I, h)), Fraction(1, 2))
    if not mat_eq(X, transpose(X)):
        raise SymplecticError("cayley_inv produced a non-symmetric matrix")
    return X


def n_std(X: Matrix, n: int) -> Matrix:
    X = mat(X)
    I = eye(2 * n)
    return block([[I, X], [zeros(2 * n), I]])


def siegel_factorize(X: Matrix, n: int):
    """w_std n_std(X) = p_std * g0 (h, I) g0^{-1} with h = cayley(X).

    Returns (p_std, h).  p_std lies in the standard Siegel parabolic (its
    inverse has vanishing lower-left 2n x 2n block) and its Levi block is
    diag((1/2)(h^t - I), 2 (h - I)^{-1}).
    """
    h = cayley(X, n)
    std = standard_elements(n)
    emb = doubling_embed(h, eye(2 * n), n)
    rhs = mul(mul(std["g0"], emb), std["g0_inv"])
    p_std = mul(mul(std["w_std"], n_std(X, n)), inverse(rhs))
    # sanity: the factorization identity itself
    lhs = mul(std["w_std"], n_std(X, n))
    if not mat_eq(lhs, mul(p_std, rhs)):
        raise SymplecticError("Siegel factorization identity failed")
    p_inv = inverse(p_std)
    for i in range(2 * n, 4 * n):
        for j in range(2 * n):
            if p_inv[i][j] != 0:
                raise SymplecticError("p_std^{-1} lower-left block is not zero")
    return p_std, h


def levi_block_of_p_std(h: Matrix, n: int) -> Matrix:
    """diag((1/2)(h^t - I), 2 (h - I)^{-1}): the Levi part of p_std."""
    I = eye(2 * n)
    top = scale(sub(transpose(mat(h)), I), Fraction(1, 2))
    bot = scale(inverse(sub(mat(h), I)), 2)
    z = zeros(2 * n)
    return block([[top, z], [z, bot]])


def abelianization_delta(A: Matrix, n: int, p: int | None = None):
    """(det A, |det A|^{2n+1}) -- the delta_P character on the Levi.

    For rational input and a prime p, the modulus is returned as the exact
    power q^{-(2n+1) ord_p(det A)}.
    """
    A = mat(A)
    d = det(A)
    if d == 0:
        raise SymplecticError("singular Levi block")
    if p is None:
        return d, None
    v = 0
    num, den = d.numerator, d.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return d, Fraction(p) ** (-(2 * n + 1) * v)


def sp_order(n: int, q: int, mode: str = "formula"):
    """|Sp_2n(F_q)| and c0 = |Sp_2n(F_q)|/q^{dim} = prod (1 - q^{-2i}).

    mode='bruteforce' enumerates Sp_2 = SL_2 over F_q directly (n = 1,
    q <= 7 budget).
    """
    if mode == "formula":
        order = q ** (n * n)
        for i in range(1, n + 1):
            order *= q ** (2 * i) - 1
    elif mode == "bruteforce":
        if n != 1 or q > 7:
            raise SymplecticError("bruteforce budget is n = 1, q <= 7")
        order = 0
        for a in range(q):
            for b in range(q):
                for c in range(q):
                    for d in range(q):
                        if (a * d - b * c) % q == 1:
                            order += 1
    else:
        raise SymplecticError(f"unknown mode {mode}")
    c0 = Fraction(order, q ** (n * (2 * n + 1)))
    return order, c0


def c0_constant(n: int, q: int) -> Fraction:
    """prod_{i=1..n} (1 - q^{-2i}), the Cayley Jacobian constant."""
    out = Fraction(1)
    for i in range(1, n + 1):
        out *= 1 - Fraction(1, q) ** (2 * i)
    return out


def random_symplectic(n: int, rng, entry_range=3) -> Matrix:
    """Exact random symplectic element via the Cayley transform of a random
    symmetric integral matrix (resampled off the singular branch)."""
    while True:
        X = [[0] * (2 * n) for _ in range(2 * n)]
        for i in range(2 * n):
            for j in range(i, 2 * n):
                X[i][j] = X[j][i] = rng.randint(-entry_range, entry_range)
        try:
            return cayley(X, n)
        except SymplecticError:
            continue
