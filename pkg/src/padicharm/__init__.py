"""padicharm: p-adic harmonic analysis on GL(1) and extended symplectic groups.

Submodules
----------
padic       finite-precision Q_p, additive character, unit groups
ratfunc     rational functions of z = q^{-s}: residues, substitutions,
            partial fractions
abelian     unit characters and the abelian L/epsilon/gamma/beta factors,
            with a Tate-integral oracle
fxspace     shell-function model on F^x, Mellin transform/inversion, the
            eta kernel, the Fourier operator on the plus space, and the
            functional-equation / Paley-Wiener verifiers
quadform    Hilbert symbol, Hasse invariant, Clifford invariant
pvszeta     determinant-fiber enumeration over Sym_m(Z/p^k), lattice test
            functions and their Fourier transforms, zeta integrals, and the
            prehomogeneous functional-equation verifier
symplectic  exact rational doubling geometry: embeddings, Cayley transform,
            Siegel factorization, group orders
gdist       the kernel Phi on GL_1 x Sp_2n, the n = 0 Fourier operator,
            shell Fourier coefficients
cli         command-line verbs and machine-readable reports
"""

__version__ = "0.1.0"
