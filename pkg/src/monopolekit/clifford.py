"""Pointwise Spin^c(4) linear algebra on Euclidean R^4.

Conventions used throughout the package:

* cotangent vectors are length-4 arrays in the orthonormal coframe e0..e3;
* 2-forms are length-6 arrays indexed by ``PAIRS`` (e01, e02, e03, e12, e13,
  e23), with the basis 2-forms orthonormal;
* orientation e0^e1^e2^e3, so the self-dual basis is
  e01+e23, e02+e31, e03+e12;
* a spinor on Sigma = Sigma+ (+) Sigma- has 4 complex components, the first
  two being the positive half.

All functions are pure and accept complex input (the C-linear extensions).
"""

import numpy as np

from .errors import NotSelfDual

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_INDEX = {p: k for k, p in enumerate(PAIRS)}

ID2 = np.eye(2, dtype=complex)
SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# Hodge star on the PAIRS basis: *e01 = e23, *e02 = -e13, *e03 = e12, and back.
_STAR = np.zeros((6, 6))
for _src, _dst, _sgn in [(0, 5, 1), (1, 4, -1), (2, 3, 1), (5, 0, 1), (4, 1, -1), (3, 2, 1)]:
    _STAR[_dst, _src] = _sgn

SELFDUAL_BASIS = np.array(
    [
        [1, 0, 0, 0, 0, 1],   # e01 + e23
        [0, 1, 0, 0, -1, 0],  # e02 + e31
        [0, 0, 1, 1, 0, 0],   # e03 + e12
    ],
    dtype=float,
)
ANTISELFDUAL_BASIS = np.array(
    [
        [1, 0, 0, 0, 0, -1],
        [0, 1, 0, 0, 1, 0],
        [0, 0, 1, -1, 0, 0],
    ],
    dtype=float,
)


def basis_vector(mu, dim=4):
    e = np.zeros(dim)
    e[mu] = 1.0
    return e


def two_form(**components):
    """Build a 2-form from keyword components, e.g. ``two_form(e01=1, e23=-1)``."""
    F = np.zeros(6, dtype=complex)
    for name, value in components.items():
        i, j = int(name[1]), int(name[2])
        if i < j:
            F[PAIR_INDEX[(i, j)]] += value
        else:
            F[PAIR_INDEX[(j, i)]] -= value
    return F if np.iscomplexobj(F) and np.any(F.imag) else F.real


def wedge(u, v):
    """Wedge product of two 1-forms as a 6-component 2-form."""
    u = np.asarray(u)
    v = np.asarray(v)
    return np.array([u[i] * v[j] - u[j] * v[i] for i, j in PAIRS])


def gamma_plus(u):
    """Clifford map Lambda^1 (x) C -> Hom(Sigma+, Sigma-).

    Fixed model: e0 -> identity, ek -> i sigma_k.
    """
    u = np.asarray(u)
    return u[0] * ID2 + 1j * np.einsum("k,kab->ab", u[1:4], SIGMA)


def gamma(u):
    """Clifford multiplication by ``u`` on the full spinor space (4x4)."""
    g = gamma_plus(u)
    out = np.zeros((4, 4), dtype=complex)
    out[:2, 2:] = -g.conj().T
    out[2:, :2] = g
    return out


GAMMA = np.array([gamma(basis_vector(mu)) for mu in range(4)])

# Gamma on the basis 2-forms: Gamma(ei^ej) = [gamma(ei), gamma(ej)] / 2.
GAMMA2 = np.array(
    [0.5 * (GAMMA[i] @ GAMMA[j] - GAMMA[j] @ GAMMA[i]) for i, j in PAIRS]
)


def Gamma(F):
    """C-linear extension of u^v -> [gamma(u), gamma(v)]/2 to all 2-forms."""
    return np.einsum("p,pab->ab", np.asarray(F), GAMMA2)


def Gamma_plus(F):
    """The Sigma+ block of ``Gamma(F)``."""
    return Gamma(F)[:2, :2]


def hodge_star(F):
    return _STAR @ np.asarray(F)


def selfdual_split(F):
    """Return ``(F+, F-)`` with ``*F+ = F+``, ``*F- = -F-`` and ``F+ + F- = F``."""
    F = np.asarray(F)
    Fp = 0.5 * (F + hodge_star(F))
    return Fp, F - Fp


def form_inner(F, G):
    """Hermitian inner product of 2-forms (basis e_ij orthonormal)."""
    return np.vdot(F, G)


def quadratic_moment(psi):
    """Trace-free part of psi (x) psi^*, i.e. psi psi^* - |psi|^2/2 Id.

    Built entrywise so the result is Hermitian and trace-free exactly.
    """
    a, b = np.asarray(psi, dtype=complex)
    d = 0.5 * (abs(a) ** 2 - abs(b) ** 2)
    off = a * np.conj(b)
    return np.array([[d, off], [np.conj(off), -d]], dtype=complex)


def gamma_plus_inverse(T):
    """Self-dual (complex) 2-form F with ``Gamma_plus(F) == T``.

    ``T`` must be trace free; Gamma_plus(e01+e23, e02+e31, e03+e12) equals
    -2i times (sigma_1, sigma_2, sigma_3).
    """
    T = np.asarray(T, dtype=complex)
    t = np.array([0.5 * np.trace(T @ s) for s in SIGMA])
    coeffs = 1j * t / 2.0
    return coeffs @ SELFDUAL_BASIS


def sw_pointwise_residual(Fplus, psi, tol=1e-12):
    """Gamma(F+)|Sigma+ - 2 (psi psi^*)_0 at a single point.

    ``Fplus`` is the curvature component itself (purely imaginary for a
    U(1) connection); it must be self-dual up to ``tol``.
    """
    Fplus = np.asarray(Fplus)
    _, Fminus = selfdual_split(Fplus)
    if np.linalg.norm(Fminus) > tol:
        raise NotSelfDual(f"anti-self-dual part has norm {np.linalg.norm(Fminus):.3e}")
    return Gamma_plus(Fplus) - 2.0 * quadratic_moment(psi)


# Kaehler structure on R^4 = C^2 with z1 = x0 + i x1, z2 = x2 + i x3.
KAEHLER_FORM = SELFDUAL_BASIS[0]
# dz1^dz2 / 2 and its conjugate: unit-norm generators of Lambda^{2,0}, Lambda^{0,2}.
UNIT_20 = 0.5 * (SELFDUAL_BASIS[1] + 1j * SELFDUAL_BASIS[2])
UNIT_02 = 0.5 * (SELFDUAL_BASIS[1] - 1j * SELFDUAL_BASIS[2])

# Unitary change of frame Sigma+ -> Lambda^00 (+) Lambda^02 (unit (0,2)-form).
# Determined up to an overall phase by requiring kaehler_Gamma to agree with
# Gamma_plus exactly; see tests/test_clifford.py.
KAEHLER_FRAME = np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2.0)


def kaehler_two_form(l20, l02, f):
    """The self-dual complex 2-form l20*UNIT_20 + l02*UNIT_02 + f*omega."""
    return l20 * UNIT_20 + l02 * UNIT_02 + f * KAEHLER_FORM


def kaehler_Gamma(l20, l02, f):
    """Gamma on Lambda^2_+ (x) C written on Lambda^00 (+) Lambda^02.

    ``l20``, ``l02`` are coefficients against the unit-norm (2,0) and (0,2)
    forms and ``f`` the coefficient of the Kaehler form.
    """
    return 2.0 * np.array([[-1j * f, -l20], [l02, 1j * f]], dtype=complex)


def to_kaehler_frame(endo):
    """Conjugate an endomorphism of Sigma+ into the Lambda^00 (+) Lambda^02 frame."""
    U = KAEHLER_FRAME
    return U @ endo @ U.conj().T


def kaehler_sw_system(F20, F02, mean_curvature, phi, alpha):
    """Pointwise residuals of the algebraic monopole equations on a Kaehler surface.

    ``phi`` is the Lambda^00 component, ``alpha`` the Lambda^02 component (unit
    frame), ``mean_curvature`` the real number i*Lambda(F_a).  Returns

        (F20 + phi*conj(alpha), F02 - alpha*conj(phi),
         mean_curvature + |phi|^2 - |alpha|^2).

    The derivative equation dbar(phi) = i Lambda d(alpha) has no pointwise
    content and lives with the grid operators.
    """
    return (
        F20 + phi * np.conj(alpha),
        F02 - alpha * np.conj(phi),
        mean_curvature + abs(phi) ** 2 - abs(alpha) ** 2,
    )
