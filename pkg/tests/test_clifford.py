import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from monopolekit import clifford as cl
from monopolekit.errors import NotSelfDual

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec4 = arrays(float, 4, elements=finite)
vec6 = arrays(float, 6, elements=finite)
vec3 = arrays(float, 3, elements=finite)
cplx2 = st.tuples(finite, finite, finite, finite).map(
    lambda t: np.array([t[0] + 1j * t[1], t[2] + 1j * t[3]]))


def e(mu):
    return cl.basis_vector(mu)


def anticomm_plus(u, v):
    gu, gv = cl.gamma_plus(u), cl.gamma_plus(v)
    return gu.conj().T @ gv + gv.conj().T @ gu


def test_gamma_plus_examples():
    assert np.array_equal(cl.gamma_plus(e(0)), np.eye(2))
    assert np.allclose(anticomm_plus(e(1), e(1)), 2 * np.eye(2), atol=0)
    assert np.allclose(anticomm_plus(e(0), e(1)), 0, atol=0)


def test_gamma_examples():
    assert np.array_equal(cl.gamma(np.zeros(4)), np.zeros((4, 4)))
    g0 = cl.gamma(e(0))
    assert np.array_equal(g0[:2, 2:], -np.eye(2)) and np.array_equal(g0[2:, :2], np.eye(2))
    assert np.array_equal(g0 @ g0, -np.eye(4))


@given(vec4, vec4)
def test_clifford_identity(u, v):
    scale = 1 + np.abs(u).max() * np.abs(v).max()
    assert np.max(np.abs(anticomm_plus(u, v) - 2 * np.dot(u, v) * np.eye(2))) <= 1e-13 * scale
    full = cl.gamma(u) @ cl.gamma(v) + cl.gamma(v) @ cl.gamma(u)
    assert np.max(np.abs(full + 2 * np.dot(u, v) * np.eye(4))) <= 1e-13 * scale


@given(vec4.filter(lambda u: np.linalg.norm(u) > 1e-3))
def test_unit_vector_squares_to_minus_one(u):
    u = u / np.linalg.norm(u)
    g = cl.gamma(u)
    assert np.max(np.abs(g @ g + np.eye(4))) <= 1e-14


def test_Gamma_examples():
    asd = cl.two_form(e01=1, e23=-1)
    assert np.array_equal(cl.Gamma_plus(asd), np.zeros((2, 2)))
    sd = cl.two_form(e01=1, e23=1)
    G = cl.Gamma(sd)
    assert np.allclose(G[:2, :2] + G[:2, :2].conj().T, 0, atol=0)
    assert abs(np.trace(G[:2, :2])) == 0
    assert np.array_equal(G[2:, 2:], np.zeros((2, 2)))
    assert np.array_equal(cl.Gamma(np.zeros(6)), np.zeros((4, 4)))


def test_Gamma_on_wedge_is_half_commutator():
    for i, j in cl.PAIRS:
        F = cl.wedge(e(i), e(j))
        gi, gj = cl.gamma(e(i)), cl.gamma(e(j))
        assert np.allclose(cl.Gamma(F), 0.5 * (gi @ gj - gj @ gi), atol=1e-15)


def test_selfdual_basis_images_are_pauli():
    for k, b in enumerate(cl.SELFDUAL_BASIS):
        assert np.allclose(cl.Gamma_plus(b), -2j * cl.SIGMA[k], atol=1e-15)


@given(vec3, vec3)
def test_Gamma_plus_characterisation(a, b):
    A = cl.Gamma_plus(a @ cl.SELFDUAL_BASIS)
    assert np.max(np.abs(A + A.conj().T)) <= 1e-13
    assert abs(np.trace(A)) <= 1e-13
    assert np.max(np.abs(cl.Gamma_plus(b @ cl.ANTISELFDUAL_BASIS))) == 0.0
    assert np.max(np.abs(cl.Gamma(a @ cl.SELFDUAL_BASIS)[2:, 2:])) == 0.0


def test_selfdual_split_examples():
    Fp, Fm = cl.selfdual_split(cl.two_form(e01=1))
    assert np.allclose(Fp, 0.5 * cl.two_form(e01=1, e23=1))
    assert np.allclose(Fm, 0.5 * cl.two_form(e01=1, e23=-1))
    sd = cl.SELFDUAL_BASIS[1]
    Fp, Fm = cl.selfdual_split(sd)
    assert np.array_equal(Fp, sd) and not Fm.any()


@given(vec6)
def test_selfdual_split_properties(F):
    Fp, Fm = cl.selfdual_split(F)
    assert np.allclose(Fp + Fm, F, rtol=1e-15, atol=1e-15)
    assert np.allclose(cl.hodge_star(Fp), Fp) and np.allclose(cl.hodge_star(Fm), -Fm)
    assert abs(cl.form_inner(Fp, Fm)) <= 1e-14 * (1 + np.dot(F, F))


def test_hodge_star_is_involution():
    assert np.array_equal(cl._STAR @ cl._STAR, np.eye(6))


def test_two_form_antisymmetric_names():
    assert np.array_equal(cl.two_form(e31=1), cl.two_form(e13=-1))


def test_quadratic_moment_examples():
    assert not cl.quadratic_moment(np.zeros(2)).any()
    assert np.array_equal(cl.quadratic_moment(np.array([1, 0])), np.diag([0.5, -0.5]))


@given(cplx2)
def test_quadratic_moment_properties(psi):
    Q = cl.quadratic_moment(psi)
    assert abs(np.trace(Q)) <= 1e-15 * (1 + np.vdot(psi, psi).real)
    assert np.array_equal(Q, Q.conj().T)
    # |(psi psi^*)_0|^2 = |psi|^4 / 2
    n2 = np.vdot(psi, psi).real
    assert np.isclose(np.sum(np.abs(Q) ** 2), n2**2 / 2, rtol=1e-12, atol=1e-300)


@given(cplx2)
def test_gamma_plus_inverse_round_trip(psi):
    T = 2 * cl.quadratic_moment(psi)
    F = cl.gamma_plus_inverse(T)
    _, Fm = cl.selfdual_split(F)
    assert np.max(np.abs(Fm)) <= 1e-13 * (1 + np.abs(T).max())
    assert np.max(np.abs(cl.Gamma_plus(F) - T)) <= 1e-13 * (1 + np.abs(T).max())


def test_sw_pointwise_residual():
    assert not cl.sw_pointwise_residual(np.zeros(6), np.zeros(2)).any()
    psi = np.array([1.0, 0.0])
    F = cl.gamma_plus_inverse(2 * cl.quadratic_moment(psi))
    assert np.max(np.abs(cl.sw_pointwise_residual(F, psi))) <= 1e-15
    R = cl.sw_pointwise_residual(cl.SELFDUAL_BASIS[2] * 1j, psi)
    assert np.linalg.norm(R) > 0
    with pytest.raises(NotSelfDual):
        cl.sw_pointwise_residual(cl.two_form(e01=1), psi)


def test_kaehler_gamma_examples():
    f = 0.3 - 0.2j
    assert np.allclose(cl.kaehler_Gamma(0, 0, f), 2 * np.diag([-1j * f, 1j * f]), atol=0)
    assert not cl.kaehler_Gamma(0, 0, 0).any()


@given(cplx2, cplx2)
def test_kaehler_block_model_agrees(x, y):
    l20, l02, f = x[0], x[1], y[0]
    lhs = cl.to_kaehler_frame(cl.Gamma_plus(cl.kaehler_two_form(l20, l02, f)))
    assert np.max(np.abs(lhs - cl.kaehler_Gamma(l20, l02, f))) <= 1e-13 * (1 + abs(l20) + abs(l02) + abs(f))


def test_kaehler_frame_unitary_and_unit_forms():
    U = cl.KAEHLER_FRAME
    assert np.allclose(U @ U.conj().T, np.eye(2), atol=1e-15)
    for form in (cl.UNIT_20, cl.UNIT_02):
        assert np.isclose(np.vdot(form, form).real, 1.0)
    assert np.allclose(cl.selfdual_split(cl.UNIT_20)[1], 0)


def test_kaehler_sw_system_examples():
    phi = 0.7 + 0.2j
    assert cl.kaehler_sw_system(0, 0, -abs(phi) ** 2, phi, 0) == (0, 0, 0)
    assert cl.kaehler_sw_system(0, 0, 0, 0, 0) == (0, 0, 0)
    alpha = -0.3 + 0.4j
    r1, r2, _ = cl.kaehler_sw_system(0, 0, 0, phi, alpha)
    assert np.isclose(abs(r1), abs(phi) * abs(alpha)) and np.isclose(abs(r2), abs(phi) * abs(alpha))
