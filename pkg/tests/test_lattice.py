from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monopolekit import lattice as lt
from monopolekit.errors import (DimensionMismatch, IndexOutOfRange, OnWall,
                                PreconditionViolated, WallPosition)

CAT = lt.catalog()
CP2 = CAT["cp2"]
X2 = lt.blowup_surface(CP2, 2)
H, E1, E2 = (X2.lattice.basis(i) for i in range(3))

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=9)
seeds = st.integers(0, 2**32 - 1)
ks = st.integers(0, 9)


def test_pair_examples():
    h = CP2.lattice.basis(0)
    assert lt.pair(h, h) == 1
    assert lt.pair(E1, E1) == -1
    c = 3 * H + E1 - E2
    assert lt.pair(c, c) == 7
    with pytest.raises(DimensionMismatch):
        lt.pair(h, E1)


@given(st.lists(fractions, min_size=9, max_size=9), st.fractions(-5, 5, max_denominator=5))
def test_pair_symmetric_bilinear(xs, a):
    lat = X2.lattice
    u, v, w = (lat.real(xs[3 * i: 3 * i + 3]) for i in range(3))
    assert lt.pair(u, v) == lt.pair(v, u)
    assert lt.pair(a * u + v, w) == a * lt.pair(u, w) + lt.pair(v, w)


def test_lattice_validation():
    with pytest.raises(ValueError):
        lt.CohomologyLattice([[1, 2], [0, 1]])
    with pytest.raises(ValueError):
        lt.CohomologyLattice([[1, 1], [1, 1]])
    lat = lt.CohomologyLattice([[0, 1], [1, 0]])
    assert lat.signature_pair == (1, 1) and lat.determinant == -1


def test_characteristic_examples():
    h = CP2.lattice.basis(0)
    assert lt.is_characteristic(3 * h) and not lt.is_characteristic(2 * h)
    for s in CAT.values():
        assert lt.is_characteristic(s.canonical)


def test_expected_dimension_examples():
    h = CP2.lattice.basis(0)
    assert lt.expected_dimension(3 * h, CP2) == 0
    assert lt.expected_dimension(h, CP2) == -2
    assert lt.expected_dimension(3 * H + E1 - E2, X2) == 0
    assert not lt.is_almost_canonical(h, CP2)
    with pytest.warns(UserWarning):
        lt.expected_dimension(2 * h, CP2)


@given(ks)
def test_blowup_invariants(k):
    s = lt.blowup_surface(CP2, k)
    assert s.lattice.rank == 1 + k and s.euler == 3 + k and s.signature == 1 - k
    assert s.lattice.signature_pair == (1, k)
    assert lt.is_characteristic(s.canonical) and lt.is_almost_canonical(s.canonical, s)
    assert s.canonical.coords == (-3,) + (1,) * k


def test_blowup_examples():
    assert X2.lattice.form == ((1, 0, 0), (0, -1, 0), (0, 0, -1))
    assert X2.canonical == -3 * H + E1 + E2 and (X2.euler, X2.signature) == (5, -1)
    s0 = lt.blowup_surface(CP2, 0)
    assert (s0.lattice, s0.canonical, s0.euler, s0.signature) == \
        (CP2.lattice, CP2.canonical, CP2.euler, CP2.signature)


def test_every_catalog_blowup_almost_canonical():
    for s_min in CAT.values():
        for k in range(4):
            s = lt.blowup_surface(s_min, k)
            assert lt.expected_dimension(s.canonical, s) == 0
            if s_min.b_plus == 1:
                assert s.lattice.signature_pair == (1, s.lattice.rank - 1)


def test_class_cI_examples():
    assert lt.class_cI(X2, {1}) == 3 * H + E1 - E2
    assert lt.class_cI(X2, ()) == -X2.canonical
    with pytest.raises(IndexOutOfRange):
        lt.class_cI(X2, {3})
    for k in range(10):
        s = lt.blowup_surface(CP2, k)
        assert all(lt.is_almost_canonical(lt.class_cI(s, I), s) for I in lt.all_subsets(k))


def test_positive_cone_examples():
    h = X2.lattice.real((1, 0, 0))
    assert lt.positive_cone_component(h, h) is lt.ConeComponent.PLUS
    assert lt.positive_cone_component(E1.to_real(), h) is lt.ConeComponent.NOT_IN_CONE
    assert lt.positive_cone_component(-h, h) is lt.ConeComponent.MINUS
    with pytest.raises(PreconditionViolated):
        lt.positive_cone_component(h, E1.to_real())
    # light-cone lemma: a nonzero k with k^2 >= 0 pairs nonzero with every u in the cone
    q = CAT["quadric"].lattice
    k = q.real((1, 0))
    for u in ((1, 1), (2, 1), (-1, -3)):
        assert lt.positive_cone_component(q.real(u), k) is not lt.ConeComponent.NOT_IN_CONE


def test_chamber_side_examples():
    k = X2.lattice.real((1, 0, 0))
    u = X2.lattice.real((3, 1, 1))
    assert lt.chamber_side(u, H, k) is lt.ChamberSide.POSITIVE
    c = H + 3 * E1
    assert lt.chamber_side(u, c, k) is lt.ChamberSide.WALL
    assert lt.chamber_side(-u, H, k) is lt.ChamberSide.NOT_IN_K_PLUS
    s = lt.blowup_surface(CAT["positive_line"], 2)
    Hn = lt.polarization_class(s, s.minimal_polarization, 50).to_real()
    cI = lt.class_cI(s, {1})
    assert lt.chamber_side(Hn, cI, Hn) is lt.ChamberSide.NEGATIVE
    assert X2.pullback((1,)) == H


@given(st.lists(fractions, min_size=3, max_size=3), st.fractions(Fraction(1, 50), 50))
def test_chamber_side_ray_invariant(xs, lam):
    k = X2.lattice.real((1, 0, 0))
    u = X2.lattice.real(xs)
    c = 3 * H + E1 - E2
    assert lt.chamber_side(lam * u, c, k) is lt.chamber_side(u, c, k)


def test_same_chamber():
    k = X2.lattice.real((1, 0, 0))
    u = X2.lattice.real((3, 1, 1))
    c = H - 2 * E1
    assert lt.same_chamber(u, 2 * u, c, k)
    v = X2.lattice.real((3, -2, 0))
    assert lt.pair(c, u) > 0 > lt.pair(c, v)
    assert not lt.same_chamber(u, v, c, k)
    with pytest.raises(OnWall):
        lt.same_chamber(u, v, H + 3 * E1, k)


def test_wall_exists_iff_negative_square():
    assert lt.has_wall(H - 2 * E1)
    assert not lt.has_wall(3 * H + E1 - E2)
    assert lt.every_metric_c_good(3 * H + E1 - E2)
    assert not lt.invariant_well_defined(H - 2 * E1, X2)


def test_polarization_examples():
    s = lt.blowup_surface(CAT["positive_line"], 2)
    Hmin = s.minimal_polarization
    for n in range(1, 10):
        Hn = lt.polarization_class(s, Hmin, n)
        assert lt.pair(lt.class_cI(s, {1}), Hn) == -n
        for I in lt.all_subsets(2):
            assert lt.pair(lt.class_cI(s, I), Hn) == lt.cI_polarization_pairing(s, I, Hmin, n)
    for I in lt.all_subsets(2):
        n0 = lt.polarization_threshold(s, I, Hmin)
        pairs = [lt.cI_polarization_pairing(s, I, Hmin, n) for n in range(1, 20)]
        assert n0 == 1 + next(i for i, v in enumerate(pairs) if v < 0)
    assert lt.polarization_threshold(X2, {1}, X2.minimal_polarization) is None


@given(seeds, st.integers(1, 8))
def test_claim_never_fails(seed, k):
    rng = np.random.default_rng(seed)
    for s_min in (CP2, CAT["general_type"], CAT["elliptic"]):
        s = lt.blowup_surface(s_min, k)
        kmin = s.minimal_canonical.to_real()
        omega = lt.random_rational_class(s.lattice, rng)
        I = tuple(i for i in range(1, k + 1) if rng.random() < 0.5)
        if lt.pair(omega, omega) > 0 and lt.pair(omega, kmin) < 0:
            omega = -omega
        if lt.pair(omega, omega) > 0 and lt.pair(omega, kmin) > 0:
            v = lt.claim_check(s, omega, I)
            assert v.holds
            assert v.inequality_sum == -2 * v.omega_min_dot_kmin
            assert v.inequality_I == v.cI_pairing and v.inequality_Ibar == v.cIbar_pairing
        else:
            with pytest.raises(PreconditionViolated):
                lt.claim_check(s, omega, I)


def test_claim_rejection_carries_certificate():
    s = lt.blowup_surface(CP2, 2)
    # omega = H: both c_I . H = 3 > 0, but H . Kmin = -3 < 0 so omega is in K-
    with pytest.raises(PreconditionViolated) as exc:
        lt.claim_check(s, H.to_real(), {1})
    cert = exc.value.certificate
    assert cert["sum_nonnegative_forces_omega_min_dot_kmin_nonpositive"]
    assert Fraction(cert["omega_min_dot_kmin"]) <= 0


def test_hitchin_examples():
    h = CP2.lattice.basis(0)
    assert lt.hitchin_predicate(CP2, h.to_real())
    s1 = lt.blowup_surface(CP2, 1)
    w = s1.lattice.real((4, -1))
    assert lt.pair(s1.canonical, w) == -11 and lt.hitchin_predicate(s1, w)
    e = CAT["elliptic"]
    w0 = e.lattice.real((4,) + (-1,) * 9)
    assert lt.pair(e.canonical, w0) == 3 and not lt.hitchin_predicate(e, w0)
    q = CAT["quadric"]
    assert lt.hitchin_predicate(q, q.lattice.real((1, 1)))
    # K.omega = 0 with omega^2 > 0 needs K^2 < 0, e.g. ten blow-ups of CP^2
    s10 = lt.blowup_surface(CP2, 10)
    w = s10.lattice.real((10,) + (-3,) * 10)
    assert lt.pair(w, w) == 10 and lt.pair(s10.canonical, w) == 0
    assert not lt.hitchin_predicate(s10, w)


def test_step1_examples():
    h = CP2.lattice.basis(0)
    cert = lt.step1_emptiness_certificate(CP2, 3 * h, h.to_real())
    assert cert.eps == -1 and cert.c1M_dot_omega == -3 and cert.empty and cert.chain()["holds"]
    with pytest.raises(WallPosition):
        lt.step1_emptiness_certificate(X2, H + E1 + E2, X2.lattice.real((2, 1, 1)))


@given(seeds, ks)
def test_step1_always_certifies(seed, k):
    rng = np.random.default_rng(seed)
    s = lt.blowup_surface(CP2, k)
    omega = lt.polarization_class(s, s.minimal_polarization, 4).to_real()
    assert lt.hitchin_predicate(s, omega)
    c = lt.random_characteristic_class(s, rng)
    if lt.pair(c, omega) == 0:
        with pytest.raises(WallPosition):
            lt.step1_emptiness_certificate(s, c, omega)
        return
    cert = lt.step1_emptiness_certificate(s, c, omega)
    assert cert.empty and cert.chain()["holds"]
