"""Exact arithmetic on the integral cohomology lattice of a 4-manifold.

Classes are coordinate vectors against a fixed basis of H^2(X, Z); the cup
product is ``u^T Q v`` for the integer intersection matrix ``Q``.  Integral
classes use ``int`` coordinates, real (de Rham) classes ``Fraction``
coordinates, so every pairing, and in particular wall membership
``c . u == 0``, is decided exactly.

Chamber operations assume b2+ = 1 and refuse lattices where it fails.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import floor
from typing import Iterable, Optional, Sequence

from .errors import (
    DegenerateReference,
    DimensionMismatch,
    IndexOutOfRange,
    OnWall,
    PreconditionViolated,
    WallPosition,
)


def _congruence_pivots(form):
    """Diagonal of a symmetric matrix after exact congruence diagonalisation."""
    A = [[Fraction(x) for x in row] for row in form]
    n = len(A)
    live = list(range(n))
    pivots = []
    while live:
        p = next((i for i in live if A[i][i] != 0), None)
        if p is None:
            pair = next(((i, j) for i in live for j in live if i < j and A[i][j] != 0), None)
            if pair is None:
                pivots.extend([Fraction(0)] * len(live))
                break
            i, j = pair
            # e_i -> e_i + e_j makes the diagonal entry 2 A_ij != 0
            for k in range(n):
                A[i][k] += A[j][k]
            for k in range(n):
                A[k][i] += A[k][j]
            p = i
        d = A[p][p]
        live.remove(p)
        for i in live:
            f = A[i][p] / d
            if f:
                for k in range(n):
                    A[i][k] -= f * A[p][k]
                for k in range(n):
                    A[k][i] -= f * A[k][p]
        pivots.append(d)
    return pivots


def _determinant(form):
    A = [[Fraction(x) for x in row] for row in form]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                for k in range(c, n):
                    A[r][k] -= f * A[c][k]
    return det


@dataclass(frozen=True)
class CohomologyLattice:
    form: tuple
    labels: tuple = None

    def __post_init__(self):
        form = tuple(tuple(int(x) for x in row) for row in self.form)
        n = len(form)
        if n == 0 or any(len(row) != n for row in form):
            raise ValueError("intersection form must be a non-empty square matrix")
        if any(form[i][j] != form[j][i] for i in range(n) for j in range(n)):
            raise ValueError("intersection form must be symmetric")
        if _determinant(form) == 0:
            raise ValueError("intersection form must be nondegenerate")
        labels = tuple(self.labels) if self.labels else tuple(f"x{i}" for i in range(n))
        if len(labels) != n:
            raise ValueError("need one label per basis vector")
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "labels", labels)

    @property
    def rank(self):
        return len(self.form)

    @property
    def determinant(self):
        return int(_determinant(self.form))

    @property
    def signature_pair(self):
        """(b2+, b2-)"""
        pivots = _congruence_pivots(self.form)
        return sum(1 for d in pivots if d > 0), sum(1 for d in pivots if d < 0)

    @property
    def b_plus(self):
        return self.signature_pair[0]

    @property
    def signature(self):
        bp, bm = self.signature_pair
        return bp - bm

    def is_unimodular(self):
        return abs(self.determinant) == 1

    def cls(self, coords):
        return CohClass(self, tuple(coords))

    def real(self, coords):
        return RealClass(self, tuple(coords))

    def basis(self, i):
        return self.cls(1 if j == i else 0 for j in range(self.rank))

    def zero(self):
        return self.cls([0] * self.rank)

    def __add__(self, other):
        """Orthogonal direct sum."""
        n, m = self.rank, other.rank
        form = [list(r) + [0] * m for r in self.form] + [[0] * n + list(r) for r in other.form]
        return CohomologyLattice(form, self.labels + other.labels)


@dataclass(frozen=True)
class _Element:
    lattice: CohomologyLattice
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.lattice.rank:
            raise DimensionMismatch(
                f"{len(self.coords)} coordinates for a rank {self.lattice.rank} lattice"
            )
        object.__setattr__(self, "coords", tuple(self._coerce(x) for x in self.coords))

    _coerce = staticmethod(Fraction)

    def _combine(self, other, op):
        if not isinstance(other, _Element):
            return NotImplemented
        if other.lattice != self.lattice:
            raise DimensionMismatch("classes live on different lattices")
        coords = tuple(op(a, b) for a, b in zip(self.coords, other.coords))
        if isinstance(self, CohClass) and isinstance(other, CohClass):
            return CohClass(self.lattice, coords)
        return RealClass(self.lattice, coords)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self):
        return type(self)(self.lattice, tuple(-a for a in self.coords))

    def __mul__(self, scalar):
        if isinstance(scalar, int) and isinstance(self, CohClass):
            return CohClass(self.lattice, tuple(scalar * a for a in self.coords))
        if isinstance(scalar, (int, Fraction)):
            return RealClass(self.lattice, tuple(Fraction(scalar) * a for a in self.coords))
        return NotImplemented

    __rmul__ = __mul__

    def dot(self, other):
        return pair(self, other)

    def square(self):
        return pair(self, self)

    def is_zero(self):
        return all(a == 0 for a in self.coords)

    def __repr__(self):
        terms = [f"{a}*{l}" for a, l in zip(self.coords, self.lattice.labels) if a]
        return f"{type(self).__name__}({' + '.join(terms) or '0'})"


class CohClass(_Element):
    """Integral class."""

    _coerce = staticmethod(int)

    def to_real(self):
        return RealClass(self.lattice, self.coords)


class RealClass(_Element):
    """Real (rational) class, e.g. the period point of a metric."""


def pair(u, v):
    """Cup product u . v (exact)."""
    if u.lattice != v.lattice:
        raise DimensionMismatch("classes live on different lattices")
    Q = u.lattice.form
    total = 0
    for i, a in enumerate(u.coords):
        if a:
            row = Q[i]
            total += a * sum(q * b for q, b in zip(row, v.coords) if q)
    return total


def is_characteristic(c):
    """c . x == x . x (mod 2) for every basis vector x."""
    Q = c.lattice.form
    return all(
        (sum(q * a for q, a in zip(Q[i], c.coords)) - Q[i][i]) % 2 == 0
        for i in range(c.lattice.rank)
    )


@dataclass(frozen=True)
class SurfaceDescriptor:
    """Cohomological data of a (possibly blown-up) surface.

    ``minimal_canonical`` is the pull-back of the minimal model's canonical
    class and ``minimal_polarization`` the pull-back of an ample class on the
    minimal model; both are optional for surfaces used only in step-1 style
    checks.
    """

    lattice: CohomologyLattice
    euler: int
    signature: int
    canonical: CohClass
    exceptional: tuple = ()
    minimal_canonical: Optional[CohClass] = None
    minimal_polarization: Optional[CohClass] = None

    def __post_init__(self):
        object.__setattr__(self, "exceptional", tuple(self.exceptional))
        if self.lattice.signature != self.signature:
            raise ValueError(
                f"lattice signature {self.lattice.signature} != signature {self.signature}"
            )
        if self.canonical.lattice != self.lattice:
            raise DimensionMismatch("canonical class is on another lattice")
        if not is_characteristic(self.canonical):
            raise ValueError("canonical class must be characteristic")
        for i, Ei in enumerate(self.exceptional):
            for j, Ej in enumerate(self.exceptional):
                if pair(Ei, Ej) != (-1 if i == j else 0):
                    raise ValueError("exceptional classes must satisfy Ei.Ej = -delta_ij")
            for other in (self.minimal_canonical, self.minimal_polarization):
                if other is not None and pair(Ei, other) != 0:
                    raise ValueError("exceptional classes must be orthogonal to the minimal model")

    @property
    def k(self):
        return len(self.exceptional)

    @property
    def b_plus(self):
        return self.lattice.b_plus

    def exceptional_sum(self, indices=None):
        idx = range(1, self.k + 1) if indices is None else indices
        total = self.lattice.zero()
        for i in idx:
            total = total + self.exceptional[i - 1]
        return total

    def pullback(self, coords_min):
        """Pull back a class given in minimal-model coordinates (blow-up lattices only)."""
        coords = tuple(coords_min) + (0,) * self.k
        if len(coords) != self.lattice.rank:
            raise DimensionMismatch("class does not live on the minimal sublattice")
        return self.lattice.cls(coords)


def minimal_surface(form, euler, signature, canonical, polarization=None, labels=None):
    lat = CohomologyLattice(form, labels)
    K = lat.cls(canonical)
    H = lat.cls(polarization) if polarization is not None else None
    return SurfaceDescriptor(lat, euler, signature, K, (), K, H)


def catalog():
    """Minimal models used by the test suites and CLI.

    Besides CP^2 and S^2 x S^2 the entries are abstract stand-ins that carry
    only the data the chamber argument uses: an odd lattice with b2+ = 1, a
    characteristic canonical class with K^2 = 2e + 3 sigma and K^2 + e = 0
    mod 12, and an ample class.
    """
    minus = lambda r: [-1] * r
    diag = lambda d: [[d[i] if i == j else 0 for j in range(len(d))] for i in range(len(d))]
    return {
        "cp2": minimal_surface([[1]], 3, 1, [-3], [1], ["H"]),
        "quadric": minimal_surface([[0, 1], [1, 0]], 4, 0, [-2, -2], [1, 1], ["A", "B"]),
        # K.H = 1 rank-one stand-in
        "positive_line": minimal_surface([[1]], -1, 1, [1], [1], ["H"]),
        # general type, K^2 = 1, p_g = 0
        "general_type": minimal_surface(
            diag([1] + minus(8)), 11, -7, [3] + minus(8), [3] + minus(8),
            ["H"] + [f"F{i}" for i in range(1, 9)],
        ),
        # elliptic, K^2 = 0, p_g = 0
        "elliptic": minimal_surface(
            diag([1] + minus(9)), 12, -8, [3] + minus(9), [4] + minus(9),
            ["H"] + [f"F{i}" for i in range(1, 10)],
        ),
    }


def expected_dimension(c, s):
    """w_c = (c^2 - 2 e - 3 sigma) / 4 as an exact rational."""
    if not is_characteristic(c):
        warnings.warn("expected_dimension of a non-characteristic class", stacklevel=2)
    return Fraction(pair(c, c) - 2 * s.euler - 3 * s.signature, 4)


def is_almost_canonical(c, s):
    return is_characteristic(c) and expected_dimension(c, s) == 0


class ConeComponent(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    NOT_IN_CONE = "not_in_cone"


class ChamberSide(enum.Enum):
    WALL = "wall"
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NOT_IN_K_PLUS = "not_in_k_plus"


def _require_b_plus_one(lattice):
    if lattice.b_plus != 1:
        raise PreconditionViolated(f"chamber structure needs b2+ = 1, lattice has {lattice.b_plus}")


def _check_reference(k):
    if k.is_zero() or pair(k, k) < 0:
        raise PreconditionViolated("reference class must be nonzero with k^2 >= 0")


def positive_cone_component(u, k):
    """Which component K+ / K- of {u^2 > 0} contains u (relative to k)."""
    _require_b_plus_one(u.lattice)
    _check_reference(k)
    if pair(u, u) <= 0:
        return ConeComponent.NOT_IN_CONE
    uk = pair(u, k)
    if uk == 0:
        raise DegenerateReference("u^2 > 0 and u.k = 0 cannot happen for b2+ = 1")
    return ConeComponent.PLUS if uk > 0 else ConeComponent.MINUS


def in_k_plus(u, k):
    return positive_cone_component(u, k) is ConeComponent.PLUS


def has_wall(c):
    """Whether c^perp meets K+.  For b2+ = 1 this happens iff c^2 < 0."""
    _require_b_plus_one(c.lattice)
    return pair(c, c) < 0


def chamber_side(u, c, k):
    """Position of the ray R_{>0} u relative to the wall of type c.

    When c^perp misses K+ (``has_wall(c)`` is False) the sign of c.u is
    constant on K+ and is still reported.
    """
    if not in_k_plus(u, k):
        return ChamberSide.NOT_IN_K_PLUS
    cu = pair(c, u)
    if cu == 0:
        return ChamberSide.WALL
    return ChamberSide.POSITIVE if cu > 0 else ChamberSide.NEGATIVE


def same_chamber(u1, u2, c, k):
    for u in (u1, u2):
        if not in_k_plus(u, k):
            raise PreconditionViolated(f"{u} is not in K+")
        if pair(c, u) == 0:
            raise OnWall(f"{u} lies on the wall of type {c}")
    return (pair(c, u1) > 0) == (pair(c, u2) > 0)


def is_c_good(c, omega):
    """For b2+ = 1 a metric is c-good iff its period ray misses c^perp."""
    return pair(c, omega) != 0


def every_metric_c_good(c):
    """c^2 >= 0 and c != 0 force every metric to be c-good."""
    return not c.is_zero() and pair(c, c) >= 0


def invariant_well_defined(c, s):
    """The mod 2 invariant n_c is metric independent (no chamber dependence)."""
    return every_metric_c_good(c) or s.b_plus >= 2


def blowup_surface(minimal, k):
    """Blow up ``k`` points: Q -> Q (+) <-1>^k, e += k, sigma -= k, K = K_min + E."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if minimal.k:
        raise ValueError("expected a minimal descriptor")
    if k == 0:
        return SurfaceDescriptor(
            minimal.lattice, minimal.euler, minimal.signature, minimal.canonical, (),
            minimal.minimal_canonical or minimal.canonical, minimal.minimal_polarization,
        )
    ex = CohomologyLattice([[-1 if i == j else 0 for j in range(k)] for i in range(k)],
                           [f"E{i}" for i in range(1, k + 1)])
    lat = minimal.lattice + ex
    r = minimal.lattice.rank
    pad = lambda c: lat.cls(tuple(c.coords) + (0,) * k)
    E = tuple(lat.basis(r + i) for i in range(k))
    Kmin = pad(minimal.canonical)
    K = Kmin
    for Ei in E:
        K = K + Ei
    H = pad(minimal.minimal_polarization) if minimal.minimal_polarization is not None else None
    return SurfaceDescriptor(lat, minimal.euler + k, minimal.signature - k, K, E, Kmin, H)


def _check_indices(s, I):
    I = tuple(sorted(set(I)))
    for i in I:
        if not 1 <= i <= s.k:
            raise IndexOutOfRange(f"index {i} outside 1..{s.k}")
    return I


def complement(s, I):
    I = set(_check_indices(s, I))
    return tuple(i for i in range(1, s.k + 1) if i not in I)


def class_cI(s, I):
    """c_I = 2 E_I - K_X; always almost canonical."""
    I = _check_indices(s, I)
    return 2 * s.exceptional_sum(I) - s.canonical


def all_subsets(k):
    for r in range(k + 1):
        yield from combinations(range(1, k + 1), r)


def polarization_class(s, Hmin, n):
    """H_n = n * Hmin - E (Hmin pulled back from the minimal model)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for Ei in s.exceptional:
        if pair(Ei, Hmin) != 0:
            raise PreconditionViolated("Hmin must lie in the minimal sublattice")
    return n * Hmin - s.exceptional_sum()


def cI_polarization_pairing(s, I, Hmin, n):
    """Closed form of c_I . H_n = 2|I| - k - n (Kmin . Hmin)."""
    a = pair(s.minimal_canonical, Hmin)
    return 2 * len(_check_indices(s, I)) - s.k - n * a


def polarization_threshold(s, I, Hmin):
    """Smallest n >= 1 with c_I . H_n < 0, or None when Kmin . Hmin <= 0."""
    a = pair(s.minimal_canonical, Hmin)
    if a <= 0:
        return None
    b = 2 * len(_check_indices(s, I)) - s.k
    return max(1, floor(Fraction(b, a)) + 1)


@dataclass
class ClaimVerdict:
    """Outcome of the two-chamber claim for one period point.

    ``lambdas`` and ``omega_min`` give omega = sum lambda_i E_i + omega_min;
    ``inequality_I`` and ``inequality_Ibar`` are the two linear forms
    -sum_I lambda + sum_Ibar lambda - omega_min.Kmin (and I <-> Ibar), which
    equal c_I.omega and c_Ibar.omega; their sum is -2 omega_min.Kmin.
    """

    I: tuple
    Ibar: tuple
    cI_pairing: Fraction
    cIbar_pairing: Fraction
    lambdas: tuple
    omega_min: RealClass
    omega_min_dot_kmin: Fraction
    inequality_I: Fraction
    inequality_Ibar: Fraction
    inequality_sum: Fraction
    negative_sides: tuple = field(default_factory=tuple)

    @property
    def holds(self):
        return bool(self.negative_sides)

    def certificate(self):
        return {
            "lambdas": [str(x) for x in self.lambdas],
            "inequality_I": str(self.inequality_I),
            "inequality_Ibar": str(self.inequality_Ibar),
            "sum": str(self.inequality_sum),
            "omega_min_dot_kmin": str(self.omega_min_dot_kmin),
            "sum_nonnegative_forces_omega_min_dot_kmin_nonpositive": bool(
                self.inequality_sum == -2 * self.omega_min_dot_kmin
            ),
        }


def _claim_data(s, omega, I, kmin):
    I = _check_indices(s, I)
    Ibar = complement(s, I)
    omega = omega.to_real() if isinstance(omega, CohClass) else omega
    lambdas = tuple(-Fraction(pair(omega, Ei)) for Ei in s.exceptional)
    omega_min = omega
    for lam, Ei in zip(lambdas, s.exceptional):
        omega_min = omega_min - lam * Ei
    assert all(pair(omega_min, Ei) == 0 for Ei in s.exceptional)
    m = Fraction(pair(omega_min, kmin))
    sI = sum((lambdas[i - 1] for i in I), Fraction(0))
    sIbar = sum((lambdas[i - 1] for i in Ibar), Fraction(0))
    ineq_I = -sI + sIbar - m
    ineq_Ibar = -sIbar + sI - m
    cI = Fraction(pair(class_cI(s, I), omega))
    cIbar = Fraction(pair(class_cI(s, Ibar), omega))
    negative = tuple(name for name, v in (("I", cI), ("Ibar", cIbar)) if v < 0)
    return ClaimVerdict(I, Ibar, cI, cIbar, lambdas, omega_min, m, ineq_I, ineq_Ibar,
                        ineq_I + ineq_Ibar, negative)


def claim_check(s, omega, I, kmin=None):
    """Check that c_I.omega < 0 or c_Ibar.omega < 0 for omega in K+.

    K+ is taken relative to ``kmin`` (default: the pulled-back minimal
    canonical class).  An omega outside K+ raises ``PreconditionViolated``;
    when both pairings are >= 0 the exception carries the summed-inequality
    certificate showing omega_min . Kmin <= 0.
    """
    kmin = s.minimal_canonical if kmin is None else kmin
    if kmin is None:
        raise PreconditionViolated("no minimal canonical class available")
    _check_reference(kmin)
    verdict = _claim_data(s, omega, I, kmin)
    if pair(omega, omega) <= 0 or verdict.omega_min_dot_kmin <= 0:
        cert = None
        if not verdict.holds:
            cert = verdict.certificate()
        raise PreconditionViolated("omega is not in K+", certificate=cert)
    if not verdict.holds:
        # c_I + c_Ibar = -2 kmin, so this is unreachable for omega in K+
        raise AssertionError(f"claim fails for omega={omega}, I={I}: {verdict.certificate()}")
    return verdict


def hitchin_predicate(s, omega):
    """Positive total scalar curvature: K . omega < 0."""
    if pair(omega, omega) <= 0:
        raise PreconditionViolated("omega must have positive square")
    return pair(s.canonical, omega) < 0


def twisting_class(s, c, omega):
    """Sign eps with eps c.omega < 0 and c1(M) = (eps c + K) / 2."""
    cw = pair(c, omega)
    if cw == 0:
        raise WallPosition("c . omega = 0: the metric is not c-good")
    eps = -1 if cw > 0 else 1
    twice = eps * c + s.canonical
    if any(a % 2 for a in twice.coords):
        raise PreconditionViolated("c is not congruent to K mod 2")
    return eps, s.lattice.cls(a // 2 for a in twice.coords)


@dataclass
class EmptinessCertificate:
    eps: int
    c_dot_omega: Fraction
    K_dot_omega: Fraction
    c1M: CohClass
    c1M_dot_omega: Fraction

    @property
    def empty(self):
        # a nonempty moduli space needs c1(M).omega >= 0, which would give
        # 0 <= 2 c1(M).omega = eps c.omega + K.omega < K.omega < 0
        return self.c1M_dot_omega < 0

    def chain(self):
        return {
            "assume": "c1(M).omega >= 0",
            "two_c1M_dot_omega": str(2 * self.c1M_dot_omega),
            "eps_c_dot_omega": str(self.eps * self.c_dot_omega),
            "K_dot_omega": str(self.K_dot_omega),
            "inequality": "0 <= 2 c1(M).omega = eps c.omega + K.omega < K.omega",
            "contradiction_with": "K.omega < 0",
            "holds": bool(
                2 * self.c1M_dot_omega == self.eps * self.c_dot_omega + self.K_dot_omega
                and self.eps * self.c_dot_omega < 0
                and self.K_dot_omega < 0
            ),
        }


def step1_emptiness_certificate(s, c, omega):
    """Certify that the moduli space for c is empty at a Hitchin period point."""
    if not hitchin_predicate(s, omega):
        raise PreconditionViolated("omega does not have K . omega < 0")
    if not is_characteristic(c):
        raise PreconditionViolated("c must be characteristic")
    eps, c1M = twisting_class(s, c, omega)
    return EmptinessCertificate(eps, Fraction(pair(c, omega)), Fraction(pair(s.canonical, omega)),
                                c1M, Fraction(pair(c1M, omega)))


def random_rational_class(lattice, rng, numerator=20, denominator=7):
    """Random RealClass with coordinates p/q, |p| <= numerator, 1 <= q <= denominator."""
    nums = rng.integers(-numerator, numerator + 1, size=lattice.rank)
    dens = rng.integers(1, denominator + 1, size=lattice.rank)
    return lattice.real(Fraction(int(p), int(q)) for p, q in zip(nums, dens))


def random_characteristic_class(s, rng, spread=5):
    """K + 2x for a random integral x (characteristic on unimodular lattices)."""
    x = s.lattice.cls(int(v) for v in rng.integers(-spread, spread + 1, size=s.lattice.rank))
    return s.canonical + 2 * x
