"""Discrete U(1) gauge theory and Dirac operator on flat periodic tori.

Layout of fields on a grid of shape ``(n,) * dim``:

* scalar: ``(*shape)``
* connection ``beta``: ``(dim, *shape)``; ``beta[mu][x]`` lives on the link
  x -> x + e_mu, and the parallel transport is ``exp(i h beta)``
* 2-form: ``(6, *shape)`` on the ``clifford.PAIRS`` basis (directions >= dim
  stay zero on a 2-torus)
* spinor: ``(4, *shape)`` for Sigma, ``(2, *shape)`` for a half spinor.

The spinor couples to ``beta`` with unit charge, so the determinant line
carries ``a = 2i beta`` and ``F_a = 2i d(beta)``.  Curvature fields are stored
with the ``i`` factored out, i.e. ``curvature()`` returns ``F_a / i``.

Using links rather than site values for the connection makes every
gauge-invariant quantity below invariant to rounding error, not just to
O(h^2).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import clifford
from .clifford import GAMMA, GAMMA2, PAIRS
from .errors import Diverged, NonUnitPhase, NotSelfDual, ZeroSpinor


@dataclass(frozen=True)
class TorusGrid:
    dim: int
    n: int
    length: float = 2 * np.pi

    def __post_init__(self):
        if self.dim not in (2, 4):
            raise ValueError(f"dim must be 2 or 4, got {self.dim}")
        if self.n < 4:
            raise ValueError(f"need at least 4 sites per axis, got {self.n}")
        if not self.length > 0:
            raise ValueError("period must be positive")

    @property
    def h(self):
        return self.length / self.n

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def volume(self):
        return self.length**self.dim

    @property
    def cell(self):
        return self.h**self.dim

    def coords(self):
        x = np.arange(self.n) * self.h
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def shift(self, f, mu, step=1):
        """Return g with g(x) = f(x + step * e_mu)."""
        axis = f.ndim - self.dim + mu
        return np.roll(f, -step, axis=axis)

    def integrate(self, density):
        return float(np.sum(density) * self.cell)

    def mean(self, f):
        return float(np.mean(f))

    def inner(self, a, b):
        """Real part of the L2 inner product (site sum times cell volume)."""
        return float(np.real(np.vdot(a, b)) * self.cell)

    def norm(self, f):
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.cell))

    def zero_connection(self):
        return np.zeros((self.dim,) + self.shape)

    def wavenumbers(self):
        """Integer Fourier indices times 2*pi/L, broadcast to the grid."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n) * (2 * np.pi / self.length)
        return np.meshgrid(*([k] * self.dim), indexing="ij")


def _apply(M, f):
    """Apply a constant matrix on the component axis of a field."""
    return np.einsum("ab,b...->a...", M, f)


def _apply_field(M, f):
    """Apply a site-dependent matrix field ``M[a, b, *shape]``."""
    return np.einsum("ab...,b...->a...", M, f)


def links(grid, beta):
    return np.exp(1j * grid.h * beta)


def covariant_derivative(grid, beta, psi):
    """Symmetric covariant difference; returns shape ``(dim, ncomp, *shape)``.

    (nabla_mu psi)(x) = [U_mu(x) psi(x+mu) - conj(U_mu(x-mu)) psi(x-mu)] / 2h
    """
    U = links(grid, beta)
    out = np.empty((grid.dim,) + psi.shape, dtype=complex)
    for mu in range(grid.dim):
        fwd = U[mu] * grid.shift(psi, mu, 1)
        bwd = grid.shift(np.conj(U[mu]) * psi, mu, -1)
        out[mu] = (fwd - bwd) / (2 * grid.h)
    return out


def covariant_adjoint(grid, beta, phi):
    """Exact adjoint of ``covariant_derivative`` for the site inner product."""
    U = links(grid, beta)
    out = np.zeros(phi.shape[1:], dtype=complex)
    for mu in range(grid.dim):
        bwd = grid.shift(np.conj(U[mu]) * phi[mu], mu, -1)
        fwd = U[mu] * grid.shift(phi[mu], mu, 1)
        out += (bwd - fwd) / (2 * grid.h)
    return out


def rough_laplacian(grid, beta, psi):
    return covariant_adjoint(grid, beta, covariant_derivative(grid, beta, psi))


def exterior_derivative(grid, beta):
    """Forward-difference d of a link 1-form; values on plaquettes."""
    out = np.zeros((6,) + grid.shape)
    for p, (mu, nu) in enumerate(PAIRS):
        if nu >= grid.dim:
            continue
        out[p] = (
            grid.shift(beta[nu], mu) - beta[nu] - grid.shift(beta[mu], nu) + beta[mu]
        ) / grid.h
    return out


def _clover(grid, plaq):
    """Average the four plaquettes touching each site."""
    out = np.zeros_like(plaq)
    for p, (mu, nu) in enumerate(PAIRS):
        if nu >= grid.dim:
            continue
        P = plaq[p]
        Pm = grid.shift(P, mu, -1)
        out[p] = 0.25 * (P + Pm + grid.shift(P, nu, -1) + grid.shift(Pm, nu, -1))
    return out


def _clover_adjoint(grid, G):
    out = np.zeros_like(G)
    for p, (mu, nu) in enumerate(PAIRS):
        if nu >= grid.dim:
            continue
        g = G[p]
        gm = grid.shift(g, mu, 1)
        out[p] = 0.25 * (g + gm + grid.shift(g, nu, 1) + grid.shift(gm, nu, 1))
    return out


def _exterior_derivative_adjoint(grid, G):
    out = np.zeros((grid.dim,) + grid.shape)
    for p, (mu, nu) in enumerate(PAIRS):
        if nu >= grid.dim:
            continue
        g = G[p]
        out[nu] += (grid.shift(g, mu, -1) - g) / grid.h
        out[mu] += (g - grid.shift(g, nu, -1)) / grid.h
    return out


def curvature(grid, beta):
    """Site-centred curvature ``F_a / i = 2 d(beta)`` (clover average)."""
    return 2.0 * _clover(grid, exterior_derivative(grid, beta))


def selfdual_split_field(F):
    Fp = 0.5 * (F + np.einsum("pq,q...->p...", clifford._STAR, F))
    return Fp, F - Fp


def Gamma_field(F, block=None):
    """Gamma applied sitewise; ``block='plus'`` keeps the Sigma+ block."""
    G = np.einsum("p...,pab->ab...", F, GAMMA2)
    if block == "plus":
        return G[:2, :2]
    if block == "minus":
        return G[2:, 2:]
    return G


def quadratic_moment_field(psi):
    """Sitewise (psi psi^*)_0, exactly Hermitian and trace-free."""
    a, b = psi
    d = 0.5 * (np.abs(a) ** 2 - np.abs(b) ** 2)
    off = a * np.conj(b)
    return np.array([[d + 0j, off], [np.conj(off), -d + 0j]])


def embed_plus(psi_plus):
    out = np.zeros((4,) + psi_plus.shape[1:], dtype=complex)
    out[:2] = psi_plus
    return out


def dirac(grid, beta, psi, chirality=None):
    """Dirac operator gamma o nabla_A.

    A 4-component spinor is mapped to a 4-component spinor.  For a half
    spinor pass ``chirality='plus'`` or ``'minus'``; the result has the
    opposite chirality.
    """
    nab = covariant_derivative(grid, beta, psi)
    if psi.shape[0] == 4:
        blocks = GAMMA[: grid.dim]
    elif chirality == "plus":
        blocks = GAMMA[: grid.dim, 2:, :2]
    elif chirality == "minus":
        blocks = GAMMA[: grid.dim, :2, 2:]
    else:
        raise ValueError("half spinors need chirality='plus' or 'minus'")
    return sum(_apply(blocks[mu], nab[mu]) for mu in range(grid.dim))


def weitzenboeck_remainder(grid, beta, psi):
    """D^2 psi - nabla^* nabla psi - (1/2) Gamma(F_a) psi on the full spinor."""
    if psi.shape[0] == 2:
        psi = embed_plus(psi)
    F = curvature(grid, beta)
    D2 = dirac(grid, beta, dirac(grid, beta, psi))
    curv = 0.5j * _apply_field(Gamma_field(F), psi)
    return D2 - rough_laplacian(grid, beta, psi) - curv


def weitzenboeck_residual(grid, beta, psi):
    """||D^2 psi - nabla^* nabla psi - Gamma(F_a) psi / 2|| / ||psi||  (s = 0)."""
    npsi = grid.norm(psi)
    if npsi == 0:
        raise ZeroSpinor("weitzenboeck_residual needs a nonzero spinor")
    return grid.norm(weitzenboeck_remainder(grid, beta, psi)) / npsi


@dataclass
class EnergyIdentity:
    lhs: float
    rhs: float
    gap: float
    terms: dict = field(default_factory=dict)


def energy_identity_gap(grid, beta, psi):
    """Both sides of the integrated Weitzenboeck identity for a positive spinor.

    lhs = ||D psi||^2 + 1/2 ||Gamma(F+)/2 - (psi psi^*)_0||^2
    rhs = ||nabla psi||^2 + 1/8 ||Gamma(F+)||^2 + 1/4 ||psi||_4^4

    The curvature norm is the one transported by Gamma (Frobenius norm of
    Gamma(F+)), which is twice the orthonormal-basis norm of F+.  ``gap`` is
    |lhs - rhs| / max(|lhs|, |rhs|).
    """
    Fa_plus = 1j * selfdual_split_field(curvature(grid, beta))[0]
    GF = Gamma_field(Fa_plus, block="plus")
    Q = quadratic_moment_field(psi)
    dirac_sq = grid.norm(dirac(grid, beta, psi, chirality="plus")) ** 2
    mismatch = 0.5 * grid.norm(0.5 * GF - Q) ** 2
    nabla_sq = grid.norm(covariant_derivative(grid, beta, psi)) ** 2
    curv = 0.125 * grid.norm(GF) ** 2
    quartic = 0.25 * grid.integrate(np.sum(np.abs(psi) ** 2, axis=0) ** 2)
    lhs = dirac_sq + mismatch
    rhs = nabla_sq + curv + quartic
    scale = max(abs(lhs), abs(rhs))
    gap = abs(lhs - rhs) / scale if scale > 0 else 0.0
    terms = {
        "dirac": dirac_sq,
        "mismatch": mismatch,
        "nabla": nabla_sq,
        "curvature": curv,
        "quartic": quartic,
    }
    return EnergyIdentity(lhs, rhs, gap, terms)


def energy_defect(grid, beta, psi):
    """Re <R psi, psi> with R the Weitzenboeck remainder.

    On the lattice lhs - rhs of ``energy_identity_gap`` equals this number
    up to rounding, because D is self-adjoint, nabla^* is the exact adjoint
    and the quadratic expansion is pointwise exact.
    """
    return grid.inner(embed_plus(psi), weitzenboeck_remainder(grid, beta, psi))


def _check_perturbation(mu, tol=1e-12):
    if mu is None:
        return None
    _, asd = selfdual_split_field(mu)
    if np.max(np.abs(asd), initial=0.0) > tol:
        raise NotSelfDual("perturbation must be self-dual")
    return mu


def sw_residual(grid, beta, psi, mu=None):
    """Residuals of the (perturbed) monopole equations for a positive spinor.

    Returns ``(D psi, Gamma(F_a+ + i mu)|Sigma+ - 2 (psi psi^*)_0)``; the
    second is a ``(2, 2, *shape)`` field of Hermitian matrices.
    """
    mu = _check_perturbation(mu)
    Fs_plus = selfdual_split_field(curvature(grid, beta))[0]
    if mu is not None:
        Fs_plus = Fs_plus + mu
    r1 = dirac(grid, beta, psi, chirality="plus")
    r2 = Gamma_field(1j * Fs_plus, block="plus") - 2.0 * quadratic_moment_field(psi)
    return r1, r2


def gauge_transform(grid, beta, psi, chi=None, phase=None):
    """Act by f = exp(i chi): psi -> f^{-1} psi, beta -> beta + d(chi).

    Either a real ``chi`` or a unit-modulus complex ``phase`` field.
    """
    if (chi is None) == (phase is None):
        raise ValueError("give exactly one of chi or phase")
    if chi is not None:
        f = np.exp(1j * chi)
        dchi = np.stack([grid.shift(chi, mu) - chi for mu in range(grid.dim)])
    else:
        f = np.asarray(phase, dtype=complex)
        if np.max(np.abs(np.abs(f) - 1.0)) > 1e-12:
            raise NonUnitPhase("gauge transformation must have |f| = 1")
        dchi = np.stack(
            [np.angle(np.conj(f) * grid.shift(f, mu)) for mu in range(grid.dim)]
        )
    return beta + dchi / grid.h, np.conj(f) * psi


def random_band_limited(grid, rng, ncomp=None, kmax=1, n_modes=3, amplitude=1.0,
                        complex_valued=False):
    """Sum of ``n_modes`` random plane waves with integer wavevectors in [-kmax, kmax]."""
    X = grid.coords()
    scale = 2 * np.pi / grid.length
    comps = 1 if ncomp is None else ncomp
    out = np.zeros((comps,) + grid.shape, dtype=complex if complex_valued else float)
    for c in range(comps):
        for _ in range(n_modes):
            k = rng.integers(-kmax, kmax + 1, size=grid.dim)
            phase = sum(scale * k[i] * X[i] for i in range(grid.dim))
            if complex_valued:
                a = rng.normal() + 1j * rng.normal()
                out[c] += amplitude * a * np.exp(1j * phase)
            else:
                a, b = rng.normal(size=2)
                out[c] += amplitude * (a * np.cos(phase) + b * np.sin(phase))
    return out[0] if ncomp is None else out


# Energy minimisation -------------------------------------------------------
#
# Specialised half-spinor arithmetic.  Every gamma_plus(e_mu) has one nonzero
# entry per row, and Gamma_plus(F) = -i sum_k s_k sigma_k with
# s = (F01 + F23, F02 - F13, F03 + F12), so the monopole energy only needs
# 3-vectors of Pauli coefficients per site.


def _monomial(M):
    perm = np.argmax(np.abs(M), axis=1)
    coeff = M[np.arange(M.shape[0]), perm]
    return perm, coeff


_GP = [_monomial(clifford.gamma_plus(clifford.basis_vector(mu))) for mu in range(4)]
_GM = [_monomial(-clifford.gamma_plus(clifford.basis_vector(mu)).conj().T) for mu in range(4)]


def _mono_apply(pc, f):
    perm, coeff = pc
    return coeff.reshape((-1,) + (1,) * (f.ndim - 1)) * f[perm]


def _selfdual_coefficients(F):
    return np.stack([F[0] + F[5], F[1] - F[4], F[2] + F[3]])


def _pauli_coefficients(psi):
    """q_k = psi^* sigma_k psi / 2, so (psi psi^*)_0 = sum_k q_k sigma_k."""
    a, b = psi[0], psi[1]
    ab = np.conj(a) * b
    return np.stack([ab.real, ab.imag, 0.5 * (np.abs(a) ** 2 - np.abs(b) ** 2)])


def _pauli_apply(r, psi):
    a, b = psi[0], psi[1]
    return np.stack([
        r[2] * a + (r[0] - 1j * r[1]) * b,
        (r[0] + 1j * r[1]) * a - r[2] * b,
    ])


def sw_energy(grid, beta, psi):
    """||D psi||^2 + 1/2 ||Gamma(F_a+)/2 - (psi psi^*)_0||^2 for a positive spinor."""
    return sw_energy_and_gradient(grid, beta, psi, gradient=False)[0]


def sw_energy_and_gradient(grid, beta, psi, gradient=True):
    """Energy and its gradient ``(E, dE/dbeta, dE/dpsi)``.

    The gradient is taken for the site-sum pairing:
    dE = sum(dE/dbeta * dbeta) + Re vdot(dE/dpsi, dpsi).
    """
    U = links(grid, beta)
    nab = covariant_derivative(grid, beta, psi)
    Dp = sum(_mono_apply(_GP[mu], nab[mu]) for mu in range(grid.dim))
    # 1/2 Gamma_plus(F_a+) - Q = sum_k r_k sigma_k with r = s/2 - q
    r = 0.5 * _selfdual_coefficients(curvature(grid, beta)) - _pauli_coefficients(psi)
    E = (np.sum(np.abs(Dp) ** 2) + np.sum(r**2)) * grid.cell
    if not gradient:
        return float(E), None, None

    nab_D = covariant_derivative(grid, beta, Dp)
    DmDp = sum(_mono_apply(_GM[mu], nab_D[mu]) for mu in range(grid.dim))
    g_psi = 2.0 * DmDp - 2.0 * _pauli_apply(r, psi)

    g_beta = np.empty_like(beta)
    cDp = np.conj(Dp)
    for mu in range(grid.dim):
        # d(nabla_mu psi)(x)/d beta_mu(y) is (i/2) U psi(y+mu) at x = y and
        # (i/2) conj(U) psi(y) at x = y + mu
        gm = _mono_apply(_GP[mu], psi)
        a = np.sum(cDp * (U[mu] * grid.shift(gm, mu)), axis=0)
        b = np.sum(grid.shift(cDp, mu) * (np.conj(U[mu]) * gm), axis=0)
        g_beta[mu] = -np.imag(a + b)
    G = np.zeros((6,) + grid.shape)
    G[0] = G[5] = r[0]
    G[1], G[4] = r[1], -r[1]
    G[2] = G[3] = r[2]
    # E_r = sum r_k^2, dE_r/ds_k = r_k, F = 2 clover(d beta)
    g_beta += 2.0 * _exterior_derivative_adjoint(grid, _clover_adjoint(grid, G))
    return float(E), g_beta * grid.cell, g_psi * grid.cell


@dataclass
class MinimizationResult:
    beta: np.ndarray
    psi: np.ndarray
    energy_trace: list
    steps: int
    psi_sup: float
    fplus_norm: float
    confirmed: bool
    message: str


class _Stop(Exception):
    pass


def minimize_sw_energy(grid, beta0, psi0, max_steps=100_000, energy_tol=1e-12,
                       psi_tol=1e-4, fplus_tol=1e-6, history=10, margin=1e-1, precondition=True):
    """Quasi-Newton descent on the monopole energy over (beta, psi).

    Steps are L-BFGS directions with a sufficient-decrease line search, so the
    energy trace is non-increasing.  Iteration stops when the relative energy
    decrease per step falls below ``energy_tol``, the energy underflows, the
    state is inside both tolerances scaled by ``margin``, or after
    ``max_steps``.  On a flat torus the only minimisers have psi = 0 and
    F+ = 0; ``confirmed`` records whether the final state meets ``psi_tol``
    (sup norm of psi) and ``fplus_tol`` (L2 norm of F_a+).  This is numerical
    evidence, not a proof.
    """
    nb = beta0.size
    npsi = psi0.size
    vol = grid.volume
    cache = {}
    axes = tuple(range(1, grid.dim + 1))
    # search variable y with field = S y, S = (1 + |k|^2)^(-1/2) per Fourier mode
    k2 = sum(k * k for k in grid.wavenumbers())
    S = 1.0 / np.sqrt(1.0 + k2) if precondition else np.ones(grid.shape)

    def smooth(f):
        if not precondition:
            return f
        return np.fft.ifftn(S * np.fft.fftn(f, axes=axes), axes=axes)

    def to_fields(y):
        beta = smooth(y[:nb].reshape(beta0.shape)).real
        psi = smooth((y[nb:nb + npsi] + 1j * y[nb + npsi:]).reshape(psi0.shape))
        return beta, psi

    def from_fields(beta, psi):
        if precondition:
            beta = np.fft.ifftn(np.fft.fftn(beta, axes=axes) / S, axes=axes).real
            psi = np.fft.ifftn(np.fft.fftn(psi, axes=axes) / S, axes=axes)
        return np.concatenate([beta.ravel(), psi.real.ravel(), psi.imag.ravel()])

    unpack = to_fields

    def fun(x):
        key = x.tobytes()
        if key not in cache:
            cache.clear()
            beta, psi = to_fields(x)
            E, gb, gp = sw_energy_and_gradient(grid, beta, psi)
            gb, gp = smooth(gb).real, smooth(gp)
            g = np.concatenate([gb.ravel(), gp.real.ravel(), gp.imag.ravel()])
            cache[key] = (E / vol, g / vol)
        return cache[key]

    x0 = from_fields(beta0, psi0)
    trace = [fun(x0)[0] * vol]
    state = {"increases": 0, "x": x0}

    def callback(xk):
        state["x"] = xk.copy()
        E = fun(xk)[0] * vol
        prev = trace[-1]
        trace.append(E)
        if E > prev:
            state["increases"] += 1
            if state["increases"] > 10:
                raise Diverged("energy increased on more than 10 steps")
        if E < 1e-200 or (prev - E) <= energy_tol * prev:
            raise _Stop("relative energy decrease below tolerance")
        beta, psi = unpack(xk)
        if (np.max(np.abs(psi)) < margin * psi_tol
                and grid.norm(selfdual_split_field(curvature(grid, beta))[0]) < margin * fplus_tol):
            raise _Stop("state inside tolerances")

    message = "maximum number of steps reached"
    try:
        res = optimize.minimize(
            fun, x0, jac=True, method="L-BFGS-B", callback=callback,
            options={"maxiter": max_steps, "maxcor": history, "ftol": 0.0,
                     "gtol": 0.0, "maxls": 50},
        )
        x = res.x
        message = str(res.message)
    except _Stop as stop:
        x = state["x"]
        message = str(stop)
    beta, psi = unpack(x)
    psi_sup = float(np.max(np.abs(psi)))
    Fa_plus = selfdual_split_field(curvature(grid, beta))[0]
    fplus_norm = grid.norm(Fa_plus)
    return MinimizationResult(
        beta=beta, psi=psi, energy_trace=trace, steps=len(trace) - 1,
        psi_sup=psi_sup, fplus_norm=fplus_norm,
        confirmed=bool(psi_sup < psi_tol and fplus_norm < fplus_tol), message=message,
    )
