"""Reduction of the Kaehler monopole equations to a Kazdan-Warner problem.

On a flat torus with background data

    f0      = i Lambda F_{h0} + s/2   (s supplied by the caller),
    density = |phi|^2_{h0} >= 0,

a metric h = e^{2u} h0 is a vortex iff

    Delta u + density/2 * e^{2u} + f0 = 0                (vortex equation)

With q = mean(f0), Delta v = q - f0 and w = 2(u - v) this becomes

    Delta w + P e^w + 2q = 0,   P = density * e^{2v}   (reduced equation)

which has a (unique) solution iff q < 0.

Delta is the nonnegative Laplacian -sum d^2/dx_i^2 throughout; see
docs/conventions.md for why this sign is forced.  Derivatives are spectral
(FFT on the periodic grid) unless a solver is asked for stencil/CG mode.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import MaxIterations, NonZeroMean, NoSolution, ResidualTooLarge
from .grid import TorusGrid

__all__ = [
    "VortexProblem", "VortexSolution", "KazdanWarnerResult", "laplacian",
    "degree_constant", "degree_integral", "poisson_step", "kazdan_warner_solve",
    "fixed_point_solve", "reduced_density", "assemble_solution", "solve_problem",
    "solvability_predicate", "jM_diagnostic", "alpha_vanishes", "no_solution_certificate",
]


@dataclass(frozen=True)
class VortexProblem:
    grid: TorusGrid
    f0: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        for name in ("f0", "density"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape:
                raise ValueError(f"{name} has shape {a.shape}, grid is {self.grid.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, a)
        if np.any(self.density < 0):
            raise ValueError("density must be nonnegative")
        if not np.any(self.density > 0):
            raise ValueError("density must not vanish identically")


@dataclass
class KazdanWarnerResult:
    w: np.ndarray
    iterations: int
    residual: float
    method: str


@dataclass
class VortexSolution:
    v: np.ndarray
    w: np.ndarray
    u: np.ndarray
    q: float
    residual1: float
    residual2: float
    iterations: int
    extras: dict = field(default_factory=dict)


def _k2(grid):
    return sum(k * k for k in grid.wavenumbers())


def _stencil_symbol(grid):
    # eigenvalues of the (2 dim + 1)-point negative Laplacian
    return sum((2 - 2 * np.cos(k * grid.h)) / grid.h**2 for k in grid.wavenumbers())


def laplacian(grid, f, mode="spectral"):
    """Nonnegative Laplacian -sum d^2 f / dx_i^2."""
    sym = _k2(grid) if mode == "spectral" else _stencil_symbol(grid)
    return np.fft.ifftn(sym * np.fft.fftn(f)).real


def _solve_shifted(grid, rhs, shift, mode="spectral"):
    """(Delta + shift)^{-1} rhs, mean-free when shift == 0."""
    sym = (_k2(grid) if mode == "spectral" else _stencil_symbol(grid)) + shift
    fr = np.fft.fftn(rhs)
    if shift == 0:
        sym = sym.copy()
        sym.flat[0] = 1.0
        fr.flat[0] = 0.0
    return np.fft.ifftn(fr / sym).real


def degree_constant(p):
    """q as the volume-normalised mean of f0."""
    return float(p.grid.mean(p.f0))


def degree_integral(p):
    """Raw integral of f0; this is the quantity with the 2 pi topological meaning."""
    return float(p.grid.integrate(p.f0))


def poisson_step(p, q, mode="spectral", tol=1e-10):
    """Mean-zero v with Delta v = q - f0 (so sum d^2 v = f0 - q).

    This is the sign that turns the vortex equation into the reduced one.  ``mode='cg'`` uses the
    finite-difference stencil and conjugate gradients instead of the FFT.
    """
    rhs = p.f0 - q
    if abs(p.grid.mean(rhs)) > 1e-12:
        raise NonZeroMean(f"right-hand side has mean {p.grid.mean(rhs):.3e}")
    rhs = rhs - p.grid.mean(rhs)
    target = -rhs
    if mode == "spectral":
        v = _solve_shifted(p.grid, target, 0.0)
    elif mode == "cg":
        v = _cg_poisson(p.grid, target, tol)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    v = v - p.grid.mean(v)
    res = np.linalg.norm(laplacian(p.grid, v, mode) - target)
    scale = max(np.linalg.norm(target), 1e-300)
    if res > tol * scale and np.linalg.norm(target) > 0:
        raise ResidualTooLarge(f"Poisson residual {res / scale:.3e} exceeds {tol:.1e}")
    return v


def _cg_poisson(grid, rhs, tol):
    shape = grid.shape
    n = rhs.size

    def matvec(x):
        x = x.reshape(shape)
        x = x - x.mean()
        return laplacian(grid, x, "stencil").ravel()

    A = LinearOperator((n, n), matvec=matvec, dtype=float)
    x, info = cg(A, rhs.ravel(), rtol=tol * 1e-2, atol=0.0, maxiter=10 * n)
    if info != 0:
        raise MaxIterations(f"CG did not converge (info={info})")
    return x.reshape(shape)


def no_solution_certificate(grid, P, q):
    """Integral argument ruling out solutions for q >= 0.

    Averaging the reduced equation kills the Laplacian term, so mean(P e^w) = -2q; the left
    side is strictly positive for P >= 0, P != 0, the right side is not.
    """
    return {
        "q": float(q),
        "mean_P": float(grid.mean(P)),
        "averaged_equation": "mean(P e^w) = -2q",
        "lhs_sign": "positive (P >= 0, P not identically zero)",
        "rhs_value": float(-2 * q),
        "contradiction": bool(q >= 0 and grid.mean(P) > 0),
    }


def _check_kw_input(grid, P, q):
    P = np.asarray(P, dtype=float)
    if P.shape != grid.shape:
        raise ValueError("P is not on the grid")
    if np.any(P < 0) or not np.any(P > 0):
        raise ValueError("P must be nonnegative and not identically zero")
    if q >= 0:
        raise NoSolution("no solution for q >= 0", no_solution_certificate(grid, P, q))
    return P


def _kw_residual(grid, P, q, w, mode="spectral"):
    return laplacian(grid, w, mode) + P * np.exp(w) + 2 * q


def kazdan_warner_solve(grid, P, q, tol=1e-10, max_iter=200, w0=None, mode="spectral",
                        fallback=True, step_tol=1e-9):
    """Newton iteration for Delta w + P e^w + 2q = 0.

    The linearisation Delta + P e^w is positive definite, so each step is a
    CG solve preconditioned by (Delta + mean(P e^w))^{-1}.  Steps are damped
    by backtracking on ||G||^2; if the line search stalls the iteration hands
    over to ``fixed_point_solve``.  Convergence needs both sup|G| <= tol and
    a Newton update below ``step_tol``: for tiny |q| the residual alone is
    small long before w is right.
    """
    P = _check_kw_input(grid, P, q)
    if w0 is None:
        w = np.full(grid.shape, np.log(-2 * q / grid.mean(P)))
    else:
        w = np.broadcast_to(np.asarray(w0, dtype=float), grid.shape).copy()
    n = w.size
    G = _kw_residual(grid, P, q, w, mode)
    merit = np.mean(G * G)
    for it in range(1, max_iter + 1):
        Pe = P * np.exp(w)
        shift = max(float(np.mean(Pe)), 1e-300)
        A = LinearOperator((n, n), dtype=float,
                           matvec=lambda x: (laplacian(grid, x.reshape(grid.shape), mode)
                                             + Pe * x.reshape(grid.shape)).ravel())
        M = LinearOperator((n, n), dtype=float,
                           matvec=lambda x: _solve_shifted(grid, x.reshape(grid.shape), shift,
                                                           mode).ravel())
        delta, _ = cg(A, -G.ravel(), rtol=1e-13, atol=0.0, maxiter=500, M=M)
        delta = delta.reshape(grid.shape)
        if np.max(np.abs(G)) <= tol and np.max(np.abs(delta)) <= step_tol:
            w = w + delta
            r = float(np.max(np.abs(_kw_residual(grid, P, q, w, mode))))
            return KazdanWarnerResult(w, it, r, "newton")
        t = 1.0
        while True:
            w_new = w + t * delta
            G_new = _kw_residual(grid, P, q, w_new, mode)
            merit_new = np.mean(G_new * G_new)
            if np.isfinite(merit_new) and (merit_new <= (1 - 1e-4 * t) * merit
                                           or merit_new <= (0.01 * tol) ** 2):
                break
            t *= 0.5
            if t < 1e-12:
                break
        if t < 1e-12:
            if not fallback:
                raise MaxIterations("Newton line search stalled")
            res = fixed_point_solve(grid, P, q, tol=tol, w0=w, mode=mode)
            return KazdanWarnerResult(res.w, it + res.iterations, res.residual, "fixed_point")
        w, G, merit = w_new, G_new, merit_new
    raise MaxIterations(f"Newton not converged after {max_iter} steps "
                        f"(residual {np.max(np.abs(G)):.3e})")


def fixed_point_solve(grid, P, q, tol=1e-10, w0=None, max_iter=100_000, mode="spectral",
                      step_tol=1e-12):
    """Monotone iteration (Delta + lam) w' = lam w - P e^w - 2q.

    With lam >= max(P e^w) the map is order preserving, which is the
    sub/super-solution argument behind existence; it converges linearly and
    serves as an independent check on the Newton solver.  Stops when
    sup|G| <= tol and the last update is below ``step_tol``.
    """
    P = _check_kw_input(grid, P, q)
    if w0 is None:
        w = np.full(grid.shape, np.log(-2 * q / grid.mean(P)))
    else:
        w = np.broadcast_to(np.asarray(w0, dtype=float), grid.shape).copy()
    for it in range(1, max_iter + 1):
        Pe = P * np.exp(w)
        lam = float(np.max(Pe))
        w_new = _solve_shifted(grid, lam * w - Pe - 2 * q, lam, mode)
        step = float(np.max(np.abs(w_new - w)))
        w = w_new
        if step <= step_tol:
            r = float(np.max(np.abs(_kw_residual(grid, P, q, w, mode))))
            if r <= tol:
                return KazdanWarnerResult(w, it, r, "fixed_point")
    raise MaxIterations(f"fixed-point iteration not converged after {max_iter} steps")


def reduced_density(p, v):
    """P = density * e^{2v}."""
    return p.density * np.exp(2 * v)


def assemble_solution(p, v, w, q=None, tol=1e-8, iterations=0, mode="spectral"):
    """u = w/2 + v, with sup-norm residuals of the vortex and reduced equations."""
    q = degree_constant(p) if q is None else q
    u = w / 2 + v
    r1 = laplacian(p.grid, u, mode) + 0.5 * p.density * np.exp(2 * u) + p.f0
    r2 = _kw_residual(p.grid, reduced_density(p, v), q, w, mode)
    sol = VortexSolution(v=v, w=w, u=u, q=q, residual1=float(np.max(np.abs(r1))),
                         residual2=float(np.max(np.abs(r2))), iterations=iterations)
    if sol.residual1 > tol:
        raise ResidualTooLarge(f"vortex equation residual {sol.residual1:.3e} exceeds {tol:.1e}")
    return sol


def solve_problem(p, tol=1e-10, assemble_tol=1e-8, max_iter=200, mode="spectral", w0=None):
    """Whole chain: q, Poisson step, Kazdan-Warner solve, reassembly."""
    q = degree_constant(p)
    v = poisson_step(p, q, mode=mode, tol=tol if mode == "spectral" else max(tol, 1e-8))
    P = reduced_density(p, v)
    res = kazdan_warner_solve(p.grid, P, q, tol=tol, max_iter=max_iter, w0=w0, mode=mode)
    sol = assemble_solution(p, v, res.w, q=q, tol=assemble_tol, iterations=res.iterations,
                            mode=mode)
    sol.extras["method"] = res.method
    sol.extras["raw_integral"] = degree_integral(p)
    return sol


def solvability_predicate(c1M_dot_omega, c1K_dot_omega, q=None):
    """c1(M).omega < c1(K).omega / 2.

    If ``q`` (the integral of f0) is supplied it must agree in sign with
    2 pi (c1(M) - c1(K)/2).omega; disagreement raises ``ValueError``.
    """
    verdict = c1M_dot_omega < c1K_dot_omega / 2
    if q is not None:
        expected = 2 * np.pi * (c1M_dot_omega - c1K_dot_omega / 2)
        if (q < 0) != verdict or not np.isclose(q, expected, rtol=1e-9, atol=1e-12):
            raise ValueError(f"q = {q} inconsistent with 2 pi (c1(M) - c1(K)/2).omega = {expected}")
    return verdict


def jM_diagnostic(grid, density_phi, density_alpha):
    """(1 / 8 pi) * integral of (-|phi|^2 + |alpha|^2)."""
    density_phi = np.asarray(density_phi, dtype=float)
    density_alpha = np.asarray(density_alpha, dtype=float)
    if density_phi.shape != grid.shape or density_alpha.shape != grid.shape:
        raise ValueError("densities are not on the grid")
    return float(grid.integrate(density_alpha - density_phi) / (8 * np.pi))


def alpha_vanishes(jm):
    """A negative J(M) forces alpha = 0 (and phi = 0 when it is positive)."""
    return jm < 0
