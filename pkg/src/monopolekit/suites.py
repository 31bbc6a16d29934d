"""Verification suites behind the ``mk`` subcommands.

Each suite takes the parameter dict of a ``RunConfig`` section plus a seed
and returns a ``Report``: named metrics, boolean verdicts, CSV-ready tables
and JSON-ready details.  No file IO happens here.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import clifford as cl
from . import grid as gr
from . import lattice as la
from . import rng as rngmod
from . import vortex as vx
from .errors import NoSolution, PreconditionViolated


@dataclass
class Report:
    subcommand: str
    config: dict
    metrics: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> (columns, rows)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.verdicts.values())

    def as_dict(self):
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "metrics": {k: _jsonable(v) for k, v in self.metrics.items()},
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
            "tables": sorted(self.tables),
            "details": _jsonable(self.details),
            "passed": self.passed,
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, la._Element):
        return [str(c) for c in x.coords]
    return x


# Clifford ------------------------------------------------------------------


def clifford_metrics(rng, samples):
    U = rng.normal(size=(samples, 4))
    V = rng.normal(size=(samples, 4))
    dev_plus = dev_full = 0.0
    for u, v in zip(U, V):
        gu, gv = cl.gamma_plus(u), cl.gamma_plus(v)
        lhs = gu.conj().T @ gv + gv.conj().T @ gu
        dev_plus = max(dev_plus, np.max(np.abs(lhs - 2 * np.dot(u, v) * cl.ID2)))
        Gu, Gv = cl.gamma(u), cl.gamma(v)
        full = Gu @ Gv + Gv @ Gu + 2 * np.dot(u, v) * np.eye(4)
        dev_full = max(dev_full, np.max(np.abs(full)))

    images = [cl.Gamma_plus(b) for b in cl.SELFDUAL_BASIS]
    rand_sd = rng.normal(size=(samples, 3)) @ cl.SELFDUAL_BASIS
    rand_asd = rng.normal(size=(samples, 3)) @ cl.ANTISELFDUAL_BASIS
    skew = max(np.max(np.abs(A + A.conj().T)) for A in images + [cl.Gamma_plus(F) for F in rand_sd])
    trace = max(abs(np.trace(A)) for A in images)
    real_images = np.array([np.concatenate([A.real.ravel(), A.imag.ravel()]) for A in images])
    sv = np.linalg.svd(real_images, compute_uv=False)
    rank = int(np.sum(sv > 1e-13 * sv.max()))
    # su(2) is 3-dimensional: rank 3 inside it means equality
    asd = max(
        max(np.max(np.abs(cl.Gamma_plus(b))) for b in cl.ANTISELFDUAL_BASIS),
        max(np.max(np.abs(cl.Gamma_plus(F))) for F in rand_asd),
    )
    kaehler = 0.0
    for coeffs in np.eye(3):
        F = cl.kaehler_two_form(*coeffs)
        diff = cl.to_kaehler_frame(cl.Gamma_plus(F)) - cl.kaehler_Gamma(*coeffs)
        kaehler = max(kaehler, np.max(np.abs(diff)))
    return {
        "clifford_identity_plus": float(dev_plus),
        "clifford_identity_full": float(dev_full),
        "gamma_image_skew": float(skew),
        "gamma_image_trace": float(trace),
        "gamma_image_rank": rank,
        "gamma_minus_on_plus": float(asd),
        "kaehler_block_model": float(kaehler),
    }


def clifford_suite(params, seed):
    m = clifford_metrics(rngmod.stream(seed, rngmod.CLIFFORD), params["samples"])
    tol = params["tol"]
    verdicts = {
        "clifford_identity": max(m["clifford_identity_plus"], m["clifford_identity_full"]) <= tol,
        "gamma_plus_image_is_su2": m["gamma_image_rank"] == 3
        and max(m["gamma_image_skew"], m["gamma_image_trace"]) <= tol,
        "gamma_minus_kills_plus": m["gamma_minus_on_plus"] == 0.0,
        "kaehler_block_model": m["kaehler_block_model"] <= tol,
    }
    return Report("clifford", {}, m, verdicts)


# Grid ----------------------------------------------------------------------


def grid_data(grid, seed, params):
    """Band-limited (beta, psi) drawn identically for every grid size."""
    r = rngmod.stream(seed, rngmod.GRID)
    beta = gr.random_band_limited(grid, r, ncomp=grid.dim, kmax=params["kmax"],
                                  n_modes=params["modes"], amplitude=params["beta_amplitude"])
    psi = gr.random_band_limited(grid, r, ncomp=4, kmax=params["kmax"], n_modes=params["modes"],
                                 amplitude=params["psi_amplitude"], complex_valued=True)
    chi = gr.random_band_limited(grid, r, kmax=params["kmax"] + 1, n_modes=params["modes"])
    return beta, psi, chi


def grid_point(grid, beta, psi, chi):
    w = gr.weitzenboeck_residual(grid, beta, psi)
    e = gr.energy_identity_gap(grid, beta, psi[:2])
    bg, pg = gr.gauge_transform(grid, beta, psi, chi=chi)
    wg = gr.weitzenboeck_residual(grid, bg, pg)
    eg = gr.energy_identity_gap(grid, bg, pg[:2])
    return {
        "weitzenboeck_residual": w,
        "energy_gap": e.gap,
        "energy_lhs": e.lhs,
        "energy_rhs": e.rhs,
        "energy_defect": gr.energy_defect(grid, beta, psi[:2]).real,
        "gauge_weitzenboeck": abs(wg - w),
        "gauge_energy_gap": abs(eg.gap - e.gap),
    }


def _orders(values, sizes):
    out = []
    for (a, na), (b, nb) in zip(zip(values, sizes), zip(values[1:], sizes[1:])):
        if a > 0 and b > 0:
            out.append(float(np.log(a / b) / np.log(nb / na)))
        else:
            out.append(float("nan"))
    return out


def grid_suite(params, seed):
    sizes = params["sizes"]
    rows, points = [], []
    for n in sizes:
        g = gr.TorusGrid(params["dim"], n, params["length"])
        points.append(grid_point(g, *grid_data(g, seed, params)))
    w_orders = _orders([p["weitzenboeck_residual"] for p in points], sizes)
    e_orders = _orders([p["energy_gap"] for p in points], sizes)
    for i, (n, p) in enumerate(zip(sizes, points)):
        rows.append([n, p["weitzenboeck_residual"], p["energy_gap"],
                     w_orders[i - 1] if i else "", e_orders[i - 1] if i else "",
                     p["gauge_weitzenboeck"], p["gauge_energy_gap"]])
    columns = ["N", "weitzenboeck_residual", "energy_gap", "weitzenboeck_order",
               "energy_gap_order", "gauge_weitzenboeck", "gauge_energy_gap"]
    at = points[sizes.index(params["gap_size"])]
    aliasing = params["kmax"] + 1 >= min(sizes) / 2
    metrics = {
        "weitzenboeck_residual_at_gap_size": at["weitzenboeck_residual"],
        "energy_gap_at_gap_size": at["energy_gap"],
        "min_weitzenboeck_order": min(w_orders),
        "min_energy_gap_order": min(e_orders),
        "max_gauge_deviation": max(max(p["gauge_weitzenboeck"], p["gauge_energy_gap"])
                                   for p in points),
        "max_defect_mismatch": max(abs((p["energy_lhs"] - p["energy_rhs"]) - p["energy_defect"])
                                   / max(abs(p["energy_lhs"]), 1e-300) for p in points),
    }
    verdicts = {
        "gaps_below_tol": max(at["weitzenboeck_residual"], at["energy_gap"]) <= params["gap_tol"],
        "convergence_order": min(min(w_orders), min(e_orders)) >= params["min_order"],
        "gauge_invariance": metrics["max_gauge_deviation"] <= params["gauge_tol"],
        "discrete_energy_identity": metrics["max_defect_mismatch"] <= 1e-10,
        "no_aliasing": not aliasing,
    }
    details = {"orders": {"weitzenboeck": w_orders, "energy_gap": e_orders}}
    if aliasing:
        details["aliasing"] = "band limit (including gauge field) reaches N/2 on the coarsest grid"
    tables = {"convergence": (columns, rows)}
    if params["descent_runs"] > 0:
        runs = descent_search(params, seed)
        tables["descent"] = (["run", "steps", "psi_sup", "fplus_norm", "monotone", "confirmed"],
                             [[i, r["steps"], r["psi_sup"], r["fplus_norm"], r["monotone"],
                               r["confirmed"]] for i, r in enumerate(runs)])
        verdicts["vanishing_search"] = all(r["confirmed"] and r["monotone"] for r in runs)
        details["vanishing_search"] = "numerical evidence only: descent from random starts"
    return Report("grid", {}, metrics, verdicts, tables, details)


def descent_search(params, seed, runs=None):
    """Energy descent from seeded random starts on the flat torus."""
    g = gr.TorusGrid(params.get("dim", 4), params["descent_size"], params.get("length", 2 * np.pi))
    r = rngmod.stream(seed, rngmod.DESCENT)
    out = []
    for _ in range(params["descent_runs"] if runs is None else runs):
        beta = gr.random_band_limited(g, r, ncomp=g.dim, kmax=2, amplitude=0.1)
        psi = gr.random_band_limited(g, r, ncomp=2, kmax=2, amplitude=0.1, complex_valued=True)
        res = gr.minimize_sw_energy(g, beta, psi, max_steps=params["descent_max_steps"],
                                    psi_tol=params["descent_psi_tol"],
                                    fplus_tol=params["descent_fplus_tol"])
        trace = np.asarray(res.energy_trace)
        out.append({"steps": res.steps, "psi_sup": res.psi_sup, "fplus_norm": res.fplus_norm,
                    "monotone": bool(np.all(np.diff(trace) <= 0)), "confirmed": res.confirmed,
                    "message": res.message})
    return out


# Vortex --------------------------------------------------------------------


def cosine_problem(n=32):
    """f0 = -1/2, density = 1 + cos(x)/2 on the 2-torus: v = 0, P = density."""
    g = gr.TorusGrid(2, n)
    x = g.coords()[0]
    return vx.VortexProblem(g, np.full(g.shape, -0.5), 1 + 0.5 * np.cos(x))


def constant_problem(n=16, f0=-0.5, density=1.0):
    g = gr.TorusGrid(2, n)
    return vx.VortexProblem(g, np.full(g.shape, f0), np.full(g.shape, density))


def random_problem(grid, rng, q, kmax=2):
    phi = gr.random_band_limited(grid, rng, complex_valued=True, kmax=kmax)
    f0 = gr.random_band_limited(grid, rng, kmax=kmax)
    return vx.VortexProblem(grid, f0 - grid.mean(f0) + q, np.abs(phi) ** 2)


def vortex_report(problem, params, golden=None):
    """Solve one problem; NoSolution becomes a verdict, not an exception."""
    q = vx.degree_constant(problem)
    metrics = {"q": q, "raw_integral": vx.degree_integral(problem)}
    details = {}
    try:
        sol = vx.solve_problem(problem, tol=params["tol"], assemble_tol=params["assemble_tol"],
                               max_iter=params["max_iter"], mode=params["mode"])
    except NoSolution as exc:
        details["outcome"] = "NoSolution"
        details["no_solution_certificate"] = exc.certificate
        verdicts = {"certificate_valid": bool(exc.certificate["contradiction"])}
        return Report("vortex", {}, metrics, verdicts, {}, details), None
    P = vx.reduced_density(problem, sol.v)
    alt = vx.kazdan_warner_solve(problem.grid, P, q, tol=params["tol"],
                                 max_iter=params["max_iter"], w0=params["second_start"],
                                 mode=params["mode"])
    distance = float(np.max(np.abs(alt.w - sol.w)))
    conservation = abs(float(problem.grid.mean(P * np.exp(sol.w))) + 2 * q)
    metrics.update({
        "iterations": sol.iterations,
        "residual1": sol.residual1,
        "residual2": sol.residual2,
        "uniqueness_distance": distance,
        "conservation_defect": conservation,
        "w_min": float(sol.w.min()),
        "w_max": float(sol.w.max()),
        "w_mean": float(sol.w.mean()),
    })
    details["outcome"] = "solved"
    verdicts = {
        "residuals": sol.residual2 <= params["tol"] and sol.residual1 <= params["assemble_tol"],
        "uniqueness": distance <= params["uniqueness_tol"],
        "conservation": conservation <= params["assemble_tol"],
    }
    if golden is not None:
        gd = float(np.max(np.abs(golden - sol.w)))
        metrics["golden_distance"] = gd
        verdicts["matches_golden"] = gd <= params["golden_tol"]
    details["method"] = sol.extras["method"]
    return Report("vortex", {}, metrics, verdicts, {}, details), sol


def kazdan_warner_fuzz(seed, trials=1000, n=32, tol=1e-10):
    """Randomized sharpness check: solve succeeds iff q < 0."""
    g = gr.TorusGrid(2, n)
    r = rngmod.stream(seed, rngmod.VORTEX)
    stats = {"trials": trials, "solved": 0, "rejected": 0, "mismatches": 0,
             "max_iterations": 0, "max_uniqueness_distance": 0.0,
             "max_conservation_defect": 0.0, "max_residual": 0.0}
    for _ in range(trials):
        u = r.random()
        if u < 0.6:
            q_target = -10 ** (-r.uniform(-0.5, 5.9))
        elif u < 0.9:
            q_target = r.uniform(1e-9, 1.0)
        else:
            q_target = 0.0
        p = random_problem(g, r, q_target)
        q = vx.degree_constant(p)
        try:
            sol = vx.solve_problem(p, tol=tol)
            ok = True
        except NoSolution:
            ok = False
        if ok != (q < 0):
            stats["mismatches"] += 1
        if not ok:
            stats["rejected"] += 1
            continue
        stats["solved"] += 1
        stats["max_iterations"] = max(stats["max_iterations"], sol.iterations)
        stats["max_residual"] = max(stats["max_residual"], sol.residual2)
        P = vx.reduced_density(p, sol.v)
        alt = vx.kazdan_warner_solve(g, P, q, tol=tol, w0=sol.w.max() + 3.0)
        stats["max_uniqueness_distance"] = max(stats["max_uniqueness_distance"],
                                               float(np.max(np.abs(alt.w - sol.w))))
        stats["max_conservation_defect"] = max(stats["max_conservation_defect"],
                                               abs(float(g.mean(P * np.exp(sol.w))) + 2 * q))
    return stats


# Lattice -------------------------------------------------------------------


def _surface_from_params(params):
    if params["surface"]:
        from .fieldio import read_surface

        return read_surface(params["surface"])
    cat = la.catalog()
    if params["catalog"] not in cat:
        raise ValueError(f"unknown catalog entry {params['catalog']!r}")
    return la.blowup_surface(cat[params["catalog"]], params["blowups"])


def k_plus_direction(s, kmin):
    """An integral class in K+ (relative to kmin): the polarization or its negative."""
    H = s.minimal_polarization
    if H is None or H.square() <= 0:
        H = kmin
    return H if la.pair(H, kmin) > 0 else -H


def random_k_plus_class(s, r, kmin, denominator=7):
    """Random rational omega in K+: a random class pushed along H past the light cone.

    The offset t along H is drawn just above the larger root of
    (x + t H)^2 = 0, so samples reach arbitrarily close to the cone boundary.
    """
    H = k_plus_direction(s, kmin)
    a = H.square()
    while True:
        x = la.random_rational_class(s.lattice, r)
        b, c = la.pair(H, x), x.square()
        root = (-b + np.sqrt(max(float(b * b - a * c), 0.0))) / a
        den = int(r.integers(1, denominator + 1))
        t = Fraction(int(np.floor(root * den)) + int(r.integers(1, 4)), den)
        omega = x + t * H
        if omega.square() > 0 and la.pair(omega, kmin) > 0:
            return omega


def lattice_analysis(s, seed, claim_samples=10_000, step1_samples=100, candidates=50,
                     threshold_max_n=12):
    tables, details, metrics, verdicts = {}, {}, {}, {}
    k = s.k
    # c_I classes and almost-canonical checks
    rows = []
    all_ac = True
    for I in la.all_subsets(k):
        c = la.class_cI(s, I)
        w = la.expected_dimension(c, s)
        ac = la.is_almost_canonical(c, s)
        all_ac &= ac
        rows.append(["".join(map(str, I)) or "-", la.is_characteristic(c), str(w), ac])
    tables["classes"] = (["I", "characteristic", "expected_dimension", "almost_canonical"], rows)
    verdicts["all_cI_almost_canonical"] = all_ac
    verdicts["canonical_dimension_zero"] = la.expected_dimension(s.canonical, s) == 0
    metrics["subsets"] = len(rows)

    # polarisation thresholds (closed form vs direct pairing)
    if s.minimal_polarization is not None and s.minimal_canonical is not None:
        H = s.minimal_polarization
        rows, agree = [], True
        for I in la.all_subsets(k):
            cI = la.class_cI(s, I)
            thr = la.polarization_threshold(s, I, H)
            for n in range(1, threshold_max_n + 1):
                direct = la.pair(cI, la.polarization_class(s, H, n))
                closed = la.cI_polarization_pairing(s, I, H, n)
                agree &= direct == closed
            if thr is not None:
                direct_thr = next((n for n in range(1, thr + 1)
                                   if la.pair(cI, la.polarization_class(s, H, n)) < 0), None)
                agree &= direct_thr == thr
            rows.append(["".join(map(str, I)) or "-", la.cI_polarization_pairing(s, I, H, 1),
                         "" if thr is None else thr])
        tables["thresholds"] = (["I", "pairing_n1", "threshold_n"], rows)
        verdicts["threshold_closed_form"] = agree
        if s.lattice.b_plus == 1:
            # chamber of each c_I seen from H_n at the largest tabulated n
            Hn = la.polarization_class(s, H, threshold_max_n)
            rows = []
            if Hn.square() > 0:
                for I in la.all_subsets(k):
                    cI = la.class_cI(s, I)
                    rows.append(["".join(map(str, I)) or "-", la.has_wall(cI),
                                 la.every_metric_c_good(cI),
                                 la.chamber_side(Hn.to_real(), cI, Hn.to_real()).name])
                tables["chambers"] = (["I", "has_wall", "every_metric_c_good",
                                       f"side_at_H{threshold_max_n}"], rows)

    r_cand = rngmod.stream(seed, rngmod.LATTICE_CANDIDATES)
    found = []
    for _ in range(candidates):
        c = la.random_characteristic_class(s, r_cand, spread=2)
        if la.is_almost_canonical(c, s):
            found.append([str(x) for x in c.coords])
    details["almost_canonical_candidates"] = found

    # chamber claim fuzz
    if s.minimal_canonical is not None and s.lattice.b_plus == 1 and k > 0:
        kmin = s.minimal_canonical
        if not kmin.is_zero() and kmin.square() >= 0:
            r = rngmod.stream(seed, rngmod.LATTICE_CLAIM)
            subsets = list(la.all_subsets(k))
            counter = 0
            for _ in range(claim_samples):
                omega = random_k_plus_class(s, r, kmin)
                I = subsets[int(r.integers(len(subsets)))]
                v = la.claim_check(s, omega, I, kmin)
                if not v.holds:
                    counter += 1
            # rejected candidates: omega with both pairings >= 0 must lie outside K+
            rejected, certified = 0, 0
            for _ in range(claim_samples):
                omega = la.random_rational_class(s.lattice, r)
                I = subsets[int(r.integers(len(subsets)))]
                try:
                    la.claim_check(s, omega, I, kmin)
                except PreconditionViolated as exc:
                    if exc.certificate is not None:
                        rejected += 1
                        cert = exc.certificate
                        if (Fraction(cert["omega_min_dot_kmin"]) <= 0
                                and cert["sum_nonnegative_forces_omega_min_dot_kmin_nonpositive"]):
                            certified += 1
            metrics.update({"claim_samples": claim_samples, "claim_counterexamples": counter,
                            "claim_rejected": rejected, "claim_rejected_certified": certified})
            verdicts["claim"] = counter == 0 and certified == rejected

    # step-1 certificates on the surface if it is Hitchin positive somewhere
    if s.lattice.b_plus == 1:
        step = step1_run(s, seed, step1_samples)
        if step is not None:
            metrics.update(step)
            verdicts["step1_certificates"] = step["step1_valid"] == step["step1_checked"]
    return Report("lattice", {}, metrics, verdicts, tables, details)


def hitchin_period(s, max_n=50):
    """A period point n H - E with positive square and K.omega < 0, or None."""
    H = s.minimal_polarization
    if H is None:
        return None
    for n in range(1, max_n + 1):
        omega = n * H - s.exceptional_sum()
        if omega.square() > 0 and la.pair(s.canonical, omega) < 0:
            return omega
    return None


def step1_run(s, seed, samples):
    omega = hitchin_period(s)
    if omega is None:
        return None
    r = rngmod.stream(seed, rngmod.LATTICE_STEP1)
    checked = valid = 0
    while checked < samples:
        c = la.random_characteristic_class(s, r)
        if la.pair(c, omega) == 0:
            continue
        cert = la.step1_emptiness_certificate(s, c, omega)
        checked += 1
        valid += bool(cert.empty and cert.chain()["holds"])
    return {"step1_checked": checked, "step1_valid": valid}
