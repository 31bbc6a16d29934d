"""Regenerate the vortex problem fixtures and the cosine golden field.

The golden w is produced by the monotone fixed-point iteration, not by the
Newton solver it is later compared against.
"""

from pathlib import Path

import numpy as np

from monopolekit import fieldio, suites, vortex

ROOT = Path(__file__).resolve().parent.parent / "data" / "vortex"


def main():
    problems = {
        "constant": suites.constant_problem(),
        "cosine": suites.cosine_problem(),
        "positive": suites.constant_problem(f0=0.1),
    }
    for name, p in problems.items():
        fieldio.write_problem(ROOT / name, p)
    p = problems["cosine"]
    q = vortex.degree_constant(p)
    v = vortex.poisson_step(p, q)
    golden = vortex.fixed_point_solve(p.grid, vortex.reduced_density(p, v), q, tol=1e-13)
    fieldio.write_field(ROOT / "cosine" / "golden_w", golden.w, "w", p.grid)
    print(f"golden: {golden.iterations} fixed-point steps, residual {golden.residual:.2e}")


if __name__ == "__main__":
    main()
