"""Seeded random streams.

Every randomized suite draws from ``stream(seed, index)``: numpy's PCG64
seeded through ``SeedSequence([seed, index])``, so independent suites get
independent, reproducible streams from one user seed.
"""

import numpy as np

CLIFFORD, GRID, DESCENT, VORTEX, LATTICE_CLAIM, LATTICE_STEP1, LATTICE_CANDIDATES = range(7)


def stream(seed, index=0):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))
