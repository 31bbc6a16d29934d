"""Binary field blobs with JSON sidecar headers, and vortex problem bundles.

A field ``name`` is stored as ``name.bin`` (little-endian float64, C order;
complex data gets a trailing axis of length 2 holding real and imaginary
parts) next to ``name.json`` describing shape, kind and grid.
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .grid import TorusGrid

FORMAT_VERSION = 1


def atomic_write(path, data):
    """Write bytes or text to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def grid_header(grid):
    return {"dim": grid.dim, "N": grid.n, "length": grid.length, "h": grid.h}


def write_field(path, array, kind="scalar", grid=None):
    """Write ``array`` to ``path`` (.bin) plus its header (.json)."""
    path = Path(path).with_suffix(".bin")
    array = np.asarray(array)
    is_complex = np.iscomplexobj(array)
    data = np.stack([array.real, array.imag], axis=-1) if is_complex else array
    header = {
        "format": FORMAT_VERSION,
        "dtype": "<f8",
        "shape": list(array.shape),
        "complex": bool(is_complex),
        "kind": kind,
    }
    if grid is not None:
        header["grid"] = grid_header(grid)
    atomic_write(path, np.ascontiguousarray(data, dtype="<f8").tobytes())
    atomic_write(path.with_suffix(".json"), dump_json(header))
    return path


def read_field(path):
    """Return ``(array, header)``."""
    path = Path(path).with_suffix(".bin")
    header = json.loads(path.with_suffix(".json").read_text())
    if header.get("dtype") != "<f8":
        raise ValueError(f"unsupported dtype {header.get('dtype')!r}")
    shape = tuple(header["shape"])
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    full = shape + ((2,) if header["complex"] else ())
    if raw.size != int(np.prod(full)):
        raise ValueError(f"{path}: {raw.size} values, header expects shape {full}")
    data = raw.reshape(full).astype(float)
    if header["complex"]:
        data = data[..., 0] + 1j * data[..., 1]
    return data, header


def write_problem(directory, problem):
    """Write a vortex problem as ``problem.json`` with f0 and density blobs."""
    directory = Path(directory)
    write_field(directory / "f0", problem.f0, "f0", problem.grid)
    write_field(directory / "density", problem.density, "density", problem.grid)
    header = {"format": FORMAT_VERSION, "kind": "vortex-problem",
              "grid": grid_header(problem.grid),
              "fields": {"f0": "f0.bin", "density": "density.bin"}}
    atomic_write(directory / "problem.json", dump_json(header))
    return directory / "problem.json"


def read_problem(path):
    from .vortex import VortexProblem

    path = Path(path)
    header = json.loads(path.read_text())
    if header.get("kind") != "vortex-problem":
        raise ValueError(f"{path} is not a vortex problem file")
    g = header["grid"]
    grid = TorusGrid(int(g["dim"]), int(g["N"]), float(g["length"]))
    fields = {}
    for name in ("f0", "density"):
        data, fh = read_field(path.parent / header["fields"][name])
        if tuple(fh["shape"]) != grid.shape:
            raise ValueError(f"{name} has shape {fh['shape']}, grid is {grid.shape}")
        fields[name] = data
    return VortexProblem(grid, fields["f0"], fields["density"])


def write_solution(directory, solution, grid):
    directory = Path(directory)
    for name in ("v", "w", "u"):
        write_field(directory / name, getattr(solution, name), name, grid)
    meta = {"kind": "vortex-solution", "q": solution.q, "residual1": solution.residual1,
            "residual2": solution.residual2, "iterations": solution.iterations,
            "fields": {n: f"{n}.bin" for n in ("v", "w", "u")}}
    atomic_write(directory / "solution.json", dump_json(meta))
    return directory / "solution.json"


def read_surface(path):
    """Surface descriptor from JSON.

    Either ``{"catalog": "cp2", "blowups": 2}`` or explicit data: ``form``,
    ``euler``, ``signature``, ``canonical`` and optionally ``labels``,
    ``exceptional`` (list of coordinate vectors), ``minimal_canonical``,
    ``minimal_polarization``.
    """
    from . import lattice as la

    data = json.loads(Path(path).read_text())
    if "catalog" in data:
        cat = la.catalog()
        if data["catalog"] not in cat:
            raise ValueError(f"unknown catalog entry {data['catalog']!r}")
        return la.blowup_surface(cat[data["catalog"]], int(data.get("blowups", 0)))
    lat = la.CohomologyLattice(data["form"], data.get("labels"))
    opt = lambda key: lat.cls(data[key]) if data.get(key) is not None else None
    return la.SurfaceDescriptor(
        lat, int(data["euler"]), int(data["signature"]), lat.cls(data["canonical"]),
        tuple(lat.cls(e) for e in data.get("exceptional", [])),
        opt("minimal_canonical"), opt("minimal_polarization"),
    )
