"""Run configuration: INI files with one section per subcommand.

Unknown sections or keys, unparsable values and non-positive tolerances are
rejected with ``ConfigError``.  The effective configuration (defaults filled
in) is echoed into every report.
"""

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

SUBCOMMANDS = ("clifford", "grid", "vortex", "lattice")


def _ints(text):
    return [int(x) for x in text.replace(",", " ").split()]


# key -> (parser, default); keys ending in "tol" must be > 0
SCHEMA = {
    "run": {
        "seed": (int, 1),
        "out": (str, "reports"),
    },
    "clifford": {
        "samples": (int, 1000),
        "tol": (float, 1e-13),
    },
    "grid": {
        "dim": (int, 4),
        "sizes": (_ints, [8, 16, 32]),
        "length": (float, 6.283185307179586),
        "kmax": (int, 1),
        "modes": (int, 3),
        "beta_amplitude": (float, 0.05),
        "psi_amplitude": (float, 1.0),
        "gap_size": (int, 16),
        "gap_tol": (float, 5e-2),
        "min_order": (float, 1.9),
        "gauge_tol": (float, 1e-12),
        "descent_runs": (int, 0),
        "descent_size": (int, 16),
        "descent_psi_tol": (float, 1e-4),
        "descent_fplus_tol": (float, 1e-6),
        "descent_max_steps": (int, 2000),
    },
    "vortex": {
        "problem": (str, ""),
        "tol": (float, 1e-10),
        "assemble_tol": (float, 1e-8),
        "uniqueness_tol": (float, 1e-8),
        "max_iter": (int, 200),
        "mode": (str, "spectral"),
        "second_start": (float, -2.0),
        "golden": (str, ""),
        "golden_tol": (float, 1e-8),
    },
    "lattice": {
        "surface": (str, ""),
        "catalog": (str, "cp2"),
        "blowups": (int, 2),
        "claim_samples": (int, 10000),
        "step1_samples": (int, 100),
        "candidates": (int, 50),
        "threshold_max_n": (int, 12),
    },
}


@dataclass
class RunConfig:
    subcommand: str
    seed: int
    out: Path
    params: dict = field(default_factory=dict)
    source: str = ""

    def echo(self):
        """JSON-ready effective configuration."""
        return {"subcommand": self.subcommand, "seed": self.seed,
                "params": {k: v for k, v in sorted(self.params.items())}}


def _parse_section(name, items, base_dir):
    schema = SCHEMA[name]
    out = {k: default for k, (_, default) in schema.items()}
    for key, raw in items:
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        parser = schema[key][0]
        try:
            out[key] = parser(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key} = {raw!r}: {exc}") from None
    for key, value in out.items():
        if key.endswith("tol") and not value > 0:
            raise ConfigError(f"[{name}] {key} must be positive, got {value}")
    for key in ("problem", "surface", "golden"):
        if out.get(key) and base_dir is not None:
            out[key] = str((base_dir / out[key]).resolve())
    return out


def load_config(subcommand, path=None, seed=None, out=None):
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    cp = configparser.ConfigParser(interpolation=None)
    base_dir = None
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            cp.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
        base_dir = path.parent
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
    run = _parse_section("run", cp.items("run") if cp.has_section("run") else [], None)
    params = _parse_section(subcommand, cp.items(subcommand) if cp.has_section(subcommand) else [],
                            base_dir)
    _validate(subcommand, params)
    return RunConfig(
        subcommand=subcommand,
        seed=run["seed"] if seed is None else int(seed),
        out=Path(out if out is not None else run["out"]),
        params=params,
        source=str(path) if path else "",
    )


def _validate(subcommand, p):
    if subcommand == "grid":
        if p["dim"] not in (2, 4):
            raise ConfigError("grid dim must be 2 or 4")
        if len(p["sizes"]) < 3 or any(n < 4 for n in p["sizes"]):
            raise ConfigError("grid sizes needs at least 3 entries, each >= 4")
        if p["sizes"] != sorted(p["sizes"]):
            raise ConfigError("grid sizes must be increasing")
        if p["gap_size"] not in p["sizes"]:
            raise ConfigError("gap_size must be one of sizes")
        if p["length"] <= 0 or p["kmax"] < 0 or p["modes"] < 1:
            raise ConfigError("length must be > 0, kmax >= 0, modes >= 1")
    elif subcommand == "vortex":
        if p["mode"] not in ("spectral", "cg"):
            raise ConfigError("vortex mode must be 'spectral' or 'cg'")
        if p["max_iter"] < 1:
            raise ConfigError("max_iter must be >= 1")
    elif subcommand == "lattice":
        if p["blowups"] < 0:
            raise ConfigError("blowups must be >= 0")
    elif subcommand == "clifford":
        if p["samples"] < 1:
            raise ConfigError("samples must be >= 1")
