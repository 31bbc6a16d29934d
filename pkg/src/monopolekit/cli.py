"""``mk`` command line front-end.

    mk clifford|grid|vortex|lattice [--config PATH] [--seed N] [--out DIR]

Each run writes ``<out>/<subcommand>/report.json`` (deterministic given
config and seed), one CSV per table, ``timestamps.json`` kept apart so the
report itself is byte-reproducible, and for vortex runs the solution fields.
Exit status: 0 pass, 1 a verdict failed, 2 configuration or input error,
3 internal error.
"""

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import fieldio, suites
from .config import SUBCOMMANDS, load_config
from .errors import ConfigError

log = logging.getLogger("monopolekit")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3


def run_clifford_suite(cfg):
    return suites.clifford_suite(cfg.params, cfg.seed), {}


def run_grid_convergence(cfg):
    return suites.grid_suite(cfg.params, cfg.seed), {}


def run_vortex(cfg):
    p = cfg.params
    if not p["problem"]:
        raise ConfigError("[vortex] problem = <path to problem.json> is required")
    try:
        problem = fieldio.read_problem(p["problem"])
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read problem {p['problem']}: {exc}") from None
    golden = None
    if p["golden"]:
        try:
            golden, _ = fieldio.read_field(p["golden"])
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read golden field {p['golden']}: {exc}") from None
    report, sol = suites.vortex_report(problem, p, golden)
    return report, {"solution": (sol, problem.grid)} if sol is not None else {}


def run_lattice(cfg):
    try:
        surface = suites._surface_from_params(cfg.params)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid surface: {exc}") from None
    p = cfg.params
    report = suites.lattice_analysis(surface, cfg.seed, p["claim_samples"], p["step1_samples"],
                                     p["candidates"], p["threshold_max_n"])
    report.details["surface"] = {
        "form": [list(r) for r in surface.lattice.form],
        "labels": list(surface.lattice.labels),
        "euler": surface.euler,
        "signature": surface.signature,
        "canonical": list(surface.canonical.coords),
        "blowups": surface.k,
    }
    return report, {}


RUNNERS = {
    "clifford": run_clifford_suite,
    "grid": run_grid_convergence,
    "vortex": run_vortex,
    "lattice": run_lattice,
}


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_report(report, cfg, extras, started, finished):
    out = cfg.out / cfg.subcommand
    report.config = cfg.echo()
    fieldio.atomic_write(out / "report.json", fieldio.dump_json(report.as_dict()))
    for name, (columns, rows) in report.tables.items():
        fieldio.atomic_write(out / f"{name}.csv", _csv_text(columns, rows))
    if "solution" in extras:
        sol, grid = extras["solution"]
        fieldio.write_solution(out / "solution", sol, grid)
    stamps = {"started": started, "finished": finished, "elapsed_seconds": finished - started}
    fieldio.atomic_write(out / "timestamps.json", fieldio.dump_json(stamps))
    return out / "report.json"


def build_parser():
    ap = argparse.ArgumentParser(prog="mk", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", type=Path, help="INI file with [run] and per-subcommand sections")
    ap.add_argument("--seed", type=int, help="overrides [run] seed")
    ap.add_argument("--out", type=Path, help="output directory (overrides [run] out)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.subcommand, args.config, args.seed, args.out)
        started = time.time()
        report, extras = RUNNERS[cfg.subcommand](cfg)
        path = write_report(report, cfg, extras, started, time.time())
    except ConfigError as exc:
        print(f"mk: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    for name, ok in sorted(report.verdicts.items()):
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"report: {path}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
