import json
from pathlib import Path

import numpy as np
import pytest

from monopolekit import cli, fieldio, suites
from monopolekit import grid as gr
from monopolekit.config import load_config
from monopolekit.errors import ConfigError
from monopolekit.rng import stream

ROOT = Path(__file__).resolve().parent.parent


def write_ini(path, text):
    path.write_text(text)
    return path


def report(out, sub):
    return json.loads((out / sub / "report.json").read_text())


def test_field_round_trip(tmp_path):
    g = gr.TorusGrid(2, 8)
    r = np.random.default_rng(0)
    real = r.normal(size=(3,) + g.shape)
    cplx = r.normal(size=g.shape) + 1j * r.normal(size=g.shape)
    fieldio.write_field(tmp_path / "a", real, "beta", g)
    fieldio.write_field(tmp_path / "b", cplx)
    a, ha = fieldio.read_field(tmp_path / "a.bin")
    b, hb = fieldio.read_field(tmp_path / "b")
    assert np.array_equal(a, real) and np.array_equal(b, cplx)
    assert ha["grid"]["N"] == 8 and hb["complex"] and not ha["complex"]
    raw = (tmp_path / "b.bin").read_bytes()
    assert len(raw) == 8 * 8 * 2 * 8
    assert np.frombuffer(raw[:16], "<f8").tolist() == [cplx[0, 0].real, cplx[0, 0].imag]


def test_field_size_mismatch(tmp_path):
    fieldio.write_field(tmp_path / "a", np.zeros(4))
    (tmp_path / "a.bin").write_bytes(b"\0" * 8)
    with pytest.raises(ValueError):
        fieldio.read_field(tmp_path / "a")


def test_problem_round_trip(tmp_path):
    p = suites.cosine_problem(16)
    fieldio.write_problem(tmp_path, p)
    q = fieldio.read_problem(tmp_path / "problem.json")
    assert q.grid.shape == p.grid.shape and q.grid.length == p.grid.length
    assert np.array_equal(q.f0, p.f0) and np.array_equal(q.density, p.density)


def test_rng_streams_are_independent_and_reproducible():
    a = stream(1, 0).random(4)
    assert np.array_equal(a, stream(1, 0).random(4))
    assert not np.array_equal(a, stream(1, 1).random(4))
    assert not np.array_equal(a, stream(2, 0).random(4))


def test_config_defaults_and_overrides(tmp_path):
    cfg = load_config("grid")
    assert cfg.params["sizes"] == [8, 16, 32] and cfg.seed == 1
    ini = write_ini(tmp_path / "c.ini", "[run]\nseed = 5\n[grid]\ndim = 2\n")
    cfg = load_config("grid", ini, seed=9, out=tmp_path)
    assert cfg.seed == 9 and cfg.params["dim"] == 2 and cfg.out == tmp_path
    assert cfg.echo()["params"]["gap_tol"] == 5e-2


@pytest.mark.parametrize("text", [
    "[clifford]\ntol = 0\n",
    "[clifford]\ntol = -1e-3\n",
    "[clifford]\nbogus = 1\n",
    "[nowhere]\nx = 1\n",
    "[grid]\nsizes = 8 16\n",
    "[grid]\nsizes = x y z\n",
    "[vortex]\nmode = multigrid\n",
])
def test_config_errors(tmp_path, text):
    sub = text.split("]")[0].strip("[")
    sub = sub if sub in ("clifford", "grid", "vortex") else "clifford"
    with pytest.raises(ConfigError):
        load_config(sub, write_ini(tmp_path / "c.ini", text))


def test_cli_config_error_exit_code(tmp_path, capsys):
    ini = write_ini(tmp_path / "c.ini", "[clifford]\ntol = 0\n")
    assert cli.main(["clifford", "--config", str(ini), "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err
    assert cli.main(["vortex", "--out", str(tmp_path)]) == 2


def test_cli_non_symmetric_surface(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps(
        {"form": [[1, 1], [0, -1]], "euler": 4, "signature": 0, "canonical": [1, 1]}))
    ini = write_ini(tmp_path / "c.ini", "[lattice]\nsurface = s.json\n")
    assert cli.main(["lattice", "--config", str(ini), "--out", str(tmp_path)]) == 2


def test_cli_internal_error_exit_code(tmp_path, monkeypatch):
    def boom(cfg):
        raise RuntimeError("boom")
    monkeypatch.setitem(cli.RUNNERS, "clifford", boom)
    assert cli.main(["clifford", "--out", str(tmp_path)]) == 3


def test_clifford_seed_change_same_verdicts(tmp_path):
    for seed in (1, 2):
        assert cli.main(["clifford", "--seed", str(seed), "--out", str(tmp_path / str(seed))]) == 0
    a, b = report(tmp_path / "1", "clifford"), report(tmp_path / "2", "clifford")
    assert a["verdicts"] == b["verdicts"] and all(a["verdicts"].values())
    assert a["config"]["seed"] == 1 and b["config"]["seed"] == 2
    assert a["metrics"]["clifford_identity_plus"] <= 1e-13


def test_grid_aliasing_is_a_verdict(tmp_path):
    ini = write_ini(tmp_path / "g.ini", "[grid]\ndim = 2\nsizes = 8 16 32\nkmax = 3\n")
    assert cli.main(["grid", "--config", str(ini), "--out", str(tmp_path)]) == 1
    rep = report(tmp_path, "grid")
    assert rep["verdicts"]["no_aliasing"] is False and "aliasing" in rep["details"]


def test_grid_t2_pipeline(tmp_path):
    ini = write_ini(tmp_path / "g.ini", "[grid]\ndim = 2\nsizes = 32 64 128\ngap_size = 32\n")
    assert cli.main(["grid", "--config", str(ini), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "grid" / "convergence.csv").read_text().splitlines()
    assert lines[0].startswith("N,") and len(lines) == 4


def test_vortex_reports(tmp_path):
    for name in ("constant", "positive", "cosine"):
        out = tmp_path / name
        code = cli.main(["vortex", "--config", str(ROOT / "configs" / f"vortex_{name}.ini"),
                         "--out", str(out)])
        assert code == 0
        rep = report(out, "vortex")
        if name == "positive":
            assert rep["details"]["outcome"] == "NoSolution"
            assert rep["details"]["no_solution_certificate"]["contradiction"]
        else:
            assert rep["details"]["outcome"] == "solved"
            w, _ = fieldio.read_field(out / "vortex" / "solution" / "w")
            if name == "constant":
                assert np.max(np.abs(w)) <= 1e-12
            else:
                assert rep["verdicts"]["matches_golden"]


def test_lattice_small_run_reproducible(tmp_path):
    ini = write_ini(tmp_path / "l.ini",
                    "[lattice]\ncatalog = cp2\nblowups = 2\nclaim_samples = 300\n"
                    "step1_samples = 20\ncandidates = 10\n")
    for run in ("a", "b"):
        assert cli.main(["lattice", "--config", str(ini), "--out", str(tmp_path / run)]) == 0
    a = (tmp_path / "a" / "lattice" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "lattice" / "report.json").read_bytes()
    assert (tmp_path / "a" / "lattice" / "timestamps.json").exists()
