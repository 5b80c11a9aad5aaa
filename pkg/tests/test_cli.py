import io
import json

import numpy as np
import pytest

from carnot_spectra import cli
from carnot_spectra.grid import Grid, random_bandlimited, sample
from carnot_spectra.group import heisenberg
from carnot_spectra.hgrd import export_grid, import_grid
from carnot_spectra.littlewood_paley import UnresolvedMultiplierError

SMALL = """suite = lp-reconstruct
grid.L = 6
grid.T = pi
grid.Nz = 16
grid.Nt = 8
window.jmin = -2
window.jmax = 4
eps = 1e-8
params.functions = 2
params.pu_samples = 1000
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run(args):
    err = io.StringIO()
    code = cli.run(*args, stream=err)
    return code, err.getvalue()


def test_reports_written(tmp_path):
    cfg = write(tmp_path, SMALL)
    code, err = run(["lp-reconstruct", str(cfg), str(tmp_path / "out")])
    assert code == 0, err
    doc = json.loads((tmp_path / "out" / "lp-reconstruct.json").read_text())
    assert list(doc) == ["suite", "config", "version", "assertions",
                         "timing_ms"]
    assert doc["suite"] == "lp-reconstruct"
    assert doc["config"]["grid.Nz"] == 16
    names = {a["name"] for a in doc["assertions"]}
    assert {"reconstruction_residual", "corpus_boundary_mass"} <= names
    csv = (tmp_path / "out" / "lp-reconstruct.reconstruction.csv").read_text()
    assert csv.startswith("index,boundary_mass,")
    assert "np.float64" not in csv


def test_runs_are_byte_identical(tmp_path):
    cfg = write(tmp_path, SMALL)
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert cli.main(["lp-reconstruct", "--config", str(cfg), "--out",
                         str(out), "--seed", "5"]) == 0
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for name in files:
        a, b = ((o / name).read_bytes() for o in outs)
        if name.endswith(".json"):
            a, b = (json.loads(x) for x in (a, b))
            a.pop("timing_ms"), b.pop("timing_ms")
            assert a["config"]["seed"] == 5
        assert a == b, name


def test_odd_grid_is_a_config_error(tmp_path):
    cfg = write(tmp_path, SMALL.replace("grid.Nz = 16", "grid.Nz = 15"))
    code, err = run(["lp-reconstruct", str(cfg), str(tmp_path)])
    assert code == 2 and "grid.Nz" in err


def test_violated_hypothesis_is_a_config_error(tmp_path):
    cfg = write(tmp_path, "suite = product-laws\nparams.case.01 = "
                          "nonlinear_b rho1=3 rho2=1 p1=2 p2=2 r2=2\n")
    code, err = run(["product-laws", str(cfg), str(tmp_path)])
    assert code == 2 and "rho1 < Q/p1" in err


def test_bad_arguments(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    assert cli.main(["no-such-suite", "--config", str(cfg)]) == 2
    assert cli.main(["lp-reconstruct", "--config", str(cfg),
                     "--seed", str(2 ** 64)]) == 2
    assert cli.main(["lp-reconstruct", "--config",
                     str(tmp_path / "missing.cfg")]) == 2


def test_failed_assertion_exit_code(tmp_path, monkeypatch):
    from carnot_spectra.suites import SuiteResult

    def fake(cfg):
        res = SuiteResult()
        res.check("always_fails", 1.0, 0.5)
        return res

    monkeypatch.setattr(cli, "run_suite", fake)
    code, err = run(["lp-reconstruct", str(write(tmp_path, SMALL)),
                     str(tmp_path / "out")])
    assert code == 1 and "always_fails" in err


def test_unresolved_multiplier_exit_code(tmp_path, monkeypatch):
    def fake(cfg):
        raise UnresolvedMultiplierError("psi(-9) at lambda=1")

    monkeypatch.setattr(cli, "run_suite", fake)
    code, err = run(["lp-reconstruct", str(write(tmp_path, SMALL)),
                     str(tmp_path / "out")])
    assert code == 3 and "psi(-9)" in err


def test_hgrd_input_and_export(tmp_path):
    g = heisenberg(1)
    grid = Grid(6.0, np.pi, 16, 8)
    f = sample(g, grid, random_bandlimited(g, 21, grid.T))
    export_grid(f, tmp_path / "f.hgrd")
    cfg = write(tmp_path, SMALL + "input.hgrd = f.hgrd\noutput.hgrd = true\n")
    code, err = run(["lp-reconstruct", str(cfg), str(tmp_path / "out")])
    assert code == 0, err
    back = import_grid(tmp_path / "out" / "lp-reconstruct.input0.hgrd")
    assert np.array_equal(back.data, f.data)
    # a file on another grid is rejected
    export_grid(sample(g, Grid(6.0, np.pi, 8, 8),
                       random_bandlimited(g, 21, np.pi)), tmp_path / "g.hgrd")
    cfg = write(tmp_path, SMALL + "input.hgrd = g.hgrd\n", "bad.cfg")
    code, err = run(["lp-reconstruct", str(cfg), str(tmp_path / "out")])
    assert code == 2 and "input.hgrd" in err


def test_thread_variable(monkeypatch):
    monkeypatch.setenv("CARNOT_SPECTRA_THREADS", "2")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    cli._limit_threads()
    import os
    assert os.environ["OPENBLAS_NUM_THREADS"] == "2"


def test_module_entry_point(tmp_path):
    import subprocess
    import sys
    cfg = write(tmp_path, SMALL.replace("grid.Nt = 8", "grid.Nt = 7"))
    proc = subprocess.run([sys.executable, "-m", "carnot_spectra.cli",
                           "lp-reconstruct", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "grid.Nt" in proc.stderr
