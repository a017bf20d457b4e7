from __future__ import annotations

import csv

import numpy as np
import pytest

from qetu_hubbard.cli import EXIT_CONFIG, EXIT_OK, main
from qetu_hubbard.hubbard import ModelParams, model_hamiltonian
from qetu_hubbard.pauli import to_matrix


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_spectrum(tmp_path):
    assert main(["spectrum", "--out", str(tmp_path)]) == EXIT_OK
    rows = dict(_rows(tmp_path / "spectrum.csv")[1:])
    assert list(rows) == ["lambda0", "lambda1", "mu", "delta", "gamma", "c1", "c2"]
    assert float(rows["gamma"]) >= 0.09102
    assert np.isclose(float(rows["c1"]), (np.pi - 0.2) / (2 * 5.723265519527193), rtol=1e-9)


def test_spectrum_t_zero_gap(tmp_path):
    assert main(["spectrum", "--t", "0", "--u", "2", "--out", str(tmp_path)]) == EXIT_OK
    rows = dict(_rows(tmp_path / "spectrum.csv")[1:])
    diag = np.unique(np.round(np.diag(to_matrix(model_hamiltonian(ModelParams(2.0, 0.0)))).real, 12))
    assert np.isclose(float(rows["delta"]), diag[1] - diag[0])


def test_trotter_rows(tmp_path):
    assert main(["trotter", "--steps", "2,1", "--out", str(tmp_path), "--gnuplot", "--dump-circuit"]) == EXIT_OK
    rows = _rows(tmp_path / "trotter.csv")
    assert rows[0] == ["n_steps", "l2_error", "depth_excl_rz", "depth_merged"]
    assert [r[0] for r in rows[1:]] == ["1", "2"]
    assert rows[1][2] == "31"
    assert (tmp_path / "trotter.gp").exists() and (tmp_path / "controlled_v_n1.txt").exists()


def test_overlap_rows(tmp_path):
    assert main(["overlap", "--degrees", "4,2", "--out", str(tmp_path)]) == EXIT_OK
    rows = _rows(tmp_path / "overlap.csv")
    assert [r[0] for r in rows[1:]] == ["2", "4"]
    assert all(r[-1] == "ok" for r in rows[1:])


@pytest.mark.parametrize(
    "argv",
    [
        ["overlap", "--degrees", "3"],
        ["energy", "--shots", "0"],
        ["energy", "--noise", ""],
        ["spectrum", "--eta", "5"],
    ],
)
def test_config_errors(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_CONFIG


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("u = 2\nt = 1\nsteps = 1\n")
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["spectrum", "--config", str(cfg), "--u", "1", "--out", str(tmp_path / "b")]) == EXIT_OK
    assert main(["spectrum", "--out", str(tmp_path / "c")]) == EXIT_OK
    a, b, c = ((tmp_path / x / "spectrum.csv").read_text() for x in "abc")
    assert a != b and b == c
    cfg.write_text("bogus = 1\n")
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_energy_is_byte_identical(tmp_path):
    argv = ["energy", "--degrees", "2", "--noise", "0,1e-3", "--shots", "300", "--seed", "9"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(argv + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("energy.csv", "counts_d2_p0.001.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = _rows(tmp_path / "a" / "energy.csv")
    assert rows[0] == ["degree", "p2q", "shots", "mitigated", "energy", "abs_error"]
    assert len(rows) == 5
