import json

import numpy as np
import pytest

from improper_sim.cli import OUTDIR_ENV, ConfigError, RunConfig, main
from improper_sim.covariance import CovarianceSpec, improper_fgn_spec
from improper_sim.embedding import NegEigPolicy
from improper_sim.io import (
    read_batch,
    read_spec_csv,
    spectrum_to_csv,
    write_batch,
    write_manifest,
    write_spec_csv,
)
from improper_sim.sampler import CirculantSampler


def write_rows(path, rows, header="tau,re_s,im_s,re_r,im_r"):
    path.write_text(header + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n")
    return path


@pytest.fixture
def bad_dr(tmp_path):
    return write_rows(tmp_path / "bad.csv", [(0, 1, 0, 0, 0), (1, 0, 0, 0, 0), (2, 0.5, 0, 0, 0)])


@pytest.fixture
def neg(tmp_path):
    return write_rows(tmp_path / "neg.csv", [(0, 1, 0, 0, 0), (1, 0.9, 0, 0, 0), (2, 0, 0, 0, 0)])


# --- files ----------------------------------------------------------------------


def test_spec_csv_round_trip(tmp_path):
    spec = CovarianceSpec([2, 0.5 + 0.1j, 0.1], [0.3, 0.2j, -0.05])
    write_spec_csv(spec, tmp_path / "s.csv")
    back = read_spec_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.s_zz, spec.s_zz)
    np.testing.assert_array_equal(back.r_zz, spec.r_zz)


def test_spec_csv_rejects_header_and_gaps(tmp_path):
    with pytest.raises(ValueError, match="header"):
        read_spec_csv(write_rows(tmp_path / "h.csv", [(0, 1, 0, 0, 0)], header="lag,s,r"))
    with pytest.raises(ValueError, match="gaps"):
        read_spec_csv(write_rows(tmp_path / "g.csv", [(0, 1, 0, 0, 0), (2, 0, 0, 0, 0)]))


@pytest.mark.parametrize("fmt,name", [("csv", "z.csv"), ("binary", "z.bin")])
def test_batch_round_trip(tmp_path, fmt, name):
    rng = np.random.default_rng(1)
    Z = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
    write_batch(Z, tmp_path / name, fmt)
    np.testing.assert_array_equal(read_batch(tmp_path / name, fmt), Z)


def test_batch_csv_layout(tmp_path):
    write_batch(np.array([[1 + 2j, 3 - 4j]]), tmp_path / "z.csv")
    assert (tmp_path / "z.csv").read_text().splitlines() == ["rep,t,re_z,im_z", "0,0,1,2", "0,1,3,-4"]


def test_spectrum_csv():
    sampler = CirculantSampler(CovarianceSpec([2, 0, 0], [0, 0, 0]))
    lines = spectrum_to_csv(sampler.spectrum).splitlines()
    assert lines[0] == "k,lambda_xx,lambda_yy,re_lambda_xy,im_lambda_xy"
    assert len(lines) == 5 and lines[1].startswith("1,1.0,1.0,")


def test_manifest(tmp_path):
    m = write_manifest(tmp_path / "m.json", {"seed": 4})
    on_disk = json.loads((tmp_path / "m.json").read_text())
    assert on_disk == m
    assert on_disk["seed"] == 4 and "build" in on_disk and "created" in on_disk


# --- configuration ------------------------------------------------------------


def test_amplitude_parsing():
    p = RunConfig("simulate", n=4).fgn_params()
    spec = improper_fgn_spec(p, 2)
    assert spec.s_zz[0].real == pytest.approx(1.0)
    assert spec.r_zz[0].real == pytest.approx(0.5)
    p = RunConfig("simulate", n=4, amp_a="2", amp_b="1").fgn_params()
    assert (p.A, p.B) == (2.0, 1.0)


def test_config_rejections(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig("simulate", model="csv")
    with pytest.raises(ConfigError):
        RunConfig("simulate", model="csv", path="x.csv", policy=NegEigPolicy("oversample"))
    with pytest.raises(ConfigError):
        RunConfig("simulate", n=4, amp_a="1", amp_b="1").fgn_params()
    with pytest.raises(ConfigError):
        RunConfig("simulate").spec()


# --- commands -----------------------------------------------------------------


def test_check_fgn_exact(capsys):
    assert main(["check", "-n", "64"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "guaranteed_exact" and report["n"] == 256


def test_check_reports_failure(bad_dr, capsys):
    assert main(["check", "--model", "csv", "--path", str(bad_dr)]) == 1
    err = capsys.readouterr().err
    assert "error=not_guaranteed" in err and "tau=1" in err


def test_strict_negative_eigenvalue_exit(neg, tmp_path, capsys):
    code = main(["simulate", "--model", "csv", "--path", str(neg), "--out", str(tmp_path / "o.csv")])
    assert code == 3
    assert "error=negative_eigenvalue" in capsys.readouterr().err
    assert not (tmp_path / "o.csv").exists()


def test_clip_runs_and_flags(neg, tmp_path):
    out = tmp_path / "o.csv"
    assert main(["simulate", "--model", "csv", "--path", str(neg), "--policy", "clip", "--out", str(out)]) == 0
    manifest = json.loads(out.with_name("o.csv.json").read_text())
    assert manifest["inexact"] is True and manifest["clipped_count"] > 0


def test_invalid_config_exit(capsys):
    assert main(["simulate", "-n", "8", "--hurst", "1.2"]) == 2
    assert main(["simulate", "-n", "8", "--reps", "0"]) == 2
    assert main(["simulate", "--model", "csv", "--path", "/nonexistent.csv"]) == 2
    assert capsys.readouterr().err.count("error=invalid_config") == 3


def test_simulate_outputs_and_reproducibility(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "-n", "100", "--reps", "7", "--seed", "42"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    Z = read_batch(a)
    assert Z.shape == (7, 100)
    manifest = json.loads((tmp_path / "a.csv.json").read_text())
    assert manifest["runs"] == 4 and manifest["m"] == 100 and manifest["seed"] == 42
    assert manifest["fgn"]["H"] == 0.75 and manifest["inexact"] is False


def test_simulate_binary(tmp_path):
    out = tmp_path / "z.bin"
    assert main(["simulate", "-n", "16", "--reps", "3", "--format", "binary", "--out", str(out)]) == 0
    assert read_batch(out, "binary").shape == (3, 16)


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path / "runs"))
    assert main(["simulate", "-n", "8"]) == 0
    assert (tmp_path / "runs" / "simulate.csv").exists()
    assert (tmp_path / "runs" / "simulate.csv.json").exists()
    assert main(["eigs", "--hurst-values", "0.6", "--n-values", "16"]) == 0
    assert (tmp_path / "runs" / "eigs.csv").read_text().startswith("H,n,min_eig\n0.6,16,")


def test_eigs_to_stdout(capsys):
    assert main(["eigs", "--hurst-values", "0.5,0.9", "--n-values", "16,32", "--amp-a", "1", "--amp-b", "0.7071067811865476"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "H,n,min_eig" and len(lines) == 5
    assert float(lines[1].split(",")[2]) == pytest.approx(0.25)


def test_spectrum_command(capsys):
    assert main(["spectrum", "-n", "8"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 17


def test_rms_command(tmp_path):
    out = tmp_path / "rms.csv"
    assert main(["rms", "--n-values", "10,20", "--reps", "20", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "n,rms_s,rms_r,replicates"
    assert json.loads((tmp_path / "rms.csv.json").read_text())["n_values"] == [10, 20]


def test_oracle_check_command(neg, capsys):
    assert main(["oracle-check", "-n", "8"]) == 0
    assert json.loads(capsys.readouterr().out)["pass"] is True
    assert main(["oracle-check", "--model", "csv", "--path", str(neg), "--policy", "clip"]) == 1
    assert main(["oracle-check", "-n", "100"]) == 2
