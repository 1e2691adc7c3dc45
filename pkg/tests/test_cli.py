import subprocess
import sys

import numpy as np
import pytest

from henonlab import cli


def run(args, tmp_path):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def test_render_julia_header(tmp_path):
    assert run(["render-julia"], tmp_path) == 0
    data = (tmp_path / "julia.pgm").read_bytes()
    head = b"P5\n512 512\n255\n"
    assert data[: len(head)] == head
    assert len(data) == len(head) + 512 * 512


def test_unknown_key_exit_1(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("width = 16\nfolor = red\n")
    assert cli.main(["render-julia", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "folor" in capsys.readouterr().err


def test_unknown_flag_exit_1(tmp_path, capsys):
    assert run(["slice", "--folor", "red"], tmp_path) == 1
    assert "folor" in capsys.readouterr().err


@pytest.mark.parametrize("flag,value", [("width", "abc"), ("window", "1,2,3"), ("map", "factor a=0,0 p=0,0,0,0,1,0")])
def test_bad_values_exit_1(tmp_path, capsys, flag, value):
    assert run(["render-julia", f"--{flag}", value], tmp_path) == 1
    assert flag in capsys.readouterr().err


def test_numerical_failure_exit_2(tmp_path, capsys):
    # (0, 0) is a repelling fixed point of z^2, a = 2, not a saddle
    code = run(["nevanlinna", "--map", "factor a=2,0 p=0,0,0,0,1,0", "--saddle", "0,0,0,0"], tmp_path)
    assert code == 2
    assert "not a saddle" in capsys.readouterr().err


def test_manifold_residual_exit_2(tmp_path, capsys):
    code = run(["nevanlinna", "--map", "factor a=2,0 p=0,0,0,0,1,0", "--saddle", "-1,0,-1,0",
                "--radii", "1,64"], tmp_path)
    assert code == 2
    assert "residual" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# tiny\nwidth = 8\nheight = 4   # rows\n")
    assert cli.main(["render-green", "--config", str(cfg), "--width=6", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "green.pgm").read_bytes().startswith(b"P5\n6 4\n255\n")
    lines = (tmp_path / "green.csv").read_text().splitlines()
    assert lines[0] == "re,im,green,error_bound" and len(lines) == 25


def test_slice_mass_footer(tmp_path):
    assert run(["slice", "--resolution", "512"], tmp_path) == 0
    last = (tmp_path / "slice.csv").read_text().splitlines()[-1].split(",")
    assert last[0] == "total_mass"
    assert abs(float(last[1]) - 1.0) <= 0.03


def test_csv_precision_and_line_endings(tmp_path):
    assert run(["periodic", "--period", "2"], tmp_path) == 0
    raw = (tmp_path / "periodic.csv").read_bytes()
    assert b"\r\n" not in raw
    row = raw.decode().splitlines()[1].split(",")
    digits = len(row[0].lstrip("-").replace(".", "").split("e")[0].lstrip("0"))
    assert digits >= 12


def test_equidist_and_param_scan(tmp_path):
    assert run(["equidist", "--n-max", "3", "--quadrature", "10", "--bumps", "1"], tmp_path) == 0
    assert (tmp_path / "equidist.csv").read_text().splitlines()[-1].startswith("fitted,")
    assert run(["param-scan", "--width", "16", "--height", "8"], tmp_path) == 0
    assert (tmp_path / "param_scan.pgm").read_bytes().startswith(b"P5\n16 8\n255\n")


def test_render_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["render-green", "--width", "40", "--height", "30", "--out", str(d)]) == 0
    for name in ("green.pgm", "green.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_log_scale():
    px = cli.log_scale(np.array([0.0, 1.0, 3.0]), gmax=1.0)
    assert px.tolist() == [0, 255, 255]
    assert cli.log_scale(np.zeros(3)).tolist() == [0, 0, 0]


def test_help_keys(capsys):
    assert cli.main(["slice", "--help-keys"]) == 0
    assert "resolution" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "henonlab", "periodic", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert (tmp_path / "periodic.csv").exists()
