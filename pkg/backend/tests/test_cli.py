import json

import pytest

import main as cli
from app.core.config import settings
from app.core.errors import EXIT_INVALID_INPUT, EXIT_OK


def test_lens(capsys):
    assert cli.main(["lens", "--f", "12.5", "--R", "250"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "x = 625 μm"


def test_lens_invalid_geometry():
    assert cli.main(["lens", "--f", "300", "--R", "250"]) == EXIT_INVALID_INPUT


def test_missing_command(capsys):
    assert cli.main([]) == EXIT_INVALID_INPUT
    assert "usage" in capsys.readouterr().out


def test_dump_config(capsys):
    assert cli.main(["--dump-config"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    keys = [line.split("=", 1)[0] for line in lines]
    assert keys == sorted(keys)
    assert "GAMMA1=15.1" in lines
    assert "GRID_N=1200" in lines


def test_config_file_and_flag_precedence(tmp_path, capsys):
    config = tmp_path / "run.env"
    config.write_text("GAMMA1=12.0\nomega2=7\nGRID_N=64\n", encoding="utf-8")
    assert cli.main(["--config", str(config), "--dump-config"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "GAMMA1=12.0" in lines
    assert "OMEGA2=7.0" in lines

    assert cli.main(["--config", str(config), "steady", "--omega2", "3", "--no-numeric"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["atom"]["gamma1"] == 12.0
    assert summary["atom"]["omega2"] == 3.0


def test_missing_config_file(tmp_path):
    assert cli.main(["--config", str(tmp_path / "missing.env"), "lens", "--f", "1", "--R", "2"]) == EXIT_INVALID_INPUT


def test_non_numeric_config_value(tmp_path):
    config = tmp_path / "bad.env"
    config.write_text("OMEGA1=fast\n", encoding="utf-8")
    assert cli.main(["--config", str(config), "--dump-config"]) == EXIT_INVALID_INPUT


def test_steady_reports_cross_check(capsys):
    assert cli.main(["steady", "--r", "5"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["P3_residual"] < 1e-8
    assert summary["hamiltonian_sign"] == 1
    assert summary["k31r"] == pytest.approx(31.41592653589793)


def test_steady_rejects_non_positive_rate():
    assert cli.main(["steady", "--gamma1", "0"]) == EXIT_INVALID_INPUT


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--grid", "1:3:150", "--outputs", "P3,I1", "--out", str(out)]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "r [lambda31],k31r [rad],I1 [1e-2 MHz/sr],P3 [1]"
    assert len(lines) == 151


def test_sweep_is_byte_stable(tmp_path):
    args = ["sweep", "--variable", "delta1", "--grid=-2:2:80", "--format", "json"]
    assert cli.main(args + ["--out", str(tmp_path / "a.json")]) == EXIT_OK
    assert cli.main(args + ["--out", str(tmp_path / "b.json")]) == EXIT_OK
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--grid", "1:2:1"],
        ["sweep", "--grid", "3:1:10"],
        ["sweep", "--variable", "omega1", "--omega1", "3"],
        ["sweep", "--r", "2"],
        ["sweep", "--outputs", "P3,P3"],
        ["sweep", "--outputs", "P4"],
    ],
)
def test_invalid_sweep_specs(args, tmp_path):
    assert cli.main(args + ["--out", str(tmp_path / "x.csv")]) == EXIT_INVALID_INPUT
    assert not (tmp_path / "x.csv").exists()


def test_bad_grid_syntax():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["sweep", "--grid", "1-3"])
    assert excinfo.value.code == 2


def test_flags_update_settings():
    cli.main(["lens", "--f", "1", "--R", "2"])
    assert settings.OUTPUT_FORMAT == "csv"
    cli.apply_configuration(cli.build_parser().parse_args(["sweep", "--omega1", "4", "--format", "json"]))
    assert settings.OMEGA1 == 4.0
    assert settings.OUTPUT_FORMAT == "json"
