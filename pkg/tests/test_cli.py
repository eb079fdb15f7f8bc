import csv
import json
import subprocess
import sys

import pytest
from scipy.special import j0

from covquant.cli import SCHEMAS, ConfigError, load_config, main
from covquant.modespace import make_grid
from covquant.propagator import pauli_jordan_mode_sum

COMMANDS = ["propagator", "bracket", "spectrum", "slices", "maxwell", "dirac"]


def run(tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path)]
    if config is not None:
        cfg = tmp_path / "run.cfg"
        cfg.write_text(config)
        argv += ["--config", str(cfg)]
    return main(argv)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_help_lists_subcommands():
    out = subprocess.run([sys.executable, "-m", "covquant.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for name in COMMANDS:
        assert name in out.stdout
    sub = subprocess.run([sys.executable, "-m", "covquant.cli", "slices", "--help"], capture_output=True, text=True)
    assert "slices.rapidities" in sub.stdout and "--tolerance" in sub.stdout


def test_propagator_default_report(tmp_path):
    assert run(tmp_path, "propagator") == 0
    text = (tmp_path / "propagator.csv").read_text()
    assert text.splitlines()[0] == "t,x,delta_modesum,delta_quadrature,est_error,abs_diff"
    row = read_csv(tmp_path / "propagator.csv")[1]
    t, x, ms, q, err, diff = map(float, row)
    assert (t, x) == (1.0, 0.0)
    assert q == pytest.approx(j0(1.0) / 2, abs=1e-8)
    assert ms == pauli_jordan_mode_sum(make_grid(1, 4096, 400.0, 1.0), [1.0, 0.0])
    assert diff == abs(ms - q)
    # 17 significant digits
    assert row[2] == f"{ms:.17g}"


def test_empty_sweep_header_only(tmp_path):
    assert run(tmp_path, "propagator", config="propagator.times =\n") == 0
    assert (tmp_path / "propagator.csv").read_text().strip() == "t,x,delta_modesum,delta_quadrature,est_error,abs_diff"


@pytest.mark.parametrize("command", COMMANDS)
def test_deterministic(tmp_path, command):
    a, b = tmp_path / "a", tmp_path / "b"
    for fmt in ["csv", "json"]:
        assert main([command, "--out", str(a), "--format", fmt]) == 0
        assert main([command, "--out", str(b), "--format", fmt]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir()) and files
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_json_payload(tmp_path):
    assert run(tmp_path, "spectrum", "--format", "json") == 0
    data = json.loads((tmp_path / "spectrum.json").read_text())
    rows = data["spectrum"]
    # basis order: (0,0), (0,1), (0,2) with energies 1 and 2
    assert [r["eigenvalue"] for r in rows][:3] == [1.5, 3.5, 5.5]
    assert all(r["eigenvalue"] - r["eigenvalue_normal_ordered"] == 1.5 for r in rows)


def test_forced_quadrature_failure(tmp_path):
    assert run(tmp_path, "propagator", "--tolerance", "1e-16") == 3
    # the report is still written, with the failing row
    assert len(read_csv(tmp_path / "propagator.csv")) == 2
    assert run(tmp_path / "d", "dirac", "--tolerance", "1e-16") == 3


@pytest.mark.parametrize(
    "command, config, field",
    [
        ("propagator", "grid.sites_per_axis = 5\n", "grid"),
        ("propagator", "grid.mass = 0\n", "grid"),
        ("propagator", "nonsense.key = 1\n", "nonsense.key"),
        ("propagator", "grid.box_length = abc\n", "grid.box_length"),
        ("maxwell", "grid.mass = 1.0\n", "grid: the photon sector"),
        ("dirac", "grid.mass = 0.0\n", "grid"),
        ("spectrum", "fock.cutoff = 0\n", "fock.cutoff"),
        ("slices", "grid.dimension = 3\n", "grid"),
        ("slices", "tangents.kind = other\n", "tangents.kind"),
    ],
)
def test_invalid_config(tmp_path, capsys, command, config, field):
    assert run(tmp_path, command, config=config) == 2
    assert field in capsys.readouterr().err
    assert not (tmp_path / f"{command}.csv").exists()


def test_all_problems_reported_together(capsys):
    with pytest.raises(ConfigError) as exc:
        load_config("propagator", "grid.box_length = x\nfoo = 1\n", None)
    msg = str(exc.value)
    assert "grid.box_length" in msg and "foo" in msg


def test_missing_config_file(tmp_path):
    assert main(["bracket", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 2


def test_every_command_runs(tmp_path):
    for command in COMMANDS:
        assert run(tmp_path / command, command) == 0
    assert (tmp_path / "maxwell").iterdir()
    slices = read_csv(tmp_path / "slices" / "slices.csv")
    assert slices[0] == ["slice", "rapidity", "offset", "omega_re", "omega_im", "seam_abs"]
    assert len(slices) == 4


def test_schema_defaults_parse():
    for command in COMMANDS:
        cfg = load_config(command, None, None)
        assert cfg["grid"] is not None
        assert SCHEMAS[command][0] in ("scalar", "maxwell", "dirac")


def test_outputs_confined_to_out_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "reports"
    assert main(["bracket", "--out", str(out)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["reports"]
