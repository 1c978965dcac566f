import json

import pytest

from fibham.cli import ExperimentConfig, main, run, validate
from fibham.errors import ConfigError


def read(path):
    return path.read_text()


def test_spectrum_command_writes_bands_and_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["spectrum", "--V", "0.5", "--k", "12", "--out", str(out)]) == 0
    csv = read(out / "bands_V0.5_k12.csv").splitlines()
    assert csv[0] == "level,band_index,a,b" and len(csv) == 234
    man = json.loads(read(out / "manifest.json"))
    assert man["command"] == "spectrum" and man["schema_version"] == 1
    assert set(man["files"]) == {"bands_V0.5_k12.csv", "bands_V0.5_k12.json", "config.json"}
    assert "fibham" in man["versions"] and len(man["config_sha256"]) == 64


def test_ids_command_reports_free_deviation(tmp_path, capsys):
    out = tmp_path / "ids"
    assert main(["ids", "--V", "0", "--L", "10000", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert "sup |N - N_free|" in err
    summary = json.loads(read(out / "ids_summary.json"))
    assert summary["rows"][0]["sup_dev_free"] <= 0.01


def test_reproducible_outputs(tmp_path):
    out = tmp_path / "a"
    args = ["ids", "--V", "0.3", "--L", "500", "--random-omegas", "2", "--seed", "7", "--out", str(out)]
    assert main(args) == 0
    first = {f.name: f.read_bytes() for f in out.iterdir()}
    assert main(args) == 0
    second = {f.name: f.read_bytes() for f in out.iterdir()}
    assert first == second
    other = tmp_path / "b"
    assert main(args[:-1] + [str(other)]) == 0
    ma, mb = json.loads(read(out / "manifest.json")), json.loads(read(other / "manifest.json"))
    assert ma["config_sha256"] == mb["config_sha256"]
    assert {k: v for k, v in ma["files"].items() if k != "config.json"} == {
        k: v for k, v in mb["files"].items() if k != "config.json"
    }


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"V": [0.2], "k": 5, "out": str(tmp_path / "o")}))
    assert main(["spectrum", "--config", str(cfg), "--k", "6"]) == 0
    assert (tmp_path / "o" / "bands_V0.2_k6.csv").exists()


def test_invalid_config_exits_nonzero_without_outputs(tmp_path, capsys):
    out = tmp_path / "bad"
    assert main(["spectrum", "--V", "-1", "--out", str(out)]) != 0
    doc = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert doc["error"] == "invalid_config"
    assert any("coupling must be >= 0" in d for d in doc["diagnostics"])
    assert not out.exists()


def test_module_error_exits_nonzero_without_outputs(tmp_path, capsys):
    out = tmp_path / "coarse"
    assert main(["spectrum", "--V", "0.01", "--k", "22", "--out", str(out)]) == 1
    doc = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert doc["error"] == "resolution_too_coarse"
    assert not out.exists()


def test_validate_diagnostics():
    assert validate(ExperimentConfig()) == []
    d = validate(ExperimentConfig(V=[0.5], L=10, eps=[1e-4]))
    assert any("window below level spacing" in x for x in d)
    assert any("coupling must be >= 0" in x for x in validate(ExperimentConfig(V=[-1.0])))
    assert any("must not be empty" in x for x in validate(ExperimentConfig(V=[])))
    assert any("level k" in x for x in validate(ExperimentConfig(k=23)))
    assert any("period" in x for x in validate(ExperimentConfig(period=15)))
    assert any("5 sample energies" in x for x in validate(ExperimentConfig(n_energies=3), "report"))


def test_config_round_trip():
    cfg = ExperimentConfig(V=[0.1, 0.30000000000000004], L=1234, omega=[0.25], eps=[0.1, 0.05], period=8)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"bogus": 1})


def test_run_stages_without_writing(tmp_path):
    files = run("dv", ExperimentConfig(V=[0.1], period=8, out=str(tmp_path / "never")), log=lambda s: None)
    assert {"dv.csv", "dv.json", "manifest.json", "config.json"} <= set(files)
    assert not (tmp_path / "never").exists()
    row = files["dv.csv"].splitlines()[1].split(",")
    assert int(row[1]) == 8


def test_dry_run(capsys):
    assert main(["orbits", "--V", "0.1", "--dry-run"]) == 0
    assert json.loads(capsys.readouterr().out)["valid"] is True


@pytest.mark.slow
def test_orbits_and_dos_scaling_commands(tmp_path):
    out = tmp_path / "o"
    assert main(["orbits", "--V", "0.1", "--period", "8", "--out", str(out)]) == 0
    assert (out / "orbits_V0.1_n8.csv").read_text().startswith("period,seed_theta,seed_phi,V,multiplier,converged")
    out = tmp_path / "d"
    assert main(["dos-scaling", "--V", "0.3", "--L", "20000", "--n-energies", "5", "--out", str(out)]) == 0
    lines = (out / "dos_scaling.csv").read_text().splitlines()
    assert lines[0] == "V,E,exponent,fit_residual" and len(lines) == 6
