# Copyright 2024-2025 NetCracker Technology Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import csv
import json

import pytest
from cli_io import (EXIT_ERROR, EXIT_OK, RunConfig, build_kernel, build_parser, cmd_check, evaluate_norm,
                    json_pointer, load_document, load_registry, main, parse_norm_spec, str2bool, validate_config)
from errors import ConfigurationError, InputError
from grid_core import write_snapshot
from inequality_suite import IneqReport
from monotone_analytics import Provenance


def _write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def test_str2bool():
    assert str2bool("Yes") and str2bool(1) and str2bool("true")
    assert not str2bool("no") and not str2bool(None)


def test_json_pointer_drops_init_tags():
    assert json_pointer(("init", "bimodal", "weights")) == "/init/weights"
    assert json_pointer(("grid", "N")) == "/grid/N"
    assert json_pointer(("a/b", "c~d")) == "/a~1b/c~0d"


def test_default_run_configuration():
    config = validate_config(RunConfig, {})
    assert config.init.kind == "bimodal"
    assert config.grid.N == 32
    assert config.time.dt == "auto"


@pytest.mark.parametrize("data, pointer", [
    ({"grid": {"N": "many"}}, "/grid/N"),
    ({"grid": {"M": 3}}, "/grid/M"),
    ({"init": {"kind": "bimodal", "weights": [0.3, 0.3]}}, "/init/weights"),
    ({"time": {"scheme": "Euler"}}, "/time/scheme"),
])
def test_validation_errors_carry_pointer(data, pointer):
    with pytest.raises(ConfigurationError) as exc:
        validate_config(RunConfig, data)
    assert exc.value.path == pointer
    assert str(exc.value).startswith(pointer)


def test_kernel_defaults_to_two_cells(small_grid):
    config = validate_config(RunConfig, {"kernel": {"gamma": -2.0}})
    spec = build_kernel(config.kernel, small_grid)
    assert spec.epsilon == pytest.approx(2.0 * small_grid.spacing)
    assert spec.gamma == -2.0


def test_load_yaml_document(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("grid:\n  L: 6\n  N: 16\ninit:\n  kind: maxwellian\n")
    config = validate_config(RunConfig, load_document(path))
    assert config.grid.L == 6.0
    assert config.init.kind == "maxwellian"


def test_load_document_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{grid: ")
    with pytest.raises(ConfigurationError):
        load_document(broken)
    with pytest.raises(ConfigurationError):
        load_document(tmp_path / "missing.json")


def test_registry_file(tmp_path, registry):
    path = tmp_path / "registry.json"
    path.write_text(registry.with_constant("C1", 2.0).dumps())
    assert load_registry(str(path))["C1"] == 2.0
    assert load_registry(None)["C1"] == registry["C1"]
    _write_json(path, {"constants": {"C1": {"value": "abc"}}})
    with pytest.raises(ConfigurationError):
        load_registry(str(path))


def test_parse_norm_spec():
    assert parse_norm_spec("lorentz:p=3,q=1,l=-3") == ("lorentz", {"p": 3.0, "q": 1.0, "l": -3.0})
    assert parse_norm_spec("llogl") == ("llogl", {})
    with pytest.raises(InputError):
        parse_norm_spec("lp:p")
    with pytest.raises(InputError):
        parse_norm_spec("lp:p=x")


def test_evaluate_norm(mu):
    assert evaluate_norm(mu, "lp:p=1") == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(InputError):
        evaluate_norm(mu, "lorentz:p=3")
    with pytest.raises(InputError):
        evaluate_norm(mu, "besov:s=1")


def test_unknown_suite(small_grid):
    with pytest.raises(ConfigurationError):
        cmd_check("chapter2", small_grid, 10, 0)


def test_regime_command(capsys):
    assert main(["regime", "--h0", "0", "--x0sq", "0"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("Stable")


def test_regime_command_accepts_capitalised_flags(tmp_path):
    registry = _write_json(tmp_path / "reg.json", json.loads(load_registry(None).dumps()))
    args = build_parser().parse_args(["regime", "--H0", "10", "--X0sq", "0", "--registry", registry])
    assert (args.h0, args.x0sq, args.registry) == (10.0, 0.0, registry)
    assert main(["regime", "--H0", "10", "--X0sq", "0", "--registry", registry]) == EXIT_OK


def test_regime_command_writes_report(tmp_path):
    out = tmp_path / "regime.json"
    assert main(["regime", "--h0", "1e6", "--x0sq", "0", "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["classification"] == "AboveThreshold"
    assert report["t_star"] > 0


@pytest.mark.slow
def test_run_command(tmp_path):
    config = _write_json(tmp_path / "run.json", {"grid": {"L": 6, "N": 16},
                                                 "time": {"t_end": 0.2, "sample_interval": 0.1}})
    out = tmp_path / "run"
    assert main(["run", "--config", config, "--out", str(out)]) == EXIT_OK
    with open(out / "trajectory.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(row["t"]) for row in rows] == pytest.approx([0.0, 0.1, 0.2])
    summary = json.loads((out / "summary.json").read_text())
    assert summary["run_config"]["grid"] == {"L": 6.0, "N": 16}
    assert summary["samples"] == 3


def test_run_command_rejects_bad_configuration(tmp_path):
    config = _write_json(tmp_path / "run.json", {"grid": {"N": "many"}})
    assert main(["run", "--config", config, "--out", str(tmp_path / "run")]) == EXIT_ERROR


def test_run_command_rejects_snapshot_on_other_grid(tmp_path, mu):
    snapshot = tmp_path / "mu.lclf"
    write_snapshot(snapshot, mu)
    config = _write_json(tmp_path / "run.json", {"grid": {"L": 6, "N": 16},
                                                 "init": {"kind": "file", "path": str(snapshot)}})
    assert main(["run", "--config", config, "--out", str(tmp_path / "run")]) == EXIT_ERROR


def test_wode_command(tmp_path, capsys):
    params = _write_json(tmp_path / "wode.json", {"y0sq": 0.001, "t_end": 20.0, "samples": 101})
    registry = tmp_path / "registry.json"
    registry.write_text(json.dumps({"constants": {"k3": {"value": 3.0}, "C4": {"value": 1.0},
                                                  "C5": {"value": 1.0}}}))
    out = tmp_path / "wode.csv"
    assert main(["ode", "wode", "--params", params, "--registry", str(registry), "--out", str(out)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["classification"] == "global_decay"
    assert report["expected_exponent"] == -3.75
    assert out.read_text().splitlines()[0] == "t,Y2"


def test_lifespan_command(tmp_path, capsys):
    params = _write_json(tmp_path / "lifespan.json", {"x0sq": 1.0, "samples": 21})
    out = tmp_path / "lifespan.csv"
    assert main(["ode", "lifespan", "--params", params, "--out", str(out)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["below_envelope"] is True
    lines = out.read_text().splitlines()
    assert lines[0] == "t,X2,envelope"
    assert len(lines) == 22


def test_ode_command_needs_parameters():
    assert main(["ode", "master"]) == EXIT_ERROR


def test_norms_command(tmp_path, capsys, mu):
    snapshot = tmp_path / "mu.lclf"
    write_snapshot(snapshot, mu)
    assert main(["norms", "--input", str(snapshot), "--norm", "lp:p=1", "--norm", "lorentz:p=3,q=1",
                 "--flavor", "starred"]) == EXIT_OK
    values = [float(line) for line in capsys.readouterr().out.split()]
    assert len(values) == 2
    assert values[0] == pytest.approx(1.0, abs=1e-8)
    manifest = tmp_path / "manifest.txt"
    manifest.write_text(f"# field norm\n{snapshot} lp:p=2\n")
    assert main(["norms", "--manifest", str(manifest)]) == EXIT_OK
    assert len(capsys.readouterr().out.split()) == 1


def test_norms_command_rejects_unknown_flavor(tmp_path, mu):
    snapshot = tmp_path / "mu.lclf"
    write_snapshot(snapshot, mu)
    assert main(["norms", "--input", str(snapshot), "--norm", "lp", "--flavor", "odd"]) == EXIT_ERROR


def test_plotdata_command(tmp_path):
    trajectory = tmp_path / "trajectory.csv"
    trajectory.write_text("t,H,M,h1_h,env_upper\n0.0,1.0,-0.5,2.0,inf\n0.1,0.9,-0.6,1.9,4.0\n")
    out = tmp_path / "plot.csv"
    assert main(["plotdata", "--input", str(trajectory), "--curves", "M,envelope", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines() == ["curve,t,value", "M,0.0,-0.5", "M,0.1,-0.6",
                                            "envelope,0.0,inf", "envelope,0.1,4.0"]
    assert main(["plotdata", "--input", str(trajectory), "--curves", "entropy", "--out", str(out)]) == EXIT_ERROR


def test_calibrate_persists_interpolation_constants(tmp_path, mocker):
    # Arrange
    coercivity = IneqReport("coercivity", 2, 0, 0.5, 0.3, details={"C": 0.3})
    mocker.patch("cli_io.check_dissipation_bounds", side_effect=lambda corpus, registry, *args: ([], registry))
    mocker.patch("cli_io.check_coercivity_bound", return_value=coercivity)
    config = _write_json(tmp_path / "calibrate.json", {"grid": {"L": 6, "N": 8}, "corpus": {"size": 2}})
    out = tmp_path / "calibration"

    # Act
    main(["calibrate", "--config", config, "--out", str(out)])

    # Assert
    registry = load_registry(str(out / "registry.json"))
    reports = {r["inequality_id"]: r for r in json.loads((out / "calibration.json").read_text())}
    for weight in ("0", "2", "6"):
        for bound in ("L31", "H1_a", "H1_b"):
            name = f"interp_{bound}_m{weight}"
            assert registry.provenance(name) == Provenance.CALIBRATED
            assert registry[name] == pytest.approx(1.1 * reports[name]["fitted_constant"])
    assert registry["coercivity_C"] == pytest.approx(0.3)
