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


import math

import numpy as np
import pytest
from LandauLibrary import LandauLibrary


@pytest.fixture
def library(tmp_path):
    return LandauLibrary(output_dir=str(tmp_path))


def _write_run(directory, t, entropy, dissipation):
    directory.mkdir(parents=True)
    lines = ["t,H,D"] + [f"{float(a)!r},{float(b)!r},{float(c)!r}" for a, b, c in zip(t, entropy, dissipation)]
    (directory / "trajectory.csv").write_text("\n".join(lines) + "\n")


def test_values_should_be_close(library):
    library.values_should_be_close("1.0000001", "1", "1e-6")
    library.values_should_be_close(1000.5, 1000, 1e-3, relative="True")
    with pytest.raises(AssertionError):
        library.values_should_be_close(1.1, 1.0, 1e-3)


def test_rate_constants_keyword(library):
    rates = library.get_rate_constants(ell="55")
    assert rates["k2"] == pytest.approx(4.556184, abs=1e-5)
    assert rates["q"] == -rates["r1"]


def test_regime_keyword_accepts_constant_overrides(library):
    report = library.classify_regime("10", "0", C6="1", k="0.2", B_star="1")
    assert report["classification"] == "AboveThreshold"
    assert report["t_star"] == pytest.approx(5.8129, abs=1e-3)
    assert library.classify_regime(0, 0)["classification"] == "Stable"


def test_lifespan_and_profile_keywords(library):
    assert library.get_local_lifespan(3, C7=1) == pytest.approx(1.25 * 4.0 ** -0.8)
    assert library.get_envelope_factor() == pytest.approx(0.4 ** -1.25)
    assert library.get_blowup_profile(1.0) == pytest.approx(math.exp(7.0), rel=1e-6)


def test_wode_keyword(library):
    result = library.run_wode_case("1e-3", k3="3", C4="1", C5="1")
    assert result["classification"] == "global_decay"
    assert result["expected_exponent"] == -3.75


def test_log_inequality_keyword(library):
    assert library.count_log_inequality_violations(trials="1e4") == 0


def test_ball_indicator_keyword(library):
    norms = library.get_ball_indicator_lorentz_norms(points=16)
    assert norms["volume"] > 0
    assert norms["maximal"] == pytest.approx(1.5 * norms["starred"], rel=1e-10)


def test_oscillatory_slope_keyword(library):
    assert library.get_oscillatory_slope(1 / 8, 1 / 12, 1 / 16, 1 / 24) == pytest.approx(-7 / 9, rel=0.2)


def test_simulation_keyword_runs_configuration(library, tmp_path, mocker):
    config = tmp_path / "maxwell.json"
    config.write_text('{"init": {"kind": "maxwellian"}}')
    trajectory = mocker.Mock(records=[object()] * 3)
    trajectory.summary.return_value = {"status": "complete", "samples": 3}
    cmd_run = mocker.patch("LandauLibrary.cmd_run", return_value=trajectory)
    assert library.run_landau_simulation(str(config))["samples"] == 3
    run_config, out, registry = cmd_run.call_args.args
    assert run_config.init.kind == "maxwellian"
    assert out == tmp_path / "maxwell"
    assert registry is library.registry


def test_trajectory_keywords(library, tmp_path):
    t = np.linspace(0.0, 1.0, 101)
    _write_run(tmp_path / "decay", t, np.exp(-t), np.exp(-t))
    entropy = library.get_trajectory_column("decay", "H")
    assert len(entropy) == 101
    library.column_should_be_nonincreasing(entropy)
    assert library.get_relative_drift(entropy) == pytest.approx(1.0 - math.exp(-1.0))
    assert library.get_entropy_identity_defect("decay") < 1e-3


def test_nonincreasing_keyword_reports_growth(library):
    with pytest.raises(AssertionError):
        library.column_should_be_nonincreasing([1.0, 0.5, 0.7])
    library.column_should_be_nonincreasing([1.0, 1.0 + 1e-9], tolerance=1e-6)


def test_balance_defect_keyword(library, tmp_path):
    t = np.linspace(0.0, 1.0, 101)
    run = tmp_path / "balance"
    run.mkdir()
    seminorm = np.exp(-t)
    lines = ["t,h1_h,I1,I2,I3,I4"] + [f"{float(a)!r},{float(s)!r},{float(-s * s)!r},0.0,0.0,0.0" for a, s in zip(t, seminorm)]
    (run / "trajectory.csv").write_text("\n".join(lines) + "\n")
    assert library.get_balance_defect("balance") < 1e-3
