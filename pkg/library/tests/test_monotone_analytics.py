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


import json
import math

import numpy as np
import pytest
from errors import DomainError, InputError
from grid_core import Field, sample_bimodal, sample_maxwellian
from monotone_analytics import (ENVELOPE_FACTOR, ConstantsRegistry, Provenance, Regime, blowup_bounds,
                                blowup_profile, ckp_bound, ckp_check, classify_regime, decay_exponent,
                                dissipation_bound_check, entropy_ceiling, envelope_bound, local_lifespan,
                                log_blowup_profile, monotone_functional, rate_constants, sqrt_h1_direct)
from norms import sobolev_norm

# Hand arithmetic at ell = 55: slope 4732/954, q = -slope (1 - theta/ell) + theta/ell.
Q_55_99_4 = -2.278092
K2_55 = 4.556184
K1_55 = 3.643034
K_55 = 0.422474


@pytest.fixture
def pinned():
    return ConstantsRegistry(entries={"B_star": 1.0, "C6": 1.0, "k": 0.2})


def test_decay_exponent_for_ell_55():
    assert decay_exponent(55.0, 99.0 / 4.0) == pytest.approx(Q_55_99_4, abs=1e-5)
    assert -decay_exponent(55.0, 99.0 / 4.0) > 7.0 / 4.0


def test_rate_constants_for_ell_55():
    rates = rate_constants(55.0)
    assert rates.k2 == pytest.approx(K2_55, abs=1e-5)
    assert rates.k1 == pytest.approx(K1_55, abs=1e-5)
    assert rates.k == pytest.approx(K_55, abs=1e-5)
    assert rates.k == pytest.approx(min((2.0 * rates.k2 - 7.0) / 5.0, rates.k1))
    assert rates.hypothesis_ok


def test_envelope_factor():
    assert ENVELOPE_FACTOR == pytest.approx(3.1435, abs=1e-3)


def test_blowup_profile_at_one_is_e_to_the_seven():
    assert blowup_profile(1.0, 1.0) == pytest.approx(math.exp(7.0), rel=1e-6)
    assert log_blowup_profile(1.0, 1.0) == pytest.approx(7.0)


def test_monotone_functional_example():
    registry = ConstantsRegistry(entries={"B_star": 1.0, "k2": 4.0})
    assert monotone_functional(1.0, 3.0, 0.0, registry) == pytest.approx(1.0 - 2.5 * 4.0 ** -0.4, abs=1e-12)
    assert monotone_functional(1.0, 3.0, 0.0, registry) == pytest.approx(-0.435872, abs=1e-6)


def test_monotone_functional_rejects_negative_seminorm(registry):
    with pytest.raises(DomainError):
        monotone_functional(1.0, -1.0, 0.0, registry)


def test_above_threshold_recovery_time(pinned):
    report = classify_regime(10.0, 0.0, pinned)
    assert report.classification == Regime.ABOVE_THRESHOLD
    assert report.t_star == pytest.approx(10.0 ** (1.0 / 1.2) - 1.0, abs=1e-9)
    assert report.t_star == pytest.approx(5.8129, abs=1e-3)


def test_threshold_equality_is_stable_with_zero_recovery_time(pinned):
    report = classify_regime(2.5, 0.0, pinned)
    assert report.classification == Regime.STABLE
    assert report.t_star == 0.0


def test_below_threshold_is_stable(pinned):
    report = classify_regime(1.0, 0.0, pinned)
    assert report.classification == Regime.STABLE
    assert report.t_star is None
    assert report.to_dict()["classification"] == "Stable"


def test_negative_entropy_is_rejected(pinned):
    with pytest.raises(DomainError):
        classify_regime(-1.0, 0.0, pinned)


def test_local_lifespan_example():
    registry = ConstantsRegistry(entries={"C7": 1.0})
    assert local_lifespan(3.0, registry) == pytest.approx(1.25 * 4.0 ** -0.8, abs=1e-12)
    assert local_lifespan(3.0, registry) == pytest.approx(0.412346, abs=1e-6)


def test_stable_envelope_at_start(pinned):
    assert envelope_bound(0.0, 1.0, pinned) == pytest.approx(ENVELOPE_FACTOR)


def test_post_recovery_envelope_is_infinite_before_recovery(pinned):
    values = envelope_bound(np.array([1.0, 5.0, 6.0]), 0.0, pinned, "post_Tstar", 5.0)
    assert math.isinf(values[0]) and math.isinf(values[1])
    assert math.isfinite(values[2])


def test_unknown_envelope_variant(pinned):
    with pytest.raises(DomainError):
        envelope_bound(0.0, 1.0, pinned, "unstable")


def test_registry_derives_c6_from_the_other_constants(registry):
    c1 = registry["B_star"] ** -0.4 * (registry["k2"] - 2.0)
    assert registry["C6"] == pytest.approx(2.0 ** -0.4 * min(registry["C1"], c1))
    assert registry.provenance("C6") == Provenance.FORMULA
    assert registry.provenance("C0") == Provenance.DEFAULT


def test_pinning_a_constant_rederives_dependents(registry):
    updated = registry.with_constant("C1", 0.01)
    assert updated.provenance("C1") == Provenance.USER
    assert updated["C6"] == pytest.approx(2.0 ** -0.4 * 0.01)
    assert registry["C1"] == 1.0


def test_unknown_registry_constant_is_rejected():
    with pytest.raises(InputError):
        ConstantsRegistry(entries={"C99": 1.0})


def test_registry_serialisation_keeps_pinned_values(registry):
    calibrated = registry.with_constant("C0", 2.5, Provenance.CALIBRATED)
    restored = ConstantsRegistry.from_dict(json.loads(calibrated.dumps()))
    assert restored["C0"] == 2.5
    assert restored.provenance("C0") == Provenance.CALIBRATED
    assert restored.calibrated() == ["C0"]
    assert restored["k2"] == pytest.approx(calibrated["k2"])


def test_registry_keeps_interpolation_constants_per_weight(registry):
    calibrated = registry.with_constant("interp_H1_a_m2", 3.5, Provenance.CALIBRATED)
    restored = ConstantsRegistry.from_dict(json.loads(calibrated.dumps()))
    assert restored["interp_H1_a_m2"] == 3.5
    assert restored.calibrated() == ["interp_H1_a_m2"]
    assert "interp_H1_a_m6" not in restored.entries


def test_blowup_upper_bound_follows_closed_form():
    registry = ConstantsRegistry(entries={"blowup_c": 1.0, "C1": 1.0, "C2": 1.0, "k1": 2.0, "k2": 3.0})
    bounds = blowup_bounds(0.5, 1.0, 2.0, 1.0, registry)
    expected = (5.0 / 14.0) * (float(log_blowup_profile(0.5, 1.0)) + math.log(1.0) - 5.0 * math.log(2.0))
    assert bounds.log_upper == pytest.approx(expected)
    assert bounds.lower_defined
    assert bounds.lower == pytest.approx(1.0)


def test_blowup_lower_bound_is_undefined_without_entropy_gap(registry):
    bounds = blowup_bounds(0.5, 1.0, 1.0, 1.0, registry)
    assert not bounds.lower_defined
    assert bounds.lower is None


def test_blowup_bounds_need_time_before_blowup(registry):
    with pytest.raises(DomainError):
        blowup_bounds(1.0, 1.0, 2.0, 1.0, registry)


def test_ckp_holds_for_bimodal(small_grid):
    check = ckp_check(sample_bimodal(small_grid, 1.5, 0.4))
    assert check.holds
    assert check.slack > 0


def test_sqrt_h1_direct_matches_weighted_norm(mu):
    direct = sqrt_h1_direct(mu)
    root = Field(mu.grid, np.sqrt(mu.values))
    assert direct == pytest.approx(sobolev_norm(root, 1, -1.5, "weighted") ** 2, rel=1e-8)


def test_dissipation_report_flags_default_constants(small_grid, registry):
    report = dissipation_bound_check(sample_maxwellian(small_grid), None, registry)
    assert set(report.uncalibrated) == {"C0", "C_D1", "C_D2"}
    assert report.sqrt_h1 == pytest.approx(report.sqrt_h1_direct, rel=1e-8)
    assert set(report.ratios) == {"L3<D", "D1", "D2"}


def test_entropy_ceiling_and_ckp_bound():
    registry = ConstantsRegistry(entries={"B_star": 1.0, "k2": 4.0})
    assert entropy_ceiling(0.0, 1.0, 3.0, registry) == pytest.approx(4.0 ** -0.4)
    assert ckp_bound(2.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        ckp_bound(-1.0)
