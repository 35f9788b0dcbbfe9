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
from errors import DomainError, InputError, ResolutionError
from monotone_analytics import ConstantsRegistry, Regime
from ode_lab import (ConstantProfile, ExponentialProfile, PowerProfile, ScalarTrajectory, TabulatedProfile,
                     WodeClass, blowup_lemma_check, branch_predict, integrate_master, lifespan_envelope, lifespan_ode,
                     monotonicity_sweep, profile_from_dict, verify_monotonicity, wode_run)

SMALL_DATA = (1e-4, 1e-3, 1e-2, 0.05, 0.1)
LARGE_DATA = (5.0, 8.0, 10.0, 20.0, 50.0)


@pytest.fixture
def wode_registry():
    return ConstantsRegistry(entries={"k3": 3.0, "C4": 1.0, "C5": 1.0})


def test_profiles_have_nonnegative_dissipation():
    times = np.linspace(0.0, 5.0, 11)
    for profile in (ConstantProfile(1.0), ExponentialProfile(1.0, 0.5), PowerProfile(1.0, 2.0)):
        assert np.all(np.asarray(profile.dissipation(times)) >= 0)
        assert np.all(np.diff(np.asarray(profile.entropy(times))) <= 0)


def test_exponential_profile_dissipation_is_minus_derivative():
    profile = ExponentialProfile(2.0, 0.5)
    h = 1e-6
    slope = (profile.entropy(1.0 + h) - profile.entropy(1.0 - h)) / (2.0 * h)
    assert float(profile.dissipation(1.0)) == pytest.approx(-float(slope), rel=1e-6)


def test_tabulated_profile_rejects_increasing_entropy():
    with pytest.raises(InputError):
        TabulatedProfile([0.0, 1.0], [1.0, 2.0])


def test_tabulated_profile_slopes():
    profile = TabulatedProfile([0.0, 1.0, 3.0], [2.0, 1.0, 0.0])
    assert float(profile.dissipation(0.5)) == pytest.approx(1.0)
    assert float(profile.dissipation(2.0)) == pytest.approx(0.5)
    assert float(profile.dissipation(4.0)) == 0.0


def test_profile_from_dict():
    assert profile_from_dict({"kind": "exponential", "h0": 1.0, "rate": 0.5}) == ExponentialProfile(1.0, 0.5)
    with pytest.raises(InputError):
        profile_from_dict({"kind": "spline"})


def test_trajectory_validation():
    with pytest.raises(InputError):
        ScalarTrajectory([0.0, 1.0], [1.0, -1.0])
    with pytest.raises(InputError):
        ScalarTrajectory([1.0, 0.0], [1.0, 1.0])


def test_master_integration_self_converges(registry):
    coarse = integrate_master(0.0, ConstantProfile(0.0), registry, 5.0, rtol=1e-10, atol=1e-14)
    fine = integrate_master(0.0, ConstantProfile(0.0), registry, 5.0, rtol=1e-12, atol=1e-16)
    assert np.allclose(coarse.x2, fine.x2, rtol=1e-8, atol=1e-12)


def test_master_trajectory_columns(tmp_path, registry):
    trajectory = integrate_master(0.5, ExponentialProfile(0.5, 0.5), registry, 2.0, samples=60)
    path = tmp_path / "master.csv"
    trajectory.write_csv(path)
    assert path.read_text().splitlines()[0] == "t,X2,H,D,M,lhs,rhs"
    assert len(path.read_text().splitlines()) == 61


def test_master_inequality_is_monotone(registry):
    trajectory = integrate_master(0.5, ExponentialProfile(0.5, 0.5), registry, 5.0)
    report = verify_monotonicity(trajectory, registry)
    assert report.passed, report.to_dict()
    assert report.intervals == len(trajectory) - 1


def test_monotonicity_sweep_has_no_violations():
    reports = monotonicity_sweep(points=5, seed=1)
    assert all(report.passed for report in reports)


def test_monotonicity_needs_enough_samples(registry):
    trajectory = integrate_master(0.5, ConstantProfile(0.0), registry, 1.0, samples=10)
    with pytest.raises(ResolutionError):
        verify_monotonicity(trajectory, registry)


def test_monotonicity_detects_growth(registry):
    times = np.linspace(0.0, 1.0, 60)
    trajectory = ScalarTrajectory(times, np.zeros_like(times), entropy=np.linspace(0.0, 5.0, 60))
    report = verify_monotonicity(trajectory, registry)
    assert not report.passed
    assert report.max_excess > 0


def test_master_rejects_negative_start(registry):
    with pytest.raises(DomainError):
        integrate_master(-1.0, ConstantProfile(0.0), registry, 1.0)


def test_branch_prediction_follows_regime(registry):
    stable = branch_predict(0.0, 0.0, registry)
    assert stable.regime.classification == Regime.STABLE
    assert stable.variant == "stable"
    above = branch_predict(0.0, 1e6, registry, t_end=1.0)
    assert above.regime.classification == Regime.ABOVE_THRESHOLD
    assert above.variant == "post_Tstar"
    assert math.isinf(above.envelope[0])


def test_lifespan_envelope_dominates_saturated_solution(registry):
    report = lifespan_ode(1.0, registry)
    assert report.below_envelope
    assert report.lifespan < report.asymptote
    assert report.to_dict()["below_envelope"] is True


def test_lifespan_envelope_starts_at_initial_size():
    assert lifespan_envelope(0.0, 2.0, 1.0) == pytest.approx(2.0)
    assert math.isinf(lifespan_envelope(10.0, 2.0, 1.0))


@pytest.mark.parametrize("y0sq", SMALL_DATA)
def test_small_weighted_data_decay_at_predicted_rate(wode_registry, y0sq):
    result = wode_run(y0sq, wode_registry)
    assert result.classification == WodeClass.GLOBAL_DECAY
    assert result.expected_exponent == -3.75
    assert result.exponent_error < 0.15


@pytest.mark.parametrize("y0sq", LARGE_DATA)
def test_large_weighted_data_blow_up(wode_registry, y0sq):
    result = wode_run(y0sq, wode_registry)
    assert result.classification == WodeClass.BLOWUP
    assert result.blowup_time is not None
    assert result.trajectory.times[-1] == pytest.approx(result.blowup_time)


def test_survival_bound_holds_for_small_data(wode_registry):
    y0sq = 1e-4
    result = wode_run(y0sq, wode_registry)
    assert result.t_star is None
    assert result.survival_bound == pytest.approx(1.0 / abs(math.log(y0sq)))
    assert np.max(result.trajectory.x2) <= result.survival_bound
    assert result.t1 > 0


def test_zero_weighted_data_stays_zero(wode_registry):
    result = wode_run(0.0, wode_registry)
    assert result.classification == WodeClass.GLOBAL_DECAY
    assert not np.any(result.trajectory.x2)


def test_blowup_check_is_not_applicable_without_blowup(registry):
    trajectory = integrate_master(0.5, ConstantProfile(0.0), registry, 1.0, samples=60)
    report = blowup_lemma_check(trajectory, registry)
    assert not report.applicable
    assert not report.passed


def test_blowup_check_on_blowing_up_trajectory():
    registry = ConstantsRegistry(entries={"C1": 0.01, "B_star": 1.0, "k2": 4.0})
    trajectory = integrate_master(1.0, ExponentialProfile(4.0, 1.0), registry, 5.0)
    assert trajectory.blowup_time is not None
    report = blowup_lemma_check(trajectory, registry)
    assert report.applicable
    assert len(report.ladder) == 10
    assert len(report.log_upper) == 10
