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
from collision import (KernelSpec, build_plan, coercivity_pair, collision_coefficients, convolve, default_kernel,
                       entropy_dissipation, flux_divergence, get_plan, kernel_a, kernel_b, kernel_c, kernel_table,
                       landau_Q, relative_entropy)
from errors import DomainError, GridMismatchError, SingularityError, UnsupportedError
from grid_core import FluidMoments, VelocityGrid, random_smooth_field, sample_maxwellian
from norms import lp_norm


def direct_convolution(table, values, grid):
    """Brute-force sum over all node pairs of table[p - q] f[q]."""
    shift = grid.points - 1
    index = np.indices(grid.shape).reshape(3, -1)
    flat = values.ravel()
    out = np.empty((table.shape[0], flat.size))
    for p in range(flat.size):
        d = index[:, p:p + 1] - index + shift
        out[:, p] = table[:, d[0], d[1], d[2]] @ flat
    return out.reshape((table.shape[0],) + grid.shape) * grid.cell_volume


def test_kernel_spec_rejects_positive_gamma():
    with pytest.raises(DomainError):
        KernelSpec(0.1, 1.0)


def test_coulomb_kernel_on_unit_axis():
    a = kernel_a(np.array([1.0, 0.0, 0.0]), KernelSpec(0.0, -3.0))
    assert np.allclose(a, np.diag([0.0, 1.0, 1.0]))


def test_kernel_projects_out_displacement():
    z = np.array([0.3, -1.2, 0.7])
    a = kernel_a(z, KernelSpec(0.5, -3.0))
    assert np.allclose(a, a.T)
    assert np.allclose(a @ z, 0.0, atol=1e-14)
    assert np.all(np.linalg.eigvalsh(a) >= -1e-14)


def test_b_is_the_divergence_of_a():
    spec = KernelSpec(0.5, -3.0)
    z = np.array([1.0, 2.0, -2.0]) / 3.0
    h = 1e-4
    divergence = np.zeros(3)
    for j in range(3):
        step = np.zeros(3)
        step[j] = h
        divergence += (kernel_a(z + step, spec)[:, j] - kernel_a(z - step, spec)[:, j]) / (2.0 * h)
    assert np.allclose(kernel_b(z, spec), divergence, rtol=1e-6)


def test_unregularised_kernel_is_singular_at_origin():
    with pytest.raises(SingularityError):
        kernel_b(np.zeros(3), KernelSpec(0.0, -3.0))


def test_coulomb_c_has_no_table(tiny_grid):
    with pytest.raises(UnsupportedError):
        kernel_table(tiny_grid, KernelSpec(0.0, -3.0), "c")


def test_fft_convolution_matches_direct_summation(tiny_grid, rng):
    f = random_smooth_field(tiny_grid, rng, signed=True)
    spec = KernelSpec(0.5, -3.0)
    plan = build_plan(tiny_grid, spec)
    expected = direct_convolution(kernel_table(tiny_grid, spec, "a_ij"), f.values, tiny_grid)
    for k, component in enumerate(convolve(f, plan, "a_ij")):
        assert np.allclose(component.values, expected[k], rtol=1e-10, atol=1e-12)
    expected_b = direct_convolution(kernel_table(tiny_grid, spec, "b_i"), f.values, tiny_grid)
    assert np.allclose(convolve(f, plan, "b_i", 1).values, expected_b[1], rtol=1e-10, atol=1e-12)


def test_plans_are_memoised(tiny_grid):
    spec = default_kernel(tiny_grid)
    assert get_plan(tiny_grid, spec) is get_plan(tiny_grid, spec)


def test_plan_cache_directory_is_filled(tmp_path, monkeypatch):
    monkeypatch.setenv("LANDAU_CACHE_DIR", str(tmp_path))
    grid = VelocityGrid(3.0, 8)
    get_plan.cache_clear()
    try:
        plan = get_plan(grid, default_kernel(grid))
        assert len(list(tmp_path.glob("plan-*.npz"))) == 1
        get_plan.cache_clear()
        cached = get_plan(grid, default_kernel(grid))
        assert np.allclose(cached.a_hat, plan.a_hat)
    finally:
        get_plan.cache_clear()


def test_plan_for_another_grid_is_refused(tiny_grid, small_grid):
    mu = sample_maxwellian(small_grid)
    plan = get_plan(tiny_grid, default_kernel(tiny_grid))
    with pytest.raises(GridMismatchError):
        landau_Q(mu, mu, plan=plan)


def test_flux_divergence_telescopes(rng):
    flux = rng.normal(size=(16, 5, 5))
    total = flux_divergence(flux, 0, 0.5).sum(axis=0)
    assert np.allclose(total, 0.0, atol=1e-12)


def test_collision_conserves_mass(bimodal):
    q = landau_Q(bimodal, bimodal)
    assert abs(bimodal.grid.integrate(q.values)) < 1e-12 * np.abs(q.values).max() * bimodal.grid.points ** 3


def test_maxwellian_is_nearly_an_equilibrium(mu):
    q = landau_Q(mu, mu)
    assert lp_norm(q, 2.0) / lp_norm(mu, 2.0) < 5e-2


def test_collision_of_bimodal_is_not_small(bimodal):
    q = landau_Q(bimodal, bimodal)
    assert lp_norm(q, 2.0) / lp_norm(bimodal, 2.0) > 1e-2


def test_divergence_and_nondivergence_forms_agree_on_smooth_data():
    grid = VelocityGrid(6.0, 24)
    f = sample_maxwellian(grid, temperature=1.3) + sample_maxwellian(grid, u=(0.8, 0.0, 0.0), temperature=0.7)
    divergence = landau_Q(f, f, form="divergence")
    nondivergence = landau_Q(f, f, form="nondivergence")
    assert lp_norm(divergence - nondivergence, 2.0) < 0.2 * lp_norm(divergence, 2.0)


def test_unknown_form_is_rejected(bimodal):
    with pytest.raises(DomainError):
        landau_Q(bimodal, bimodal, form="weak")


def test_coefficients_are_reusable(bimodal):
    plan = get_plan(bimodal.grid, default_kernel(bimodal.grid))
    coefficients = collision_coefficients(bimodal, plan)
    assert np.array_equal(landau_Q(bimodal, bimodal, plan=plan, coefficients=coefficients).values,
                          landau_Q(bimodal, bimodal, plan=plan).values)


def test_double_dissipation_is_nonnegative(tiny_grid, rng):
    for _ in range(5):
        f = random_smooth_field(tiny_grid, rng)
        assert entropy_dissipation(f, method="double") >= -1e-12


def test_double_dissipation_is_limited_to_small_grids(small_grid, bimodal):
    with pytest.raises(UnsupportedError):
        entropy_dissipation(bimodal, method="double")


def test_dissipation_refuses_negative_density(small_grid, rng):
    f = random_smooth_field(small_grid, rng, signed=True)
    if f.values.min() >= 0:
        f = f - 2.0 * f.values.max()
    with pytest.raises(DomainError):
        entropy_dissipation(f)


def test_relative_entropy_of_reference_vanishes(mu):
    assert abs(relative_entropy(mu, FluidMoments(1.0, (0.0, 0.0, 0.0), 1.0))) < 1e-12


def test_relative_entropy_of_bimodal_is_positive(bimodal):
    assert relative_entropy(bimodal, FluidMoments(1.0, (0.0, 0.0, 0.0), 1.0)) > 1e-3


def test_coercivity_routes_agree_on_maxwellian():
    grid = VelocityGrid(5.0, 10)
    mu = sample_maxwellian(grid)
    p = random_smooth_field(grid, np.random.default_rng(7))
    direct = coercivity_pair(mu, p, 0.0, 1, method="direct")
    spectral = coercivity_pair(mu, p, 0.0, 1, method="convolution")
    assert direct.lhs == spectral.lhs
    assert spectral.rhs == pytest.approx(direct.rhs, rel=1e-6)
    assert direct.A_j == pytest.approx(1.0, rel=1e-3)


def test_coercivity_needs_valid_coordinate(small_grid, bimodal):
    with pytest.raises(DomainError):
        coercivity_pair(bimodal, bimodal, 0.0, 4)


def test_point_mass_flag():
    assert KernelSpec(0.0, -3.0).point_mass
    assert not KernelSpec(0.1, -3.0).point_mass
    assert math.isclose(KernelSpec(0.1, -2.0).power, 0.0)


def test_c_is_minus_divergence_of_b():
    spec = KernelSpec(0.5, -3.0)
    z = np.array([0.7, 0.4, -0.5])
    h = 1e-5
    divergence = 0.0
    for j in range(3):
        shift = np.zeros(3)
        shift[j] = h
        divergence += (kernel_b(z + shift, spec)[j] - kernel_b(z - shift, spec)[j]) / (2.0 * h)
    assert float(kernel_c(z, spec)) == pytest.approx(-divergence, rel=1e-6)
    with pytest.raises(SingularityError):
        kernel_c(np.zeros(3), spec)


@pytest.mark.parametrize("slot", [0, 1])
def test_collision_operator_is_bilinear(tiny_grid, rng, slot):
    # Arrange
    fixed = random_smooth_field(tiny_grid, rng)
    first = random_smooth_field(tiny_grid, rng, signed=True)
    second = random_smooth_field(tiny_grid, rng, signed=True)
    alpha, beta = 0.7, -1.9

    def q(varying):
        return landau_Q(varying, fixed) if slot == 0 else landau_Q(fixed, varying)

    # Act
    combined = q(alpha * first + beta * second).values
    expected = alpha * q(first).values + beta * q(second).values

    # Assert
    assert np.max(np.abs(combined - expected)) <= 1e-11 * np.max(np.abs(expected))


@pytest.mark.parametrize("epsilon", [0.05, 0.3, 1.0, 2.5])
def test_regularised_kernel_is_dominated_by_coulomb_kernel(rng, epsilon):
    z = rng.normal(scale=2.0, size=(3, 500))
    coulomb = KernelSpec(0.0)
    regularised = KernelSpec(epsilon)
    assert np.all(np.abs(kernel_a(z, regularised)) <= np.abs(kernel_a(z, coulomb)) * (1.0 + 1e-12))
    assert np.all(np.abs(kernel_b(z, regularised)) <= np.abs(kernel_b(z, coulomb)) * (1.0 + 1e-12))


def test_collision_operator_converges_as_regularisation_shrinks(bimodal):
    epsilons = np.array([0.4, 0.2, 0.1])
    gaps = []
    for epsilon in epsilons:
        coarse = landau_Q(bimodal, bimodal, KernelSpec(epsilon))
        fine = landau_Q(bimodal, bimodal, KernelSpec(epsilon / 2.0))
        gaps.append(lp_norm(coarse - fine, 2.0))
    slope = np.polyfit(np.log(epsilons), np.log(gaps), 1)[0]
    assert slope >= 0.8
