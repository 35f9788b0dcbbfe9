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

import numpy as np
import pytest
from grid_core import VelocityGrid, sample_bimodal, sample_maxwellian
from monotone_analytics import ConstantsRegistry


@pytest.fixture
def tiny_grid():
    return VelocityGrid(4.0, 8)


@pytest.fixture
def small_grid():
    return VelocityGrid(6.0, 16)


@pytest.fixture
def standard_grid():
    return VelocityGrid(8.0, 32)


@pytest.fixture
def mu(standard_grid):
    return sample_maxwellian(standard_grid)


@pytest.fixture
def bimodal(small_grid):
    return sample_bimodal(small_grid, 1.5, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def registry():
    return ConstantsRegistry()
