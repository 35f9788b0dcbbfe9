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

"""Truncated uniform velocity grid, grid fields, quadrature and finite differences.

Fields live on the cube [-L, L)^3 sampled at cell centres; values outside the
cube are taken to be zero. Array axes are ordered (x, y, z).
"""

import logging
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np

from errors import ConfigurationError, DomainError, GridMismatchError, InputError

log = logging.getLogger("GridCore")

_fft_workers = None

SNAPSHOT_MAGIC = b"LCLF"
SNAPSHOT_VERSION = 1
SNAPSHOT_HEADER = np.dtype([
    ("magic", "S4"),
    ("version", "<u4"),
    ("points", "<u4"),
    ("extent", "<f8"),
    ("timestamp", "<f8"),
    ("padding", "V36"),
])

# Hessian components are stored once per unordered pair.
HESSIAN_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
HESSIAN_INDEX = {pair: k for k, (i, j) in enumerate(HESSIAN_PAIRS) for pair in ((i, j), (j, i))}

_FIRST_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0])
_FIRST_EDGE = (np.array([-25.0, 48.0, -36.0, 16.0, -3.0]),
               np.array([-3.0, -10.0, 18.0, -6.0, 1.0]))
_SECOND_INTERIOR = np.array([-1.0, 16.0, -30.0, 16.0, -1.0])
_SECOND_EDGE = (np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]),
                np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]))


@dataclass(frozen=True)
class VelocityGrid:
    """Cell-centred grid with ``points`` nodes per axis on [-extent, extent)."""
    extent: float
    points: int

    def __post_init__(self):
        if isinstance(self.points, bool) or int(self.points) != self.points:
            raise ConfigurationError(f'N must be an integer, got {self.points!r}')
        if self.points % 2 != 0:
            raise ConfigurationError(f'N must be even, got {self.points}')
        if self.points < 8:
            raise ConfigurationError(f'N must be at least 8, got {self.points}')
        if not (math.isfinite(self.extent) and self.extent > 0):
            raise ConfigurationError(f'L must be a positive number, got {self.extent!r}')
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing ** 3

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.points,) * 3

    @cached_property
    def axis(self) -> np.ndarray:
        half = (np.arange(self.points // 2) + 0.5) * self.spacing
        nodes = np.concatenate((-half[::-1], half))
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def velocities(self) -> np.ndarray:
        """Node coordinates, shape (3, N, N, N)."""
        mesh = np.stack(np.meshgrid(self.axis, self.axis, self.axis, indexing="ij"))
        mesh.setflags(write=False)
        return mesh

    @cached_property
    def speed_squared(self) -> np.ndarray:
        v = self.velocities
        squared = v[0] ** 2 + v[1] ** 2 + v[2] ** 2
        squared.setflags(write=False)
        return squared

    @cached_property
    def bracket(self) -> np.ndarray:
        """<v> = (1 + |v|^2)^(1/2) at the nodes."""
        value = np.sqrt(1.0 + self.speed_squared)
        value.setflags(write=False)
        return value

    def integrate(self, values) -> float:
        return float(np.sum(values) * self.cell_volume)


@dataclass(frozen=True, eq=False)
class Field:
    grid: VelocityGrid
    values: np.ndarray
    nonnegative: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise InputError(f'Field values must have shape {self.grid.shape}, got {values.shape}')
        if not np.all(np.isfinite(values)):
            raise InputError("Field values must be finite")
        if self.nonnegative and np.any(values < 0):
            raise InputError(f'Field flagged nonnegative has minimum {values.min():.3e}')
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values, nonnegative: bool = False) -> "Field":
        return Field(self.grid, values, nonnegative)

    def _other_values(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatchError(f'Cannot combine fields on {self.grid} and {other.grid}')
            return other.values
        return other

    def __add__(self, other):
        nonnegative = self.nonnegative and isinstance(other, Field) and other.nonnegative
        return Field(self.grid, self.values + self._other_values(other), nonnegative)

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other_values(other))

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            return Field(self.grid, self.values * self._other_values(scalar))
        return Field(self.grid, self.values * scalar, self.nonnegative and scalar >= 0)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass(frozen=True)
class FluidMoments:
    rho: float
    u: Tuple[float, float, float]
    temperature: Optional[float]


def check_same_grid(*fields: Field) -> VelocityGrid:
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise GridMismatchError(f'Fields live on different grids: {grid} and {other.grid}')
    return grid


def build_grid(extent: float, points: int) -> VelocityGrid:
    return VelocityGrid(extent, points)


def field_from_function(grid: VelocityGrid, fn: Callable, nonnegative: bool = False) -> Field:
    vx, vy, vz = grid.velocities
    return Field(grid, np.broadcast_to(fn(vx, vy, vz), grid.shape), nonnegative)


def maxwellian_values(velocities, rho=1.0, u=(0.0, 0.0, 0.0), temperature=1.0):
    """Evaluate mu_{rho,u,T} at an array of velocities with leading axis of length 3."""
    if not temperature > 0:
        raise DomainError(f'Temperature must be positive, got {temperature}')
    if rho < 0:
        raise DomainError(f'Density must be nonnegative, got {rho}')
    shifted = sum((velocities[k] - u[k]) ** 2 for k in range(3))
    return rho / (2.0 * math.pi * temperature) ** 1.5 * np.exp(-shifted / (2.0 * temperature))


def sample_maxwellian(grid: VelocityGrid, rho: float = 1.0, u=(0.0, 0.0, 0.0),
                      temperature: float = 1.0) -> Field:
    return Field(grid, maxwellian_values(grid.velocities, rho, u, temperature), nonnegative=True)


def sample_bimodal(grid: VelocityGrid, separation: float = 1.5, weight: float = 0.5,
                   axis: int = 0) -> Field:
    """Two Maxwellians a distance ``separation`` apart with total mass 1, mean 0 and T = 1."""
    if not 0.0 < weight < 1.0:
        raise DomainError(f'Bimodal weight must lie in (0, 1), got {weight}')
    spread = weight * (1.0 - weight) * separation ** 2
    temperature = 1.0 - spread / 3.0
    if temperature <= 0:
        raise DomainError(f'Separation {separation} is too large for unit temperature')
    first = np.zeros(3)
    second = np.zeros(3)
    first[axis] = (1.0 - weight) * separation
    second[axis] = -weight * separation
    values = (weight * maxwellian_values(grid.velocities, 1.0, first, temperature)
              + (1.0 - weight) * maxwellian_values(grid.velocities, 1.0, second, temperature))
    return Field(grid, values, nonnegative=True)


def random_smooth_field(grid: VelocityGrid, rng: np.random.Generator, terms: int = 4,
                        signed: bool = False, widths=(0.7, 1.6), radius: Optional[float] = None) -> Field:
    """Random sum of Gaussian bumps; smooth and essentially band-limited on the grid."""
    radius = min(grid.extent / 3.0, 2.5) if radius is None else radius
    values = np.zeros(grid.shape)
    v = grid.velocities
    for _ in range(terms):
        centre = rng.uniform(-radius, radius, size=3) / math.sqrt(3.0)
        width = rng.uniform(*widths)
        amplitude = rng.uniform(0.2, 1.0)
        if signed and rng.random() < 0.5:
            amplitude = -amplitude
        shifted = sum((v[k] - centre[k]) ** 2 for k in range(3))
        values += amplitude * np.exp(-shifted / (2.0 * width ** 2))
    return Field(grid, values, nonnegative=not signed)


def moments(f: Field) -> FluidMoments:
    grid = f.grid
    rho = grid.integrate(f.values)
    if rho <= 0:
        log.debug("Nonpositive mass %.3e, temperature undefined", rho)
        return FluidMoments(rho, (0.0, 0.0, 0.0), None)
    v = grid.velocities
    u = tuple(grid.integrate(f.values * v[k]) / rho for k in range(3))
    spread = sum((v[k] - u[k]) ** 2 for k in range(3))
    temperature = grid.integrate(f.values * spread) / (3.0 * rho)
    return FluidMoments(rho, u, temperature)


def weight(grid: VelocityGrid, l: float) -> np.ndarray:
    if l == 0:
        return np.ones(grid.shape)
    return grid.bracket ** l


def weight_gradient(grid: VelocityGrid, m: float) -> np.ndarray:
    """Components of grad <v>^m = m v <v>^(m-2), shape (3, N, N, N)."""
    return m * grid.velocities * grid.bracket ** (m - 2.0)


def weighted_integral(f: Field, l: float) -> float:
    return f.grid.integrate(f.values * weight(f.grid, l))


def derivative_along(values: np.ndarray, axis: int, spacing: float, order: int = 1) -> np.ndarray:
    """First or second derivative along one axis.

    Centred 4th-order stencils in the interior, one-sided 4th-order stencils
    on the two outermost nodes at each end.
    """
    a = np.moveaxis(np.asarray(values, dtype=np.float64), axis, 0)
    out = np.empty_like(a)
    reverse = a[::-1]
    if order == 1:
        out[2:-2] = (a[:-4] - 8.0 * a[1:-3] + 8.0 * a[3:-1] - a[4:]) / 12.0
        for k, coefficients in enumerate(_FIRST_EDGE):
            out[k] = np.tensordot(coefficients, a[:5], axes=1) / 12.0
            out[-1 - k] = -np.tensordot(coefficients, reverse[:5], axes=1) / 12.0
        out /= spacing
    elif order == 2:
        out[2:-2] = (-a[:-4] + 16.0 * a[1:-3] - 30.0 * a[2:-2] + 16.0 * a[3:-1] - a[4:]) / 12.0
        for k, coefficients in enumerate(_SECOND_EDGE):
            out[k] = np.tensordot(coefficients, a[:6], axes=1) / 12.0
            out[-1 - k] = np.tensordot(coefficients, reverse[:6], axes=1) / 12.0
        out /= spacing ** 2
    else:
        raise DomainError(f'Only first and second derivatives are available, got order {order}')
    return np.moveaxis(out, 0, axis)


def gradient(f: Field) -> Tuple[Field, Field, Field]:
    h = f.grid.spacing
    return tuple(Field(f.grid, derivative_along(f.values, k, h)) for k in range(3))


def hessian(f: Field) -> Tuple[Field, ...]:
    """Second derivatives in HESSIAN_PAIRS order (xx, xy, xz, yy, yz, zz)."""
    h = f.grid.spacing
    first = [derivative_along(f.values, k, h) for k in range(3)]
    components = []
    for i, j in HESSIAN_PAIRS:
        if i == j:
            components.append(derivative_along(f.values, i, h, order=2))
        else:
            components.append(derivative_along(first[j], i, h))
    return tuple(Field(f.grid, c) for c in components)


def hessian_component(components, i: int, j: int):
    return components[HESSIAN_INDEX[(i, j)]]


def partial(f: Field, alpha) -> Field:
    """Mixed derivative for the multi-index ``alpha`` = (ax, ay, az)."""
    h = f.grid.spacing
    values = f.values
    for axis, count in enumerate(alpha):
        if count < 0:
            raise DomainError(f'Multi-index entries must be nonnegative, got {alpha}')
        for _ in range(count // 2):
            values = derivative_along(values, axis, h, order=2)
        if count % 2:
            values = derivative_along(values, axis, h)
    return Field(f.grid, values)


def write_snapshot(path, f: Field, timestamp: float = 0.0) -> None:
    header = np.zeros(1, dtype=SNAPSHOT_HEADER)
    header["magic"] = SNAPSHOT_MAGIC
    header["version"] = SNAPSHOT_VERSION
    header["points"] = f.grid.points
    header["extent"] = f.grid.extent
    header["timestamp"] = timestamp
    body = np.asarray(f.values, dtype="<f8").ravel(order="F")
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(body.tobytes())
    log.debug("Snapshot written to %s at t=%s", path, timestamp)


def read_snapshot(path) -> Tuple[Field, float]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < SNAPSHOT_HEADER.itemsize:
        raise InputError(f'{path} is too short to be a field snapshot')
    header = np.frombuffer(raw, dtype=SNAPSHOT_HEADER, count=1)[0]
    if bytes(header["magic"]) != SNAPSHOT_MAGIC:
        raise InputError(f'{path} is not a field snapshot (bad magic)')
    if int(header["version"]) != SNAPSHOT_VERSION:
        raise InputError(f'{path} has unsupported snapshot version {int(header["version"])}')
    grid = VelocityGrid(float(header["extent"]), int(header["points"]))
    body = np.frombuffer(raw, dtype="<f8", offset=SNAPSHOT_HEADER.itemsize)
    if body.size != grid.points ** 3:
        raise InputError(f'{path} holds {body.size} values, expected {grid.points ** 3}')
    return Field(grid, body.reshape(grid.shape, order="F")), float(header["timestamp"])


def fft_workers() -> int:
    """Worker count handed to scipy.fft; LANDAU_THREADS sets the default."""
    global _fft_workers
    if _fft_workers is None:
        _fft_workers = int(os.getenv("LANDAU_THREADS", "1"))
    return _fft_workers


def set_fft_workers(workers: int) -> None:
    global _fft_workers
    if workers < 1:
        raise ConfigurationError(f'Thread count must be positive, got {workers}')
    _fft_workers = int(workers)
    log.debug("FFT workers set to %d", _fft_workers)
