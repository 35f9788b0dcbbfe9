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

"""Weighted Lebesgue, L log L, Sobolev, Lorentz and dyadic norms of grid fields.

Weights <v>^l are evaluated at cell centres. Lorentz norms go through the
decreasing rearrangement, which for a grid field is a step function, so every
segment integral has a closed form.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Tuple

import numpy as np
from scipy import fft as sp_fft
from scipy.integrate import quad
from scipy.special import comb

from errors import DomainError, InputError
from grid_core import HESSIAN_PAIRS, Field, VelocityGrid, fft_workers, hessian, partial, weight

log = logging.getLogger("Norms")

SOBOLEV_FLAVORS = ("homogeneous", "weighted", "bessel")
LORENTZ_FLAVORS = ("starred", "maximal")

# P_j P_k vanishes once |j - k| exceeds this for the bump supports below.
DYADIC_OVERLAP = 2
_BUMP_INNER = 0.75
_BUMP_OUTER = 4.0 / 3.0


def lp_norm(f: Field, p: float, l: float = 0.0) -> float:
    if not p >= 1:
        raise DomainError(f'Lebesgue exponent must be at least 1, got {p}')
    weighted = np.abs(f.values) * weight(f.grid, l)
    if math.isinf(p):
        return float(weighted.max())
    if p == 1:
        return f.grid.integrate(weighted)
    return f.grid.integrate(weighted ** p) ** (1.0 / p)


def llogl(f: Field) -> float:
    magnitude = np.abs(f.values)
    return f.grid.integrate(magnitude * np.log1p(magnitude))


@dataclass(frozen=True, eq=False)
class StepProfile:
    """Decreasing rearrangement f* as steps (level, measure), levels strictly decreasing."""
    levels: np.ndarray
    measures: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.float64)
        measures = np.asarray(self.measures, dtype=np.float64)
        if levels.shape != measures.shape or levels.ndim != 1:
            raise InputError("Step levels and measures must be 1-D arrays of equal length")
        if np.any(np.diff(levels) >= 0):
            raise InputError("Step levels must be strictly decreasing")
        if levels.size and (levels[-1] <= 0 or np.any(measures <= 0)):
            raise InputError("Step levels and measures must be positive")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "measures", measures)

    @classmethod
    def from_steps(cls, steps) -> "StepProfile":
        steps = list(steps)
        return cls(np.array([s[0] for s in steps], dtype=float), np.array([s[1] for s in steps], dtype=float))

    @property
    def steps(self) -> List[Tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.levels, self.measures)]

    @property
    def empty(self) -> bool:
        return self.levels.size == 0

    @cached_property
    def cumulative_measure(self) -> np.ndarray:
        return np.cumsum(self.measures)

    @cached_property
    def cumulative_mass(self) -> np.ndarray:
        return np.cumsum(self.levels * self.measures)

    @property
    def total_measure(self) -> float:
        return float(self.cumulative_measure[-1]) if not self.empty else 0.0

    def _previous(self):
        s_prev = np.concatenate(([0.0], self.cumulative_measure[:-1]))
        j_prev = np.concatenate(([0.0], self.cumulative_mass[:-1]))
        return s_prev, j_prev

    def lp(self, p: float) -> float:
        if self.empty:
            return 0.0
        if math.isinf(p):
            return float(self.levels[0])
        return float(np.sum(self.levels ** p * self.measures) ** (1.0 / p))

    def distribution(self, level) -> np.ndarray:
        """a_f(level): measure of the set where the rearranged function exceeds ``level``."""
        level = np.asarray(level, dtype=float)
        if self.empty:
            return np.zeros_like(level)
        count = np.searchsorted(-self.levels, -level, side="left")
        padded = np.concatenate(([0.0], self.cumulative_measure))
        return padded[count]

    def rearranged(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.empty:
            return np.zeros_like(t)
        index = np.searchsorted(self.cumulative_measure, t, side="right")
        padded = np.concatenate((self.levels, [0.0]))
        return padded[index]

    def maximal(self, t) -> np.ndarray:
        """f**(t) = (1/t) times the integral of f* over (0, t); f**(0) = f*(0)."""
        t = np.asarray(t, dtype=float)
        if self.empty:
            return np.zeros_like(t)
        index = np.searchsorted(self.cumulative_measure, t, side="right")
        s_prev, j_prev = self._previous()
        n = self.levels.size
        inside = index < n
        clipped = np.minimum(index, n - 1)
        mass = np.where(inside, j_prev[clipped] + self.levels[clipped] * (t - s_prev[clipped]),
                        self.cumulative_mass[-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t > 0, mass / np.where(t > 0, t, 1.0), self.levels[0])


def rearrange(f: Field, l: float = 0.0) -> StepProfile:
    values = (np.abs(f.values) * weight(f.grid, l)).ravel()
    levels, counts = np.unique(values, return_counts=True)
    levels, counts = levels[::-1], counts[::-1]
    keep = levels > 0
    return StepProfile(levels[keep], counts[keep] * f.grid.cell_volume)


def distribution_function(profile: StepProfile, level):
    return profile.distribution(level)


def maximal_function(profile: StepProfile, t):
    return profile.maximal(t)


def _check_lorentz_exponents(p: float, q: float) -> None:
    if math.isinf(p) or p == 1:
        if not math.isinf(q):
            raise DomainError(f'Lorentz space L^({p},{q}) is only supported with q = inf')
        return
    if not (1 < p < math.inf and q >= 1):
        raise DomainError(f'Unsupported Lorentz exponents p={p}, q={q}')


def _power_integral(exponent: float, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Integral of t**exponent over [lower, upper], elementwise."""
    if exponent == -1.0:
        return np.log(upper / lower)
    return (upper ** (exponent + 1.0) - lower ** (exponent + 1.0)) / (exponent + 1.0)


def lorentz_from_profile(profile: StepProfile, p: float, q: float, flavor: str = "maximal") -> float:
    _check_lorentz_exponents(p, q)
    if flavor not in LORENTZ_FLAVORS:
        raise DomainError(f'Unknown Lorentz flavor {flavor!r}')
    if profile.empty:
        return 0.0
    levels = profile.levels
    s = profile.cumulative_measure
    mass = profile.cumulative_mass
    if math.isinf(p):
        return float(levels[0])
    if flavor == "starred":
        if math.isinf(q):
            return float(np.max(levels * s ** (1.0 / p)))
        s_prev = np.concatenate(([0.0], s[:-1]))
        total = np.sum(levels ** q * (p / q) * (s ** (q / p) - s_prev ** (q / p)))
        return float(total ** (1.0 / q))
    if math.isinf(q):
        # t^(1/p) f**(t) only has interior minima, so the supremum sits on a breakpoint.
        return float(np.max(mass * s ** (1.0 / p - 1.0)))
    return float(_maximal_lorentz_integral(profile, p, q) ** (1.0 / q))


def _maximal_lorentz_integral(profile: StepProfile, p: float, q: float) -> float:
    levels = profile.levels
    s = profile.cumulative_measure
    s_prev, j_prev = profile._previous()
    offsets = j_prev - levels * s_prev
    # First step: f** is constant.
    total = levels[0] ** q * (p / q) * s[0] ** (q / p)
    tail = profile.cumulative_mass[-1] ** q * s[-1] ** (q / p - q) / (q - q / p)
    if levels.size == 1:
        return float(total + tail)
    lam, c, lower, upper = levels[1:], offsets[1:], s_prev[1:], s[1:]
    if float(q).is_integer():
        q_int = int(q)
        for i in range(q_int + 1):
            terms = comb(q_int, i) * lam ** (q_int - i) * _power_integral(q / p - 1.0 - i, lower, upper)
            if i > 0:
                terms = np.where(c > 0, terms * c ** i, 0.0)
            total += float(np.sum(terms))
    else:
        for lam_k, c_k, a, b in zip(lam, c, lower, upper):
            value, _ = quad(lambda t: t ** (q / p - 1.0) * (lam_k + c_k / t) ** q, a, b)
            total += value
    return float(total + tail)


def lorentz_norm(f: Field, p: float, q: float, l: float = 0.0, flavor: str = "maximal") -> float:
    return lorentz_from_profile(rearrange(f, l), p, q, flavor)


def _spectral_energy(values: np.ndarray, grid: VelocityGrid, multiplier) -> float:
    padded = 2 * grid.points
    transform = sp_fft.rfftn(values, s=(padded,) * 3, workers=fft_workers())
    full = 2.0 * math.pi * sp_fft.fftfreq(padded, d=grid.spacing)
    half = 2.0 * math.pi * sp_fft.rfftfreq(padded, d=grid.spacing)
    xi2 = full[:, None, None] ** 2 + full[None, :, None] ** 2 + half[None, None, :] ** 2
    # rfftn keeps half of the last axis; interior frequencies stand for two modes.
    counts = np.full(half.size, 2.0)
    counts[0] = 1.0
    counts[-1] = 1.0
    energy = np.sum(counts * multiplier(xi2) * np.abs(transform) ** 2)
    return float(energy * grid.cell_volume / padded ** 3)


def _homogeneous_multiplier(m: float):
    if m == 0:
        return np.ones_like

    def multiplier(xi2):
        # the zero mode is dropped for every m != 0
        return np.where(xi2 > 0, np.where(xi2 > 0, xi2, 1.0) ** m, 0.0)

    return multiplier


def sobolev_norm(f: Field, m: float, l: float = 0.0, flavor: str = "homogeneous") -> float:
    """Sobolev norm of f<v>^l.

    ``homogeneous`` and ``bessel`` use the discrete Fourier transform of the
    field zero-padded to 2N per axis, with |xi|^(2m) and (1 + |xi|^2)^m
    multipliers. ``weighted`` sums squared L^2 norms of every finite-difference
    derivative of order at most m.
    """
    if flavor not in SOBOLEV_FLAVORS:
        raise DomainError(f'Unknown Sobolev flavor {flavor!r}')
    weighted = Field(f.grid, f.values * weight(f.grid, l))
    if flavor == "weighted":
        if m < 0 or not float(m).is_integer():
            raise DomainError(f'Weighted Sobolev norms need a nonnegative integer order, got {m}')
        total = 0.0
        for alpha in itertools.product(range(int(m) + 1), repeat=3):
            if sum(alpha) <= m:
                total += f.grid.integrate(partial(weighted, alpha).values ** 2)
        return math.sqrt(total)
    if not np.any(weighted.values):
        return 0.0
    if flavor == "bessel":
        return math.sqrt(_spectral_energy(weighted.values, f.grid, lambda xi2: (1.0 + xi2) ** m))
    return math.sqrt(_spectral_energy(weighted.values, f.grid, _homogeneous_multiplier(m)))


def hessian_norm(f: Field, l: float = 0.0) -> float:
    """L^2_l norm of the full Hessian, mixed entries counted twice."""
    w2 = weight(f.grid, 2.0 * l)
    total = 0.0
    for (i, j), component in zip(HESSIAN_PAIRS, hessian(f)):
        total += (1.0 if i == j else 2.0) * f.grid.integrate(component.values ** 2 * w2)
    return math.sqrt(total)


def _smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        rise = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        fall = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return rise / (rise + fall)


def radial_cutoff(r):
    """Equals 1 on [0, 3/4], 0 beyond 4/3."""
    return 1.0 - _smooth_step((np.asarray(r, dtype=float) - _BUMP_INNER) / (_BUMP_OUTER - _BUMP_INNER))


def dyadic_bump(r, j: int):
    """phi(2^-j x) as a function of r = |x|; j = -1 gives the low-frequency block psi."""
    r = np.asarray(r, dtype=float)
    if j < 0:
        return radial_cutoff(r)
    return radial_cutoff(r / 2.0 ** (j + 1)) - radial_cutoff(r / 2.0 ** j)


@dataclass(frozen=True)
class DyadicPartition:
    psi: np.ndarray
    phi: Tuple[np.ndarray, ...]

    def residual(self) -> np.ndarray:
        return self.psi + sum(self.phi, np.zeros_like(self.psi)) - 1.0


def dyadic_levels(max_radius: float) -> int:
    """Number of annular blocks needed to cover the ball of radius ``max_radius``."""
    if max_radius <= _BUMP_INNER:
        return 0
    return int(math.ceil(math.log2(max_radius / _BUMP_INNER)))


def dyadic_partition(points) -> DyadicPartition:
    """psi and phi_j = phi(2^-j .) at points of shape (..., 3)."""
    radius = np.linalg.norm(np.asarray(points, dtype=float), axis=-1)
    blocks = dyadic_levels(float(np.max(radius))) if radius.size else 0
    return DyadicPartition(dyadic_bump(radius, -1), tuple(dyadic_bump(radius, j) for j in range(blocks)))


def dyadic_block(f: Field, j: int) -> Field:
    return Field(f.grid, f.values * dyadic_bump(np.sqrt(f.grid.speed_squared), j))


def dyadic_norm(f: Field, s: float, l: float = 0.0) -> float:
    """(sum_k 2^(2kl) ||P_k f||^2_{H^s})^(1/2), k from -1 until 2^k exceeds sqrt(3) L."""
    top = 0
    while 2.0 ** top <= math.sqrt(3.0) * f.grid.extent:
        top += 1
    total = 0.0
    for k in range(-1, top + 1):
        block = dyadic_block(f, k)
        if np.any(block.values):
            total += 2.0 ** (2.0 * k * l) * sobolev_norm(block, s, 0.0, "bessel") ** 2
    return math.sqrt(total)
