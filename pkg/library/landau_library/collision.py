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

"""Landau collision operator for Coulomb-type kernels.

The kernel family is a(z) = (|z|^2 + eps^2)^((gamma+2)/2) (Id - z z^T/|z|^2)
with b = div a and c = -div b. Convolutions with grid fields are linear
(zero-padded to 2N per axis) and use precomputed kernel transforms held in a
ConvolutionPlan.
"""

import hashlib
import logging
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import fft as sp_fft
from scipy.special import xlogy

from errors import DegenerateError, DomainError, GridMismatchError, SingularityError, UnsupportedError
from grid_core import (HESSIAN_PAIRS, Field, FluidMoments, VelocityGrid, check_same_grid, derivative_along,
                       fft_workers, hessian, maxwellian_values, moments, weight, weighted_integral)

log = logging.getLogger("Collision")

CACHE_VERSION = 1
COULOMB = -3.0
FORMS = ("divergence", "nondivergence")
COMPONENTS = ("a_ij", "b_i", "c")
DIRECT_SUMMATION_LIMIT = 12
ORIGIN_NODES = 5
FACE_NODES = 8
NEAR_FIELD = 2
LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class KernelSpec:
    epsilon: float = 0.0
    gamma: float = COULOMB

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise DomainError(f'Kernel regularisation must be a nonnegative number, got {self.epsilon!r}')
        if not COULOMB <= self.gamma <= 0:
            raise DomainError(f'Potential exponent must lie in [-3, 0], got {self.gamma!r}')
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def power(self) -> float:
        return (self.gamma + 2.0) / 2.0

    @property
    def point_mass(self) -> bool:
        """True when c = 8 pi delta, i.e. the unregularised Coulomb kernel."""
        return self.epsilon == 0 and self.gamma == COULOMB


def default_kernel(grid: VelocityGrid) -> KernelSpec:
    return KernelSpec(2.0 * grid.spacing, COULOMB)


def _radial(z, spec: KernelSpec, name: str):
    z = np.asarray(z, dtype=np.float64)
    r2 = np.sum(z ** 2, axis=0)
    origin = r2 == 0
    if spec.epsilon == 0 and np.any(origin):
        raise SingularityError(f'{name}(z) is singular at z = 0 without regularisation')
    s = r2 + spec.epsilon ** 2
    return z, r2, origin, np.where(origin, 1.0, r2), s


def _a_components(z, spec: KernelSpec) -> np.ndarray:
    """The six independent entries of a(z) in HESSIAN_PAIRS order."""
    z, r2, origin, safe_r2, s = _radial(z, spec, "a")
    scale = s ** spec.power
    out = []
    for i, j in HESSIAN_PAIRS:
        projection = (1.0 if i == j else 0.0) - z[i] * z[j] / safe_r2
        # at z = 0 the projection is replaced by its angular mean (2/3) Id
        projection = np.where(origin, 2.0 / 3.0 if i == j else 0.0, projection)
        out.append(scale * projection)
    return np.stack(out)


def kernel_a(z, spec: KernelSpec) -> np.ndarray:
    """3x3 matrix a(z); a leading axis of length 3 on ``z`` broadcasts."""
    components = _a_components(z, spec)
    rows = [[components[HESSIAN_PAIRS.index((min(i, j), max(i, j)))] for j in range(3)] for i in range(3)]
    return np.array(rows)


def kernel_b(z, spec: KernelSpec) -> np.ndarray:
    z, r2, origin, safe_r2, s = _radial(z, spec, "b")
    return np.where(origin, 0.0, -2.0 * s ** spec.power * z / safe_r2)


def kernel_c(z, spec: KernelSpec):
    """c = -div b away from the origin; zero for the Coulomb kernel without regularisation."""
    z = np.asarray(z, dtype=np.float64)
    r2 = np.sum(z ** 2, axis=0)
    if np.any(r2 == 0):
        raise SingularityError("c(z) is unbounded at z = 0")
    s = r2 + spec.epsilon ** 2
    return 2.0 * s ** (spec.power - 1.0) * (spec.gamma + 3.0 + spec.epsilon ** 2 / r2)


def _displacements(grid: VelocityGrid) -> np.ndarray:
    offsets = np.arange(-(grid.points - 1), grid.points) * grid.spacing
    return np.stack(np.meshgrid(offsets, offsets, offsets, indexing="ij"))


def _origin_average_a(grid: VelocityGrid, spec: KernelSpec) -> float:
    """Cell average of the diagonal of a over the origin cell.

    The cell is symmetric in every coordinate, so the average over one octant
    of trace(a)/3 = (2/3) s^beta gives the full-cell diagonal.
    """
    nodes, weights = np.polynomial.legendre.leggauss(ORIGIN_NODES)
    x = grid.spacing / 4.0 * (nodes + 1.0)
    w = weights / 2.0
    r2 = x[:, None, None] ** 2 + x[None, :, None] ** 2 + x[None, None, :] ** 2
    w3 = w[:, None, None] * w[None, :, None] * w[None, None, :]
    return float(np.sum(w3 * (2.0 / 3.0) * (r2 + spec.epsilon ** 2) ** spec.power))


def _cell_average_c(centres: np.ndarray, spacing: float, spec: KernelSpec) -> np.ndarray:
    """Cell averages of c from the outward flux of -b through the six faces."""
    nodes, weights = np.polynomial.legendre.leggauss(FACE_NODES)
    offsets = spacing / 2.0 * nodes
    area = (spacing / 2.0) ** 2 * weights[:, None] * weights[None, :]
    du, dv = np.meshgrid(offsets, offsets, indexing="ij")
    flux = np.zeros(centres.shape[1])
    for axis in range(3):
        others = [k for k in range(3) if k != axis]
        for sign in (1.0, -1.0):
            points = np.empty((3, centres.shape[1]) + du.shape)
            points[axis] = (centres[axis] + sign * spacing / 2.0)[:, None, None]
            points[others[0]] = centres[others[0]][:, None, None] + du
            points[others[1]] = centres[others[1]][:, None, None] + dv
            b = kernel_b(points, spec)[axis]
            flux += sign * np.sum(area * b, axis=(1, 2))
    return -flux / spacing ** 3


def kernel_table(grid: VelocityGrid, spec: KernelSpec, which: str) -> np.ndarray:
    """Kernel samples at every cell-centre displacement, shape (components, 2N-1, 2N-1, 2N-1)."""
    z = _displacements(grid)
    centre = grid.points - 1
    origin = (centre,) * 3
    safe = z.copy()
    safe[:, centre, centre, centre] = grid.spacing
    if which == "a_ij":
        table = _a_components(safe, spec)
        average = _origin_average_a(grid, spec)
        for k, (i, j) in enumerate(HESSIAN_PAIRS):
            table[(k,) + origin] = average if i == j else 0.0
        return table
    if which == "b_i":
        table = kernel_b(safe, spec)
        table[(slice(None),) + origin] = 0.0
        return table
    if which == "c":
        if spec.point_mass:
            raise UnsupportedError("c is the point mass 8*pi*delta for the Coulomb kernel; there is no table")
        table = kernel_c(safe, spec)[None]
        near = slice(centre - NEAR_FIELD, centre + NEAR_FIELD + 1)
        block = z[:, near, near, near]
        table[0, near, near, near] = _cell_average_c(block.reshape(3, -1), grid.spacing,
                                                     spec).reshape(block.shape[1:])
        return table
    raise DomainError(f'Unknown kernel component {which!r}, expected one of {COMPONENTS}')


@dataclass(frozen=True, eq=False)
class ConvolutionPlan:
    grid: VelocityGrid
    spec: KernelSpec
    a_hat: np.ndarray
    b_hat: np.ndarray
    c_hat: Optional[np.ndarray]

    @property
    def padded(self) -> int:
        return 2 * self.grid.points

    def transform(self, which: str) -> np.ndarray:
        if which == "a_ij":
            return self.a_hat
        if which == "b_i":
            return self.b_hat
        if which == "c":
            if self.c_hat is None:
                raise UnsupportedError("Plan has no c transform for the unregularised Coulomb kernel")
            return self.c_hat
        raise DomainError(f'Unknown kernel component {which!r}, expected one of {COMPONENTS}')


def _embed(table: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    padded = 2 * grid.points
    slots = np.arange(-(grid.points - 1), grid.points) % padded
    out = np.zeros((table.shape[0],) + (padded,) * 3)
    out[(slice(None),) + np.ix_(slots, slots, slots)] = table
    return sp_fft.rfftn(out, axes=(1, 2, 3), workers=fft_workers())


def build_plan(grid: VelocityGrid, spec: KernelSpec) -> ConvolutionPlan:
    log.debug("Building convolution plan for N=%d L=%s eps=%s gamma=%s",
              grid.points, grid.extent, spec.epsilon, spec.gamma)
    a_hat = _embed(kernel_table(grid, spec, "a_ij"), grid)
    b_hat = _embed(kernel_table(grid, spec, "b_i"), grid)
    c_hat = None if spec.epsilon == 0 else _embed(kernel_table(grid, spec, "c"), grid)
    return ConvolutionPlan(grid, spec, a_hat, b_hat, c_hat)


def _cache_file(grid: VelocityGrid, spec: KernelSpec) -> Optional[Path]:
    directory = os.getenv("LANDAU_CACHE_DIR")
    if not directory:
        return None
    key = f'{CACHE_VERSION}|{grid.points}|{grid.extent!r}|{spec.epsilon!r}|{spec.gamma!r}'
    return Path(directory) / f'plan-{hashlib.sha256(key.encode()).hexdigest()[:24]}.npz'


def _load_cached(path: Path, grid: VelocityGrid, spec: KernelSpec) -> Optional[ConvolutionPlan]:
    with np.load(path) as data:
        if int(data["version"]) != CACHE_VERSION:
            log.warning("Ignoring kernel cache %s with version %s", path, int(data["version"]))
            return None
        c_hat = data["c_hat"] if data["c_hat"].size else None
        return ConvolutionPlan(grid, spec, data["a_hat"], data["b_hat"], c_hat)


@lru_cache(maxsize=8)
def get_plan(grid: VelocityGrid, spec: KernelSpec) -> ConvolutionPlan:
    """Memoised plan; LANDAU_CACHE_DIR adds an on-disk cache keyed by (N, L, eps, gamma)."""
    path = _cache_file(grid, spec)
    if path is not None and path.exists():
        plan = _load_cached(path, grid, spec)
        if plan is not None:
            log.debug("Kernel transforms loaded from %s", path)
            return plan
    plan = build_plan(grid, spec)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, version=CACHE_VERSION, a_hat=plan.a_hat, b_hat=plan.b_hat,
                 c_hat=plan.c_hat if plan.c_hat is not None else np.zeros(0))
        log.info("Kernel transforms cached in %s", path)
    return plan


def _resolve_plan(grid: VelocityGrid, spec: Optional[KernelSpec], plan: Optional[ConvolutionPlan]):
    if plan is None:
        return get_plan(grid, spec if spec is not None else default_kernel(grid))
    if plan.grid != grid:
        raise GridMismatchError(f'Plan built for {plan.grid} cannot be used on {grid}')
    if spec is not None and plan.spec != spec:
        raise GridMismatchError(f'Plan built for {plan.spec} cannot be used with {spec}')
    return plan


def _forward(values: np.ndarray, plan: ConvolutionPlan) -> np.ndarray:
    return sp_fft.rfftn(values, s=(plan.padded,) * 3, workers=fft_workers())


def _backward(transform: np.ndarray, plan: ConvolutionPlan) -> np.ndarray:
    n = plan.grid.points
    out = sp_fft.irfftn(transform, s=(plan.padded,) * 3, workers=fft_workers())
    return out[:n, :n, :n] * plan.grid.cell_volume


def convolve(f: Field, plan: ConvolutionPlan, which: str, index: Optional[int] = None):
    """Linear convolution K * f scaled by the cell volume.

    Returns one Field when ``index`` selects a component (HESSIAN_PAIRS order for
    a_ij) or the kernel is scalar, otherwise a tuple with every component.
    """
    _resolve_plan(f.grid, None, plan)
    kernels = plan.transform(which)
    f_hat = _forward(f.values, plan)
    selected = range(kernels.shape[0]) if index is None else [index]
    fields = tuple(Field(f.grid, _backward(f_hat * kernels[k], plan)) for k in selected)
    return fields if index is None and len(fields) > 1 else fields[0]


@dataclass(frozen=True, eq=False)
class CollisionCoefficients:
    """A = a*g (six components) and B_i = sum_j a_ij * d_j g for one first argument g."""
    A: np.ndarray
    B: np.ndarray

    def diffusion_max(self) -> float:
        return float(max(self.A[0].max(), self.A[3].max(), self.A[5].max()))


def _coefficient_arrays(g: np.ndarray, plan: ConvolutionPlan) -> CollisionCoefficients:
    h = plan.grid.spacing
    g_hat = _forward(g, plan)
    grad_hat = [_forward(derivative_along(g, k, h), plan) for k in range(3)]
    a_hat = plan.a_hat
    A = np.stack([_backward(g_hat * a_hat[k], plan) for k in range(6)])
    B = np.stack([
        _backward(sum(a_hat[HESSIAN_PAIRS.index((min(i, j), max(i, j)))] * grad_hat[j] for j in range(3)), plan)
        for i in range(3)
    ])
    return CollisionCoefficients(A, B)


def collision_coefficients(g: Field, plan: ConvolutionPlan) -> CollisionCoefficients:
    _resolve_plan(g.grid, None, plan)
    return _coefficient_arrays(g.values, plan)


def _a_entry(A: np.ndarray, i: int, j: int) -> np.ndarray:
    return A[HESSIAN_PAIRS.index((min(i, j), max(i, j)))]


def flux_divergence(flux: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    """Face-difference of a cell-centred flux with zero flux through the outer faces.

    Interior faces take (-F[i-1] + 7F[i] + 7F[i+1] - F[i+2]) / 12, the faces next
    to the boundary a two-point mean. The sum over cells telescopes to zero.
    """
    a = np.moveaxis(flux, axis, 0)
    n = a.shape[0]
    faces = np.zeros((n + 1,) + a.shape[1:])
    faces[1] = 0.5 * (a[0] + a[1])
    faces[n - 1] = 0.5 * (a[n - 2] + a[n - 1])
    faces[2:n - 1] = (-a[0:n - 3] + 7.0 * a[1:n - 2] + 7.0 * a[2:n - 1] - a[3:n]) / 12.0
    return np.moveaxis((faces[1:] - faces[:-1]) / spacing, 0, axis)


def _q_values(coefficients: CollisionCoefficients, g: np.ndarray, h: np.ndarray,
              plan: ConvolutionPlan, form: str) -> np.ndarray:
    spacing = plan.grid.spacing
    A, B = coefficients.A, coefficients.B
    if form == "divergence":
        grad_h = [derivative_along(h, k, spacing) for k in range(3)]
        out = np.zeros_like(h)
        for i in range(3):
            flux = sum(_a_entry(A, i, j) * grad_h[j] for j in range(3)) - B[i] * h
            out += flux_divergence(flux, i, spacing)
        return out
    if form != "nondivergence":
        raise DomainError(f'Unknown operator form {form!r}, expected one of {FORMS}')
    spec = plan.spec
    if spec.epsilon == 0 and not spec.point_mass:
        raise UnsupportedError(f'Nondivergence form needs eps > 0 when gamma = {spec.gamma}')
    out = np.zeros_like(h)
    for (i, j), component in zip(HESSIAN_PAIRS, hessian(Field(plan.grid, h))):
        out += (1.0 if i == j else 2.0) * A[HESSIAN_PAIRS.index((i, j))] * component.values
    if spec.point_mass:
        return out + 8.0 * math.pi * g * h
    return out + _backward(_forward(g, plan) * plan.c_hat[0], plan) * h


def landau_Q(g: Field, h: Field, spec: Optional[KernelSpec] = None, form: str = "divergence",
             plan: Optional[ConvolutionPlan] = None,
             coefficients: Optional[CollisionCoefficients] = None) -> Field:
    """Q(g, h) = div((a*g) grad h - (a*grad g) h).

    :param coefficients: precomputed collision_coefficients(g, plan), reused when
        several operators share the first argument.
    """
    grid = check_same_grid(g, h)
    plan = _resolve_plan(grid, spec, plan)
    if coefficients is None:
        coefficients = _coefficient_arrays(g.values, plan)
    return Field(grid, _q_values(coefficients, g.values, h.values, plan, form))


def _log_floor(values: np.ndarray) -> float:
    return LOG_FLOOR * max(float(values.max()), 1.0)


def _checked_density(f: Field, clamp_negative: bool) -> np.ndarray:
    if np.any(f.values < 0):
        if not clamp_negative:
            raise DomainError(f'Density has negative values (min {f.values.min():.3e}); '
                              f'pass clamp_negative=True to clamp them')
        return np.maximum(f.values, 0.0)
    return np.asarray(f.values)


def entropy_dissipation(f: Field, spec: Optional[KernelSpec] = None, method: str = "single",
                        plan: Optional[ConvolutionPlan] = None, clamp_negative: bool = False,
                        collision: Optional[Field] = None) -> float:
    """D(f) = -integral of Q(f, f) log f.

    ``single`` uses landau_Q (or a precomputed ``collision`` field); ``double``
    sums the symmetric six-dimensional quadratic form directly and is limited
    to N <= 12.
    """
    values = _checked_density(f, clamp_negative)
    floor = _log_floor(values)
    grid = f.grid
    if method == "single":
        if collision is None:
            plan = _resolve_plan(grid, spec, plan)
            q = _q_values(_coefficient_arrays(values, plan), values, values, plan, "divergence")
        else:
            q = collision.values
        return -grid.integrate(q * np.log(np.maximum(values, floor)))
    if method != "double":
        raise DomainError(f'Unknown dissipation method {method!r}')
    if grid.points > DIRECT_SUMMATION_LIMIT:
        raise UnsupportedError(f'Direct summation is limited to N <= {DIRECT_SUMMATION_LIMIT}, got {grid.points}')
    spec = spec if spec is not None else default_kernel(grid)
    return _double_dissipation(values, grid, spec, floor)


def _pair_tables(grid: VelocityGrid, spec: KernelSpec):
    table = kernel_table(grid, spec, "a_ij")
    index = np.indices(grid.shape).reshape(3, -1)
    return table, index


def _double_dissipation(values: np.ndarray, grid: VelocityGrid, spec: KernelSpec, floor: float) -> float:
    table, index = _pair_tables(grid, spec)
    shift = grid.points - 1
    flat = values.ravel()
    grads = np.stack([derivative_along(values, k, grid.spacing).ravel() for k in range(3)])
    total = 0.0
    for p in range(flat.size):
        d = index[:, p:p + 1] - index + shift
        a = table[:, d[0], d[1], d[2]]
        e = flat[None, :] * grads[:, p:p + 1] - flat[p] * grads
        form = sum((1.0 if i == j else 2.0) * a[k] * e[i] * e[j] for k, (i, j) in enumerate(HESSIAN_PAIRS))
        denominator = flat[p] * flat
        total += float(np.sum(np.divide(form, denominator, out=np.zeros_like(form),
                                        where=denominator > floor * floor)))
    return 0.5 * total * grid.cell_volume ** 2


def relative_entropy(f: Field, reference: Optional[FluidMoments] = None) -> float:
    """H(f | mu) = integral of f log(f/mu) - f + mu with 0 log 0 = 0.

    ``reference`` defaults to the moments of f itself. Negative values are
    clamped to zero.
    """
    values = np.maximum(f.values, 0.0)
    if reference is None:
        reference = moments(f)
    if reference.temperature is None:
        raise DegenerateError("Relative entropy needs a reference with positive mass")
    v = f.grid.velocities
    spread = sum((v[k] - reference.u[k]) ** 2 for k in range(3))
    log_mu = (math.log(reference.rho) - 1.5 * math.log(2.0 * math.pi * reference.temperature)
              - spread / (2.0 * reference.temperature))
    integrand = xlogy(values, values) - values * log_mu - values + np.exp(log_mu)
    return f.grid.integrate(integrand)


def _direct_a_convolution(values: np.ndarray, grid: VelocityGrid, spec: KernelSpec) -> np.ndarray:
    table, index = _pair_tables(grid, spec)
    shift = grid.points - 1
    flat = values.ravel()
    out = np.empty((6, flat.size))
    for p in range(flat.size):
        d = index[:, p:p + 1] - index + shift
        out[:, p] = table[:, d[0], d[1], d[2]] @ flat
    return out.reshape((6,) + grid.shape) * grid.cell_volume


@dataclass(frozen=True)
class CoercivityPair:
    lhs: float
    rhs: float
    A_j: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def coercivity_pair(f: Field, p: Field, m: float, j: int, method: str = "auto") -> CoercivityPair:
    """Both sides of the coercivity estimate for the Coulomb kernel.

    lhs = integral |grad p|^2 <v>^(m-3);
    rhs = 4 ||f||_{L^1_5} A_j^-2 integral (a*f) : grad p (x) grad p <v>^m,
    with A_j = integral f v_j^2.
    """
    grid = check_same_grid(f, p)
    if j not in (1, 2, 3):
        raise DomainError(f'Coordinate index must be 1, 2 or 3, got {j}')
    if np.any(f.values < 0):
        raise DomainError("Coercivity needs a nonnegative density")
    a_j = grid.integrate(f.values * grid.velocities[j - 1] ** 2)
    if a_j <= 0:
        raise DegenerateError(f'A_{j}(f) = {a_j} vanishes')
    grad = [derivative_along(p.values, k, grid.spacing) for k in range(3)]
    lhs = grid.integrate(sum(g ** 2 for g in grad) * weight(grid, m - 3.0))
    coulomb = KernelSpec(0.0, COULOMB)
    if method == "auto":
        method = "direct" if grid.points <= DIRECT_SUMMATION_LIMIT else "convolution"
    if method == "direct":
        A = _direct_a_convolution(f.values, grid, coulomb)
    elif method == "convolution":
        A = _coefficient_arrays(f.values, get_plan(grid, coulomb)).A
    else:
        raise DomainError(f'Unknown coercivity method {method!r}')
    form = sum((1.0 if i == k else 2.0) * A[n] * grad[i] * grad[k] for n, (i, k) in enumerate(HESSIAN_PAIRS))
    quadratic = grid.integrate(form * weight(grid, m))
    rhs = 4.0 * weighted_integral(f, 5.0) * a_j ** -2 * quadratic
    return CoercivityPair(lhs, rhs, a_j)


def reference_maxwellian(grid: VelocityGrid) -> Field:
    """The fixed normalised equilibrium mu with rho = 1, u = 0, T = 1."""
    return Field(grid, maxwellian_values(grid.velocities), nonnegative=True)
