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

"""Explicit time stepping of df/dt = Q(f, f) with diagnostics and energy balances."""

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from collision import (ConvolutionPlan, KernelSpec, _coefficient_arrays, _q_values, _resolve_plan,
                       default_kernel, entropy_dissipation, landau_Q,
                       reference_maxwellian, relative_entropy)
from errors import ConfigurationError, DomainError, InstabilityError
from grid_core import (HESSIAN_PAIRS, Field, FluidMoments, VelocityGrid, derivative_along, moments, weight,
                       weight_gradient)
from monotone_analytics import (ConstantsRegistry, Regime, RegimeReport, classify_regime, envelope_bound,
                                monotone_functional)
from norms import llogl, lorentz_norm, lp_norm, sobolev_norm

log = logging.getLogger("Solver")

SCHEMES = ("RK2", "RK4")
POSITIVITY = ("none", "clip")
NORMALIZATION_TOLERANCE = 1e-6
TRAJECTORY_COLUMNS = ("t", "mass", "ux", "uy", "uz", "T", "H", "D", "h1_h", "l2_h",
                      "I1", "I2", "I3", "I4", "M", "env_upper", "lorentz31_m3")
EXTRA_NORMS = {
    "l3_m3": lambda f: lp_norm(f, 3.0, -3.0),
    "l1_5": lambda f: lp_norm(f, 1.0, 5.0),
    "llogl": llogl,
    "h1_weighted": lambda f: sobolev_norm(f, 1, 0.0, "weighted"),
    "lorentz31_starred_m3": lambda f: lorentz_norm(f, 3.0, 1.0, -3.0, "starred"),
}


@dataclass(frozen=True)
class SolverConfig:
    scheme: str = "RK4"
    dt: Union[float, str] = "auto"
    t_end: float = 1.0
    sample_interval: float = 0.1
    project_moments: bool = True
    positivity: str = "none"
    cfl: float = 0.1
    keep_snapshots: bool = False
    balance_orders: Tuple[float, ...] = (0.0,)
    norms: Tuple[str, ...] = ()
    allow_unnormalized: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f'Unknown scheme {self.scheme!r}, expected one of {SCHEMES}')
        if self.positivity not in POSITIVITY:
            raise ConfigurationError(f'Unknown positivity policy {self.positivity!r}')
        if self.dt != "auto" and not (isinstance(self.dt, (int, float)) and self.dt > 0):
            raise ConfigurationError(f'dt must be a positive number or "auto", got {self.dt!r}')
        if not self.t_end > 0:
            raise ConfigurationError(f't_end must be positive, got {self.t_end}')
        if not self.sample_interval > 0:
            raise ConfigurationError(f'sample_interval must be positive, got {self.sample_interval}')
        ratio = self.t_end / self.sample_interval
        if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
            raise ConfigurationError(f'sample_interval {self.sample_interval} must divide t_end {self.t_end}')
        unknown = [name for name in self.norms if name not in EXTRA_NORMS]
        if unknown:
            raise ConfigurationError(f'Unknown diagnostic norms {unknown}, expected names from {sorted(EXTRA_NORMS)}')
        if not 0 < self.cfl <= 1:
            raise ConfigurationError(f'cfl must lie in (0, 1], got {self.cfl}')

    @property
    def samples(self) -> int:
        return int(round(self.t_end / self.sample_interval))


def _tendency(values: np.ndarray, plan: ConvolutionPlan) -> np.ndarray:
    return _q_values(_coefficient_arrays(values, plan), values, values, plan, "divergence")


def stable_timestep(f: Field, plan: ConvolutionPlan, cfl: float) -> float:
    """cfl * dv^2 / max diagonal of a*f."""
    diffusion = _coefficient_arrays(f.values, plan).diffusion_max()
    if not diffusion > 0:
        raise DomainError("Cannot derive a time step from a density without diffusion")
    return cfl * f.grid.spacing ** 2 / diffusion


def project_moments(values: np.ndarray, grid: VelocityGrid, target: FluidMoments) -> np.ndarray:
    """Correct f by |f| (c0 + c.v + c4 |v|^2) so mass, momentum and energy match ``target``."""
    v = grid.velocities
    basis = np.stack([np.ones(grid.shape), v[0], v[1], v[2], grid.speed_squared])
    magnitude = np.abs(values)
    gram = np.einsum("aijk,bijk,ijk->ab", basis, basis, magnitude) * grid.cell_volume
    current = np.einsum("aijk,ijk->a", basis, values) * grid.cell_volume
    u = np.asarray(target.u, dtype=float)
    wanted = np.array([target.rho, *(target.rho * u),
                       target.rho * (3.0 * target.temperature + float(u @ u))])
    coefficients = np.linalg.solve(gram, wanted - current)
    return values + magnitude * np.tensordot(coefficients, basis, axes=1)


def _advance(values: np.ndarray, dt: float, plan: ConvolutionPlan, scheme: str) -> np.ndarray:
    k1 = _tendency(values, plan)
    if scheme == "RK2":
        k2 = _tendency(values + dt * k1, plan)
        return values + 0.5 * dt * (k1 + k2)
    k2 = _tendency(values + 0.5 * dt * k1, plan)
    k3 = _tendency(values + 0.5 * dt * k2, plan)
    k4 = _tendency(values + dt * k3, plan)
    return values + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(f: Field, dt: Union[float, str], spec: Optional[KernelSpec] = None,
         config: Optional[SolverConfig] = None, plan: Optional[ConvolutionPlan] = None,
         target: Optional[FluidMoments] = None) -> Field:
    """One explicit step; projection restores ``target`` (default: moments of f)."""
    config = config if config is not None else SolverConfig()
    plan = _resolve_plan(f.grid, spec, plan)
    if dt == "auto":
        dt = stable_timestep(f, plan, config.cfl)
    if not dt > 0:
        raise DomainError(f'Time step must be positive, got {dt}')
    values = _advance(np.asarray(f.values), dt, plan, config.scheme)
    if not np.all(np.isfinite(values)):
        raise InstabilityError(f'Non-finite values after a step of dt={dt}',
                               diagnostic={"dt": dt, "max_before": float(np.max(np.abs(f.values)))})
    target = target if target is not None else moments(f)
    if config.positivity == "clip":
        values = np.maximum(values, 0.0)
        mass = f.grid.integrate(values)
        if mass > 0:
            values *= target.rho / mass
    if config.project_moments and target.temperature is not None:
        values = project_moments(values, f.grid, target)
    return Field(f.grid, values)


@dataclass(frozen=True)
class BalanceTerms:
    """Terms of (1/2) d/dt ||grad h||^2 weighted by <v>^m; W1..W4 alias I1..I4."""
    m: float
    I1: float
    I2: float
    I3: float
    I4: float
    I11: float
    I12: float
    energy: float

    @property
    def total(self) -> float:
        return self.I1 + self.I2 + self.I3 + self.I4

    W1 = property(lambda self: self.I1)
    W2 = property(lambda self: self.I2)
    W3 = property(lambda self: self.I3)
    W4 = property(lambda self: self.I4)


def _pairing(q: np.ndarray, test: np.ndarray, w: np.ndarray, grid: VelocityGrid) -> float:
    return grid.integrate(q * test * w)


def balance_terms(f: Field, spec: Optional[KernelSpec] = None, m: float = 0.0,
                  plan: Optional[ConvolutionPlan] = None) -> BalanceTerms:
    """I1..I4 with h = f - mu for the fixed unit Maxwellian mu."""
    if m < 0:
        raise DomainError(f'Weight order must be nonnegative, got {m}')
    grid = f.grid
    plan = _resolve_plan(grid, spec, plan)
    spacing = grid.spacing
    mu = reference_maxwellian(grid).values
    f_values = np.asarray(f.values)
    h = f_values - mu
    w = weight(grid, m)
    dh = [derivative_along(h, k, spacing) for k in range(3)]
    df = [derivative_along(f_values, k, spacing) for k in range(3)]
    dmu = [derivative_along(mu, k, spacing) for k in range(3)]
    coeff_f = _coefficient_arrays(f_values, plan)
    coeff_h = _coefficient_arrays(h, plan)
    terms = np.zeros(4)
    coercive = 0.0
    for k in range(3):
        q1 = _q_values(coeff_f, f_values, dh[k], plan, "divergence")
        q2 = _q_values(_coefficient_arrays(df[k], plan), df[k], h, plan, "divergence")
        q3 = _q_values(_coefficient_arrays(dh[k], plan), dh[k], mu, plan, "divergence")
        q4 = _q_values(coeff_h, h, dmu[k], plan, "divergence")
        terms += [_pairing(q, dh[k], w, grid) for q in (q1, q2, q3, q4)]
        second = [derivative_along(dh[k], i, spacing) for i in range(3)]
        form = sum((1.0 if i == j else 2.0) * coeff_f.A[n] * second[i] * second[j]
                   for n, (i, j) in enumerate(HESSIAN_PAIRS))
        coercive += grid.integrate(form * w)
    energy = grid.integrate(sum(d ** 2 for d in dh) * w)
    return BalanceTerms(m, *map(float, terms), coercive, float(terms[0]) + coercive, energy)


@dataclass(frozen=True)
class L2Balance:
    """(1/2) d/dt ||h||^2_{L^2_{m/2}} = q_fh + q_hmu with q_fh = -E1 - E2 + E3."""
    m: float
    q_fh: float
    q_hmu: float
    E1: float
    E2: float
    E3: float
    energy: float

    @property
    def pair(self) -> Tuple[float, float]:
        return self.q_fh, self.q_hmu


def l2_balance(f: Field, spec: Optional[KernelSpec] = None, m: float = 4.0,
               plan: Optional[ConvolutionPlan] = None) -> L2Balance:
    if m < 4:
        raise DomainError(f'L2 balance needs m >= 4, got {m}')
    grid = f.grid
    plan = _resolve_plan(grid, spec, plan)
    spacing = grid.spacing
    mu = reference_maxwellian(grid).values
    f_values = np.asarray(f.values)
    h = f_values - mu
    w = weight(grid, m)
    dw = weight_gradient(grid, m)
    coeff_f = _coefficient_arrays(f_values, plan)
    q_fh = _pairing(_q_values(coeff_f, f_values, h, plan, "divergence"), h, w, grid)
    q_hmu = _pairing(_q_values(_coefficient_arrays(h, plan), h, mu, plan, "divergence"), h, w, grid)
    dh = [derivative_along(h, k, spacing) for k in range(3)]
    A = coeff_f.A

    def entry(i, j):
        return A[HESSIAN_PAIRS.index((min(i, j), max(i, j)))]

    e1 = grid.integrate(sum(entry(i, j) * dh[i] * dh[j] for i in range(3) for j in range(3)) * w)
    e2 = grid.integrate(sum(entry(i, j) * dh[j] * h * dw[i] for i in range(3) for j in range(3)))
    e3 = grid.integrate(sum(coeff_f.B[i] * h * (w * dh[i] + h * dw[i]) for i in range(3)))
    return L2Balance(m, q_fh, q_hmu, e1, e2, e3, grid.integrate(h ** 2 * w))


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    moments: FluidMoments
    entropy: float
    dissipation: float
    h1_h: float
    l2_h: float
    balance: Dict[float, BalanceTerms]
    functional: float
    envelope_upper: float
    lorentz31_m3: float
    min_f: float
    max_q: float
    extra: Dict[str, float] = field(default_factory=dict)

    def row(self) -> List[float]:
        base = self.balance.get(0.0)
        terms = (base.I1, base.I2, base.I3, base.I4) if base is not None else (math.nan,) * 4
        temperature = self.moments.temperature if self.moments.temperature is not None else math.nan
        return [self.t, self.moments.rho, *self.moments.u, temperature, self.entropy, self.dissipation,
                self.h1_h, self.l2_h, *terms, self.functional, self.envelope_upper, self.lorentz31_m3]


@dataclass
class Trajectory:
    records: List[DiagnosticsRecord] = field(default_factory=list)
    snapshots: List[Optional[Field]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> List[float]:
        return [record.t for record in self.records]

    @property
    def completed(self) -> bool:
        return self.meta.get("status") == "complete"

    def column(self, name: str) -> np.ndarray:
        index = TRAJECTORY_COLUMNS.index(name)
        return np.array([record.row()[index] for record in self.records])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_NONE)
            writer.writerow(TRAJECTORY_COLUMNS)
            for record in self.records:
                writer.writerow([repr(float(value)) for value in record.row()])

    def summary(self) -> dict:
        min_f = min((r.min_f for r in self.records), default=math.nan)
        max_q = max((r.max_q for r in self.records), default=math.nan)
        return {**self.meta, "samples": len(self.records), "min_f": min_f, "max_abs_Q": max_q}

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True, default=str)


def h1_seminorm_h(f: Field) -> float:
    """Homogeneous H^1 seminorm of h = f - mu."""
    return sobolev_norm(f - reference_maxwellian(f.grid), 1.0, 0.0, "homogeneous")


def _envelope(t: float, entropy: float, regime: RegimeReport, registry: ConstantsRegistry) -> float:
    if regime.classification == Regime.STABLE:
        return envelope_bound(t, entropy, registry, "stable")
    return envelope_bound(t, entropy, registry, "post_Tstar", regime.t_star)


def diagnose(f: Field, t: float, plan: ConvolutionPlan, config: SolverConfig,
             registry: ConstantsRegistry, regime: RegimeReport) -> DiagnosticsRecord:
    grid = f.grid
    reference = FluidMoments(1.0, (0.0, 0.0, 0.0), 1.0)
    collision = landau_Q(f, f, plan=plan)
    entropy = relative_entropy(f, reference)
    dissipation = entropy_dissipation(f, method="single", plan=plan, clamp_negative=True, collision=collision)
    h = f - reference_maxwellian(grid)
    h1 = sobolev_norm(h, 1.0, 0.0, "homogeneous")
    balance = {float(m): balance_terms(f, m=m, plan=plan) for m in config.balance_orders}
    clamped = Field(grid, np.maximum(f.values, 0.0))
    return DiagnosticsRecord(
        t=t,
        moments=moments(f),
        entropy=entropy,
        dissipation=dissipation,
        h1_h=h1,
        l2_h=lp_norm(h, 2.0, 0.0),
        balance=balance,
        functional=monotone_functional(entropy, h1 ** 2, t, registry),
        envelope_upper=_envelope(t, entropy, regime, registry),
        lorentz31_m3=lorentz_norm(clamped, 3.0, 1.0, -3.0, "maximal"),
        min_f=float(f.values.min()),
        max_q=float(np.max(np.abs(collision.values))),
        extra={name: EXTRA_NORMS[name](f) for name in config.norms},
    )


def _is_normalized(state: FluidMoments) -> bool:
    return (state.temperature is not None and abs(state.rho - 1.0) <= NORMALIZATION_TOLERANCE
            and max(abs(c) for c in state.u) <= NORMALIZATION_TOLERANCE
            and abs(state.temperature - 1.0) <= NORMALIZATION_TOLERANCE)


def run(f0: Field, spec: Optional[KernelSpec] = None, config: Optional[SolverConfig] = None,
        registry: Optional[ConstantsRegistry] = None, plan: Optional[ConvolutionPlan] = None) -> Trajectory:
    """Integrate from f0 to config.t_end, recording diagnostics every sample_interval.

    On a non-finite step the InstabilityError carries the partial trajectory.
    """
    config = config if config is not None else SolverConfig()
    registry = registry if registry is not None else ConstantsRegistry()
    spec = spec if spec is not None else default_kernel(f0.grid)
    plan = _resolve_plan(f0.grid, spec, plan)
    if np.any(f0.values < 0):
        raise DomainError(f'Initial density must be nonnegative, min is {f0.values.min():.3e}')
    target = moments(f0)
    if not config.allow_unnormalized and not _is_normalized(target):
        raise DomainError(f'Initial density is not normalized: {target}; set allow_unnormalized to run anyway')
    h1 = h1_seminorm_h(f0)
    regime = classify_regime(relative_entropy(f0, FluidMoments(1.0, (0.0, 0.0, 0.0), 1.0)), h1 ** 2, registry)
    log.info("Run start: N=%d L=%s eps=%s scheme=%s regime=%s", f0.grid.points, f0.grid.extent,
             spec.epsilon, config.scheme, regime.classification.value)
    trajectory = Trajectory(meta={
        "config": {**asdict(config), "balance_orders": list(config.balance_orders), "norms": list(config.norms)},
        "kernel": {"epsilon": spec.epsilon, "gamma": spec.gamma},
        "grid": {"L": f0.grid.extent, "N": f0.grid.points},
        "regime": regime.to_dict(),
        "status": "running",
    })
    started = time.perf_counter()
    f, t, steps = f0, 0.0, 0
    trajectory.records.append(diagnose(f, t, plan, config, registry, regime))
    trajectory.snapshots.append(f if config.keep_snapshots else None)
    for sample in range(1, config.samples + 1):
        t_sample = sample * config.sample_interval
        while t < t_sample - 1e-12 * t_sample:
            dt = stable_timestep(f, plan, config.cfl) if config.dt == "auto" else float(config.dt)
            dt = min(dt, t_sample - t)
            try:
                f = step(f, dt, config=config, plan=plan, target=target)
            except InstabilityError as exc:
                trajectory.meta.update(status="unstable", failed_at=t, wall_time=time.perf_counter() - started)
                exc.trajectory = trajectory
                log.error("Run aborted at t=%s: %s", t, exc)
                raise
            t = t_sample if t_sample - (t + dt) <= 1e-12 * t_sample else t + dt
            steps += 1
        record = diagnose(f, t, plan, config, registry, regime)
        trajectory.records.append(record)
        trajectory.snapshots.append(f if config.keep_snapshots else None)
        log.debug("t=%.4f H=%.6e D=%.6e steps=%d", t, record.entropy, record.dissipation, steps)
    trajectory.meta.update(status="complete", steps=steps, wall_time=time.perf_counter() - started)
    log.info("Run finished after %d steps", steps)
    return trajectory
