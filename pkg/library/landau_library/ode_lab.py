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

"""Scalar differential inequalities integrated as equalities, and their verifiers.

Every integrator here solves the saturated version of an inequality, which
gives the extremal envelope; the verifiers then test the inequality on any
trajectory, including ones that were not produced by these integrators.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from errors import DomainError, InputError, ResolutionError
from monotone_analytics import (THRESHOLD, ConstantsRegistry, RegimeReport, classify_regime, envelope_bound,
                                blowup_bounds, local_lifespan, monotone_functional)

log = logging.getLogger("OdeLab")

BLOWUP_GUARD = 1e12
MIN_VERIFY_SAMPLES = 50
LADDER_STEPS = 10
CALIBRATION_SLACK = 1.1


class EntropyProfile:
    """H(t) with D(t) = -H'(t) >= 0."""

    def entropy(self, t):
        raise NotImplementedError

    def dissipation(self, t):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantProfile(EntropyProfile):
    h0: float = 0.0

    def __post_init__(self):
        if self.h0 < 0:
            raise InputError(f'Entropy must be nonnegative, got {self.h0}')

    def entropy(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.h0)

    def dissipation(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {"kind": "constant", "h0": self.h0}


@dataclass(frozen=True)
class ExponentialProfile(EntropyProfile):
    h0: float
    rate: float

    def __post_init__(self):
        if self.h0 < 0 or self.rate < 0:
            raise InputError(f'Exponential profile needs h0 >= 0 and rate >= 0, got {self.h0}, {self.rate}')

    def entropy(self, t):
        return self.h0 * np.exp(-self.rate * np.asarray(t, dtype=float))

    def dissipation(self, t):
        return self.rate * self.entropy(t)

    def to_dict(self) -> dict:
        return {"kind": "exponential", "h0": self.h0, "rate": self.rate}


@dataclass(frozen=True)
class PowerProfile(EntropyProfile):
    """H(t) = h0 (1+t)^(-beta)."""
    h0: float
    beta: float

    def __post_init__(self):
        if self.h0 < 0 or self.beta < 0:
            raise InputError(f'Power profile needs h0 >= 0 and beta >= 0, got {self.h0}, {self.beta}')

    def entropy(self, t):
        return self.h0 * (1.0 + np.asarray(t, dtype=float)) ** -self.beta

    def dissipation(self, t):
        return self.beta * self.h0 * (1.0 + np.asarray(t, dtype=float)) ** (-self.beta - 1.0)

    def to_dict(self) -> dict:
        return {"kind": "power", "h0": self.h0, "beta": self.beta}


class TabulatedProfile(EntropyProfile):
    """Piecewise linear H through (times, values); constant after the last node."""

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise InputError("Tabulated profile needs two equal-length sequences with at least two nodes")
        if np.any(np.diff(times) <= 0):
            raise InputError("Tabulated profile times must be strictly increasing")
        if np.any(np.diff(values) > 0):
            raise InputError("Entropy profile must be nonincreasing")
        if np.any(values < 0):
            raise InputError("Entropy profile must be nonnegative")
        self.times = times
        self.values = values
        self._slopes = -np.diff(values) / np.diff(times)

    def entropy(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)

    def dissipation(self, t):
        t = np.asarray(t, dtype=float)
        index = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self._slopes.size - 1)
        inside = (t >= self.times[0]) & (t < self.times[-1])
        return np.where(inside, self._slopes[index], 0.0)

    def to_dict(self) -> dict:
        return {"kind": "tabulated", "times": self.times.tolist(), "values": self.values.tolist()}


def profile_from_dict(data: dict) -> EntropyProfile:
    kind = data.get("kind")
    if kind == "constant":
        return ConstantProfile(float(data.get("h0", 0.0)))
    if kind == "exponential":
        return ExponentialProfile(float(data["h0"]), float(data["rate"]))
    if kind == "power":
        return PowerProfile(float(data["h0"]), float(data["beta"]))
    if kind == "tabulated":
        return TabulatedProfile(data["times"], data["values"])
    raise InputError(f'Unknown entropy profile kind {kind!r}')


@dataclass(eq=False)
class ScalarTrajectory:
    """Samples of X^2 (or Y^2) with the entropy and dissipation that drove them."""
    times: np.ndarray
    x2: np.ndarray
    entropy: Optional[np.ndarray] = None
    dissipation: Optional[np.ndarray] = None
    blowup_time: Optional[float] = None
    events: Dict[str, List[float]] = field(default_factory=dict)
    columns: Dict[str, np.ndarray] = field(default_factory=dict)
    label: str = "X2"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.x2 = np.asarray(self.x2, dtype=float)
        if self.times.ndim != 1 or self.x2.shape != self.times.shape:
            raise InputError("Trajectory times and values must be one-dimensional and of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise InputError("Trajectory times must be strictly increasing")
        if np.any(self.x2 < 0):
            raise InputError("Trajectory values must be nonnegative")
        for name in ("entropy", "dissipation"):
            values = getattr(self, name)
            if values is not None:
                values = np.asarray(values, dtype=float)
                if values.shape != self.times.shape:
                    raise InputError(f'{name} must have the same length as times')
                setattr(self, name, values)

    @property
    def x(self) -> np.ndarray:
        return np.sqrt(self.x2)

    def __len__(self):
        return self.times.size

    def table(self) -> Dict[str, np.ndarray]:
        data = {"t": self.times, self.label: self.x2}
        if self.entropy is not None:
            data["H"] = self.entropy
        if self.dissipation is not None:
            data["D"] = self.dissipation
        data.update(self.columns)
        return data

    def write_csv(self, path) -> None:
        data = self.table()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_NONE)
            writer.writerow(list(data))
            for row in zip(*data.values()):
                writer.writerow([repr(float(value)) for value in row])


def _saturation_terms(times, x2, dissipation, registry: ConstantsRegistry):
    """lhs and rhs of dX^2/dt + C1 (1+t)^k1 X^(14/5) <= D X^(14/5) + B* (1+t)^(-k2)."""
    power = x2 ** 1.4
    slope = np.gradient(x2, times, edge_order=2) if times.size > 2 else np.gradient(x2, times)
    lhs = slope + registry["C1"] * (1.0 + times) ** registry["k1"] * power
    rhs = dissipation * power + registry["B_star"] * (1.0 + times) ** -registry["k2"]
    return lhs, rhs


def integrate_master(x0: float, profile: EntropyProfile, registry: ConstantsRegistry, t_end: float,
                     samples: int = 201, rtol: float = 1e-10, atol: float = 1e-14,
                     blowup_guard: float = BLOWUP_GUARD) -> ScalarTrajectory:
    """Solve Z' = D Z^(7/5) + B* (1+t)^(-k2) - C1 (1+t)^k1 Z^(7/5) for Z = X^2.

    Z is clamped at zero inside the right-hand side. Integration stops when Z
    exceeds ``blowup_guard``; crossings of M = 0 are recorded as events.
    """
    if x0 < 0:
        raise DomainError(f'X0 must be nonnegative, got {x0}')
    if not t_end > 0:
        raise DomainError(f't_end must be positive, got {t_end}')
    c1, k1, k2, b_star = registry["C1"], registry["k1"], registry["k2"], registry["B_star"]

    def rhs(t, y):
        power = max(y[0], 0.0) ** 1.4
        return [float(profile.dissipation(t)) * power + b_star * (1.0 + t) ** -k2 - c1 * (1.0 + t) ** k1 * power]

    def blowup(t, y):
        return y[0] - blowup_guard

    blowup.terminal = True
    blowup.direction = 1

    def threshold(t, y):
        shifted = max(y[0], 0.0) + b_star * (1.0 + t) ** (1.0 - k2)
        return float(profile.entropy(t)) - THRESHOLD * max(shifted, 1e-300) ** -0.4

    grid = np.linspace(0.0, t_end, samples)
    solution = solve_ivp(rhs, (0.0, t_end), [x0 * x0], method="RK45", t_eval=grid,
                         events=[blowup, threshold], rtol=rtol, atol=atol)
    if solution.status == -1:
        raise ResolutionError(f'Master inequality integration failed: {solution.message}')
    times = solution.t
    x2 = np.maximum(solution.y[0], 0.0)
    blowup_time = None
    if solution.t_events[0].size:
        blowup_time = float(solution.t_events[0][0])
        if blowup_time > times[-1]:
            times = np.append(times, blowup_time)
            x2 = np.append(x2, float(solution.y_events[0][0][0]))
        log.info("Master inequality blows up at t=%.6g", blowup_time)
    entropy = np.asarray(profile.entropy(times), dtype=float)
    dissipation = np.asarray(profile.dissipation(times), dtype=float)
    lhs, rhs_values = _saturation_terms(times, x2, dissipation, registry)
    return ScalarTrajectory(
        times, x2, entropy, dissipation, blowup_time,
        events={"threshold_crossings": [float(t) for t in solution.t_events[1]]},
        columns={"M": monotone_functional(entropy, x2, times, registry), "lhs": lhs, "rhs": rhs_values},
        meta={"kind": "master", "x0": x0, "t_end": t_end, "profile": profile.to_dict(),
              "rtol": rtol, "atol": atol},
    )


@dataclass(frozen=True)
class MonotonicityViolation:
    t_start: float
    t_end: float
    excess: float


@dataclass(frozen=True)
class MonotonicityReport:
    intervals: int
    violations: List[MonotonicityViolation]
    max_excess: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "intervals": self.intervals,
            "violations": [vars(v) for v in self.violations],
            "max_excess": self.max_excess,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verify_monotonicity(trajectory: ScalarTrajectory, registry: ConstantsRegistry,
                        tolerance: float = 1e-8) -> MonotonicityReport:
    """Check M(t2) + C6/(k+1) ((1+t2)^(k+1) - (1+t1)^(k+1)) <= M(t1) on every sample interval."""
    if len(trajectory) < MIN_VERIFY_SAMPLES:
        raise ResolutionError(f'Monotonicity check needs at least {MIN_VERIFY_SAMPLES} samples, '
                              f'got {len(trajectory)}')
    if trajectory.entropy is None:
        raise InputError("Monotonicity check needs the entropy along the trajectory")
    t = trajectory.times
    functional = monotone_functional(trajectory.entropy, trajectory.x2, t, registry)
    k, c6 = registry["k"], registry["C6"]
    growth = (1.0 + t) ** (k + 1.0)
    excess = functional[1:] + c6 / (k + 1.0) * np.diff(growth) - functional[:-1]
    allowed = tolerance * np.maximum(1.0, np.abs(functional[:-1]))
    violations = [MonotonicityViolation(float(t[i]), float(t[i + 1]), float(excess[i]))
                  for i in np.flatnonzero(excess > allowed)]
    if violations:
        log.warning("Monotone functional increases on %d of %d intervals", len(violations), excess.size)
    return MonotonicityReport(excess.size, violations, float(excess.max()), tolerance)


def monotonicity_sweep(points: int = 20, seed: int = 0, t_end: float = 5.0,
                       base: Optional[ConstantsRegistry] = None) -> List[MonotonicityReport]:
    """Integrate and verify the master inequality over random (k1, k2, B*, C1) with k2 > 7/2."""
    base = base if base is not None else ConstantsRegistry()
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(points):
        registry = base.with_exponents(k1=rng.uniform(0.5, 4.0), k2=rng.uniform(3.6, 6.0))
        registry = registry.with_constant("B_star", rng.uniform(0.1, 10.0)).with_constant("C1", rng.uniform(0.5, 2.0))
        trajectory = integrate_master(rng.uniform(0.0, 1.0), ExponentialProfile(rng.uniform(0.0, 1.0), 0.5),
                                      registry, t_end)
        reports.append(verify_monotonicity(trajectory, registry))
    return reports


@dataclass(frozen=True, eq=False)
class BranchPrediction:
    regime: RegimeReport
    times: np.ndarray
    entropy: np.ndarray
    envelope: np.ndarray
    variant: str


def branch_predict(x0sq: float, h0: float, registry: ConstantsRegistry, profile: Optional[EntropyProfile] = None,
                   t_end: float = 10.0, samples: int = 101) -> BranchPrediction:
    """Sample the Hdot^1 envelope of the branch selected by (H0, X0^2).

    Without a profile H(t) is taken as 0, which gives the weakest envelope.
    """
    regime = classify_regime(h0, x0sq, registry)
    times = np.linspace(0.0, t_end, samples)
    entropy = np.asarray(profile.entropy(times), dtype=float) if profile is not None else np.zeros_like(times)
    if regime.t_star is None or regime.t_star == 0.0:
        variant = "stable"
        envelope = envelope_bound(times, entropy, registry, variant)
    else:
        variant = "post_Tstar"
        envelope = envelope_bound(times, entropy, registry, variant, regime.t_star)
    return BranchPrediction(regime, times, entropy, np.asarray(envelope), variant)


def lifespan_envelope(t, x0sq: float, c11: float):
    """[(X0^2 + C11^(5/9))^(-4/5) - (4/5) t]^(-5/4) - C11^(5/9); +inf past the asymptote."""
    shift = c11 ** (5.0 / 9.0)
    bracket = (x0sq + shift) ** -0.8 - 0.8 * np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        value = np.where(bracket > 0, np.where(bracket > 0, bracket, 1.0) ** -1.25 - shift, math.inf)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True, eq=False)
class LifespanReport:
    x0sq: float
    c11: float
    asymptote: float
    lifespan: float
    times: np.ndarray
    envelope: np.ndarray
    numeric: np.ndarray

    @property
    def below_envelope(self) -> bool:
        return bool(np.all(self.numeric <= self.envelope * (1.0 + 1e-8) + 1e-12))

    def to_dict(self) -> dict:
        return {"x0sq": self.x0sq, "C11": self.c11, "asymptote": self.asymptote, "lifespan": self.lifespan,
                "below_envelope": self.below_envelope}


def lifespan_ode(x0sq: float, registry: ConstantsRegistry, samples: int = 201) -> LifespanReport:
    """Closed-form envelope of Z' <= Z^(9/5) + C11 against the saturated numeric solution.

    The asymptote is (5/4) (X0^2 + C11^(5/9))^(-4/5); the local lifespan uses
    C7 = C11^(-5/9) / 2 and is shorter by construction.
    """
    c11 = registry["C11"]
    if not c11 > 0:
        raise DomainError(f'C11 must be positive, got {c11}')
    if x0sq < 0:
        raise DomainError(f'X0^2 must be nonnegative, got {x0sq}')
    asymptote = 1.25 * (x0sq + c11 ** (5.0 / 9.0)) ** -0.8
    times = np.linspace(0.0, 0.95 * asymptote, samples)
    solution = solve_ivp(lambda t, y: [max(y[0], 0.0) ** 1.8 + c11], (0.0, times[-1]), [x0sq],
                         method="RK45", t_eval=times, rtol=1e-10, atol=1e-12)
    if not solution.success:
        raise ResolutionError(f'Lifespan integration failed: {solution.message}')
    return LifespanReport(x0sq, c11, asymptote, local_lifespan(x0sq, registry), times,
                          np.asarray(lifespan_envelope(times, x0sq, c11)), solution.y[0])


class WodeClass(str, Enum):
    GLOBAL_DECAY = "global_decay"
    BLOWUP = "blowup"
    MARGINAL = "marginal"


@dataclass(frozen=True, eq=False)
class WodeResult:
    trajectory: ScalarTrajectory
    classification: WodeClass
    blowup_time: Optional[float]
    fitted_exponent: Optional[float]
    expected_exponent: float
    t1: Optional[float]
    t_star: Optional[float]
    t_double_star: Optional[float]
    survival_bound: Optional[float]

    @property
    def exponent_error(self) -> Optional[float]:
        if self.fitted_exponent is None:
            return None
        return abs(self.fitted_exponent / self.expected_exponent - 1.0)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "blowup_time": self.blowup_time,
            "fitted_exponent": self.fitted_exponent,
            "expected_exponent": self.expected_exponent,
            "T1": self.t1,
            "T_star": self.t_star,
            "T_double_star": self.t_double_star,
            "survival_bound": self.survival_bound,
        }


def _first_time_above(times: np.ndarray, values: np.ndarray, level: float) -> Optional[float]:
    above = np.flatnonzero(values > level)
    if not above.size:
        return None
    i = above[0]
    if i == 0:
        return float(times[0])
    t0, t1, v0, v1 = times[i - 1], times[i], values[i - 1], values[i]
    return float(t0 + (level - v0) / (v1 - v0) * (t1 - t0))


def _survival_times(y0sq: float, c5: float, times: np.ndarray, y2: np.ndarray):
    """T1, T* and T** of the survival argument for initial size eps = Y0^2."""
    t_star = _first_time_above(times, y2, 1.0)
    if not 0.0 < y0sq < 1.0:
        return None, t_star, None, None
    bound = 1.0 / abs(math.log(y0sq))
    t1 = abs(math.log(0.5 * bound / y0sq)) / (2.0 * c5)
    return t1, t_star, _first_time_above(times, y2, bound), bound


def wode_run(y0sq: float, registry: ConstantsRegistry, t_end: float = 100.0, samples: int = 401,
             blowup_guard: float = BLOWUP_GUARD) -> WodeResult:
    """Saturated weighted inequality Z' = C5 (Z^2 + Z) - C4 (1+t)^k3 Z^(7/5), Z = Y^2.

    Integrated in s = log Z, which keeps decaying solutions positive down to
    any scale. Decay runs are fitted over [t_end/2, t_end] against (1+t)^(-5 k3/4).
    """
    if y0sq < 0:
        raise DomainError(f'Y0^2 must be nonnegative, got {y0sq}')
    c4, c5, k3 = registry["C4"], registry["C5"], registry["k3"]
    expected = -1.25 * k3
    times = np.linspace(0.0, t_end, samples)
    if y0sq == 0:
        trajectory = ScalarTrajectory(times, np.zeros_like(times), label="Y2", meta={"kind": "wode", "y0sq": 0.0})
        return WodeResult(trajectory, WodeClass.GLOBAL_DECAY, None, None, expected, None, None, None, None)

    def rhs(t, s):
        z = math.exp(min(s[0], 700.0))
        return [c5 * (1.0 + z) - c4 * (1.0 + t) ** k3 * z ** 0.4]

    def blowup(t, s):
        return s[0] - math.log(blowup_guard)

    blowup.terminal = True
    blowup.direction = 1
    solution = solve_ivp(rhs, (0.0, t_end), [math.log(y0sq)], method="RK45", t_eval=times,
                         events=[blowup], rtol=1e-10, atol=1e-12)
    if solution.status == -1:
        raise ResolutionError(f'Weighted inequality integration failed: {solution.message}')
    run_times = solution.t
    y2 = np.exp(solution.y[0])
    blowup_time = None
    if solution.t_events[0].size:
        blowup_time = float(solution.t_events[0][0])
        if blowup_time > run_times[-1]:
            run_times = np.append(run_times, blowup_time)
            y2 = np.append(y2, blowup_guard)
    trajectory = ScalarTrajectory(run_times, y2, blowup_time=blowup_time, label="Y2",
                                  meta={"kind": "wode", "y0sq": y0sq, "t_end": t_end})
    t1, t_star, t_double_star, bound = _survival_times(y0sq, c5, run_times, y2)
    if blowup_time is not None:
        log.info("Weighted inequality blows up at t=%.6g for Y0^2=%s", blowup_time, y0sq)
        return WodeResult(trajectory, WodeClass.BLOWUP, blowup_time, None, expected, t1, t_star,
                          t_double_star, bound)
    late = run_times >= 0.5 * t_end
    slope = float(np.polyfit(np.log1p(run_times[late]), 0.5 * np.log(y2[late]), 1)[0])
    decaying = slope < 0 and y2[-1] <= 1.0 and y2[-1] < y2[late][0]
    classification = WodeClass.GLOBAL_DECAY if decaying else WodeClass.MARGINAL
    log.debug("Y0^2=%s classified %s with late exponent %.4f", y0sq, classification.value, slope)
    return WodeResult(trajectory, classification, None, slope, expected, t1, t_star, t_double_star, bound)


@dataclass(frozen=True)
class BlowupLemmaReport:
    applicable: bool
    t_bar: Optional[float] = None
    h_bar: Optional[float] = None
    ladder: tuple = ()
    lower_constant: Optional[float] = None
    gap_constant: Optional[float] = None
    lower_violations: tuple = ()
    gap_violations: tuple = ()
    upper_violations: tuple = ()
    log_upper: tuple = ()
    undefined: int = 0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.applicable and not (self.lower_violations or self.gap_violations or self.upper_violations)

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable, "T_bar": self.t_bar, "H_bar": self.h_bar,
            "ladder": list(self.ladder), "lower_constant": self.lower_constant,
            "gap_constant": self.gap_constant, "lower_violations": list(self.lower_violations),
            "gap_violations": list(self.gap_violations), "upper_violations": list(self.upper_violations),
            "log_upper": list(self.log_upper), "undefined": self.undefined, "passed": self.passed,
            "note": self.note,
        }


def _calibrated_floor(ratios: np.ndarray, split: int):
    """Lower constant fitted on the early ladder and the late indices that fall below it."""
    early = ratios[:split][np.isfinite(ratios[:split])]
    if not early.size:
        return None, ()
    constant = float(early.min()) / CALIBRATION_SLACK
    late = [i for i in range(split, ratios.size) if np.isfinite(ratios[i]) and ratios[i] < constant]
    return constant, tuple(late)


def blowup_lemma_check(trajectory: ScalarTrajectory, registry: ConstantsRegistry,
                       steps: int = LADDER_STEPS) -> BlowupLemmaReport:
    """Evaluate the blow-up lower bound, the entropy-gap floor and the upper bound on t_j = T(1 - 2^-j).

    The unquantified constants C and c are calibration outputs: C is fitted on
    the first half of the ladder and verified on the second half.
    """
    if trajectory.blowup_time is None:
        return BlowupLemmaReport(False, note="trajectory has no detected blow-up")
    if trajectory.entropy is None:
        raise InputError("Blow-up check needs the entropy along the trajectory")
    t_bar = trajectory.blowup_time
    h_bar = float(trajectory.entropy[-1])
    ladder = t_bar - t_bar * 2.0 ** -np.arange(1, steps + 1)
    x = np.sqrt(np.interp(ladder, trajectory.times, trajectory.x2))
    entropy = np.interp(ladder, trajectory.times, trajectory.entropy)
    gap = entropy - h_bar
    defined = gap > 0
    k = registry["k"]
    with np.errstate(divide="ignore", invalid="ignore"):
        lower_ratio = np.where(defined, x * np.where(defined, gap, 1.0) ** 1.25, np.nan)
        gap_ratio = np.where(defined, gap / ((t_bar - ladder) * (1.0 + t_bar) ** k), np.nan)
    split = steps // 2
    lower_constant, lower_violations = _calibrated_floor(lower_ratio, split)
    gap_constant, gap_violations = _calibrated_floor(gap_ratio, split)
    log_upper = []
    upper_violations = []
    for i, t in enumerate(ladder):
        bounds = blowup_bounds(float(t), t_bar, float(entropy[i]), h_bar, registry)
        log_upper.append(bounds.log_upper)
        window = trajectory.times >= t
        inf_x = min(float(x[i]), float(np.sqrt(trajectory.x2[window].min())) if window.any() else math.inf)
        if math.log(max(inf_x, 1e-300)) > bounds.log_upper:
            upper_violations.append(i)
    if lower_violations or gap_violations:
        log.warning("Blow-up bounds violated at ladder steps %s / %s", lower_violations, gap_violations)
    return BlowupLemmaReport(True, t_bar, h_bar, tuple(float(t) for t in ladder), lower_constant, gap_constant,
                             lower_violations, gap_violations, tuple(upper_violations), tuple(log_upper),
                             int(np.count_nonzero(~defined)))
