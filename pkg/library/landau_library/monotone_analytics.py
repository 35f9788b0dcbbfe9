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

"""Closed-form exponents, constants, thresholds and envelopes of the decay estimates.

Decay rates are stored as positive numbers r(theta) = -q(ell, theta). Constants
without a formula default to 1 and carry their provenance so that reports can
say which values were calibrated.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, Mapping, Optional

import numpy as np

from collision import KernelSpec, entropy_dissipation, relative_entropy
from errors import DomainError, InputError
from grid_core import Field, FluidMoments, derivative_along, sample_maxwellian, weight
from norms import lorentz_norm, lp_norm, sobolev_norm

log = logging.getLogger("MonotoneAnalytics")

ENVELOPE_FACTOR = (2.0 / 5.0) ** -1.25
THRESHOLD = 2.5
THETA_K2 = 99.0 / 4.0
THETA_K3 = 15.0 / 4.0 + 7.0
EQUALITY_TOLERANCE = 1e-12

FREE_CONSTANTS = ("C0", "C_D1", "C_D2", "C1", "C2", "C3", "C4", "C5", "C11",
                  "blowup_c", "blowup_C", "coercivity_C")
EXPONENTS = ("r1", "r2", "k1", "k2", "k3", "k")
DERIVED_CONSTANTS = ("B_star", "C6", "C7")
INTERPOLATION_PREFIX = "interp_"


class Provenance(str, Enum):
    FORMULA = "formula"
    CALIBRATED = "calibrated"
    USER = "user"
    DEFAULT = "default"


class Regime(str, Enum):
    STABLE = "Stable"
    ABOVE_THRESHOLD = "AboveThreshold"


def decay_exponent(ell: float, theta: float) -> float:
    if not ell > 31:
        raise DomainError(f'Moment order must exceed 31, got {ell}')
    if not 0 <= theta <= ell:
        raise DomainError(f'theta must lie in [0, {ell}], got {theta}')
    slope = (2.0 * ell ** 2 - 25.0 * ell + 57.0) / (18.0 * (ell - 2.0))
    return -slope * (1.0 - theta / ell) + theta / ell


@dataclass(frozen=True)
class RateConstants:
    r1: float
    r2: float
    k1: float
    k2: float
    k3: float
    k: float
    hypothesis_ok: bool


def rate_constants(ell: float = 55.0, tau: float = 45.0, theta_k1: float = 15.0 / 4.0,
                   margin: float = 0.0) -> RateConstants:
    """k2 = 2 r(99/4), k1 = (4/5) r(theta_k1), k3 = (4/5) r(43/4), k = min((2 k2 - 7)/5, k1)."""
    def rate(theta):
        return -decay_exponent(ell, theta) - margin

    r1 = rate(THETA_K2)
    k2 = 2.0 * r1
    k1 = 0.8 * rate(theta_k1)
    k3 = 0.8 * rate(THETA_K3)
    k = min((2.0 * k2 - 7.0) / 5.0, k1)
    ok = k2 > 3.5
    if not ok:
        log.warning("k2 = %.6f does not exceed 7/2 for ell = %s; the monotone functional is not guaranteed", k2, ell)
    return RateConstants(r1, rate(tau), k1, k2, k3, k, ok)


def blowup_profile(x, c2: float = 1.0):
    """B(x) = C2 x^-13 exp(7 x^(-450/14)); overflows quickly below x = 0.5."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return c2 * x ** -13.0 * np.exp(7.0 * x ** (-450.0 / 14.0))


def log_blowup_profile(x, c2: float = 1.0):
    x = np.asarray(x, dtype=float)
    return math.log(c2) - 13.0 * np.log(x) + 7.0 * x ** (-450.0 / 14.0)


@dataclass(frozen=True)
class Constant:
    value: float
    provenance: Provenance


@dataclass(frozen=True)
class ConstantsRegistry:
    """Every exponent and constant of the estimates, with provenance.

    ``entries`` passed in are treated as pinned (user or calibrated values);
    everything else is filled from formulas or defaults on construction.
    """
    ell: float = 55.0
    tau: float = 45.0
    K: float = 1.0
    theta_k1: float = 15.0 / 4.0
    rate_margin: float = 0.0
    entries: Mapping[str, Constant] = field(default_factory=dict)

    def __post_init__(self):
        pinned = {name: c if isinstance(c, Constant) else Constant(float(c), Provenance.USER)
                  for name, c in dict(self.entries).items()}
        interpolation = {name: c for name, c in pinned.items() if name.startswith(INTERPOLATION_PREFIX)}
        unknown = set(pinned) - set(interpolation) - set(FREE_CONSTANTS) - set(EXPONENTS) - set(DERIVED_CONSTANTS)
        if unknown:
            raise InputError(f'Unknown registry constants: {sorted(unknown)}')
        full: Dict[str, Constant] = {}
        for name in FREE_CONSTANTS:
            full[name] = pinned.get(name, Constant(1.0, Provenance.DEFAULT))
        rates = rate_constants(self.ell, self.tau, self.theta_k1, self.rate_margin)
        for name in EXPONENTS[:-1]:
            full[name] = pinned.get(name, Constant(getattr(rates, name), Provenance.FORMULA))
        k2, k1 = full["k2"].value, full["k1"].value
        full["k"] = pinned.get("k", Constant(min((2.0 * k2 - 7.0) / 5.0, k1), Provenance.FORMULA))
        b_star = float(log_blowup_profile(1.0 / full["C3"].value, full["C2"].value))
        full["B_star"] = pinned.get("B_star", Constant(math.exp(b_star), Provenance.FORMULA))
        full["C6"] = pinned.get("C6", Constant(self._c6(full), Provenance.FORMULA))
        full["C7"] = pinned.get("C7", Constant(0.5 * full["C11"].value ** (-5.0 / 9.0), Provenance.FORMULA))
        if "k2" in pinned and full["k2"].value <= 3.5:
            log.warning("Registry has k2 = %.6f <= 7/2", full["k2"].value)
        full.update(interpolation)
        object.__setattr__(self, "entries", MappingProxyType(full))

    @staticmethod
    def _c6(full) -> float:
        """2^(-2/5) min(C1, c1) with c1 = B*^(-2/5) (k2 - 2)."""
        c1 = full["B_star"].value ** -0.4 * (full["k2"].value - 2.0)
        return 2.0 ** -0.4 * min(full["C1"].value, c1)

    def __getitem__(self, name: str) -> float:
        return self.entries[name].value

    def provenance(self, name: str) -> Provenance:
        return self.entries[name].provenance

    def pinned(self) -> Dict[str, Constant]:
        return {name: c for name, c in self.entries.items()
                if c.provenance in (Provenance.USER, Provenance.CALIBRATED)}

    def with_constant(self, name: str, value: float, provenance: Provenance = Provenance.USER) -> "ConstantsRegistry":
        """Copy with one constant pinned; formula values depending on it are re-derived."""
        entries = self.pinned()
        entries[name] = Constant(float(value), Provenance(provenance))
        return ConstantsRegistry(self.ell, self.tau, self.K, self.theta_k1, self.rate_margin, entries)

    def with_exponents(self, **values) -> "ConstantsRegistry":
        registry = self
        for name, value in values.items():
            registry = registry.with_constant(name, value)
        return registry

    def calibrated(self):
        return sorted(name for name, c in self.entries.items() if c.provenance == Provenance.CALIBRATED)

    def uncalibrated(self, names):
        return [name for name in names if self.provenance(name) == Provenance.DEFAULT]

    def to_dict(self) -> dict:
        return {
            "ell": self.ell, "tau": self.tau, "K": self.K, "theta_k1": self.theta_k1,
            "rate_margin": self.rate_margin,
            "constants": {name: {"value": c.value, "provenance": c.provenance.value}
                          for name, c in sorted(self.entries.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConstantsRegistry":
        """Rebuild from to_dict output; only user and calibrated entries are kept as pinned."""
        constants = data.get("constants", {})
        entries = {}
        for name, item in constants.items():
            provenance = Provenance(item.get("provenance", Provenance.USER.value))
            if provenance in (Provenance.USER, Provenance.CALIBRATED):
                entries[name] = Constant(float(item["value"]), provenance)
        return cls(float(data.get("ell", 55.0)), float(data.get("tau", 45.0)), float(data.get("K", 1.0)),
                   float(data.get("theta_k1", 15.0 / 4.0)), float(data.get("rate_margin", 0.0)), entries)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "ConstantsRegistry":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _require_nonnegative(name: str, value: float) -> None:
    if value < 0:
        raise DomainError(f'{name} must be nonnegative, got {value}')


def monotone_functional(entropy, x2, t, registry: ConstantsRegistry):
    """M = H - (5/2) (X^2 + B* (1+t)^(1-k2))^(-2/5)."""
    x2 = np.asarray(x2, dtype=float)
    if np.any(x2 < 0):
        raise DomainError("X^2 must be nonnegative")
    shifted = x2 + registry["B_star"] * (1.0 + np.asarray(t, dtype=float)) ** (1.0 - registry["k2"])
    value = np.asarray(entropy, dtype=float) - THRESHOLD * shifted ** -0.4
    return float(value) if value.ndim == 0 else value


def entropy_ceiling(t, entropy, x2, registry: ConstantsRegistry):
    """H (X^2 + B* (1+t)^(1-k2))^(-2/5); the stable branch keeps it at or below 5/2."""
    growth = (1.0 + np.asarray(t, dtype=float)) ** (1.0 - registry["k2"])
    shifted = np.asarray(x2, dtype=float) + registry["B_star"] * growth
    value = np.asarray(entropy, dtype=float) * shifted ** -0.4
    return float(value) if value.ndim == 0 else value


def local_lifespan(x0sq: float, registry: ConstantsRegistry) -> float:
    _require_nonnegative("X0^2", x0sq)
    return 1.25 * (x0sq + 1.0 / registry["C7"]) ** -0.8


def _growth(t, k: float):
    return (1.0 + np.asarray(t, dtype=float)) ** (1.0 + k)


@dataclass(frozen=True)
class RegimeReport:
    classification: Regime
    threshold_value: float
    initial_functional: float
    t_star: Optional[float]
    lifespan: float
    relaxed_criterion: bool

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "threshold_value": self.threshold_value,
            "initial_functional": self.initial_functional,
            "t_star": self.t_star,
            "lifespan": self.lifespan,
            "relaxed_criterion": self.relaxed_criterion,
        }


def classify_regime(h0: float, x0sq: float, registry: ConstantsRegistry) -> RegimeReport:
    _require_nonnegative("H0", h0)
    _require_nonnegative("X0^2", x0sq)
    k, c6 = registry["k"], registry["C6"]
    threshold = h0 * (x0sq + registry["B_star"]) ** 0.4
    m0 = monotone_functional(h0, x0sq, 0.0, registry)
    lifespan = local_lifespan(x0sq, registry)
    relaxed = m0 <= c6 / (k + 1.0) * (float(_growth(lifespan, k)) - 1.0)
    if threshold < THRESHOLD and not math.isclose(threshold, THRESHOLD, rel_tol=EQUALITY_TOLERANCE):
        return RegimeReport(Regime.STABLE, threshold, m0, None, lifespan, relaxed)
    if math.isclose(threshold, THRESHOLD, rel_tol=EQUALITY_TOLERANCE):
        return RegimeReport(Regime.STABLE, threshold, m0, 0.0, lifespan, relaxed)
    t_star = ((1.0 + k) / c6 * m0 + 1.0) ** (1.0 / (k + 1.0)) - 1.0
    log.debug("Above threshold: H0=%s X0^2=%s T*=%s", h0, x0sq, t_star)
    return RegimeReport(Regime.ABOVE_THRESHOLD, threshold, m0, t_star, lifespan, relaxed)


def envelope_bound(t, entropy, registry: ConstantsRegistry, variant: str = "stable", t_star: float = 0.0):
    """Upper bound on the H^1 seminorm of h at time t.

    stable: (2/5)^(-5/4) (H + C6/(k+1) ((1+t)^(1+k) - 1))^(-5/4).
    post_Tstar: (2/5)^(-5/4) (C6/(k+1) ((1+t)^(1+k) - (1+T*)^(1+k)))^(-5/4), +inf for t <= T*.
    """
    k, c6 = registry["k"], registry["C6"]
    t = np.asarray(t, dtype=float)
    if variant == "stable":
        bracket = np.asarray(entropy, dtype=float) + c6 / (k + 1.0) * (_growth(t, k) - 1.0)
    elif variant == "post_Tstar":
        bracket = c6 / (k + 1.0) * (_growth(t, k) - float(_growth(t_star, k)))
        bracket = np.where(t > t_star, bracket, 0.0)
    else:
        raise DomainError(f'Unknown envelope variant {variant!r}')
    with np.errstate(divide="ignore"):
        value = np.where(bracket > 0, ENVELOPE_FACTOR * np.where(bracket > 0, bracket, 1.0) ** -1.25, math.inf)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class BlowupBounds:
    lower: Optional[float]
    log_upper: float
    entropy_gap_floor: float
    lower_defined: bool

    @property
    def upper(self) -> float:
        return math.exp(self.log_upper) if self.log_upper < 700 else math.inf


def blowup_bounds(t: float, t_bar: float, entropy: float, entropy_bar: float,
                  registry: ConstantsRegistry) -> BlowupBounds:
    """Lower bound on X(t) and upper bound on inf X over [t, T_bar] near a blow-up time."""
    gap = t_bar - t
    if gap <= 0:
        raise DomainError(f'Blow-up bounds need t < T_bar, got t={t}, T_bar={t_bar}')
    c, big_c, c1 = registry["blowup_c"], registry["blowup_C"], registry["C1"]
    defined = entropy > entropy_bar
    lower = big_c * (entropy - entropy_bar) ** -1.25 if defined else None
    if not defined:
        log.warning("H(t) = %s does not exceed H_bar = %s; lower bound undefined", entropy, entropy_bar)
    log_upper = (5.0 / 14.0) * (float(log_blowup_profile(c * gap, registry["C2"]))
                                + math.log(2.0 * gap / c1)
                                - (registry["k1"] + registry["k2"]) * math.log1p(t_bar))
    floor = big_c * gap * (1.0 + t_bar) ** registry["k"]
    return BlowupBounds(lower, log_upper, floor, defined)


def ckp_bound(entropy: float) -> float:
    _require_nonnegative("H", entropy)
    return math.sqrt(2.0 * entropy)


@dataclass(frozen=True)
class CkpCheck:
    l1_distance_squared: float
    twice_entropy: float

    @property
    def holds(self) -> bool:
        return self.l1_distance_squared <= self.twice_entropy + 1e-12

    @property
    def slack(self) -> float:
        return self.twice_entropy - self.l1_distance_squared


def ckp_check(f: Field) -> CkpCheck:
    """Compare ||f - mu||_{L^1}^2 with 2 H(f | mu) for the unit Maxwellian mu."""
    mu = sample_maxwellian(f.grid)
    distance = f.grid.integrate(np.abs(f.values - mu.values))
    entropy = relative_entropy(f, FluidMoments(1.0, (0.0, 0.0, 0.0), 1.0))
    return CkpCheck(distance ** 2, 2.0 * entropy)


@dataclass(frozen=True)
class DissipationReport:
    dissipation: float
    l3: float
    sqrt_h1: float
    sqrt_h1_direct: float
    lorentz31: float
    C0: float
    C_D1: float
    C_D2: float
    holds: Dict[str, bool]
    uncalibrated: tuple

    @property
    def ratios(self) -> Dict[str, float]:
        """Ratios that the calibration fits: lhs / (1 + D) for each estimate."""
        scale = 1.0 + self.dissipation
        return {"L3<D": self.l3 / scale, "D1": self.sqrt_h1 / scale, "D2": self.lorentz31 / scale}


def sqrt_h1_direct(f: Field) -> float:
    """||sqrt(f)||^2 in H^1_{-3/2}, summed directly from finite differences."""
    g = np.sqrt(np.maximum(f.values, 0.0)) * weight(f.grid, -1.5)
    total = np.sum(g ** 2)
    for k in range(3):
        total += np.sum(derivative_along(g, k, f.grid.spacing) ** 2)
    return float(total * f.grid.cell_volume)


def dissipation_bound_check(f: Field, spec: Optional[KernelSpec], registry: ConstantsRegistry,
                            plan=None) -> DissipationReport:
    """Evaluate both sides of the three dissipation lower bounds for one density."""
    dissipation = entropy_dissipation(f, spec, "single", plan=plan)
    root = Field(f.grid, np.sqrt(np.maximum(f.values, 0.0)))
    l3 = lp_norm(f, 3.0, -3.0)
    sqrt_h1 = sobolev_norm(root, 1, -1.5, "weighted") ** 2
    lorentz31 = lorentz_norm(f, 3.0, 1.0, -3.0, "maximal")
    scale = 1.0 + dissipation
    holds = {
        "L3<D": l3 <= registry["C0"] * scale,
        "D1": scale >= registry["C_D1"] * sqrt_h1,
        "D2": scale >= registry["C_D2"] * lorentz31,
    }
    missing = tuple(registry.uncalibrated(("C0", "C_D1", "C_D2")))
    if missing:
        log.warning("Dissipation bounds evaluated with default constants %s", ", ".join(missing))
    return DissipationReport(dissipation, l3, sqrt_h1, sqrt_h1_direct(f), lorentz31,
                             registry["C0"], registry["C_D1"], registry["C_D2"], holds, missing)
