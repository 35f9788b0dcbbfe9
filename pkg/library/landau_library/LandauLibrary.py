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

import csv
import math
from pathlib import Path

import numpy as np
from robot.api import logger

from cli_io import RunConfig, cmd_run, load_document, load_registry, validate_config
from collision import default_kernel, landau_Q
from grid_core import VelocityGrid, field_from_function, sample_maxwellian
from inequality_suite import oscillatory_seminorm, random_log_inequality
from monotone_analytics import ENVELOPE_FACTOR, blowup_profile, classify_regime, local_lifespan, rate_constants
from norms import lorentz_norm, lp_norm
from ode_lab import monotonicity_sweep, wode_run


class LandauLibrary(object):
    """This is a Robot Framework library for acceptance checks of the Landau equation laboratory.

    = Table of contents =

    - `Usage`
    - `Registry`
    - `Examples`
    - `Importing`
    - `Keywords`

    = Usage =

    Keywords wrap the solver, the analytic estimates, the scalar ODE integrators and the
    inequality suite. Numeric arguments may be passed as Robot strings; they are converted.
    Runs write their files under `output_dir`.

    = Registry =

    Keywords that depend on constants use the registry given at import time
    (`registry_path`), or the default registry when none is given. Single constants
    can be overridden per call with `name=value` arguments.

    = Examples =

    | ${rates}=                    | `Get Rate Constants`         | ell=55            |
    | ${report}=                   | `Classify Regime`            | 10                | 0     | C6=1 | k=0.2 |
    | ...                          |                              | B_star=1          |
    | ${violations}=               | `Run Monotonicity Sweep`     | points=20         |
    | ${result}=                   | `Run Wode Case`              | 1e-3              | k3=3  |
    | `Values Should Be Close`     | ${rates}[k2]                 | 4.556184          | 1e-5  |
    | ${summary}=                  | `Run Landau Simulation`      | config/bimodal.json |
    """
    ROBOT_LIBRARY_VERSION = '0.0.1'

    def __init__(self, registry_path=None, output_dir="output"):
        """Examples of import:

        | =Setting= | =Value=       | =Value=                            | =Comment=                     |
        | Library   | LandauLibrary | registry_path=config/registry.json | Pinned constants are used     |
        | Library   | LandauLibrary |                                    | Formula and default constants |
        """
        self.registry = load_registry(registry_path)
        self.output_dir = Path(output_dir)

    def _registry(self, constants):
        registry = self.registry
        for name, value in constants.items():
            registry = registry.with_constant(name, float(value))
        return registry

    def values_should_be_close(self, actual, expected, tolerance, relative=False):
        """Fails unless |actual - expected| <= tolerance (times |expected| when `relative` is true).

        Examples:
        | Values Should Be Close | ${k2} | 4.556184 | 1e-5 |
        | Values Should Be Close | ${B}  | 1096.633 | 1e-6 | relative=True |
        """
        actual, expected, tolerance = float(actual), float(expected), float(tolerance)
        if str(relative).lower() in ("yes", "true", "t", "1"):
            tolerance *= abs(expected)
        if not abs(actual - expected) <= tolerance:
            raise AssertionError(f'{actual!r} differs from {expected!r} by more than {tolerance!r}')

    def get_rate_constants(self, ell=55.0, tau=45.0, theta_k1=15.0 / 4.0):
        """Returns the decay exponents r1, r2, k1, k2, k3, k as a dictionary.

        Examples:
        | ${rates}= | Get Rate Constants | ell=55 |
        """
        rates = rate_constants(float(ell), float(tau), float(theta_k1))
        logger.info(f'Rate constants for ell={ell}: {rates}')
        return {"r1": rates.r1, "r2": rates.r2, "k1": rates.k1, "k2": rates.k2, "k3": rates.k3, "k": rates.k,
                "q": -rates.r1}

    def classify_regime(self, h0, x0sq, **constants):
        """Returns the regime report for initial entropy `h0` and Hdot^1 size `x0sq`.

        Examples:
        | ${report}= | Classify Regime | 10 | 0 | C6=1 | k=0.2 | B_star=1 |
        """
        report = classify_regime(float(h0), float(x0sq), self._registry(constants)).to_dict()
        logger.info(f'Regime for H0={h0}, X0^2={x0sq}: {report}')
        return report

    def get_local_lifespan(self, x0sq, **constants):
        return local_lifespan(float(x0sq), self._registry(constants))

    def get_envelope_factor(self):
        return ENVELOPE_FACTOR

    def get_blowup_profile(self, x, c2=1.0):
        return float(blowup_profile(float(x), float(c2)))

    def run_monotonicity_sweep(self, points=20, seed=0, t_end=5.0):
        """Integrates the master inequality over a random parameter sweep and returns the total violation count.

        Examples:
        | ${violations}= | Run Monotonicity Sweep | points=20 |
        | Should Be Equal As Integers | ${violations} | 0 |
        """
        reports = monotonicity_sweep(int(points), int(seed), float(t_end), self.registry)
        violations = sum(len(r.violations) for r in reports)
        logger.info(f'Monotonicity sweep of {points} points: {violations} violations, '
                    f'max excess {max(r.max_excess for r in reports):.3e}')
        return violations

    def run_wode_case(self, y0sq, t_end=100.0, **constants):
        """Integrates the weighted scalar inequality from Y0^2 = `y0sq` and returns its report.

        The report holds `classification` (global_decay, blowup or marginal) and the fitted exponent.

        Examples:
        | ${result}= | Run Wode Case | 1e-3 | k3=3 | C4=1 | C5=1 |
        | Should Be Equal | ${result}[classification] | global_decay |
        """
        result = wode_run(float(y0sq), self._registry(constants), float(t_end))
        logger.info(f'WODE Y0^2={y0sq}: {result.classification.value}')
        return result.to_dict()

    def count_log_inequality_violations(self, trials=1_000_000, seed=0):
        report = random_log_inequality(int(float(trials)), int(seed))
        logger.info(f'Log inequality: {report.trials} trials, worst slack ratio {report.worst_slack_ratio:.3e}')
        return report.violations

    def get_ball_indicator_lorentz_norms(self, extent=1.5, points=64, p=3.0, q=1.0):
        """Returns starred and maximal L^{p,q} norms of the unit ball indicator and the discrete ball volume.

        Examples:
        | ${norms}= | Get Ball Indicator Lorentz Norms |
        | Values Should Be Close | ${norms}[maximal] | ${{ $norms['starred'] * 1.5 }} | 1e-10 |
        """
        grid = VelocityGrid(float(extent), int(points))
        ball = field_from_function(grid, lambda x, y, z: (x * x + y * y + z * z <= 1.0).astype(float), True)
        p, q = float(p), float(q)
        return {
            "volume": float(ball.values.sum() * grid.cell_volume),
            "starred": lorentz_norm(ball, p, q, flavor="starred"),
            "maximal": lorentz_norm(ball, p, q, flavor="maximal"),
        }

    def get_equilibrium_residual(self, extent=8.0, points=32):
        """Returns ||Q(mu, mu)||_L2 / ||mu||_L2 with epsilon = 2 dv.

        Examples:
        | ${residual}= | Get Equilibrium Residual | 8 | 32 |
        """
        grid = VelocityGrid(float(extent), int(points))
        mu = sample_maxwellian(grid)
        residual = lp_norm(landau_Q(mu, mu, default_kernel(grid)), 2.0) / lp_norm(mu, 2.0)
        logger.info(f'Equilibrium residual on {grid}: {residual:.3e}')
        return residual

    def get_oscillatory_slope(self, *eps_values):
        """Returns the log-log slope of the Hdot^1/2 seminorm of the two-scale datum against epsilon."""
        eps = np.array([float(e) for e in eps_values])
        seminorms = np.array([oscillatory_seminorm(e) for e in eps])
        return float(np.polyfit(np.log(eps), np.log(seminorms), 1)[0])

    def run_landau_simulation(self, config_path, name=None):
        """Runs the configured simulation and returns its summary.

        Files are written to `output_dir`/`name`, where `name` defaults to the configuration file stem.

        Examples:
        | ${summary}= | Run Landau Simulation | config/bimodal.json |
        """
        config = validate_config(RunConfig, load_document(config_path), "run configuration")
        out = self.output_dir / (name or Path(config_path).stem)
        trajectory = cmd_run(config, out, self.registry if config.registry is None else None)
        logger.info(f'Simulation {config_path} finished with {len(trajectory.records)} samples in {out}')
        return trajectory.summary()

    def get_trajectory_column(self, run_name, column):
        """Returns one column of `output_dir`/`run_name`/trajectory.csv as floats."""
        with open(self.output_dir / run_name / "trajectory.csv", newline="") as fh:
            return [float(row[column]) for row in csv.DictReader(fh)]

    def get_relative_drift(self, values):
        """Returns max |v - v0| / max(|v0|, 1e-300) over a list of values."""
        values = [float(v) for v in values]
        scale = max(abs(values[0]), 1e-300)
        return max(abs(v - values[0]) for v in values) / scale

    def column_should_be_nonincreasing(self, values, tolerance=0.0):
        values = [float(v) for v in values]
        increases = [(i, b - a) for i, (a, b) in enumerate(zip(values, values[1:])) if b - a > float(tolerance)]
        if increases:
            raise AssertionError(f'Values increase at samples {increases[:5]}')

    def get_entropy_identity_defect(self, run_name):
        """Returns max |dH/dt + D| / max(D, 1e-6) over interior samples of a stored run."""
        t = np.array(self.get_trajectory_column(run_name, "t"))
        entropy = np.array(self.get_trajectory_column(run_name, "H"))
        dissipation = np.array(self.get_trajectory_column(run_name, "D"))
        derivative = np.gradient(entropy, t)
        defects = np.abs(derivative + dissipation)[1:-1] / np.maximum(dissipation[1:-1], 1e-6)
        return float(defects.max()) if defects.size else math.nan

    def get_balance_defect(self, run_name):
        """Returns max |d/dt ||grad h||^2 - 2 (I1+I2+I3+I4)| / max(|2 sum|, 1e-12) over interior samples.

        Examples:
        | ${defect}= | Get Balance Defect | bimodal |
        | Should Be True | ${defect} <= 0.02 |
        """
        t = np.array(self.get_trajectory_column(run_name, "t"))
        seminorm = np.array(self.get_trajectory_column(run_name, "h1_h"))
        total = sum(np.array(self.get_trajectory_column(run_name, f'I{i}')) for i in range(1, 5))
        derivative = np.gradient(seminorm ** 2, t)
        defects = np.abs(derivative - 2.0 * total)[1:-1] / np.maximum(np.abs(2.0 * total[1:-1]), 1e-12)
        return float(defects.max()) if defects.size else math.nan
