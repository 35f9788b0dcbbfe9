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

"""`landau` command line: configuration, orchestration and output files.

Exit codes: 0 on success, 1 when a checked inequality or bound is violated,
2 on any library error (bad configuration, domain, resolution, instability).
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
import pydantic
import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from collision import KernelSpec
from errors import ConfigurationError, InputError, InstabilityError, LandauError
from grid_core import (VelocityGrid, read_snapshot, sample_bimodal, sample_maxwellian, set_fft_workers,
                       write_snapshot)
from inequality_suite import (INFLATION, IneqReport, check_coercivity_bound, check_dissipation_bounds,
                              check_interpolations, make_oscillatory_data, normalized_mixture,
                              run_appendix_suite)
from monotone_analytics import ConstantsRegistry, Provenance, classify_regime
from norms import LORENTZ_FLAVORS, dyadic_norm, llogl, lorentz_norm, lp_norm, sobolev_norm
from ode_lab import integrate_master, lifespan_ode, profile_from_dict, verify_monotonicity, wode_run
from solver import SolverConfig, Trajectory, run

log = logging.getLogger("LandauCli")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2
INIT_KINDS = ("maxwellian", "bimodal", "oscillatory", "file")
PLOT_CURVES = {"M": "M", "H": "H", "h1": "h1_h", "envelope": "env_upper"}
SOBOLEV_FLAVORS = ("homogeneous", "weighted", "bessel")


def str2bool(v):
    return str(v).lower() in ("yes", "true", "t", "1")


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(StrictModel):
    L: float = 8.0
    N: int = 32


class KernelSection(StrictModel):
    epsilon: Union[float, Literal["2dx"]] = "2dx"
    gamma: float = -3.0


class MaxwellianInit(StrictModel):
    kind: Literal["maxwellian"]
    temperature: float = 1.0


class BimodalInit(StrictModel):
    kind: Literal["bimodal"]
    separation: float = 1.5
    weights: List[float] = [0.5, 0.5]

    @field_validator("weights")
    @classmethod
    def _two_weights(cls, value):
        if len(value) != 2 or abs(sum(value) - 1.0) > 1e-12 or min(value) <= 0:
            raise ValueError("weights must be two positive numbers summing to 1")
        return value


class OscillatoryInit(StrictModel):
    kind: Literal["oscillatory"]
    eps: float


class FileInit(StrictModel):
    kind: Literal["file"]
    path: str


class TimeSection(StrictModel):
    t_end: float = 1.0
    dt: Union[float, Literal["auto"]] = "auto"
    sample_interval: float = 0.1
    scheme: Literal["RK2", "RK4"] = "RK4"
    project_moments: bool = True
    positivity: Literal["none", "clip"] = "none"
    allow_unnormalized: bool = False


class DiagnosticsSection(StrictModel):
    norms: List[str] = []
    balance: List[float] = [0.0]
    keep_snapshots: bool = False


class RunConfig(StrictModel):
    grid: GridSection = GridSection()
    kernel: KernelSection = KernelSection()
    init: Union[MaxwellianInit, BimodalInit, OscillatoryInit, FileInit] = pydantic.Field(
        default_factory=lambda: BimodalInit(kind="bimodal"), discriminator="kind")
    time: TimeSection = TimeSection()
    diagnostics: DiagnosticsSection = DiagnosticsSection()
    registry: Optional[str] = None
    output: Optional[str] = None


class CorpusSection(StrictModel):
    size: int = 12
    seed: int = 0


class CalibrationConfig(StrictModel):
    grid: GridSection = GridSection(L=6.0, N=16)
    kernel: KernelSection = KernelSection()
    corpus: CorpusSection = CorpusSection()
    interpolations: bool = True


class MasterParams(StrictModel):
    x0: float
    profile: dict = {"kind": "constant", "h0": 0.0}
    t_end: float = 10.0
    samples: int = 201


class WodeParams(StrictModel):
    y0sq: float
    t_end: float = 100.0
    samples: int = 401


class LifespanParams(StrictModel):
    x0sq: float
    samples: int = 201


def json_pointer(loc: Sequence) -> str:
    """Pointer for a pydantic error location; discriminator tags are not part of the document."""
    parts = [str(p) for i, p in enumerate(loc) if not (i > 0 and loc[i - 1] == "init" and p in INIT_KINDS)]
    return "/" + "/".join(part.replace("~", "~0").replace("/", "~1") for part in parts)


def validate_config(model, data, source="config"):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        errors = exc.errors()
        details = "; ".join(f'{json_pointer(e["loc"])}: {e["msg"]}' for e in errors)
        raise ConfigurationError(f'Invalid {source}: {details}', path=json_pointer(errors[0]["loc"])) from exc


def load_document(path) -> dict:
    """JSON, or YAML for .yaml/.yml files."""
    try:
        with open(path) as fh:
            if str(path).endswith((".yaml", ".yml")):
                return yaml.safe_load(fh) or {}
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f'{path} is not valid JSON: {exc.msg} at line {exc.lineno}', path="") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f'{path} is not valid YAML: {exc}', path="") from exc
    except OSError as exc:
        raise ConfigurationError(f'Cannot read {path}: {exc.strerror}') from exc


def load_registry(path: Optional[str]) -> ConstantsRegistry:
    if not path:
        return ConstantsRegistry()
    try:
        return ConstantsRegistry.from_dict(load_document(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f'Malformed registry {path}: {exc}', path="/constants") from exc


def build_kernel(section: KernelSection, grid: VelocityGrid) -> KernelSpec:
    epsilon = 2.0 * grid.spacing if section.epsilon == "2dx" else section.epsilon
    return KernelSpec(epsilon, section.gamma)


def build_initial_field(init, grid: VelocityGrid):
    if init.kind == "maxwellian":
        return sample_maxwellian(grid, temperature=init.temperature)
    if init.kind == "bimodal":
        return sample_bimodal(grid, init.separation, init.weights[0])
    if init.kind == "oscillatory":
        return make_oscillatory_data(init.eps, grid)
    f0, _ = read_snapshot(init.path)
    if f0.grid != grid:
        raise ConfigurationError(f'Snapshot grid {f0.grid} does not match configured grid {grid}', path="/init/path")
    return f0


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_NONE)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _persist_run(trajectory: Trajectory, out: Path, config: RunConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    trajectory.meta["run_config"] = config.model_dump(mode="json")
    trajectory.write_csv(out / "trajectory.csv")
    trajectory.write_summary(out / "summary.json")
    for i, snapshot in enumerate(trajectory.snapshots):
        if snapshot is not None:
            write_snapshot(out / f'snapshot_{i:04d}.lclf', snapshot, trajectory.records[i].t)


def cmd_run(config: RunConfig, out, registry: Optional[ConstantsRegistry] = None) -> Trajectory:
    """Integrate the configured datum and write trajectory.csv, summary.json and snapshots to ``out``."""
    grid = VelocityGrid(config.grid.L, config.grid.N)
    spec = build_kernel(config.kernel, grid)
    registry = registry if registry is not None else load_registry(config.registry)
    solver_config = SolverConfig(
        scheme=config.time.scheme,
        dt=config.time.dt,
        t_end=config.time.t_end,
        sample_interval=config.time.sample_interval,
        project_moments=config.time.project_moments,
        positivity=config.time.positivity,
        keep_snapshots=config.diagnostics.keep_snapshots,
        balance_orders=tuple(config.diagnostics.balance),
        norms=tuple(config.diagnostics.norms),
        allow_unnormalized=config.time.allow_unnormalized,
    )
    f0 = build_initial_field(config.init, grid)
    out = Path(out)
    try:
        trajectory = run(f0, spec, solver_config, registry)
    except InstabilityError as exc:
        if exc.trajectory is not None:
            _persist_run(exc.trajectory, out, config)
        raise
    _persist_run(trajectory, out, config)
    return trajectory


def cmd_calibrate(config: CalibrationConfig, registry: ConstantsRegistry):
    """Fit the dissipation, coercivity and interpolation constants on a seeded corpus."""
    grid = VelocityGrid(config.grid.L, config.grid.N)
    spec = build_kernel(config.kernel, grid)
    rng = np.random.default_rng(config.corpus.seed)
    corpus = [normalized_mixture(grid, rng) for _ in range(config.corpus.size)]
    reports, calibrated = check_dissipation_bounds(corpus, registry, spec, config.corpus.seed)
    coercivity = check_coercivity_bound(corpus, spec, config.corpus.seed)
    reports.append(coercivity)
    if "C" in coercivity.details:
        calibrated = calibrated.with_constant("coercivity_C", coercivity.details["C"], Provenance.CALIBRATED)
    if config.interpolations:
        interpolations = check_interpolations(corpus, seed=config.corpus.seed)
        for report in interpolations:
            calibrated = calibrated.with_constant(report.inequality_id, INFLATION * report.fitted_constant,
                                                  Provenance.CALIBRATED)
        reports += interpolations
    return calibrated, reports


def cmd_regime(h0: float, x0sq: float, registry: ConstantsRegistry) -> dict:
    return classify_regime(h0, x0sq, registry).to_dict()


def cmd_ode(kind: str, params: dict, registry: ConstantsRegistry, out=None) -> dict:
    """Integrate one scalar inequality; the master run is also verified for monotonicity."""
    if kind == "master":
        p = validate_config(MasterParams, params, "master parameters")
        trajectory = integrate_master(p.x0, profile_from_dict(p.profile), registry, p.t_end, p.samples)
        report = verify_monotonicity(trajectory, registry).to_dict()
        report["blowup_time"] = trajectory.blowup_time
        report["threshold_crossings"] = trajectory.events.get("threshold_crossings", [])
        if out:
            trajectory.write_csv(out)
        return report
    if kind == "wode":
        p = validate_config(WodeParams, params, "wode parameters")
        result = wode_run(p.y0sq, registry, p.t_end, p.samples)
        if out:
            result.trajectory.write_csv(out)
        return result.to_dict()
    if kind == "lifespan":
        p = validate_config(LifespanParams, params, "lifespan parameters")
        report = lifespan_ode(p.x0sq, registry, p.samples)
        if out:
            _write_rows(out, ("t", "X2", "envelope"),
                        ([repr(float(t)), repr(float(z)), repr(float(e))]
                         for t, z, e in zip(report.times, report.numeric, report.envelope)))
        return report.to_dict()
    raise ConfigurationError(f'Unknown ODE kind {kind!r}')


def parse_norm_spec(text: str):
    """'lorentz:p=3,q=1,l=-3' -> ('lorentz', {'p': 3.0, 'q': 1.0, 'l': -3.0})."""
    name, _, arguments = text.partition(":")
    values = {}
    for item in filter(None, arguments.split(",")):
        key, sep, raw = item.partition("=")
        if not sep:
            raise InputError(f'Malformed norm argument {item!r} in {text!r}')
        try:
            values[key.strip()] = float(raw)
        except ValueError:
            raise InputError(f'Norm argument {item!r} is not a number') from None
    return name.strip(), values


def evaluate_norm(f, text: str, flavor: Optional[str] = None) -> float:
    name, a = parse_norm_spec(text)
    l = a.get("l", 0.0)
    if name == "lp":
        return lp_norm(f, a.get("p", 2.0), l)
    if name == "llogl":
        return llogl(f)
    if name == "lorentz":
        if "p" not in a or "q" not in a:
            raise InputError(f'Lorentz norm needs p and q, got {text!r}')
        return lorentz_norm(f, a["p"], a["q"], l, flavor if flavor in LORENTZ_FLAVORS else "maximal")
    if name == "sobolev":
        return sobolev_norm(f, a.get("m", 1.0), l, flavor if flavor in SOBOLEV_FLAVORS else "homogeneous")
    if name == "dyadic":
        return dyadic_norm(f, a.get("s", 0.0), l)
    raise InputError(f'Unknown norm {name!r}')


def cmd_norms(inputs: Sequence[str], norms: Sequence[str], flavor: Optional[str] = None) -> List[float]:
    """Every norm of every input snapshot, input-major."""
    values = []
    for path in inputs:
        f, _ = read_snapshot(path)
        values += [evaluate_norm(f, spec, flavor) for spec in norms]
    return values


def read_manifest(path) -> List[tuple]:
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                field_path, _, spec = line.partition(" ")
                pairs.append((field_path, spec.strip()))
    return pairs


def cmd_check(suite: str, grid: VelocityGrid, trials: int, seed: int,
              with_collision: bool = False, registry: Optional[ConstantsRegistry] = None) -> List[IneqReport]:
    if suite != "appendix":
        raise ConfigurationError(f'Unknown suite {suite!r}')
    return run_appendix_suite(grid, trials, seed, with_collision=with_collision, registry=registry)


def cmd_plotdata(trajectory_csv, curves: Sequence[str], out) -> int:
    """Long-format `curve,t,value` rows, one per curve and sample; returns the row count."""
    unknown = [c for c in curves if c not in PLOT_CURVES]
    if unknown:
        raise InputError(f'Unknown curves {unknown}, expected from {sorted(PLOT_CURVES)}')
    with open(trajectory_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and not all(PLOT_CURVES[c] in rows[0] for c in curves):
        raise InputError(f'{trajectory_csv} is not a solver trajectory')
    table = [(curve, row["t"], row[PLOT_CURVES[curve]]) for curve in curves for row in rows]
    _write_rows(out, ("curve", "t", "value"), table)
    return len(table)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration or parameter file")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.getenv("LANDAU_THREADS"),
                        help="FFT workers (default LANDAU_THREADS or 1)")
    common.add_argument("--registry", help="constants registry JSON")
    common.add_argument("--log-level", default=os.getenv("LANDAU_LOG_LEVEL", "INFO"))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="landau", description="Landau equation laboratory")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("run", parents=[common], help="integrate a configured run")
    commands.add_parser("calibrate", parents=[common], help="fit registry constants on a corpus")
    regime = commands.add_parser("regime", parents=[common], help="classify (H0, X0^2)")
    regime.add_argument("--H0", "--h0", dest="h0", type=float, required=True)
    regime.add_argument("--X0sq", "--x0sq", dest="x0sq", type=float, required=True)
    ode = commands.add_parser("ode", parents=[common], help="scalar differential inequalities")
    ode.add_argument("kind", choices=("master", "wode", "lifespan"))
    ode.add_argument("--params", help="parameter JSON (alias of --config)")
    norms = commands.add_parser("norms", parents=[common], help="norms of field snapshots")
    norms.add_argument("--input", action="append", default=[])
    norms.add_argument("--norm", action="append", default=[])
    norms.add_argument("--flavor")
    norms.add_argument("--manifest")
    check = commands.add_parser("check", parents=[common], help="functional inequality suites")
    check.add_argument("--suite", default="appendix")
    check.add_argument("--trials", type=float, default=1e6)
    check.add_argument("--L", type=float, default=6.0)
    check.add_argument("--N", type=int, default=16)
    check.add_argument("--with-collision", action="store_true")
    plot = commands.add_parser("plotdata", parents=[common], help="long-format curves from a trajectory CSV")
    plot.add_argument("--input", required=True)
    plot.add_argument("--curves", default="M,H,h1,envelope")
    return parser


def _emit(payload, out=None) -> None:
    if out:
        _write_json(out, payload)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _dispatch(args) -> int:
    registry = load_registry(args.registry)
    if args.command == "run":
        config = validate_config(RunConfig, load_document(args.config) if args.config else {}, "run configuration")
        registry = registry if args.registry else load_registry(config.registry)
        out = args.out or config.output or "output"
        trajectory = cmd_run(config, out, registry)
        log.info("Run written to %s (%d samples)", out, len(trajectory.records))
        return EXIT_OK
    if args.command == "calibrate":
        config = validate_config(CalibrationConfig, load_document(args.config) if args.config else {},
                                 "calibration configuration")
        calibrated, reports = cmd_calibrate(config, registry)
        out = Path(args.out or "calibration")
        out.mkdir(parents=True, exist_ok=True)
        (out / "registry.json").write_text(calibrated.dumps() + "\n")
        _write_json(out / "calibration.json", [r.to_dict() for r in reports])
        return EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATION
    if args.command == "regime":
        report = cmd_regime(args.h0, args.x0sq, registry)
        print(f'{report["classification"]} T* = {report["t_star"]}')
        if args.out:
            _write_json(args.out, report)
        return EXIT_OK
    if args.command == "ode":
        source = args.params or args.config
        if not source:
            raise ConfigurationError("ode needs --params")
        report = cmd_ode(args.kind, load_document(source), registry, args.out)
        _emit(report)
        return EXIT_VIOLATION if report.get("passed") is False else EXIT_OK
    if args.command == "norms":
        if args.flavor and args.flavor not in LORENTZ_FLAVORS + SOBOLEV_FLAVORS:
            raise ConfigurationError(f'Unknown flavor {args.flavor!r}')
        if args.manifest:
            values = [evaluate_norm(read_snapshot(path)[0], spec, args.flavor)
                      for path, spec in read_manifest(args.manifest)]
        else:
            values = cmd_norms(args.input, args.norm, args.flavor)
        for value in values:
            print(repr(float(value)))
        return EXIT_OK
    if args.command == "check":
        grid = VelocityGrid(args.L, args.N)
        reports = cmd_check(args.suite, grid, int(args.trials), args.seed, args.with_collision, registry)
        payload = [r.to_dict() for r in reports]
        if args.out:
            _write_json(args.out, payload)
        for r in reports:
            print(f'{r.inequality_id}\ttrials={r.trials}\tviolations={r.violations}')
        return EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATION
    if args.command == "plotdata":
        curves = [c.strip() for c in args.curves.split(",") if c.strip()]
        cmd_plotdata(args.input, curves, args.out or "plotdata.csv")
        return EXIT_OK
    raise ConfigurationError(f'Unknown command {args.command!r}')


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=str(args.log_level).upper(),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.threads is not None:
            set_fft_workers(args.threads)
        return _dispatch(args)
    except LandauError as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
