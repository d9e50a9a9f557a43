"""Command line front end: TOML run configs in, CSV sweep artifacts out.

Every run is a sweep: one CSV row per grid point, a header row naming
the columns, and deterministic bytes for a given (config, seed).  All
thresholds and antenna gains are decibels at this surface, lengths are
kilometers, transmit powers are watts.  Exit status is 0 on success, 2
for configuration errors, 3 when engine=both finds the analytic and
Monte Carlo columns apart by more than 5 standard errors, and 1 when a
quadrature fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import analytic
from .constellation import (
    WalkerSystem,
    builtin_shells,
    fit_cox,
    horizontal_gap_db,
    load_shell_table,
    mean_visible,
    visible_count_samples,
    walker_coverage_closed,
)
from .geometry import R_EARTH_KM
from .model import ConstellationSpec, Curve, NetworkModel, PropagationConfig, db_to_linear
from .montecarlo import WORKERS_ENV_VAR, estimate
from .quadrature import QuadratureError, QuadratureSettings

MODES = ("coverage-closed", "coverage-open", "association", "no-satellite",
         "ergodic", "simulate", "fit", "compare")
ENGINES = ("analytic", "montecarlo", "both")
# sweepable model parameters; tau_db and target_visible are mode-implied
MODEL_PARAMETERS = ("mean_orbits", "mean_sats_per_orbit", "altitude_km",
                    "radius_km", "tx_power_w", "gain_db")
FIT_STRATEGIES = ("fix_mu", "fix_lambda", "fix_ratio")
DISAGREEMENT_STDERRS = 5.0
# slack for rows whose binomial stderr underflows (empirical rate 0 or 1)
DISAGREEMENT_FLOOR = 1e-6


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending key."""


_REQUIRED = object()


class _Section:
    """One TOML table: typed reads, unknown-key detection, a resolved
    report with defaulted values flagged (for validate-config)."""

    def __init__(self, data, where: str, report: list):
        if not isinstance(data, dict):
            raise ConfigError(f"{where} must be a table")
        self._data = data
        self._where = where
        self._seen: set[str] = set()
        self._report = report

    def get(self, key: str, kind, default=_REQUIRED, unit: str = ""):
        self._seen.add(key)
        label = f"{self._where}.{key}" if self._where else key
        if key not in self._data:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key {label}")
            if default is not None:
                self._report.append(f"{label} = {default}{unit}  (default)")
            return default
        value = self._data[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool):
            raise ConfigError(f"{label}: expected {kind.__name__}, got {value!r}")
        self._report.append(f"{label} = {value}{unit}")
        return value

    def has(self, key: str) -> bool:
        return key in self._data

    def declare(self, *keys: str):
        """Reject unknown keys up front, before any semantic checks."""
        unknown = sorted(set(self._data) - set(keys))
        if unknown:
            label = f"{self._where}.{unknown[0]}" if self._where else unknown[0]
            raise ConfigError(f"unknown key {label}")

    def finish(self):
        unknown = sorted(set(self._data) - self._seen)
        if unknown:
            label = f"{self._where}.{unknown[0]}" if self._where else unknown[0]
            raise ConfigError(f"unknown key {label}")


@dataclass
class RunConfig:
    mode: str
    model: NetworkModel | None
    propagation: PropagationConfig
    sweep_parameter: str
    sweep_constellation: int
    grid: np.ndarray
    engine: str
    trials: int
    seed: int
    serving_type: int | None
    out: str
    rel_tol: float
    fit_radius_km: float | None = None
    fit_strategy: tuple[str, float] | None = None
    fit_latitude_deg: float = 0.0
    compare_systems: list = field(default_factory=list)
    compare_fits: list = field(default_factory=list)
    compare_latitude_deg: float = 0.0
    compare_rotations: int = 4096
    report: list = field(default_factory=list)

    @property
    def settings(self) -> QuadratureSettings:
        return QuadratureSettings(rel_tol=self.rel_tol,
                                  abs_tol=min(1e-9, self.rel_tol))


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        # the decoder message carries line and column positions
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_constellations(raw, report) -> tuple[ConstellationSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("at least one [[constellation]] block is required")
    specs = []
    for i, block in enumerate(raw):
        sec = _Section(block, f"constellation[{i}]", report)
        sec.declare("mean_orbits", "mean_sats_per_orbit", "radius_km",
                    "altitude_km", "tx_power_w", "gain_db")
        lam = sec.get("mean_orbits", float)
        mu = sec.get("mean_sats_per_orbit", float)
        if sec.has("radius_km") == sec.has("altitude_km"):
            raise ConfigError(
                f"constellation[{i}]: give exactly one of radius_km, altitude_km")
        if sec.has("radius_km"):
            radius = sec.get("radius_km", float, unit=" km")
        else:
            radius = R_EARTH_KM + sec.get("altitude_km", float, unit=" km")
        power = sec.get("tx_power_w", float, default=1.0, unit=" W")
        gain_db = sec.get("gain_db", float, default=0.0, unit=" dB")
        sec.finish()
        try:
            specs.append(ConstellationSpec(lam, mu, radius, tx_power_w=power,
                                           gain=db_to_linear(gain_db)))
        except ValueError as exc:
            raise ConfigError(f"constellation[{i}]: {exc}") from exc
    return tuple(specs)


def _parse_grid(sec: _Section) -> np.ndarray:
    if sec.has("grid"):
        raw = sec.get("grid", list)
        if not raw or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
            raise ConfigError("sweep.grid must be a nonempty list of numbers")
        grid = np.asarray(raw, dtype=float)
    else:
        start = sec.get("start", float)
        stop = sec.get("stop", float)
        count = sec.get("count", int)
        if count < 1:
            raise ConfigError("sweep.count must be at least 1")
        grid = np.linspace(start, stop, count)
    if np.any(np.diff(grid) <= 0.0):
        raise ConfigError("sweep grid must be strictly increasing")
    return grid


def _parse_sweep(raw, mode: str, n_types: int, report) -> tuple[str, int, np.ndarray]:
    implied = {"fit": "target_visible"}.get(mode, "tau_db")
    sec = _Section(raw if raw is not None else {}, "sweep", report)
    sec.declare("parameter", "constellation", "grid", "start", "stop", "count")
    if mode in ("no-satellite", "association", "ergodic"):
        parameter = sec.get("parameter", str)
        if parameter not in MODEL_PARAMETERS:
            raise ConfigError(
                f"sweep.parameter must be one of {', '.join(MODEL_PARAMETERS)}")
        index = sec.get("constellation", int, default=0)
        if not 0 <= index < n_types:
            raise ConfigError("sweep.constellation out of range")
    else:
        parameter = sec.get("parameter", str, default=implied)
        if parameter != implied:
            raise ConfigError(f"{mode} sweeps {implied}, not {parameter}")
        index = 0
    if raw is None:
        raise ConfigError("missing required [sweep] section")
    grid = _parse_grid(sec)
    sec.finish()
    report.append(f"sweep: {len(grid)} points in [{grid[0]}, {grid[-1]}]")
    return parameter, index, grid


def _resolve_shells(names, tables, where: str):
    out = []
    for name in names:
        if not isinstance(name, str) or name not in tables:
            raise ConfigError(f"{where}: unknown shell {name!r}")
        out.append(tables[name])
    if not out:
        raise ConfigError(f"{where}: shells list is empty")
    return tuple(out)


def _parse_compare(raw, report, seed: int):
    sec = _Section(raw if raw is not None else {}, "compare", report)
    if raw is None:
        raise ConfigError("compare mode needs a [compare] section")
    tables = builtin_shells()
    if sec.has("shell_table"):
        tables.update(load_shell_table(sec.get("shell_table", str)))
    latitude = sec.get("latitude_deg", float, default=0.0, unit=" deg")
    rotations = sec.get("rotations", int, default=4096)
    raw_systems = sec.get("systems", list)
    sec.finish()
    if not raw_systems:
        raise ConfigError("compare.systems must list at least one system")
    systems, fits = [], []
    for i, block in enumerate(raw_systems):
        ssec = _Section(block, f"compare.systems[{i}]", report)
        ssec.declare("shells", "reuse_factor", "tx_power_w", "gain_db",
                     *FIT_STRATEGIES)
        shells = _resolve_shells(ssec.get("shells", list),
                                 tables, f"compare.systems[{i}]")
        reuse = ssec.get("reuse_factor", int, default=1)
        power = ssec.get("tx_power_w", float, default=1.0, unit=" W")
        gain_db = ssec.get("gain_db", float, default=0.0, unit=" dB")
        strategy = [k for k in FIT_STRATEGIES if ssec.has(k)]
        if len(strategy) > 1:
            raise ConfigError(
                f"compare.systems[{i}]: give at most one fit strategy")
        if strategy:
            fits.append((strategy[0], ssec.get(strategy[0], float)))
        else:
            fits.append(("fix_ratio", 1.0))
            report.append(f"compare.systems[{i}].fix_ratio = 1.0  (default)")
        ssec.finish()
        try:
            systems.append(WalkerSystem(shells, reuse_factor=reuse,
                                        tx_power_w=power,
                                        gain=db_to_linear(gain_db)))
        except ValueError as exc:
            raise ConfigError(f"compare.systems[{i}]: {exc}") from exc
    return systems, fits, latitude, rotations


def parse_config(path: str, mode: str | None) -> RunConfig:
    """Load and validate a TOML run config.

    ``mode`` comes from the subcommand; a ``mode`` key in the file is
    optional then, but must agree.  validate-config passes None and the
    file must name its mode.
    """
    data = _load_toml(path)
    report: list[str] = []
    top = _Section(data, "", report)

    top._seen.add("mode")
    file_mode = data.get("mode")
    if file_mode is not None and file_mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}")
    if mode is None:
        if file_mode is None:
            raise ConfigError("missing required key mode")
        mode = file_mode
    elif file_mode is not None and file_mode != mode:
        raise ConfigError(f"config says mode {file_mode}, command says {mode}")
    report.append(f"mode = {mode}")

    psec = _Section(data.get("propagation", {}), "propagation", report)
    top._seen.add("propagation")
    try:
        propagation = PropagationConfig(
            path_loss_exponent=psec.get("path_loss_exponent", float, default=3.0),
            noise_power_w=psec.get("noise_power_w", float, default=0.0, unit=" W"),
            fading_shape=psec.get("fading_shape", float, default=1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"propagation: {exc}") from exc
    psec.finish()

    # fit and compare build their own specs; the others model a network
    top._seen.add("constellation")
    if mode in ("fit", "compare") and data.get("constellation") is None:
        model = None
    else:
        specs = _parse_constellations(data.get("constellation"), report)
        model = NetworkModel(specs, propagation)

    rsec = _Section(data.get("run", {}), "run", report)
    top._seen.add("run")
    engine = rsec.get("engine", str, default="analytic")
    if engine not in ENGINES:
        raise ConfigError(f"run.engine must be one of {', '.join(ENGINES)}")
    if mode == "simulate":
        if not rsec.has("engine"):
            engine = "montecarlo"
        elif engine != "montecarlo":
            raise ConfigError("simulate runs engine=montecarlo only")
    trials = rsec.get("trials", int, default=100_000)
    seed = rsec.get("seed", int, default=0)
    if seed < 0:
        raise ConfigError("run.seed must be nonnegative")
    out = rsec.get("out", str, default="-")
    rel_tol = rsec.get("rel_tol", float, default=1e-6)
    if not 0 < rel_tol < 1:
        raise ConfigError("run.rel_tol must lie in (0, 1)")
    serving = rsec.get("serving_type", int, default=None)
    rsec.finish()

    if mode in ("coverage-closed", "association") and serving is None:
        serving = 0
        report.append("run.serving_type = 0  (default)")
    if mode == "coverage-open" and serving is not None:
        raise ConfigError("coverage-open serves the nearest satellite of "
                          "any type; drop run.serving_type")
    if model is not None and serving is not None \
            and not 0 <= serving < model.n_types:
        raise ConfigError("run.serving_type out of range")

    top._seen.add("sweep")
    parameter, index, grid = _parse_sweep(
        data.get("sweep"), mode, model.n_types if model is not None else 1,
        report)

    cfg = RunConfig(mode=mode, model=model, propagation=propagation,
                    sweep_parameter=parameter, sweep_constellation=index,
                    grid=grid, engine=engine, trials=trials, seed=seed,
                    serving_type=serving, out=out, rel_tol=rel_tol,
                    report=report)

    if mode == "fit":
        fsec = _Section(data.get("fit") or {}, "fit", report)
        top._seen.add("fit")
        fsec.declare("radius_km", "latitude_deg", *FIT_STRATEGIES)
        cfg.fit_radius_km = fsec.get("radius_km", float, unit=" km")
        strategy = [k for k in FIT_STRATEGIES if fsec.has(k)]
        if len(strategy) != 1:
            raise ConfigError(
                f"fit needs exactly one of {', '.join(FIT_STRATEGIES)}")
        cfg.fit_strategy = (strategy[0], fsec.get(strategy[0], float))
        cfg.fit_latitude_deg = fsec.get("latitude_deg", float, default=0.0,
                                        unit=" deg")
        fsec.finish()
    if mode == "compare":
        top._seen.add("compare")
        (cfg.compare_systems, cfg.compare_fits, cfg.compare_latitude_deg,
         cfg.compare_rotations) = _parse_compare(data.get("compare"), report, seed)

    top.finish()
    if engine != "analytic" and trials < 1:
        raise ConfigError("engine=montecarlo requires trials >= 1")
    return cfg


# ---------------------------------------------------------------------------
# sweep execution


def _model_at(cfg: RunConfig, value: float) -> NetworkModel:
    """The network with the swept parameter set to ``value``."""
    specs = list(cfg.model.constellations)
    s = specs[cfg.sweep_constellation]
    kw = dict(mean_orbits=s.mean_orbits, mean_sats_per_orbit=s.mean_sats_per_orbit,
              radius_km=s.radius_km, tx_power_w=s.tx_power_w, gain=s.gain)
    p = cfg.sweep_parameter
    if p == "altitude_km":
        kw["radius_km"] = R_EARTH_KM + value
    elif p == "gain_db":
        kw["gain"] = db_to_linear(value)
    else:
        kw[p] = value
    try:
        specs[cfg.sweep_constellation] = ConstellationSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"sweep value {value}: {exc}") from exc
    return NetworkModel(tuple(specs), cfg.model.propagation)


def _both_summary(name: str, a: np.ndarray, mc: np.ndarray, se: np.ndarray):
    gap = np.abs(np.asarray(a) - np.asarray(mc))
    allowed = DISAGREEMENT_STDERRS * np.asarray(se) + DISAGREEMENT_FLOOR
    lines = []
    finite = np.isfinite(gap) & np.isfinite(allowed)
    if not finite.all():
        # a divergent estimate (infinite-capacity samples at zero noise)
        # carries no disagreement information either way
        lines.append(f"{name}: {int((~finite).sum())} row(s) with non-finite "
                     "Monte Carlo estimate excluded from the agreement check")
    if not finite.any():
        return lines, 0
    gap, allowed = gap[finite], allowed[finite]
    worst = int(np.argmax(gap - allowed))
    lines.insert(0, f"max |{name}_analytic - {name}_mc| = {gap.max():.3e} "
                 f"({gap[worst]:.3e} vs {allowed[worst]:.3e} allowed at the worst row)")
    if np.any(gap > allowed):
        lines.append(f"{name}: analytic and Monte Carlo disagree beyond "
                     f"{DISAGREEMENT_STDERRS:g} stderr")
        return lines, 3
    return lines, 0


def _run_coverage(cfg: RunConfig):
    header, columns = ["tau_db"], [cfg.grid]
    closed = cfg.mode == "coverage-closed"
    a = mc = None
    if cfg.engine in ("analytic", "both"):
        if closed:
            a = analytic.coverage_closed(cfg.model, cfg.serving_type, cfg.grid,
                                         settings=cfg.settings)
        else:
            a = analytic.coverage_open(cfg.model, cfg.grid, settings=cfg.settings)
        header.append("coverage_analytic")
        columns.append(np.atleast_1d(a))
    if cfg.engine in ("montecarlo", "both"):
        res = estimate(cfg.model, "closed" if closed else "open", cfg.grid,
                       cfg.trials, cfg.seed, serving_type=cfg.serving_type or 0)
        mc = res.coverage
        header += ["coverage_mc", "mc_stderr"]
        columns += [mc.y, mc.stderr]
    if cfg.engine == "both":
        return header, columns, *_both_summary("coverage", a, mc.y, mc.stderr)
    return header, columns, [], 0


def _run_no_satellite(cfg: RunConfig):
    header, columns = [cfg.sweep_parameter], [cfg.grid]
    a_col, mc_col, se_col = [], [], []
    for i, value in enumerate(cfg.grid):
        model = _model_at(cfg, float(value))
        if cfg.engine in ("analytic", "both"):
            if cfg.serving_type is None:
                a_col.append(analytic.no_satellite_open(model))
            else:
                a_col.append(analytic.no_satellite_closed(
                    model.constellations[cfg.serving_type]))
        if cfg.engine in ("montecarlo", "both"):
            source = (model if cfg.serving_type is None
                      else model.constellations[cfg.serving_type])
            counts = visible_count_samples(
                source, 0.0, cfg.trials, np.random.SeedSequence([cfg.seed, i]))
            p = float(np.count_nonzero(counts == 0)) / cfg.trials
            mc_col.append(p)
            se_col.append(math.sqrt(max(p * (1.0 - p), 0.0) / cfg.trials))
    return _assemble(cfg, "no_satellite", header, columns, a_col, mc_col, se_col)


def _run_association(cfg: RunConfig):
    header, columns = [cfg.sweep_parameter], [cfg.grid]
    a_col, mc_col, se_col = [], [], []
    for i, value in enumerate(cfg.grid):
        model = _model_at(cfg, float(value))
        if cfg.engine in ("analytic", "both"):
            a_col.append(analytic.association_probability(
                model, cfg.serving_type, settings=cfg.settings))
        if cfg.engine in ("montecarlo", "both"):
            res = estimate(model, "open", [0.0], cfg.trials, cfg.seed + i)
            p = float(res.association_freq[cfg.serving_type])
            mc_col.append(p)
            se_col.append(math.sqrt(max(p * (1.0 - p), 0.0) / cfg.trials))
    return _assemble(cfg, "association", header, columns, a_col, mc_col, se_col)


def _run_ergodic(cfg: RunConfig):
    header, columns = [cfg.sweep_parameter], [cfg.grid]
    a_col, mc_col, se_col = [], [], []
    for i, value in enumerate(cfg.grid):
        model = _model_at(cfg, float(value))
        if cfg.engine in ("analytic", "both"):
            if cfg.serving_type is None:
                a_col.append(analytic.ergodic_capacity_open(model,
                                                            settings=cfg.settings))
            else:
                a_col.append(analytic.ergodic_capacity_closed(
                    model, cfg.serving_type, settings=cfg.settings))
        if cfg.engine in ("montecarlo", "both"):
            access = "open" if cfg.serving_type is None else "closed"
            res = estimate(model, access, [0.0], cfg.trials, cfg.seed + i,
                           serving_type=cfg.serving_type or 0)
            mc_col.append(res.capacity_bits)
            se_col.append(res.capacity_stderr)
    return _assemble(cfg, "capacity", header, columns, a_col, mc_col, se_col)


def _assemble(cfg, name, header, columns, a_col, mc_col, se_col):
    if a_col:
        header.append(f"{name}_analytic")
        columns.append(np.asarray(a_col))
    if mc_col:
        header += [f"{name}_mc", "mc_stderr"]
        columns += [np.asarray(mc_col), np.asarray(se_col)]
    if cfg.engine == "both":
        return header, columns, *_both_summary(
            name, np.asarray(a_col), np.asarray(mc_col), np.asarray(se_col))
    return header, columns, [], 0


def _run_simulate(cfg: RunConfig):
    access = "open" if cfg.serving_type is None else "closed"
    res = estimate(cfg.model, access, cfg.grid, cfg.trials, cfg.seed,
                   serving_type=cfg.serving_type or 0)
    header = ["tau_db", "coverage_mc", "mc_stderr"]
    columns = [cfg.grid, res.coverage.y, res.coverage.stderr]
    summary = [
        f"trials = {res.n_trials}, access = {access}",
        f"no_satellite_rate = {res.no_satellite_rate:.6g} "
        f"(stderr {res.no_satellite_stderr:.2g})",
        "association_freq = "
        + ", ".join(f"{v:.6g}" for v in res.association_freq),
        f"capacity = {res.capacity_bits:.6g} bits/channel use "
        f"(stderr {res.capacity_stderr:.2g})",
    ]
    return header, columns, summary, 0


def _run_fit(cfg: RunConfig):
    key, value = cfg.fit_strategy
    lam, mu = [], []
    for target in cfg.grid:
        try:
            fit = fit_cox(float(target), cfg.fit_radius_km, **{key: value},
                          latitude_deg=cfg.fit_latitude_deg)
        except ValueError as exc:
            raise ConfigError(f"fit at target {target}: {exc}") from exc
        lam.append(fit.lambda_hat)
        mu.append(fit.mu_hat)
    header = ["target_visible", "mean_orbits", "mean_sats_per_orbit", "radius_km"]
    columns = [cfg.grid, np.asarray(lam), np.asarray(mu),
               np.full(cfg.grid.size, cfg.fit_radius_km)]
    return header, columns, [], 0


def _run_compare(cfg: RunConfig):
    serving = cfg.serving_type if cfg.serving_type is not None else 0
    if not 0 <= serving < len(cfg.compare_systems):
        raise ConfigError("run.serving_type out of range for compare.systems")
    lat = cfg.compare_latitude_deg
    summary = []
    fitted = []
    for i, (system, (key, value)) in enumerate(zip(cfg.compare_systems,
                                                   cfg.compare_fits)):
        target = mean_visible(system, lat, n_rotations=cfg.compare_rotations,
                              seed=cfg.seed)
        try:
            fit = fit_cox(target, system.mean_radius_km, **{key: value},
                          latitude_deg=lat)
        except ValueError as exc:
            raise ConfigError(f"compare.systems[{i}]: {exc}") from exc
        fitted.append(fit.spec(tx_power_w=system.tx_power_w, gain=system.gain))
        summary.append(
            f"system[{i}]: mean visible {target:.3f} -> lambda {fit.lambda_hat:.3f}, "
            f"mu {fit.mu_hat:.3f} at radius {fit.radius_km:.1f} km")
    fitted_model = NetworkModel(tuple(fitted), cfg.propagation)

    det = walker_coverage_closed(cfg.compare_systems, serving,
                                 cfg.propagation, lat, cfg.grid,
                                 cfg.trials, cfg.seed)
    fit_y = np.atleast_1d(analytic.coverage_closed(fitted_model, serving,
                                                   cfg.grid, settings=cfg.settings))
    gap = horizontal_gap_db(det, Curve.probability(cfg.grid, fit_y),
                            np.linspace(0.2, 0.8, 25))
    summary.append(f"max horizontal gap over coverage 0.2..0.8: {gap:.3f} dB")
    header = ["tau_db", "coverage_walker", "walker_stderr", "coverage_fitted"]
    return header, [cfg.grid, det.y, det.stderr, fit_y], summary, 0


_RUNNERS = {
    "coverage-closed": _run_coverage,
    "coverage-open": _run_coverage,
    "association": _run_association,
    "no-satellite": _run_no_satellite,
    "ergodic": _run_ergodic,
    "simulate": _run_simulate,
    "fit": _run_fit,
    "compare": _run_compare,
}


# ---------------------------------------------------------------------------
# CSV emission


def _cell(value) -> str:
    # repr of a python float is the shortest round-trip form, which
    # keeps output bytes stable across numpy versions
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(out: str, header, columns):
    rows = zip(*columns)
    if out == "-":
        _emit(sys.stdout, header, rows)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            _emit(fh, header, rows)


def _emit(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coxleo",
        description="Downlink statistics of multi-constellation LEO networks "
                    "modeled as orbit point processes. SINR thresholds and "
                    "antenna gains are given in dB, lengths in km, powers in "
                    "watts. Each subcommand sweeps a grid and writes one CSV "
                    "row per grid point.",
        epilog=f"The {WORKERS_ENV_VAR} environment variable sets the Monte "
               "Carlo worker process count. See example-config.toml at the "
               "repository root for the annotated config schema.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    config_only = argparse.ArgumentParser(add_help=False)
    config_only.add_argument("--config", required=True,
                             help="TOML run config path")
    common = argparse.ArgumentParser(add_help=False, parents=[config_only])
    common.add_argument("--engine", choices=ENGINES,
                        help="override the configured engine")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--seed", type=int, help="simulation seed (nonnegative)")
    common.add_argument("--out", help="CSV output path ('-' for stdout)")
    common.add_argument("--tol", type=float,
                        help="relative quadrature tolerance")
    descriptions = {
        "coverage-closed": "P(SINR > tau) served by one constellation type",
        "coverage-open": "P(SINR > tau) served by the nearest satellite of any type",
        "association": "probability a type provides the nearest visible satellite",
        "no-satellite": "probability of an empty sky over a parameter sweep",
        "ergodic": "mean link rate in bits per channel use",
        "simulate": "Monte Carlo coverage run (no analytic column)",
        "fit": "match orbit-model parameters to target visible counts",
        "compare": "deterministic shells versus their fitted orbit model",
        "validate-config": "parse a config and echo the resolved run",
    }
    for mode in MODES:
        sub.add_parser(mode, parents=[common], help=descriptions[mode],
                       description=descriptions[mode])
    sub.add_parser("validate-config", parents=[config_only],
                   help=descriptions["validate-config"],
                   description=descriptions["validate-config"])
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.engine is not None:
        if cfg.mode == "simulate" and args.engine != "montecarlo":
            raise ConfigError("simulate runs engine=montecarlo only")
        cfg.engine = args.engine
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.tol is not None:
        if not 0 < args.tol < 1:
            raise ConfigError("--tol must lie in (0, 1)")
        cfg.rel_tol = args.tol
    if cfg.engine != "analytic" and cfg.trials < 1:
        raise ConfigError("engine=montecarlo requires trials >= 1")
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    validate_only = args.mode == "validate-config"
    try:
        cfg = parse_config(args.config, None if validate_only else args.mode)
        if validate_only:
            for line in cfg.report:
                print(line)
            return 0
        cfg = _apply_overrides(cfg, args)
        header, columns, summary, code = _RUNNERS[cfg.mode](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"quadrature failure during {args.mode}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # model invariants surfaced while running, e.g. a non-Rayleigh
        # fading shape fed to the analytic coverage formulas
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _write_csv(cfg.out, header, columns)
    for line in summary:
        print(line, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
