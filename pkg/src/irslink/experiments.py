"""Batch harness: JSON experiment configs, presets, seeded sweeps, CSV output.

Configs use GHz / dBm / degrees / meters at the boundary and reject unknown
keys.  A run is deterministic given the master seed: every (coordinate,
realization) derives its own sub-seeds by counter, so adding solvers or
changing the thread count never shifts the random draws.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .channel import ChannelModel, IrsResponse, ShadowingModel
from .coupling import (DEFAULT_MEM_CAP_GB, assemble_coupling, received_power,
                       quadratic_objective)
from .geometry import (GAIN_ISOTROPIC, GAIN_SECTORED_3GPP, Scenario,
                       scenario_to_dict, steering_angle, two_hop_layout)
from .rate_bounds import UB_CLOSED_FORM, bound_inputs, evaluate_rates, upper_bound
from .solvers import (NbDelays, brute_force_oracle, dominant_eigenvalue_bound,
                      max_eig_phase, nb_config, nb_max_power, nb_optimum,
                      relaxed_power_bound, subband_received_powers, ucqp_ascent)
from .spectrum import (BF_ADAPTED, BF_CENTRAL, LOADING_EQUAL, LOADING_RANDOM,
                       MODE_FLAT, MODE_SUB_BANDS, ConfigError, FrequencyGrid,
                       SpectrumSpec, build_psd, make_beam, random_allocation)

SOLVER_NB_CENTRAL = "nb-central"
SOLVER_NB_MAX_POWER = "nb-max-power"
SOLVER_NB_OPTIMUM = "nb-optimum"
SOLVER_MAX_EIG = "max-eig-phase"
SOLVER_UCQP = "ucqp-ascent"
SOLVER_NAMES = (SOLVER_NB_CENTRAL, SOLVER_NB_MAX_POWER, SOLVER_NB_OPTIMUM,
                SOLVER_MAX_EIG, SOLVER_UCQP)

SWEEP_BANDWIDTH = "bandwidth"
SWEEP_UE_ANGLE = "ue_angle"
SWEEP_IRS_SIZE = "irs_size"
SWEEP_AXES = (SWEEP_BANDWIDTH, SWEEP_UE_ANGLE, SWEEP_IRS_SIZE)

CURVE_PHI_UE = "phi_ue_deg"
CURVE_BANDWIDTH = "bandwidth_ghz"
CURVE_PARAMS = (CURVE_PHI_UE, CURVE_BANDWIDTH)

ALLOC_ALL = "all"
ALLOC_SPANNING_RANDOM = "spanning_random"

# Simulation constants of the reference setup (each appears only here).
CENTER_FREQUENCY_GHZ = 300.0
ELEMENT_SPACING_M = 5e-4            # half wavelength at the center frequency
BS_ANTENNAS = 16
UE_ANTENNAS = 8
BS_DISTANCE_M = 8.0
UE_DISTANCE_M = 15.0
BS_ANGLE_DEG = 45.0
TX_POWER_DBM = 22.0
SUBBAND_WIDTH_GHZ = 1.0
NOISE_DBM_PER_HZ = -174.0
BS_MAX_GAIN_DBI = 8.0
SHADOW_SIGMA_DB = 2.0
IRS_MAGNITUDE_DB = -1.0
IRS_PHASE_SLOPE_DEG_PER_GHZ = -25.0
WALL_REFLECTION_MAGNITUDE = 0.5     # not calibrated against a measured material
WALL_REFLECTION_PHASE_DEG = 180.0
PAPER_SIDE = 64
DESK_SIDE = 16


def dbm_to_watt(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * math.log10(watt / 1e-3)


def _check_keys(d: dict, allowed, where: str) -> None:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys {unknown} in {where}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry knobs at the config boundary (GHz, degrees, meters)."""

    center_frequency_ghz: float = CENTER_FREQUENCY_GHZ
    bs_antennas: int = BS_ANTENNAS
    ue_antennas: int = UE_ANTENNAS
    irs_rows: int = DESK_SIDE
    irs_cols: int = DESK_SIDE
    element_spacing_m: float = ELEMENT_SPACING_M
    bs_distance_m: float = BS_DISTANCE_M
    ue_distance_m: float = UE_DISTANCE_M
    bs_angle_deg: float = BS_ANGLE_DEG
    ue_angle_deg: float = 30.0
    bs_gain_model: str = GAIN_SECTORED_3GPP
    bs_max_gain_dbi: float = BS_MAX_GAIN_DBI
    wall_reflector: bool = False
    wall_reflection_magnitude: float = WALL_REFLECTION_MAGNITUDE
    wall_reflection_phase_deg: float = WALL_REFLECTION_PHASE_DEG

    def build(self) -> Scenario:
        wall = None
        if self.wall_reflector:
            wall = self.wall_reflection_magnitude * complex(
                math.cos(math.radians(self.wall_reflection_phase_deg)),
                math.sin(math.radians(self.wall_reflection_phase_deg)))
        return two_hop_layout(
            bs_antennas=self.bs_antennas, ue_antennas=self.ue_antennas,
            array_spacing=self.element_spacing_m,
            irs_rows=self.irs_rows, irs_cols=self.irs_cols,
            irs_spacing=self.element_spacing_m,
            bs_distance=self.bs_distance_m, ue_distance=self.ue_distance_m,
            bs_angle=math.radians(self.bs_angle_deg),
            ue_angle=math.radians(self.ue_angle_deg),
            bs_gain_model=self.bs_gain_model, bs_max_gain_dbi=self.bs_max_gain_dbi,
            ue_gain_model=GAIN_ISOTROPIC, wall_reflection=wall)


@dataclass(frozen=True)
class BeamConfig:
    """One transmit beam; `beta_deg` = "auto" steers at the IRS center."""

    power_dbm: float = TX_POWER_DBM
    power_scope: str = "per_subband"          # or "total"
    n_subbands: int | None = None             # None = every sub-band
    allocation: str = ALLOC_SPANNING_RANDOM   # or "all"
    loading: str = LOADING_EQUAL
    beamforming: str = BF_ADAPTED
    beta_deg: object = "auto"

    def __post_init__(self):
        if self.power_scope not in ("per_subband", "total"):
            raise ConfigError(f"unknown power_scope {self.power_scope!r}")
        if self.allocation not in (ALLOC_ALL, ALLOC_SPANNING_RANDOM):
            raise ConfigError(f"unknown allocation {self.allocation!r}")
        if self.loading not in (LOADING_EQUAL, LOADING_RANDOM):
            raise ConfigError(f"unknown loading {self.loading!r}")
        if self.beamforming not in (BF_CENTRAL, BF_ADAPTED):
            raise ConfigError(f"unknown beamforming {self.beamforming!r}")


@dataclass(frozen=True)
class SpectrumConfig:
    mode: str = MODE_SUB_BANDS
    subband_width_ghz: float = SUBBAND_WIDTH_GHZ
    nodes_per_subband: int = 8
    beams: tuple = (BeamConfig(),)

    def __post_init__(self):
        if self.mode not in (MODE_FLAT, MODE_SUB_BANDS):
            raise ConfigError(f"unknown spectrum mode {self.mode!r}")
        if len(self.beams) < 1:
            raise ConfigError("at least one beam is required")


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    values: tuple

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}")
        if len(self.values) < 1:
            raise ConfigError("sweep value list must be nonempty")


@dataclass(frozen=True)
class CurveConfig:
    param: str
    values: tuple

    def __post_init__(self):
        if self.param not in CURVE_PARAMS:
            raise ConfigError(f"unknown curve param {self.param!r}")
        if len(self.values) < 1:
            raise ConfigError("curve value list must be nonempty")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    scenario: ScenarioConfig
    spectrum: SpectrumConfig
    sweep: SweepConfig
    solvers: tuple
    curve: CurveConfig | None = None
    realizations: int = 1
    seed: int = 0
    shadowing_sigma_db: float = 0.0
    irs_magnitude_db: float = IRS_MAGNITUDE_DB
    irs_phase_slope_deg_per_ghz: float = IRS_PHASE_SLOPE_DEG_PER_GHZ
    noise_dbm_per_hz: float = NOISE_DBM_PER_HZ
    bandwidth_ghz: float | None = None    # used when neither sweep nor curve sets it
    mem_cap_gb: float = DEFAULT_MEM_CAP_GB
    description: str = ""

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if len(self.solvers) < 1:
            raise ConfigError("at least one solver is required")
        for s in self.solvers:
            if s not in SOLVER_NAMES:
                raise ConfigError(f"unknown solver {s!r}; known: {list(SOLVER_NAMES)}")
        sources = [self.sweep.axis == SWEEP_BANDWIDTH,
                   self.curve is not None and self.curve.param == CURVE_BANDWIDTH,
                   self.bandwidth_ghz is not None]
        if sum(sources) != 1:
            raise ConfigError("exactly one of sweep axis, curve param or the "
                              "bandwidth_ghz field must define the bandwidth")
        if (self.curve is not None and self.curve.param == CURVE_PHI_UE
                and self.sweep.axis == SWEEP_UE_ANGLE):
            raise ConfigError("curve and sweep cannot both set the UE angle")


# ---------------------------------------------------------------------------
# JSON boundary

def experiment_config_to_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["solvers"] = list(cfg.solvers)
    d["sweep"]["values"] = list(cfg.sweep.values)
    if cfg.curve is not None:
        d["curve"]["values"] = list(cfg.curve.values)
    d["spectrum"]["beams"] = [asdict(b) for b in cfg.spectrum.beams]
    return d


def experiment_config_from_dict(d: dict) -> ExperimentConfig:
    _check_keys(d, set(ExperimentConfig.__dataclass_fields__), "experiment config")
    sc = d.get("scenario", {})
    _check_keys(sc, set(ScenarioConfig.__dataclass_fields__), "scenario")
    sp = d.get("spectrum", {})
    _check_keys(sp, set(SpectrumConfig.__dataclass_fields__), "spectrum")
    beams = []
    for i, b in enumerate(sp.get("beams", [{}])):
        _check_keys(b, set(BeamConfig.__dataclass_fields__), f"spectrum.beams[{i}]")
        beams.append(BeamConfig(**b))
    sw = d.get("sweep")
    if sw is None:
        raise ConfigError("experiment config needs a sweep block")
    _check_keys(sw, set(SweepConfig.__dataclass_fields__), "sweep")
    curve = None
    if d.get("curve") is not None:
        _check_keys(d["curve"], set(CurveConfig.__dataclass_fields__), "curve")
        curve = CurveConfig(param=d["curve"]["param"], values=tuple(d["curve"]["values"]))
    kwargs = {k: v for k, v in d.items()
              if k not in ("scenario", "spectrum", "sweep", "curve", "solvers")}
    return ExperimentConfig(
        scenario=ScenarioConfig(**sc),
        spectrum=SpectrumConfig(mode=sp.get("mode", MODE_SUB_BANDS),
                                subband_width_ghz=sp.get("subband_width_ghz", SUBBAND_WIDTH_GHZ),
                                nodes_per_subband=sp.get("nodes_per_subband", 8),
                                beams=tuple(beams)),
        sweep=SweepConfig(axis=sw["axis"], values=tuple(sw["values"])),
        curve=curve,
        solvers=tuple(d.get("solvers", ())),
        **kwargs)


def load_experiment_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return experiment_config_from_dict(raw)


def save_experiment_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(experiment_config_to_dict(cfg), indent=2))


# ---------------------------------------------------------------------------
# Result rows and CSV

CSV_COLUMNS = ("name", "scenario_hash", "curve_param", "curve_value", "sweep_axis",
               "sweep_value", "bandwidth_ghz", "phi_bs_deg", "phi_ue_deg",
               "irs_rows", "irs_cols", "solver", "realization", "iterations",
               "rate_bps", "p_rx_w", "p_rx_bound_w", "ub_bps", "gap_ratio",
               "rate_se_bps")


@dataclass
class ResultRow:
    """One evaluated (coordinate, solver, realization) outcome."""

    name: str
    scenario_hash: str
    curve_param: str
    curve_value: float | None
    sweep_axis: str
    sweep_value: float
    bandwidth_ghz: float
    phi_bs_deg: float
    phi_ue_deg: float
    irs_rows: int
    irs_cols: int
    solver: str
    realization: object           # int or "mean"
    iterations: int
    rate_bps: float
    p_rx_w: float
    p_rx_bound_w: float
    ub_bps: float
    gap_ratio: float
    rate_se_bps: float | None = None
    wall_clock_s: float = 0.0     # not written to CSV


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in CSV_COLUMNS])


def write_solver_reports(rows, path) -> None:
    """Companion JSON-lines file with the power-side solver outcomes."""
    with open(path, "w") as fh:
        for row in rows:
            if row.realization == "mean":
                continue
            fh.write(json.dumps({
                "name": row.name, "curve_value": row.curve_value,
                "sweep_value": row.sweep_value, "solver": row.solver,
                "realization": row.realization, "iterations": row.iterations,
                "achieved_power_w": row.p_rx_w, "relaxed_bound_w": row.p_rx_bound_w,
                "power_gap_ratio": (row.p_rx_w / row.p_rx_bound_w
                                    if row.p_rx_bound_w > 0 else 1.0),
            }, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Coordinate resolution and evaluation

def _derived_seed(*key) -> int:
    return int(np.random.SeedSequence(tuple(int(k) & 0xFFFFFFFF for k in key))
               .generate_state(1, dtype=np.uint64)[0])


def _resolve(config: ExperimentConfig, curve_value, sweep_value):
    """Scenario config and bandwidth (GHz) for one sweep coordinate."""
    sc = config.scenario
    updates = {}
    bandwidth = config.bandwidth_ghz
    if config.curve is not None:
        if config.curve.param == CURVE_PHI_UE:
            updates["ue_angle_deg"] = float(curve_value)
        else:
            bandwidth = float(curve_value)
    if config.sweep.axis == SWEEP_BANDWIDTH:
        bandwidth = float(sweep_value)
    elif config.sweep.axis == SWEEP_UE_ANGLE:
        updates["ue_angle_deg"] = float(sweep_value)
    else:
        side = int(sweep_value)
        updates["irs_rows"] = side
        updates["irs_cols"] = side
    if updates:
        d = asdict(sc)
        d.update(updates)
        sc = ScenarioConfig(**d)
    if bandwidth is None or not bandwidth > 0:
        raise ConfigError("bandwidth is undefined or not positive for a coordinate")
    return sc, float(bandwidth)


def _make_grid(config: ExperimentConfig, bandwidth_ghz: float) -> FrequencyGrid:
    f_c = config.scenario.center_frequency_ghz * 1e9
    bw = bandwidth_ghz * 1e9
    nominal = config.spectrum.subband_width_ghz * 1e9
    if config.spectrum.mode == MODE_FLAT:
        tiles = max(1, int(round(bw / nominal)))
        width = bw / tiles
    else:
        width = nominal
    return FrequencyGrid(center=f_c, bandwidth=bw, subband_width=width,
                         nodes_per_subband=config.spectrum.nodes_per_subband)


def _build_spectrum(config: ExperimentConfig, scenario: Scenario,
                    grid: FrequencyGrid, coord_key) -> SpectrumSpec:
    beams = []
    for bi, bc in enumerate(config.spectrum.beams):
        S = grid.num_subbands
        n_alloc = S if bc.n_subbands is None else int(bc.n_subbands)
        if config.spectrum.mode == MODE_FLAT and n_alloc != S:
            raise ConfigError("flat mode uses the whole band")
        if bc.allocation == ALLOC_ALL and n_alloc != S:
            raise ConfigError("allocation 'all' must cover every sub-band")
        if n_alloc == S:
            subbands = tuple(range(S))
        else:
            subbands = random_allocation(S, n_alloc, _derived_seed(*coord_key, 2, bi))
        n_used = len(subbands)
        total = dbm_to_watt(bc.power_dbm)
        if bc.power_scope == "per_subband":
            total *= n_used
        if bc.beta_deg == "auto":
            beta = steering_angle(scenario.bs, scenario.irs.plane_origin)
        else:
            beta = math.radians(float(bc.beta_deg))
        beams.append(make_beam(grid, beta, subbands, total, loading=bc.loading,
                               seed=_derived_seed(*coord_key, 3, bi),
                               beamforming=bc.beamforming))
    return SpectrumSpec(grid=grid, beams=tuple(beams), mode=config.spectrum.mode)


def _scenario_hash(scenario: Scenario) -> str:
    blob = json.dumps(scenario_to_dict(scenario), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _solve(tag: str, *, coupling, delays, grid, scenario, response, shadowing,
           bundle, solver_seed: int):
    """Dispatch one solver tag to a (PhaseConfig, iterations) pair."""
    f_c = response.center_frequency
    if tag == SOLVER_NB_CENTRAL:
        return nb_config(delays, f_c).retag("NB Central"), 0
    if tag == SOLVER_NB_MAX_POWER:
        weights = subband_received_powers(scenario, response, bundle, shadowing)
        return nb_max_power(weights, delays, grid.subband_centers), 0
    if tag == SOLVER_NB_OPTIMUM:
        return nb_optimum(coupling, delays, grid.subband_centers), 0
    if tag == SOLVER_MAX_EIG:
        return max_eig_phase(coupling), 0
    if tag == SOLVER_UCQP:
        report = ucqp_ascent(coupling, seed=solver_seed)
        return report.config, report.iterations
    raise ConfigError(f"unknown solver {tag!r}")


def _evaluate_point(config: ExperimentConfig, ci: int, curve_value,
                    si: int, sweep_value, realization: int) -> list:
    started = time.perf_counter()
    scen_cfg, bandwidth_ghz = _resolve(config, curve_value, sweep_value)
    scenario = scen_cfg.build()
    coord_key = (config.seed, ci, si, realization)

    response = IrsResponse(center_frequency=scen_cfg.center_frequency_ghz * 1e9,
                           magnitude_db=config.irs_magnitude_db,
                           phase_slope_deg_per_ghz=config.irs_phase_slope_deg_per_ghz)
    shadowing = None
    if config.shadowing_sigma_db > 0:
        shadowing = ShadowingModel(sigma_db=config.shadowing_sigma_db,
                                   seed=_derived_seed(*coord_key, 1))
    grid = _make_grid(config, bandwidth_ghz)
    spec = _build_spectrum(config, scenario, grid, coord_key)
    bundle = build_psd(spec, scenario.num_bs_antennas, scenario.bs.spacing)

    model = ChannelModel(scenario, response, shadowing)
    coupling = assemble_coupling(model, bundle, mem_cap_gb=config.mem_cap_gb)
    delays = NbDelays.from_scenario(scenario)
    lam_ub = dominant_eigenvalue_bound(coupling)
    p_bound = relaxed_power_bound(coupling, lam_ub)
    noise = dbm_to_watt(config.noise_dbm_per_hz)
    binputs = bound_inputs(model, bundle, scenario.num_ue_antennas)
    ub_report = upper_bound(coupling, binputs, noise, variant=UB_CLOSED_FORM,
                            lam_max_ub=lam_ub)

    configs, iterations = [], []
    for tag in config.solvers:
        cfg, iters = _solve(tag, coupling=coupling, delays=delays, grid=grid,
                            scenario=scenario, response=response, shadowing=shadowing,
                            bundle=bundle, solver_seed=_derived_seed(*coord_key, 4))
        configs.append(cfg)
        iterations.append(iters)
    rates = evaluate_rates(model, bundle, configs, noise)
    elapsed = time.perf_counter() - started

    rows = []
    sh = _scenario_hash(scenario)
    for tag, cfg, iters, rep in zip(config.solvers, configs, iterations, rates):
        p_rx = received_power(coupling, cfg)
        gap = rep.rate / ub_report.ub if ub_report.ub > 0 else 1.0
        rows.append(ResultRow(
            name=config.name, scenario_hash=sh,
            curve_param=(config.curve.param if config.curve else ""),
            curve_value=(float(curve_value) if curve_value is not None else None),
            sweep_axis=config.sweep.axis, sweep_value=float(sweep_value),
            bandwidth_ghz=bandwidth_ghz, phi_bs_deg=scen_cfg.bs_angle_deg,
            phi_ue_deg=scen_cfg.ue_angle_deg, irs_rows=scen_cfg.irs_rows,
            irs_cols=scen_cfg.irs_cols, solver=tag, realization=realization,
            iterations=iters, rate_bps=rep.rate, p_rx_w=p_rx, p_rx_bound_w=p_bound,
            ub_bps=ub_report.ub, gap_ratio=min(max(gap, 0.0), 1.0),
            wall_clock_s=elapsed))
    return rows


def _mean_rows(rows_by_point: list, config: ExperimentConfig) -> list:
    """Aggregate over realizations per (coordinate, solver), with standard error."""
    groups: dict = {}
    order = []
    for rows in rows_by_point:
        for row in rows:
            key = (row.curve_value, row.sweep_value, row.solver)
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(row)
    out = []
    for key in order:
        grp = groups[key]
        first = grp[0]
        rates = np.array([r.rate_bps for r in grp])
        se = float(np.std(rates, ddof=1) / math.sqrt(len(rates))) if len(rates) > 1 else 0.0
        out.append(ResultRow(
            name=first.name, scenario_hash=first.scenario_hash,
            curve_param=first.curve_param, curve_value=first.curve_value,
            sweep_axis=first.sweep_axis, sweep_value=first.sweep_value,
            bandwidth_ghz=first.bandwidth_ghz, phi_bs_deg=first.phi_bs_deg,
            phi_ue_deg=first.phi_ue_deg, irs_rows=first.irs_rows,
            irs_cols=first.irs_cols, solver=first.solver, realization="mean",
            iterations=0, rate_bps=float(np.mean(rates)),
            p_rx_w=float(np.mean([r.p_rx_w for r in grp])),
            p_rx_bound_w=float(np.mean([r.p_rx_bound_w for r in grp])),
            ub_bps=float(np.mean([r.ub_bps for r in grp])),
            gap_ratio=float(np.mean([r.gap_ratio for r in grp])),
            rate_se_bps=se))
    return out


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list:
    """Evaluate the full sweep matrix; returns per-realization rows plus the
    per-coordinate mean rows, in deterministic order.

    BLAS pools are pinned to one thread for the duration of the run so the
    output is byte-identical across `threads` settings.
    """
    curve_values = list(config.curve.values) if config.curve else [None]
    tasks = []
    for ci, cv in enumerate(curve_values):
        for si, sv in enumerate(config.sweep.values):
            for ri in range(config.realizations):
                tasks.append((ci, cv, si, sv, ri))

    results: list = [None] * len(tasks)
    with threadpool_limits(limits=1):
        if threads <= 1:
            for idx, (ci, cv, si, sv, ri) in enumerate(tasks):
                results[idx] = _evaluate_point(config, ci, cv, si, sv, ri)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = {pool.submit(_evaluate_point, config, ci, cv, si, sv, ri): idx
                           for idx, (ci, cv, si, sv, ri) in enumerate(tasks)}
                for fut, idx in futures.items():
                    results[idx] = fut.result()

    rows = [row for point in results for row in point]
    rows.extend(_mean_rows(results, config))
    return rows


def oracle_check(config: ExperimentConfig, phase_levels: int = 8) -> list:
    """Exhaustive quantized verification on a small-surface config.

    For each coordinate (realization 0) the quantized oracle optimum is
    compared with every configured solver; returns one dict per coordinate.
    """
    curve_values = list(config.curve.values) if config.curve else [None]
    out = []
    for ci, cv in enumerate(curve_values):
        for si, sv in enumerate(config.sweep.values):
            scen_cfg, bandwidth_ghz = _resolve(config, cv, sv)
            scenario = scen_cfg.build()
            coord_key = (config.seed, ci, si, 0)
            response = IrsResponse(center_frequency=scen_cfg.center_frequency_ghz * 1e9,
                                   magnitude_db=config.irs_magnitude_db,
                                   phase_slope_deg_per_ghz=config.irs_phase_slope_deg_per_ghz)
            shadowing = None
            if config.shadowing_sigma_db > 0:
                shadowing = ShadowingModel(sigma_db=config.shadowing_sigma_db,
                                           seed=_derived_seed(*coord_key, 1))
            grid = _make_grid(config, bandwidth_ghz)
            spec = _build_spectrum(config, scenario, grid, coord_key)
            bundle = build_psd(spec, scenario.num_bs_antennas, scenario.bs.spacing)
            model = ChannelModel(scenario, response, shadowing)
            coupling = assemble_coupling(model, bundle, mem_cap_gb=config.mem_cap_gb)
            delays = NbDelays.from_scenario(scenario)
            oracle = brute_force_oracle(coupling, phase_levels)
            p_oracle = received_power(coupling, oracle)
            entry = {"curve_value": cv, "sweep_value": sv,
                     "phase_levels": phase_levels,
                     "oracle_power_w": p_oracle, "solvers": {}}
            for tag in config.solvers:
                cfg, _ = _solve(tag, coupling=coupling, delays=delays, grid=grid,
                                scenario=scenario, response=response,
                                shadowing=shadowing, bundle=bundle,
                                solver_seed=_derived_seed(*coord_key, 4))
                p = received_power(coupling, cfg)
                entry["solvers"][tag] = {"power_w": p,
                                         "oracle_ratio": p / p_oracle if p_oracle > 0 else 1.0}
            out.append(entry)
    return out


# ---------------------------------------------------------------------------
# Presets

_FIG_BANDWIDTHS = (3.0, 7.5, 15.0, 30.0, 45.0, 60.0)
_SUBBAND_BANDWIDTHS = (4.0, 6.0, 9.0, 15.0, 30.0, 45.0, 60.0, 90.0)
_ALL_SOLVERS = (SOLVER_NB_CENTRAL, SOLVER_NB_MAX_POWER, SOLVER_NB_OPTIMUM,
                SOLVER_MAX_EIG, SOLVER_UCQP)


def _scenario(side: int, phi_ue: float, wall: bool = False,
              bs_antennas: int = BS_ANTENNAS) -> ScenarioConfig:
    return ScenarioConfig(irs_rows=side, irs_cols=side, ue_angle_deg=phi_ue,
                          wall_reflector=wall, bs_antennas=bs_antennas)


def _flat_spectrum_cfg() -> SpectrumConfig:
    return SpectrumConfig(mode=MODE_FLAT, beams=(
        BeamConfig(power_dbm=TX_POWER_DBM, power_scope="total",
                   allocation=ALLOC_ALL, beamforming=BF_ADAPTED),))


def _subband_spectrum_cfg(n_subbands: int, loading: str = LOADING_EQUAL) -> SpectrumConfig:
    return SpectrumConfig(mode=MODE_SUB_BANDS, beams=(
        BeamConfig(power_dbm=TX_POWER_DBM, power_scope="per_subband",
                   n_subbands=n_subbands, allocation=ALLOC_SPANNING_RANDOM,
                   loading=loading, beamforming=BF_ADAPTED),))


def presets() -> dict:
    p = {}

    p["fig4-desk"] = ExperimentConfig(
        name="fig4-desk", scenario=_scenario(DESK_SIDE, 30.0),
        spectrum=_flat_spectrum_cfg(),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _FIG_BANDWIDTHS),
        curve=CurveConfig(CURVE_PHI_UE, (30.0, 45.0)),
        solvers=(SOLVER_NB_CENTRAL,), realizations=1, seed=41,
        description="Rate vs bandwidth for a single-carrier UWB signal, "
                    "desk-scale surface, two UE angles")
    p["fig4-paper"] = ExperimentConfig(
        name="fig4-paper", scenario=_scenario(PAPER_SIDE, 30.0),
        spectrum=_flat_spectrum_cfg(),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _FIG_BANDWIDTHS),
        curve=CurveConfig(CURVE_PHI_UE, (0.0, 15.0, 30.0, 45.0, 60.0, 75.0)),
        solvers=(SOLVER_NB_CENTRAL,), realizations=1, seed=41,
        description="Full-scale rate vs bandwidth, six UE angles")

    p["squint-desk"] = ExperimentConfig(
        name="squint-desk", scenario=_scenario(32, 30.0),
        spectrum=_flat_spectrum_cfg(),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _FIG_BANDWIDTHS),
        solvers=(SOLVER_NB_CENTRAL,), realizations=1, seed=41,
        description="Beam-squint shape check: interior rate peak at 32x32")

    p["mirror-sanity"] = ExperimentConfig(
        name="mirror-sanity", scenario=_scenario(DESK_SIDE, BS_ANGLE_DEG),
        spectrum=_flat_spectrum_cfg(),
        sweep=SweepConfig(SWEEP_BANDWIDTH, (3.0, 7.5, 15.0, 30.0)),
        solvers=(SOLVER_NB_CENTRAL,), realizations=1, seed=41,
        description="Specular mirror arrangement: NB profile near the bound")

    p["fig5-desk"] = ExperimentConfig(
        name="fig5-desk", scenario=_scenario(DESK_SIDE, 30.0),
        spectrum=_subband_spectrum_cfg(4),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _SUBBAND_BANDWIDTHS),
        solvers=_ALL_SOLVERS, realizations=5, seed=42,
        description="Sub-band spectrum, equal loading, random allocations")
    p["fig5-paper"] = ExperimentConfig(
        name="fig5-paper", scenario=_scenario(PAPER_SIDE, 30.0),
        spectrum=_subband_spectrum_cfg(4),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _SUBBAND_BANDWIDTHS),
        solvers=_ALL_SOLVERS, realizations=100, seed=42,
        description="Full-scale sub-band spectrum with equal loading")

    p["fig5-random-desk"] = ExperimentConfig(
        name="fig5-random-desk", scenario=_scenario(DESK_SIDE, 30.0),
        spectrum=_subband_spectrum_cfg(4, loading=LOADING_RANDOM),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _SUBBAND_BANDWIDTHS),
        solvers=_ALL_SOLVERS, realizations=5, seed=43,
        description="Sub-band spectrum with random power loading")

    p["fig6-desk"] = ExperimentConfig(
        name="fig6-desk", scenario=_scenario(DESK_SIDE, 30.0, wall=True),
        spectrum=_subband_spectrum_cfg(2),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _SUBBAND_BANDWIDTHS),
        solvers=_ALL_SOLVERS, realizations=5, seed=44,
        shadowing_sigma_db=SHADOW_SIGMA_DB,
        description="Wall reflection and shadowing enabled")
    p["fig6-paper"] = ExperimentConfig(
        name="fig6-paper", scenario=_scenario(PAPER_SIDE, 30.0, wall=True),
        spectrum=_subband_spectrum_cfg(2),
        sweep=SweepConfig(SWEEP_BANDWIDTH, _SUBBAND_BANDWIDTHS),
        solvers=_ALL_SOLVERS, realizations=100, seed=44,
        shadowing_sigma_db=SHADOW_SIGMA_DB,
        description="Full-scale wall reflection and shadowing")

    p["fig7-desk"] = ExperimentConfig(
        name="fig7-desk", scenario=_scenario(DESK_SIDE, 30.0, wall=True),
        spectrum=_subband_spectrum_cfg(2),
        sweep=SweepConfig(SWEEP_IRS_SIZE, (4, 8, 12, 16)),
        bandwidth_ghz=60.0,
        solvers=_ALL_SOLVERS, realizations=5, seed=45,
        shadowing_sigma_db=SHADOW_SIGMA_DB,
        description="Rate vs surface size with wall and shadowing")
    p["fig7-paper"] = ExperimentConfig(
        name="fig7-paper", scenario=_scenario(PAPER_SIDE, 30.0, wall=True),
        spectrum=_subband_spectrum_cfg(2),
        sweep=SweepConfig(SWEEP_IRS_SIZE, (8, 16, 32, 64)),
        bandwidth_ghz=60.0,
        solvers=_ALL_SOLVERS, realizations=100, seed=45,
        shadowing_sigma_db=SHADOW_SIGMA_DB,
        description="Full-scale rate vs surface size")

    p["fig8-desk"] = ExperimentConfig(
        name="fig8-desk", scenario=_scenario(DESK_SIDE, 30.0),
        spectrum=_subband_spectrum_cfg(4),
        sweep=SweepConfig(SWEEP_UE_ANGLE,
                          (0.0, 10.0, 20.0, 30.0, 45.0, 60.0, 75.0, 85.0)),
        curve=CurveConfig(CURVE_BANDWIDTH, (18.0, 30.0, 60.0)),
        solvers=_ALL_SOLVERS, realizations=5, seed=46,
        shadowing_sigma_db=SHADOW_SIGMA_DB,
        description="Rate vs UE angle, three bandwidths, shadowing only")

    p["oracle-small"] = ExperimentConfig(
        name="oracle-small",
        scenario=ScenarioConfig(irs_rows=1, irs_cols=6, bs_antennas=2, ue_antennas=2,
                                ue_angle_deg=30.0, wall_reflector=True,
                                bs_gain_model=GAIN_ISOTROPIC),
        spectrum=_subband_spectrum_cfg(2),
        sweep=SweepConfig(SWEEP_BANDWIDTH, (4.0,)),
        solvers=(SOLVER_NB_CENTRAL, SOLVER_MAX_EIG, SOLVER_UCQP),
        realizations=1, seed=47,
        description="Six-element line surface for exhaustive oracle checks")

    return p


def resolve_preset(name: str, scale: str = "desk") -> ExperimentConfig:
    all_presets = presets()
    if name in all_presets:
        return all_presets[name]
    scaled = f"{name}-{scale}"
    if scaled in all_presets:
        return all_presets[scaled]
    raise ConfigError(f"unknown preset {name!r}; see list-presets")
