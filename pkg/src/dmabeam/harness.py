"""Experiment orchestration: seeded scenario batches, budget-matched
algorithm comparison over a noise sweep, aggregation, and file outputs.

Determinism contract: a given (config, master seed) produces byte-identical
output files. Every trial derives child generators from the master seed, so
trial i of algorithm j at sweep point p is reproducible in isolation. All
numeric output is fixed at 6 significant digits; summary statistics are
computed from the rounded per-record values with an exactly rounded sum, so
they can be recomputed bit-exactly from the records file.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .baselines import (GaParams, QgaParams, classic_ga, classic_qga, gfba,
                        mmse_quantized, rma)
from .channel import (Scenario, ScenarioConfig, allzero_signal_power,
                      build_channel, dft_codebook, from_db, generate_scenario,
                      los_path, received_sinr, select_bs_beam, to_db)
from .dma import ConfigError, codebook
from .optimizer import DbqgParams, RunRecord, run_dbqg
from .oracle import OracleConfig, SinrOracle

_SCENARIO_KEY = 1
_ALGO_KEY = 2
_ORACLE_KEY = 3


def child_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator derived from the master seed and an integer key."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, *key]))


def round6(x: float) -> float:
    """Round to the 6 significant digits used in every output file."""
    if not math.isfinite(x):
        return float(x)
    return float(f"{x:.6g}")


def summary_mean(values: list[float], averaging: str = "db") -> float:
    """Mean of per-trial dB values, in the configured averaging domain.

    "db" averages the dB values directly; "linear" averages the linear
    powers and converts the mean back to dB.
    """
    if averaging == "db":
        return round6(math.fsum(values) / len(values))
    linear = [from_db(v) for v in values]
    return round6(to_db(math.fsum(linear) / len(linear)))


def summary_stderr(values: list[float]) -> float:
    """Standard error of the mean of the dB values."""
    n = len(values)
    if n < 2:
        return 0.0
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return round6(math.sqrt(var / n))


@dataclass(frozen=True)
class RmaSettings:
    budget: int = 5000
    record_every: int = 100

    def __post_init__(self):
        if self.budget < 1 or self.record_every < 1:
            raise ConfigError("random-search budget settings must be positive")


@dataclass(frozen=True)
class GfbaSettings:
    passes: int = 1
    mode: str = "absolute"

    def __post_init__(self):
        if self.passes < 1:
            raise ConfigError("sweep pass count must be positive")
        if self.mode not in ("absolute", "offset"):
            raise ConfigError(f"unknown sweep mode {self.mode!r}")


@dataclass(frozen=True)
class MmseSettings:
    """Full-CSI quantized MMSE baseline has no tunables."""


_PARAM_TYPES = {
    "dbqg": DbqgParams,
    "rma": RmaSettings,
    "mmse": MmseSettings,
    "gfba": GfbaSettings,
    "ga": GaParams,
    "qga": QgaParams,
}


def available_algorithms() -> list[str]:
    return list(_PARAM_TYPES)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment batch."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    algorithms: dict = field(default_factory=dict)
    trials: int = 500
    seed: int = 2024
    phase_bits: int = 2
    noise_mode: str = "allzero_snr_db"
    noise_points: tuple[float, ...] = (15.0, 20.0, 25.0, 30.0)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    averaging: str = "db"
    workers: int = 1
    output_dir: str = "out"
    summary_name: str = "summary.csv"
    curves_name: str = "curves.csv"
    records_name: str = "records.jsonl"
    plot_name: str | None = "plot_results.py"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trial count must be >= 1")
        if not self.algorithms:
            raise ConfigError("algorithm list must not be empty")
        for name in self.algorithms:
            if name not in _PARAM_TYPES:
                raise ConfigError(f"unknown algorithm {name!r}; available: "
                                  f"{', '.join(_PARAM_TYPES)}")
        if self.noise_mode not in ("allzero_snr_db", "sigma2"):
            raise ConfigError(f"unknown noise sweep mode {self.noise_mode!r}")
        if not self.noise_points:
            raise ConfigError("noise sweep needs at least one point")
        if self.averaging not in ("db", "linear"):
            raise ConfigError(f"unknown averaging domain {self.averaging!r}")
        if self.workers < 1:
            raise ConfigError("worker count must be >= 1")
        if not 1 <= self.phase_bits <= 8:
            raise ConfigError("phase quantization bits must be in [1, 8]")

    def to_dict(self) -> dict:
        data = {
            "seed": self.seed,
            "trials": self.trials,
            "workers": self.workers,
            "phase_bits": self.phase_bits,
            "averaging": self.averaging,
            "scenario": asdict(self.scenario),
            "noise_sweep": {"mode": self.noise_mode,
                            "points": list(self.noise_points)},
            "oracle": asdict(self.oracle),
            "algorithms": {name: asdict(params)
                           for name, params in self.algorithms.items()},
            "outputs": {
                "directory": self.output_dir,
                "summary": self.summary_name,
                "curves": self.curves_name,
                "records": self.records_name,
                "plot_script": self.plot_name,
            },
        }
        return data


def default_config() -> ExperimentConfig:
    """The shipped defaults: 4x4 2-bit array, 1 target + 4 interferers,
    500 trials, budget-matched random search, and the two CSI-free sweeps."""
    return ExperimentConfig(algorithms={
        "dbqg": DbqgParams(),
        "rma": RmaSettings(),
        "mmse": MmseSettings(),
        "gfba": GfbaSettings(),
    })


def _parse_section(cls, data: dict, context: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{context} section must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {context} keys: {', '.join(sorted(unknown))}")
    kwargs = dict(data)
    for f in fields(cls):
        if f.name in kwargs and isinstance(kwargs[f.name], list):
            kwargs[f.name] = tuple(kwargs[f.name])
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"invalid {context} section: {exc}") from exc


def parse_config(data: dict) -> ExperimentConfig:
    """Build a validated config from a plain dict (the JSON file contents).

    Unknown keys and malformed values raise :class:`ConfigError` before any
    trial runs.
    """
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    known = {"seed", "trials", "workers", "phase_bits", "averaging",
             "scenario", "noise_sweep", "oracle", "algorithms", "outputs"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    scenario = _parse_section(ScenarioConfig, data.get("scenario", {}),
                              "scenario")
    oracle = _parse_section(OracleConfig, data.get("oracle", {}), "oracle")

    sweep = data.get("noise_sweep", {})
    if not isinstance(sweep, dict) or set(sweep) - {"mode", "points"}:
        raise ConfigError("noise_sweep must be an object with mode and points")
    noise_mode = sweep.get("mode", "allzero_snr_db")
    noise_points = tuple(float(p) for p in sweep.get(
        "points", ExperimentConfig.noise_points))

    raw_algos = data.get("algorithms")
    if raw_algos is None:
        raise ConfigError("config must list at least one algorithm")
    algorithms = {}
    for name, raw in raw_algos.items():
        if name not in _PARAM_TYPES:
            raise ConfigError(f"unknown algorithm {name!r}; available: "
                              f"{', '.join(_PARAM_TYPES)}")
        algorithms[name] = _parse_section(_PARAM_TYPES[name], raw or {},
                                          f"algorithm {name!r}")

    outputs = data.get("outputs", {})
    if set(outputs) - {"directory", "summary", "curves", "records",
                       "plot_script"}:
        raise ConfigError("unknown keys in outputs section")

    return ExperimentConfig(
        scenario=scenario,
        algorithms=algorithms,
        trials=int(data.get("trials", 500)),
        seed=int(data.get("seed", 2024)),
        phase_bits=int(data.get("phase_bits", 2)),
        noise_mode=noise_mode,
        noise_points=noise_points,
        oracle=oracle,
        averaging=data.get("averaging", "db"),
        workers=int(data.get("workers", 1)),
        output_dir=outputs.get("directory", "out"),
        summary_name=outputs.get("summary", "summary.csv"),
        curves_name=outputs.get("curves", "curves.csv"),
        records_name=outputs.get("records", "records.jsonl"),
        plot_name=outputs.get("plot_script", "plot_results.py"),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return parse_config(data)


def reference_allzero_power(scenario_config: ScenarioConfig,
                            n_azimuths: int = 64) -> float:
    """Expected all-zero-configuration signal power of the target BS.

    Evaluated at the target annulus midpoint distance, averaged over an
    evenly spaced azimuth grid; anchors the mapping between sweep labels and
    noise powers. Deterministic.
    """
    lo, hi = scenario_config.target_range_m
    distance = (lo + hi) / 2
    dma_geom = scenario_config.dma_geometry()
    bs_geom = scenario_config.bs_geometry()
    beams = dft_codebook(bs_geom.n_elements)
    total = 0.0
    for azimuth in np.linspace(0.0, 2 * np.pi, n_azimuths, endpoint=False):
        channel = build_channel(
            [los_path(scenario_config, distance, float(azimuth), 0.0)],
            dma_geom, bs_geom)
        beam = select_bs_beam(beams, channel)
        scenario = Scenario((channel,), (beam,), (scenario_config.power,),
                            1.0, 0, dma_geom)
        total += allzero_signal_power(scenario)
    return total / n_azimuths


def sigma2_for_allzero_snr(scenario: Scenario, target_db: float) -> float:
    """Noise power that puts the scenario's all-zero SNR at ``target_db``."""
    return allzero_signal_power(scenario) / from_db(target_db)


def noise_sweep_points(config: ExperimentConfig) -> list[tuple[float, float]]:
    """Resolve the sweep into (label, noise power) pairs.

    In "sigma2" mode the configured points are noise powers and the label is
    the expected all-zero SNR of the reference geometry; in "allzero_snr_db"
    mode the points are target labels and the noise powers are derived from
    the same reference. Per-trial all-zero SNR still varies with random BS
    placement; labels are matched in expectation at the annulus midpoint.
    """
    reference = reference_allzero_power(config.scenario)
    points = []
    for p in config.noise_points:
        if config.noise_mode == "sigma2":
            if p <= 0:
                raise ConfigError("noise powers must be positive")
            points.append((round6(to_db(reference / p)), float(p)))
        else:
            points.append((float(p), reference / from_db(p)))
    return points


@dataclass(frozen=True)
class TrialRun:
    """One algorithm's record on one (noise point, trial) cell."""

    algorithm: str
    noise_point: float
    trial: int
    record: RunRecord
    params: dict


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    noise_point: float
    mean_db: float
    stderr_db: float
    mean_evaluations: float
    trials: int


@dataclass(frozen=True)
class SummaryTable:
    rows: tuple[SummaryRow, ...]
    curves: dict


@dataclass(frozen=True)
class ExperimentResult:
    summary: SummaryTable
    runs: tuple[TrialRun, ...]
    config: ExperimentConfig


def _run_algorithm(name: str, params, scenario: Scenario, cb, config:
                   ExperimentConfig, trial: int, point_idx: int,
                   algo_idx: int) -> tuple[RunRecord, dict]:
    geom = scenario.dma_geometry
    algo_rng = child_rng(config.seed, _ALGO_KEY, trial, point_idx, algo_idx)
    oracle_rng = child_rng(config.seed, _ORACLE_KEY, trial, point_idx, algo_idx)
    oracle = SinrOracle(scenario, config.oracle, rng=oracle_rng)
    if name == "dbqg":
        run_params = replace(params, seed=int(algo_rng.integers(0, 2 ** 63)))
        return run_dbqg(oracle, geom, cb, run_params), asdict(run_params)
    if name == "rma":
        return rma(oracle, geom, cb, params.budget, algo_rng,
                   params.record_every), asdict(params)
    if name == "gfba":
        return gfba(oracle, geom, cb, params.passes, params.mode), asdict(params)
    if name == "ga":
        return classic_ga(oracle, geom, cb, params, algo_rng), asdict(params)
    if name == "qga":
        return classic_qga(oracle, geom, cb, params, algo_rng), asdict(params)
    if name == "mmse":
        best = mmse_quantized(scenario, cb)
        value = received_sinr(scenario, best)
        record = RunRecord(best, value, ((0, value, 0),), value)
        return record, asdict(params)
    raise ConfigError(f"unknown algorithm {name!r}")


def _run_trial(config: ExperimentConfig, points: list[tuple[float, float]],
               trial: int) -> list[TrialRun]:
    cb = codebook(config.phase_bits)
    scenario_rng = child_rng(config.seed, _SCENARIO_KEY, trial)
    base = generate_scenario(config.scenario, scenario_rng)
    runs = []
    for point_idx, (label, sigma2) in enumerate(points):
        scenario = base.with_noise_power(sigma2)
        for algo_idx, (name, params) in enumerate(config.algorithms.items()):
            record, used_params = _run_algorithm(
                name, params, scenario, cb, config, trial, point_idx, algo_idx)
            runs.append(TrialRun(name, label, trial, record, used_params))
    return runs


def summarize(runs: list[TrialRun], averaging: str = "db") -> SummaryTable:
    """Aggregate per-(algorithm, noise point) statistics and mean curves.

    Operates on the 6-significant-digit values that land in the records
    file, with exactly rounded sums, so recomputing from that file
    reproduces this table bit-for-bit.
    """
    finals: dict[tuple[str, float], list[float]] = {}
    evals: dict[tuple[str, float], list[float]] = {}
    curve_values: dict[str, dict[int, list[float]]] = {}
    for run in runs:
        key = (run.algorithm, run.noise_point)
        finals.setdefault(key, []).append(round6(run.record.best_indicator))
        evals.setdefault(key, []).append(float(run.record.evaluations))
        per_gen = curve_values.setdefault(run.algorithm, {})
        for gen, value, _ in run.record.per_generation:
            per_gen.setdefault(gen, []).append(round6(value))
    rows = []
    for (name, label), values in finals.items():
        rows.append(SummaryRow(
            algorithm=name,
            noise_point=label,
            mean_db=summary_mean(values, averaging),
            stderr_db=summary_stderr(values),
            mean_evaluations=round6(math.fsum(evals[(name, label)])
                                    / len(evals[(name, label)])),
            trials=len(values),
        ))
    curves = {}
    for name, per_gen in curve_values.items():
        curves[name] = tuple(
            (gen, round6(math.fsum(vals) / len(vals)))
            for gen, vals in sorted(per_gen.items()))
    return SummaryTable(rows=tuple(rows), curves=curves)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every configured algorithm on every (noise point, trial) cell.

    Each trial draws one random scenario shared by all algorithms and all
    sweep points (only the noise power changes across points). Trials are
    independent work units; with ``workers > 1`` they run in separate
    processes and are reduced in trial order, so the output is identical to
    a sequential run.
    """
    points = noise_sweep_points(config)
    runs: list[TrialRun] = []
    if config.workers == 1:
        for trial in range(config.trials):
            runs.extend(_run_trial(config, points, trial))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for trial_runs in pool.map(_run_trial,
                                       [config] * config.trials,
                                       [points] * config.trials,
                                       range(config.trials)):
                runs.extend(trial_runs)
    return ExperimentResult(summary=summarize(runs, config.averaging),
                            runs=tuple(runs), config=config)


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Render the summary and curve CSVs produced alongside this script.\"\"\"
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def read(name):
    with open(HERE / name, newline="") as fh:
        return list(csv.DictReader(fh))


sweep = defaultdict(list)
for row in read("{summary}"):
    sweep[row["algorithm"]].append((float(row["noise_point"]),
                                    float(row["mean_sinr_db"])))
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
for name, pts in sweep.items():
    pts.sort()
    ax1.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
ax1.set_xlabel("all-zero SNR (dB)")
ax1.set_ylabel("mean SINR (dB)")
ax1.legend()
ax1.grid(alpha=0.3)

curves = defaultdict(list)
for row in read("{curves}"):
    curves[row["algorithm"]].append((int(row["generation"]),
                                     float(row["mean_best_db"])))
for name, pts in curves.items():
    pts.sort()
    ax2.plot([p[0] for p in pts], [p[1] for p in pts], label=name)
ax2.set_xlabel("generation")
ax2.set_ylabel("mean best-so-far SINR (dB)")
ax2.legend()
ax2.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(HERE / "results.png", dpi=150)
print("wrote", HERE / "results.png")
"""


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def emit_outputs(result: ExperimentResult, out_dir: str | Path | None = None) -> dict:
    """Write the summary CSV, curves CSV, run-records file and plot script.

    Returns the mapping of output kind to written path. CSVs are UTF-8 with
    LF line endings and a header row; the records file is line-delimited
    JSON whose first line echoes the full experiment configuration.
    """
    config = result.config
    directory = Path(out_dir if out_dir is not None else config.output_dir)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {directory}: {exc}") from exc
    paths = {}

    summary_path = directory / config.summary_name
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algorithm", "noise_point", "mean_sinr_db",
                         "stderr_db", "mean_evaluations"])
        for row in result.summary.rows:
            writer.writerow([row.algorithm, _format(row.noise_point),
                             _format(row.mean_db), _format(row.stderr_db),
                             _format(row.mean_evaluations)])
    paths["summary"] = summary_path

    curves_path = directory / config.curves_name
    with open(curves_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algorithm", "generation", "mean_best_db"])
        for name, curve in result.summary.curves.items():
            for gen, value in curve:
                writer.writerow([name, gen, _format(value)])
    paths["curves"] = curves_path

    records_path = directory / config.records_name
    with open(records_path, "w", newline="\n", encoding="utf-8") as fh:
        header = {"record_type": "config", "config": config.to_dict()}
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for run in result.runs:
            rec = run.record
            line = {
                "record_type": "run",
                "algorithm": run.algorithm,
                "noise_point": run.noise_point,
                "trial": run.trial,
                "init_indicator": None if rec.init_indicator is None
                                  else round6(rec.init_indicator),
                "best_indicator": round6(rec.best_indicator),
                "evaluations": rec.evaluations,
                "complete": rec.complete,
                "best_config": [int(i) for i in rec.best_config.indices],
                "curve": [[gen, round6(value), evals]
                          for gen, value, evals in rec.per_generation],
                "params": run.params,
            }
            fh.write(json.dumps(line, separators=(",", ":")) + "\n")
    paths["records"] = records_path

    if config.plot_name:
        plot_path = directory / config.plot_name
        with open(plot_path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(_PLOT_SCRIPT.format(summary=config.summary_name,
                                         curves=config.curves_name))
        paths["plot_script"] = plot_path
    return paths
