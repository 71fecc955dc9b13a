"""Command-line entry points.

Subcommands:
  run     full experiment from a JSON config file (or built-in defaults)
  single  one algorithm on one seeded trial, curve printed to stdout
  sweep   experiment with the noise sweep given on the command line
  verify  small-instance battery against the exhaustive-search optimum
"""

import argparse
import sys
from dataclasses import replace

from .baselines import exhaustive
from .channel import ScenarioConfig, generate_scenario
from .dma import ConfigError, codebook
from .harness import (available_algorithms, child_rng, default_config,
                      emit_outputs, load_config, noise_sweep_points,
                      run_experiment, _PARAM_TYPES, _run_trial,
                      _SCENARIO_KEY, _ALGO_KEY)
from .optimizer import DbqgParams, run_dbqg
from .oracle import SinrOracle


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmabeam",
        description="Blind interference-suppression beamforming simulator "
                    "for metasurface antenna relays.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a full experiment")
    run_p.add_argument("config", nargs="?",
                       help="JSON experiment config (omit with --defaults)")
    run_p.add_argument("--defaults", action="store_true",
                       help="use the built-in default experiment")
    run_p.add_argument("--trials", type=int, help="override trial count")
    run_p.add_argument("--seed", type=int, help="override master seed")
    run_p.add_argument("--workers", type=int, help="override worker count")
    run_p.add_argument("--out-dir", help="override output directory")

    single_p = sub.add_parser("single", help="one trial of one algorithm")
    single_p.add_argument("--algo", required=True,
                          choices=available_algorithms())
    single_p.add_argument("--seed", type=int, required=True,
                          help="master seed (mandatory for reproducibility)")
    single_p.add_argument("--config", help="JSON experiment config")
    single_p.add_argument("--noise-point", type=float,
                          help="single sweep point overriding the config")

    sweep_p = sub.add_parser("sweep", help="noise sweep shortcut")
    sweep_p.add_argument("--points", required=True,
                         help="comma-separated sweep points")
    sweep_p.add_argument("--mode", choices=["allzero_snr_db", "sigma2"],
                         default="allzero_snr_db")
    sweep_p.add_argument("--config", help="base JSON experiment config")
    sweep_p.add_argument("--trials", type=int)
    sweep_p.add_argument("--seed", type=int)
    sweep_p.add_argument("--workers", type=int)
    sweep_p.add_argument("--out-dir")

    verify_p = sub.add_parser(
        "verify", help="check the optimizer against exhaustive search on "
                       "small instances")
    verify_p.add_argument("--trials", type=int, default=200)
    verify_p.add_argument("--seed", type=int, default=7)
    verify_p.add_argument("--threshold", type=float, default=0.95,
                          help="required global-optimum hit rate")
    return parser


def _load_base_config(path: str | None):
    if path is None:
        return default_config()
    return load_config(path)


def _apply_overrides(config, args):
    updates = {}
    for attr, key in (("trials", "trials"), ("seed", "seed"),
                      ("workers", "workers"), ("out_dir", "output_dir")):
        value = getattr(args, attr, None)
        if value is not None:
            updates[key] = value
    return replace(config, **updates) if updates else config


def _cmd_run(args) -> int:
    if args.config is None and not args.defaults:
        print("error: give a config file or pass --defaults", file=sys.stderr)
        return 2
    config = _apply_overrides(_load_base_config(args.config), args)
    result = run_experiment(config)
    paths = emit_outputs(result)
    for row in result.summary.rows:
        print(f"{row.algorithm:>6s} @ {row.noise_point:>8.6g} dB: "
              f"mean {row.mean_db:.6g} dB (stderr {row.stderr_db:.6g}, "
              f"mean evals {row.mean_evaluations:.6g}, n={row.trials})")
    for kind, path in paths.items():
        print(f"wrote {kind}: {path}")
    return 0


def _cmd_single(args) -> int:
    config = _apply_overrides(_load_base_config(args.config), args)
    params = config.algorithms.get(args.algo) or _PARAM_TYPES[args.algo]()
    config = replace(config, algorithms={args.algo: params})
    if args.noise_point is not None:
        config = replace(config, noise_points=(args.noise_point,))
    points = noise_sweep_points(config)[:1]
    runs = _run_trial(config, points, trial=0)
    record = runs[0].record
    print(f"algorithm,{args.algo}")
    print(f"noise_point_db,{points[0][0]:.6g}")
    print("generation,best_sinr_db,evaluations")
    for gen, value, evals in record.per_generation:
        print(f"{gen},{value:.6g},{evals}")
    print(f"final,{record.best_indicator:.6g},{record.evaluations}")
    return 0


def _cmd_sweep(args) -> int:
    try:
        points = tuple(float(p) for p in args.points.split(","))
    except ValueError:
        print(f"error: malformed sweep points {args.points!r}", file=sys.stderr)
        return 2
    config = _apply_overrides(_load_base_config(args.config), args)
    config = replace(config, noise_mode=args.mode, noise_points=points)
    result = run_experiment(config)
    paths = emit_outputs(result)
    for row in result.summary.rows:
        print(f"{row.algorithm:>6s} @ {row.noise_point:>8.6g} dB: "
              f"mean {row.mean_db:.6g} dB (stderr {row.stderr_db:.6g})")
    for kind, path in paths.items():
        print(f"wrote {kind}: {path}")
    return 0


def _cmd_verify(args) -> int:
    scenario_config = ScenarioConfig(dma_n_y=2, dma_n_z=2, n_interferers=1)
    cb = codebook(2)
    geom = scenario_config.dma_geometry()
    hits = 0
    for trial in range(args.trials):
        scenario = generate_scenario(scenario_config,
                                     child_rng(args.seed, _SCENARIO_KEY, trial))
        _, optimum = exhaustive(scenario, geom, cb)
        seed = int(child_rng(args.seed, _ALGO_KEY, trial).integers(0, 2 ** 63))
        record = run_dbqg(SinrOracle(scenario), geom, cb,
                          DbqgParams(seed=seed))
        if record.best_indicator >= optimum - 1e-6:
            hits += 1
    rate = hits / args.trials
    status = "PASS" if rate >= args.threshold else "FAIL"
    print(f"dbqg global-optimum hit rate: {rate:.3f} ({hits}/{args.trials}) "
          f"on 2x2 2-bit scenarios - {status}")
    return 0 if status == "PASS" else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "single":
            return _cmd_single(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
