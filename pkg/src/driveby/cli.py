"""Command-line entry point: ``driveby {simulate,identify,validate,generate-road}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bridge as bfem
from . import vehicle as veh
from .config import ConfigError, ExperimentConfig
from .road import generate_road, rms, write_road_csv

EXIT_OK, EXIT_CONFIG, EXIT_ACCEPTANCE = 0, 1, 2

log = logging.getLogger("driveby")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(
        seed=args.seed, scenario=args.scenario, noise_pct=args.noise, runs=args.runs,
        out=args.out, **{"pso.samples": args.samples},
    )


def modal_report(cfg: ExperimentConfig) -> dict:
    return {
        "vehicle_hz": veh.natural_frequencies(cfg.vehicle_params()),
        "bridge_intact_hz": bfem.natural_frequencies(bfem.assemble(cfg.bridge_params("intact"))),
        "bridge_damaged_hz": bfem.natural_frequencies(bfem.assemble(cfg.bridge_params("damaged"))),
    }


def cmd_simulate(args) -> int:
    from .experiment import run_simulation, write_simulation

    cfg = _load_config(args)
    rec = run_simulation(cfg)
    out = Path(cfg.out)
    files = write_simulation(rec, out)
    (out / "modal.json").write_text(json.dumps(modal_report(cfg), indent=2) + "\n")
    write_road_csv(out / "road.csv", cfg.road_profile())
    cfg.dump(out / "config.json")
    s = rec.summary()
    print(f"converged={s['converged']} passes={s['iterations']} eps={s['eps']:.3e} "
          f"peak midspan={s['peak_midspan_deflection_m'] * 1e3:.3f} mm -> {files['channels']}")
    return EXIT_OK


def cmd_identify(args) -> int:
    from .experiment import run_identification, run_simulation, write_identification

    cfg = _load_config(args)
    record = run_simulation(cfg)
    report = run_identification(cfg, jobs=args.jobs, record=record)
    out = Path(cfg.out)
    write_identification(report, cfg, out, record=record)
    cfg.dump(out / "config.json")
    print(f"{len(report.succeeded)}/{len(report.runs)} runs succeeded -> {out / 'posterior.csv'}")
    return EXIT_OK if report.succeeded else EXIT_ACCEPTANCE


def cmd_validate(args) -> int:
    from .validation import Context, run_all

    cfg = _load_config(args)
    only = set(args.only) if args.only else None
    results = run_all(Context(cfg, jobs=args.jobs or 1), only=only)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        rows = [{"number": r.number, "name": r.name, "passed": r.passed, "measured": r.measured,
                 "expected": r.expected, "seconds": r.seconds} for r in results]
        (out / "validation.json").write_text(json.dumps(rows, indent=2) + "\n")
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def cmd_generate_road(args) -> int:
    cfg = _load_config(args)
    r = cfg.road
    road = generate_road(r.psd_class, seed=r.seed if args.seed is None else args.seed,
                         length=r.length, dx=r.dx, x0=r.x0)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_road_csv(out / "road.csv", road)
    print(f"class {r.psd_class}, {road.elevations.size} samples, RMS {rms(road.elevations) * 1e3:.3f} mm "
          f"-> {out / 'road.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--scenario", choices=("intact", "damaged"))
    common.add_argument("--noise", type=float, metavar="FLOAT", help="noise as a fraction of signal RMS")
    common.add_argument("--runs", type=int, help="independent identification runs")
    common.add_argument("--samples", type=int, help="particles per swarm")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="driveby", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="forward vehicle-bridge simulation").set_defaults(func=cmd_simulate)
    sub.add_parser("identify", parents=[common], help="repeated swarm identification").set_defaults(func=cmd_identify)
    v = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    v.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these check numbers")
    v.set_defaults(func=cmd_validate)
    sub.add_parser("generate-road", parents=[common], help="write a random road profile").set_defaults(func=cmd_generate_road)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
