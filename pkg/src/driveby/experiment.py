"""Batch experiments: forward simulation, repeated identification, exports."""
from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pso
from .config import ExperimentConfig
from .estimator import Problem
from .road import write_profile_csv, write_road_csv
from .simulate import SimRecord, add_noise, simulate

log = logging.getLogger(__name__)


def run_simulation(cfg: ExperimentConfig, scenario: str | None = None) -> SimRecord:
    vehicle = cfg.vehicle_params()
    bridge = cfg.bridge_params(scenario)
    return simulate(vehicle, bridge, cfg.road_profile(), cfg.sim_config())


def write_simulation(rec: SimRecord, out) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rec.to_csv(out / "channels.csv")
    rec.write_summary(out / "summary.json")
    return {"channels": str(out / "channels.csv"), "summary": str(out / "summary.json")}


def run_seeds(master_seed: int, runs: int):
    """Independent ``(noise_seed, pso_seed)`` pairs per run."""
    children = np.random.SeedSequence(master_seed).spawn(runs)
    out = []
    for child in children:
        a, b = child.generate_state(2, dtype=np.uint32)
        out.append((int(a), int(b)))
    return out


@dataclass
class RunResult:
    run: int
    ok: bool
    best: np.ndarray | None = None
    best_J: float = np.inf
    history: list = field(default_factory=list)
    prior: np.ndarray | None = None
    error: str = ""


@dataclass
class IdentifyReport:
    truth: np.ndarray
    reference: np.ndarray
    M: float
    D: float
    runs: list
    seeds: list

    @property
    def succeeded(self):
        return [r for r in self.runs if r.ok]

    def posterior(self):
        """Normalized global bests, one row per successful run."""
        return np.array([pso.normalized(r.best, self.truth, self.M, self.D) for r in self.succeeded])

    def prior(self):
        """Normalized initial particles, pooled over successful runs."""
        rows = [pso.normalized(x, self.truth, self.M, self.D) for r in self.succeeded for x in r.prior]
        return np.array(rows)

    def best_run(self):
        ok = self.succeeded
        return min(ok, key=lambda r: r.best_J) if ok else None


def _identify_one(args):
    run, problem, M, D, reference, pso_cfg = args
    try:
        res = pso.identify(problem, M, D, reference, pso_cfg)
    except Exception as exc:  # noqa: BLE001 - a failed run must not kill the batch
        log.exception("run %d failed", run)
        return RunResult(run, False, error=f"{type(exc).__name__}: {exc}")
    return RunResult(run, True, res.best, res.best_J, res.history, res.prior)


def run_identification(cfg: ExperimentConfig, jobs: int | None = None,
                       record: SimRecord | None = None) -> IdentifyReport:
    """Repeat the identification ``cfg.runs`` times on one simulated pass.

    Every run gets its own noise realization and swarm seed. The prior box is
    centred on the intact structure even for the damaged scenario.
    """
    vehicle = cfg.vehicle_params()
    bridge = cfg.bridge_params()
    if record is None:
        record = run_simulation(cfg)
    fcfg = cfg.filter_config()
    truth = pso.candidate_vector(vehicle, bridge)
    reference = pso.candidate_vector(vehicle, cfg.intact_bridge())
    M, D = vehicle.total_mass, vehicle.wheelbase
    seeds = run_seeds(cfg.seed, cfg.runs)

    tasks = []
    for i, (noise_seed, pso_seed) in enumerate(seeds):
        acc = add_noise(record.acc, cfg.noise_pct, noise_seed)
        problem = Problem(record.t, record.x, acc, vehicle.speed, fcfg, bridge.span, bridge.elem_len)
        tasks.append((i, problem, M, D, reference, cfg.pso_config(pso_seed)))

    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(tasks) == 1:
        results = [_identify_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_identify_one, tasks))
    for r in results:
        if r.ok:
            log.info("run %d: J = %.4e", r.run, r.best_J)
        else:
            log.warning("run %d failed: %s", r.run, r.error)
    return IdentifyReport(truth, reference, M, D, results, seeds)


def histogram(values, bins=20):
    """Histogram with densities of unit total area."""
    values = np.asarray(values, dtype=float)
    dens, edges = np.histogram(values, bins=bins, density=True)
    return {"edges": edges.tolist(), "density": dens.tolist(), "count": int(values.size)}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])


GNUPLOT = """\
# Render with: gnuplot plots.gp
set terminal pngcairo size 900,600
set datafile separator ","
set key autotitle columnhead

set output "road_profiles.png"
set xlabel "x [m]"; set ylabel "elevation [m]"
plot "road_true.csv" using 1:2 with lines lc "black" title "true", \\
     "road_front.csv" using 1:2 with lines lc "red" title "front axle estimate", \\
     "road_rear.csv" using 1:2 with lines lc "blue" title "rear axle estimate"

set output "histograms.png"
set xlabel "estimated / correct"; set ylabel "density"
set style fill transparent solid 0.4
plot "histograms_m_s1.dat" index 0 using 1:2 with boxes lc "blue" title "prior m_s1", \\
     "" index 1 using 1:2 with boxes lc "red" title "posterior m_s1"

set output "convergence.png"
set logscale y
set xlabel "step"; set ylabel "global best J"
plot "history.csv" using 1:2 with lines title "best run"
"""


def write_identification(report: IdentifyReport, cfg: ExperimentConfig, out, record=None) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    names = pso.REPORT_NAMES
    post = report.posterior()
    prior = report.prior()
    ok = report.succeeded

    _write_rows(out / "posterior.csv", ("run", "J") + names,
                [(r.run, r.best_J, *row) for r, row in zip(ok, post)])
    _write_rows(out / "prior.csv", names, prior)

    hist = {}
    for j, name in enumerate(names):
        hist[name] = {
            "prior": histogram(prior[:, j]) if prior.size else None,
            "posterior": histogram(post[:, j]) if post.size else None,
        }
    (out / "histograms.json").write_text(json.dumps(hist, indent=1) + "\n")

    # gnuplot-friendly blocks for the sprung masses
    for name in ("m_s1", "m_s2"):
        with open(out / f"histograms_{name}.dat", "w") as fh:
            for part in ("prior", "posterior"):
                h = hist[name][part]
                fh.write(f"# {part}\n")
                if h:
                    centers = 0.5 * (np.array(h["edges"][1:]) + np.array(h["edges"][:-1]))
                    for c, d in zip(centers, h["density"]):
                        fh.write(f"{c!r} {d!r}\n")
                fh.write("\n\n")

    best = report.best_run()
    files = {}
    if best is not None:
        vehicle, bridge = pso.expand(best.best, report.M, report.D, cfg.vehicle_params().speed,
                                     cfg.intact_bridge().span, cfg.intact_bridge().elem_len)
        if record is None:
            record = run_simulation(cfg)
        noise_seed = report.seeds[best.run][0]
        acc = add_noise(record.acc, cfg.noise_pct, noise_seed)
        problem = Problem(record.t, record.x, acc, vehicle.speed, cfg.filter_config(),
                          bridge.span, bridge.elem_len)
        _, detail = problem.evaluate(vehicle, bridge, full=True)
        est = detail["road"]
        write_profile_csv(out / "road_front.csv", est.x, est.front)
        write_profile_csv(out / "road_rear.csv", est.x, est.rear)
        _write_rows(out / "history.csv", ("step", "J"), list(enumerate(best.history)))
        files["road_front"] = str(out / "road_front.csv")
    write_road_csv(out / "road_true.csv", cfg.road_profile())
    (out / "plots.gp").write_text(GNUPLOT)

    summary = {
        "scenario": cfg.scenario,
        "noise_pct": cfg.noise_pct,
        "runs": len(report.runs),
        "succeeded": len(ok),
        "failures": [{"run": r.run, "error": r.error} for r in report.runs if not r.ok],
        "best_run": None if best is None else best.run,
        "best_J": None if best is None else best.best_J,
        "posterior_mean": dict(zip(names, post.mean(axis=0).tolist())) if post.size else {},
        "posterior_mad": dict(zip(names, np.mean(np.abs(post - 1), axis=0).tolist())) if post.size else {},
        "prior_mad": dict(zip(names, np.mean(np.abs(prior - 1), axis=0).tolist())) if prior.size else {},
    }
    (out / "identify_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    files.update({k: str(out / f) for k, f in (
        ("posterior", "posterior.csv"), ("prior", "prior.csv"),
        ("histograms", "histograms.json"), ("plots", "plots.gp"),
        ("summary", "identify_summary.json"),
    )})
    return files
