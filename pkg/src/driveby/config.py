"""Experiment configuration: JSON schema, defaults and model construction.

The defaults describe the nominal study: a two-axle truck crossing a 30 m
simply supported girder at 10 m/s, sampled at 1 kHz for 6 s, with the
identification run by a 60-particle swarm repeated 100 times.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import bridge as bfem
from .estimator import DEFAULT_P0, FilterConfig, noise_covariances
from .pso import PSOConfig
from .road import ISO8608_GD0, RoadUnevenness, generate_road, with_lead_in
from .simulate import SimConfig
from .vehicle import VehicleParams

SCENARIOS = ("intact", "damaged")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass
class BridgeSection:
    rhoA: float = bfem.RHO_A
    ei: Any = bfem.EI  # scalar (uniform) or one value per element
    alpha_c: float = bfem.ALPHA_C
    beta_c: float = bfem.BETA_C
    span: float = bfem.SPAN
    elem_len: float = bfem.ELEM_LEN
    damaged_element: int = 8  # 1-based
    damage_factor: float = 0.5


@dataclass
class RoadSection:
    psd_class: str = "A"
    seed: int = 42
    x0: float = -16.0
    length: float = 80.0
    dx: float = 0.01
    ramp_length: float = 2.0


@dataclass
class FilterSection:
    q_diag: list | None = None  # None: tabulated values for noise_pct
    r_diag: list | None = None
    p0_diag: list = field(default_factory=lambda: DEFAULT_P0.tolist())
    dx_obj: float | None = None


@dataclass
class PSOSection:
    samples: int = 60
    steps: int = 50
    alphas: list = field(default_factory=lambda: [0.6, 0.3, 0.1])
    spread: float = 0.2
    d1_range: list = field(default_factory=lambda: [0.1, 0.9])


@dataclass
class SimSection:
    approach: float = 10.0
    exit: float = 20.0
    total_time: float = 6.0
    dt: float = 0.001
    gamma: float = 0.5
    beta: float = 0.25
    eps_max: float = 1e-6
    max_iters: int = 50


@dataclass
class ExperimentConfig:
    vehicle: dict = field(default_factory=lambda: VehicleParams().to_dict())
    bridge: BridgeSection = field(default_factory=BridgeSection)
    road: RoadSection = field(default_factory=RoadSection)
    sim: SimSection = field(default_factory=SimSection)
    filter: FilterSection = field(default_factory=FilterSection)
    pso: PSOSection = field(default_factory=PSOSection)
    scenario: str = "intact"
    noise_pct: float = 0.0
    runs: int = 100
    seed: int = 0
    out: str = "results"

    # -- construction --------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>: expected a JSON object")
        sections = {
            "bridge": BridgeSection, "road": RoadSection, "sim": SimSection,
            "filter": FilterSection, "pso": PSOSection,
        }
        kw = {}
        known = {f.name for f in fields(cls)}
        for key, value in data.items():
            if key not in known:
                raise ConfigError(f"{key}: unknown field")
            if key in sections:
                kw[key] = _section(sections[key], value, key)
            elif key == "vehicle":
                kw[key] = _vehicle_section(value)
            else:
                kw[key] = value
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"<file>: cannot read {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<file>: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        """Copy with top-level or dotted (``pso.samples``) fields replaced."""
        data = self.to_dict()
        for key, value in kw.items():
            if value is None:
                continue
            node = data
            *head, last = key.split(".")
            for part in head:
                node = node[part]
            node[last] = value
        return ExperimentConfig.from_dict(data)

    # -- validation ----------------------------------------------------
    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: expected one of {SCENARIOS}, got {self.scenario!r}")
        _check(self.noise_pct >= 0, "noise_pct", "must be non-negative")
        _check(isinstance(self.runs, int) and self.runs >= 1, "runs", "must be a positive integer")
        _check(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a non-negative integer")
        vehicle = self.vehicle_params()
        bridge = self.bridge_params()
        b = self.bridge
        _check(1 <= b.damaged_element <= bridge.n_elem, "bridge.damaged_element",
               f"must be in 1..{bridge.n_elem}")
        _check(b.damage_factor > 0, "bridge.damage_factor", "must be positive")
        r = self.road
        _check(str(r.psd_class).upper() in ISO8608_GD0, "road.psd_class",
               f"must be one of {''.join(ISO8608_GD0)}")
        _check(r.length > 0, "road.length", "must be positive")
        _check(r.dx > 0, "road.dx", "must be positive")
        _check(r.ramp_length >= 0, "road.ramp_length", "must be non-negative")
        sim = self.sim_config()
        try:
            sim.check_duration(bridge.span, vehicle.speed)
        except ValueError as exc:
            raise ConfigError(f"sim.total_time: {exc}") from None
        lo = -sim.approach - vehicle.wheelbase
        hi = -sim.approach + vehicle.speed * sim.dt * (sim.n_steps - 1)
        _check(r.x0 <= lo and r.x0 + r.length >= hi, "road",
               f"x0..x0+length must cover the axle paths [{lo:.3f}, {hi:.3f}] m")
        p = self.pso
        _check(isinstance(p.samples, int) and p.samples >= 2, "pso.samples", "must be an integer >= 2")
        _check(isinstance(p.steps, int) and p.steps >= 0, "pso.steps", "must be a non-negative integer")
        _check(len(p.alphas) == 3, "pso.alphas", "needs three coefficients")
        _check(0 <= p.spread < 1, "pso.spread", "must be in [0, 1)")
        _check(len(p.d1_range) == 2 and 0 < p.d1_range[0] <= p.d1_range[1] < 1,
               "pso.d1_range", "must satisfy 0 < lo <= hi < 1")
        f = self.filter
        for name, n in (("q_diag", 12), ("r_diag", 4), ("p0_diag", 12)):
            v = getattr(f, name)
            if v is not None:
                _check(len(v) == n and all(x >= 0 for x in v), f"filter.{name}",
                       f"needs {n} non-negative entries")
        if f.r_diag is not None:
            _check(all(x > 0 for x in f.r_diag), "filter.r_diag", "entries must be positive")
        if f.dx_obj is not None:
            _check(f.dx_obj > 0, "filter.dx_obj", "must be positive")

    # -- model objects -------------------------------------------------
    def vehicle_params(self) -> VehicleParams:
        try:
            return VehicleParams(**self.vehicle)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"vehicle: {exc}") from None

    def intact_bridge(self) -> bfem.BridgeParams:
        b = self.bridge
        n_elem = int(round(b.span / b.elem_len)) if b.elem_len > 0 else 0
        ei = np.full(n_elem, float(b.ei)) if np.ndim(b.ei) == 0 else np.asarray(b.ei, dtype=float)
        try:
            return bfem.BridgeParams(b.rhoA, ei, b.alpha_c, b.beta_c, b.span, b.elem_len)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bridge: {exc}") from None

    def bridge_params(self, scenario: str | None = None) -> bfem.BridgeParams:
        """True bridge for ``scenario`` (defaults to the configured one)."""
        intact = self.intact_bridge()
        if (scenario or self.scenario) == "intact":
            return intact
        ei = intact.ei.copy()
        ei[self.bridge.damaged_element - 1] *= self.bridge.damage_factor
        return replace(intact, ei=ei)

    def road_profile(self) -> RoadUnevenness:
        r = self.road
        base = generate_road(r.psd_class, seed=r.seed, length=r.length, dx=r.dx, x0=r.x0)
        return with_lead_in(base, -self.sim.approach, r.ramp_length)

    def sim_config(self, noise_pct: float | None = None, seed: int | None = None) -> SimConfig:
        try:
            return SimConfig(
                **asdict(self.sim),
                noise_pct=self.noise_pct if noise_pct is None else noise_pct,
                seed=self.seed if seed is None else seed,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sim: {exc}") from None

    def filter_config(self) -> FilterConfig:
        q, r = noise_covariances(self.noise_pct)
        f = self.filter
        s = self.sim
        return FilterConfig(
            q_diag=q if f.q_diag is None else np.asarray(f.q_diag, dtype=float),
            r_diag=r if f.r_diag is None else np.asarray(f.r_diag, dtype=float),
            p0_diag=np.asarray(f.p0_diag, dtype=float),
            dt=s.dt, gamma=s.gamma, beta=s.beta, dx_obj=f.dx_obj,
        )

    def pso_config(self, seed=0) -> PSOConfig:
        p = self.pso
        return PSOConfig(
            samples=p.samples, steps=p.steps, alphas=tuple(p.alphas), spread=p.spread,
            d1_range=tuple(p.d1_range), seed=seed,
        )


def _check(ok, path, msg):
    if not ok:
        raise ConfigError(f"{path}: {msg}")


def _section(cls, value, name):
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name for f in fields(cls)}
    for key in value:
        if key not in known:
            raise ConfigError(f"{name}.{key}: unknown field")
    return cls(**value)


def _vehicle_section(value):
    if not isinstance(value, dict):
        raise ConfigError("vehicle: expected an object")
    known = {f.name for f in fields(VehicleParams)}
    for key in value:
        if key not in known:
            raise ConfigError(f"vehicle.{key}: unknown field")
    return {**VehicleParams().to_dict(), **value}
