"""Scenario configuration: one YAML file drives every pipeline command.

Key layout (see data/sem.yaml for the bundled Sun-Earth-Moon scenario):

bodies:               list of {name, mass, fixed?, position?, attractors?,
                      frame?, q?, qdot?}
integrator: rk4|leapfrog
dt, duration:         integration step and recorded span
reduction: {charts: [cylindrical, cartesian], knot_stride: int}
observer: {eps_q, eps_t}
protocol: {t_f, pre_window, post_window, pass_mult, fail_mult,
           impulse: {body, dp | tangential_frac}}
render: {R, C, window: [x_min, x_max, y_min, y_max], intensities?}
session: {sim_seconds_per_tick, frame_every}
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from tellurion.dynamics import BodySpec, ExternalForce, PhysicalSystem, State, simulate
from tellurion.observer import Resolution, make_impulse

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "builtin_config_path"]


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field path."""


@dataclass
class ScenarioConfig:
    raw: dict
    path: str = ""

    # --- section accessors, all validating -------------------------------

    def system_and_init(self) -> tuple[PhysicalSystem, State]:
        bodies_cfg = self._require("bodies", list)
        specs, q, qdot = [], [], []
        for i, b in enumerate(bodies_cfg):
            where = f"bodies[{i}]"
            if not isinstance(b, dict) or "name" not in b:
                raise ConfigError(f"{where}: each body needs at least a name")
            mass = b.get("mass", 0.0)
            if not isinstance(mass, (int, float)) or mass < 0:
                raise ConfigError(f"{where}.mass: must be a number >= 0")
            fixed = bool(b.get("fixed", False))
            try:
                spec = BodySpec(
                    name=str(b["name"]),
                    mass=float(mass),
                    fixed=fixed,
                    attractors=tuple(b.get("attractors", ())),
                    position=tuple(b.get("position", (0.0, 0.0, 0.0))),
                    frame=b.get("frame"),
                )
            except ValueError as e:
                raise ConfigError(f"{where}: {e}") from e
            specs.append(spec)
            if not fixed:
                for key in ("q", "qdot"):
                    if key not in b or len(b[key]) != 3:
                        raise ConfigError(f"{where}.{key}: movable body needs a 3-vector")
                q.extend(float(x) for x in b["q"])
                qdot.extend(float(x) for x in b["qdot"])
        try:
            system = PhysicalSystem(
                bodies=tuple(specs), G=float(self.raw.get("G", 1.0))
            )
        except ValueError as e:
            raise ConfigError(f"bodies: {e}") from e
        return system, State(0.0, np.array(q), np.array(qdot))

    @property
    def integrator(self) -> str:
        m = self.raw.get("integrator", "rk4")
        if m not in ("rk4", "leapfrog"):
            raise ConfigError(f"integrator: must be rk4 or leapfrog, got {m!r}")
        return m

    @property
    def dt(self) -> float:
        return self._positive("dt")

    @property
    def duration(self) -> float:
        return self._positive("duration")

    def resolution(self) -> Resolution:
        obs = self.raw.get("observer", {})
        try:
            return Resolution(float(obs["eps_q"]), float(obs["eps_t"]))
        except KeyError as e:
            raise ConfigError(f"observer.{e.args[0]}: required") from e
        except ValueError as e:
            raise ConfigError(f"observer: {e}") from e

    def reduction_charts(self):
        red = self.raw.get("reduction", {})
        charts = red.get("charts", ["cartesian", "cylindrical"])
        for c in charts:
            if c not in ("cartesian", "cylindrical"):
                raise ConfigError(f"reduction.charts: unknown chart {c!r}")
        return charts

    @property
    def knot_stride(self) -> int:
        stride = self.raw.get("reduction", {}).get("knot_stride", 1)
        if not isinstance(stride, int) or stride < 1:
            raise ConfigError("reduction.knot_stride: must be a positive integer")
        return stride

    def protocol_params(self) -> dict:
        p = self.raw.get("protocol")
        if p is None:
            raise ConfigError("protocol: section required")
        out = {}
        for key in ("t_f", "pre_window", "post_window"):
            if key not in p or float(p[key]) <= 0:
                raise ConfigError(f"protocol.{key}: positive number required")
            out[key] = float(p[key])
        out["pass_mult"] = float(p.get("pass_mult", 2.0))
        out["fail_mult"] = float(p.get("fail_mult", 10.0))
        if not out["pass_mult"] < out["fail_mult"]:
            raise ConfigError("protocol: pass_mult must be below fail_mult")
        imp = p.get("impulse")
        if not isinstance(imp, dict) or "body" not in imp:
            raise ConfigError("protocol.impulse: needs a target body")
        out["impulse"] = imp
        return out

    def build_impulse(self, system: PhysicalSystem, init: State) -> ExternalForce:
        """Resolve the protocol impulse; tangential_frac scales the target's
        orbital momentum (relative to its frame parent) at t_f."""
        params = self.protocol_params()
        imp = params["impulse"]
        body = imp["body"]
        try:
            spec = system.body(body)
        except KeyError:
            raise ConfigError(f"protocol.impulse.body: unknown body {body!r}")
        if spec.fixed:
            raise ConfigError(f"protocol.impulse.body: {body!r} is fixed")
        if "dp" in imp:
            dp = [float(x) for x in imp["dp"]]
            if len(dp) != 3:
                raise ConfigError("protocol.impulse.dp: needs a 3-vector")
            return make_impulse(body, dp, params["t_f"])
        frac = imp.get("tangential_frac")
        if frac is None:
            raise ConfigError("protocol.impulse: needs dp or tangential_frac")
        ref = simulate(system, init, params["t_f"], self.dt, self.integrator)
        v = ref.qdots[-1][system.slots(body)]
        if spec.frame is not None and not system.body(spec.frame).fixed:
            v = v - ref.qdots[-1][system.slots(spec.frame)]
        dp = float(frac) * spec.mass * v
        return make_impulse(body, dp, params["t_f"])

    def render_params(self) -> dict:
        r = self.raw.get("render", {})
        R, C = int(r.get("R", 64)), int(r.get("C", 64))
        if R < 1 or C < 1:
            raise ConfigError("render: R and C must be positive")
        win = r.get("window", [-1.2, 1.2, -1.2, 1.2])
        if len(win) != 4:
            raise ConfigError("render.window: needs [x_min, x_max, y_min, y_max]")
        return {"R": R, "C": C, "window": [float(x) for x in win],
                "intensities": r.get("intensities")}

    def session_params(self) -> dict:
        s = self.raw.get("session", {})
        spt = float(s.get("sim_seconds_per_tick", 10 * self.dt))
        if spt <= 0:
            raise ConfigError("session.sim_seconds_per_tick: must be positive")
        fe = int(s.get("frame_every", 1))
        if fe < 1:
            raise ConfigError("session.frame_every: must be >= 1")
        return {"sim_seconds_per_tick": spt, "frame_every": fe}

    # --- helpers ----------------------------------------------------------

    def _require(self, key, typ):
        if key not in self.raw or not isinstance(self.raw[key], typ):
            raise ConfigError(f"{key}: required ({typ.__name__})")
        return self.raw[key]

    def _positive(self, key) -> float:
        if key not in self.raw:
            raise ConfigError(f"{key}: required")
        try:
            v = float(self.raw[key])
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: must be a number")
        if v <= 0:
            raise ConfigError(f"{key}: must be positive")
        return v


def builtin_config_path(name: str) -> Path | None:
    ref = resources.files("tellurion").joinpath("data", f"{name}.yaml")
    return Path(str(ref)) if ref.is_file() else None


def load_config(path_or_name: str) -> ScenarioConfig:
    """Load a YAML scenario file, or a bundled scenario by bare name."""
    p = Path(path_or_name)
    if not p.exists():
        builtin = builtin_config_path(path_or_name)
        if builtin is None:
            raise ConfigError(f"config: no such file or bundled scenario {path_or_name!r}")
        p = builtin
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"config: invalid YAML: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    return ScenarioConfig(raw=raw, path=str(p))
