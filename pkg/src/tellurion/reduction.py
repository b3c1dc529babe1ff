"""Single-degree-of-freedom reduced models of recorded trajectories.

A recorded configuration-space curve with one strictly monotone coordinate
(possibly in a derived chart, e.g. the unwrapped cylindrical angle of a body)
can be reparameterized: the monotone coordinate becomes the drive s, every
raw coordinate becomes an interpolated function q_i(s), and time enters only
through the drive law s(t).  The result reproduces the recording exactly at
the knots while owning a single degree of freedom, so an applied force can
only slide the system along the recorded curve.

Construction choices: the drive law s(t) uses a monotonicity-preserving
cubic (PCHIP, i.e. Fritsch-Carlson limited Hermite); the slave curves q_i(s)
use standard cubic Hermite with slopes qdot_i/sdot taken from the recording.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from tellurion.dynamics import BodySpec, PhysicalSystem, State, Trajectory

__all__ = [
    "DriveCoordinate",
    "ReducedModel",
    "PaddedSystem",
    "NoMonotoneCoordinate",
    "clone_copy",
    "pad_noninteracting",
    "pad_state",
    "detect_drive_coordinate",
    "build_reduced",
    "playback",
    "project_generalized_force",
    "effective_inertia",
    "reduced_step_interactive",
    "apply_reduced_impulse",
]


class NoMonotoneCoordinate(Exception):
    """No candidate coordinate is strictly monotone over the interval."""


@dataclass(frozen=True)
class DriveCoordinate:
    chart: str              # "cartesian" | "cylindrical"
    index: int = -1         # raw coordinate index (cartesian chart)
    body: str = ""          # body whose angle drives (cylindrical chart)
    direction: int = 1      # +1 increasing, -1 decreasing
    margin: float = 0.0     # min |ds/dt| over the interval, after unwrap

    @property
    def label(self) -> str:
        if self.chart == "cartesian":
            return f"q[{self.index}]"
        return f"theta[{self.body}]"


@dataclass(frozen=True)
class PaddedSystem:
    base: PhysicalSystem
    extras: tuple[BodySpec, ...]

    @property
    def system(self) -> PhysicalSystem:
        return PhysicalSystem(
            bodies=self.base.bodies + self.extras,
            G=self.base.G,
            external=self.base.external,
        )

    @property
    def m(self) -> int:
        return self.system.n


def clone_copy(system: PhysicalSystem) -> PhysicalSystem:
    """Independent value-identical copy of the system."""
    return copy.deepcopy(system)


def pad_noninteracting(system: PhysicalSystem, extras) -> PaddedSystem:
    """Append bodies that neither pull on nor are pulled by the base system."""
    extras = tuple(extras)
    base_names = {b.name for b in system.bodies}
    extra_names = {b.name for b in extras}
    for e in extras:
        for a in e.attractors:
            if a in base_names:
                raise ValueError(
                    f"extra body {e.name!r} is coupled to base body {a!r}"
                )
            if a not in extra_names:
                raise ValueError(f"extra body {e.name!r}: unknown attractor {a!r}")
        if e.frame is not None and e.frame not in extra_names:
            raise ValueError(f"extra body {e.name!r}: frame parent must be an extra")
    return PaddedSystem(base=system, extras=extras)


def pad_state(padded: PaddedSystem, base_init: State, extra_q, extra_qdot) -> State:
    """Extend a base initial state with the extras' coordinates."""
    q = np.concatenate([base_init.q, np.asarray(extra_q, float).ravel()])
    v = np.concatenate([base_init.qdot, np.asarray(extra_qdot, float).ravel()])
    return State(base_init.t, q, v)


# --- drive coordinate detection -------------------------------------------

def _chart_values(traj: Trajectory, drive: DriveCoordinate, slots: slice | None):
    """Raw (unnormalized) drive samples and rates along the trajectory."""
    if drive.chart == "cartesian":
        return traj.qs[:, drive.index], traj.qdots[:, drive.index]
    x = traj.qs[:, slots][:, 0]
    y = traj.qs[:, slots][:, 1]
    xd = traj.qdots[:, slots][:, 0]
    yd = traj.qdots[:, slots][:, 1]
    theta = np.unwrap(np.arctan2(y, x))
    r2 = x * x + y * y
    rate = (x * yd - y * xd) / r2
    return theta, rate


def _body_slots(traj: Trajectory) -> dict[str, slice]:
    names = traj.meta.get("bodies")
    if not names:
        raise ValueError("trajectory carries no body layout in meta")
    return {name: slice(3 * i, 3 * i + 3) for i, name in enumerate(names)}


def default_charts(traj: Trajectory) -> list[DriveCoordinate]:
    """Every raw coordinate plus the cylindrical angle of every body."""
    cands = [DriveCoordinate("cartesian", index=i) for i in range(traj.qs.shape[1])]
    for name in traj.meta.get("bodies", []):
        cands.append(DriveCoordinate("cylindrical", body=name))
    return cands


def detect_drive_coordinate(traj: Trajectory, charts=None) -> DriveCoordinate:
    """Pick the candidate with the largest strictly positive monotonicity margin.

    Angular candidates are unwrapped before testing.  Raises
    NoMonotoneCoordinate when every candidate reverses or stalls.
    """
    if len(traj) < 3:
        raise ValueError("need at least 3 samples to detect a drive coordinate")
    if charts is None:
        charts = default_charts(traj)
    slots = _body_slots(traj) if any(c.chart == "cylindrical" for c in charts) else {}
    dt = np.diff(traj.times)
    best = None
    for cand in charts:
        s, _ = _chart_values(traj, cand, slots.get(cand.body))
        rates = np.diff(s) / dt
        direction = 1 if s[-1] >= s[0] else -1
        margin = float(np.min(direction * rates))
        if margin <= 0:
            continue
        scored = DriveCoordinate(
            cand.chart, cand.index, cand.body, direction, margin
        )
        if best is None or margin > best.margin:
            best = scored
    if best is None:
        raise NoMonotoneCoordinate(
            "no candidate coordinate is strictly monotone over the interval"
        )
    return best


# --- model construction ----------------------------------------------------

@dataclass(frozen=True)
class ReducedModel:
    drive: DriveCoordinate
    knot_t: np.ndarray          # recording times
    knot_s: np.ndarray          # normalized drive values (strictly increasing)
    knot_q: np.ndarray          # (k, n) raw coordinates
    knot_dqds: np.ndarray       # (k, n) slave slopes
    bodies: tuple[str, ...]     # movable body names, 3 slots each in order
    masses: tuple[float, ...]
    drive_law: PchipInterpolator
    slaves: CubicHermiteSpline  # vector-valued q(s)
    p: int = 1

    @property
    def valid(self) -> tuple[float, float]:
        return float(self.knot_t[0]), float(self.knot_t[-1])

    @property
    def s_range(self) -> tuple[float, float]:
        return float(self.knot_s[0]), float(self.knot_s[-1])

    @property
    def slave_indices(self) -> tuple[int, ...]:
        n = self.knot_q.shape[1]
        if self.drive.chart == "cartesian":
            return tuple(i for i in range(n) if i != self.drive.index)
        return tuple(range(n))

    def slots(self, name: str) -> slice:
        i = self.bodies.index(name)
        return slice(3 * i, 3 * i + 3)

    def mass(self, name: str) -> float:
        return self.masses[self.bodies.index(name)]


def build_reduced(traj: Trajectory, drive: DriveCoordinate, masses=None) -> ReducedModel:
    """Reparameterize a recording by its monotone drive coordinate.

    masses: per-movable-body masses (needed for the interactive force
    response); defaults to 1 for every body when omitted.
    """
    if drive.margin <= 0:
        raise ValueError("drive margin must be positive")
    slots = _body_slots(traj)
    raw_s, raw_rate = _chart_values(traj, drive, slots.get(drive.body))
    s = drive.direction * raw_s
    sdot = drive.direction * raw_rate
    if np.any(np.diff(s) <= 0):
        raise ValueError("duplicate or reversed drive knot values")
    dqds = traj.qdots / sdot[:, None]
    names = tuple(traj.meta["bodies"])
    if masses is None:
        masses = tuple(1.0 for _ in names)
    else:
        masses = tuple(float(m) for m in masses)
    drive_law = PchipInterpolator(traj.times, s)
    slaves = CubicHermiteSpline(s, traj.qs, dqds)
    return ReducedModel(
        drive=drive,
        knot_t=traj.times.copy(),
        knot_s=s,
        knot_q=traj.qs.copy(),
        knot_dqds=dqds,
        bodies=names,
        masses=masses,
        drive_law=drive_law,
        slaves=slaves,
    )


def playback(model: ReducedModel, times) -> Trajectory:
    """Kinematic replay: s from the drive law, coordinates from the slaves."""
    times = np.asarray(times, dtype=float)
    t0, t1 = model.valid
    span = max(t1 - t0, 1.0)
    if np.any(times < t0 - 1e-12 * span) or np.any(times > t1 + 1e-12 * span):
        raise ValueError(f"playback time outside valid interval [{t0}, {t1}]")
    s = model.drive_law(times)
    q = model.slaves(s)
    qdot = model.slaves(s, 1) * model.drive_law(times, 1)[:, None]
    return Trajectory(times, q, qdot, meta={"bodies": list(model.bodies), "reduced": True})


def coords_at(model: ReducedModel, s: float):
    """Positions and dq/ds at a drive value (clamped to the recorded range)."""
    lo, hi = model.s_range
    s = min(max(s, lo), hi)
    return model.slaves(s), model.slaves(s, 1)


def project_generalized_force(model: ReducedModel, target: str, force, s: float) -> float:
    """Virtual-work projection Q = F . dr_target/ds at drive value s."""
    if target not in model.bodies:
        raise ValueError(f"body {target!r} is not represented in the model")
    _, dqds = coords_at(model, s)
    return float(np.asarray(force, float) @ dqds[model.slots(target)])


def effective_inertia(model: ReducedModel, s: float) -> float:
    """I(s) = sum over bodies of m_b |dr_b/ds|^2 (virtual-work masses)."""
    _, dqds = coords_at(model, s)
    I = 0.0
    for name, m in zip(model.bodies, model.masses):
        d = dqds[model.slots(name)]
        I += m * float(d @ d)
    if I <= 0:
        raise ValueError("effective inertia must be positive")
    return I


def reduced_step_interactive(
    model: ReducedModel, s: float, sdot: float, Q: float, dt: float
) -> tuple[float, float]:
    """One rk4 step of the single-DOF dynamics sddot = Q / I(s)."""

    def acc(ss):
        return Q / effective_inertia(model, ss)

    k1s, k1v = sdot, acc(s)
    k2s, k2v = sdot + 0.5 * dt * k1v, acc(s + 0.5 * dt * k1s)
    k3s, k3v = sdot + 0.5 * dt * k2v, acc(s + 0.5 * dt * k2s)
    k4s, k4v = sdot + dt * k3v, acc(s + dt * k3s)
    sn = s + dt / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
    vn = sdot + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return sn, vn


def apply_reduced_impulse(
    model: ReducedModel, s: float, sdot: float, target: str, dp
) -> float:
    """Momentum kick mapped through the constraint: sdot += (dp . dr/ds) / I."""
    dP = project_generalized_force(model, target, dp, s)
    return sdot + dP / effective_inertia(model, s)
