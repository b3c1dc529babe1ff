"""Restricted Newtonian N-body dynamics.

Bodies interact through a directed attractor graph: each body feels gravity
only from the bodies listed in its ``attractors``.  Couplings are therefore
not necessarily reciprocal (the Earth may pull the Moon while the Moon pulls
nothing).  Fixed bodies act as sources but never move.

A body may additionally declare a ``frame`` parent: its acceleration then
includes the parent's acceleration, so it orbits the parent as if the parent
were inertial.  This is the geared-mechanism idealization: a satellite on a
carried circular orbit stays exactly circular around its moving primary.
Without it, a satellite whose binding acceleration is smaller than its
primary's own acceleration simply drifts away, which is what the plain
directed force law gives for a hierarchical scenario like Sun-Earth-Moon.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "BodySpec",
    "PhysicalSystem",
    "State",
    "ExternalForce",
    "Trajectory",
    "SingularityError",
    "gravitational_accel",
    "step",
    "simulate",
    "total_energy",
    "sun_earth_moon",
]

SINGULARITY_SEPARATION = 1e-9


class SingularityError(Exception):
    """Two gravitationally coupled bodies got closer than the threshold."""

    def __init__(self, body: str, attractor: str, t: float):
        self.body = body
        self.attractor = attractor
        self.t = t
        super().__init__(f"singular separation between {body!r} and {attractor!r} at t={t}")


@dataclass(frozen=True)
class BodySpec:
    name: str
    mass: float
    fixed: bool = False
    attractors: tuple[str, ...] = ()
    # position of a fixed body (movable bodies carry theirs in State)
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    # optional carried-frame parent: this body's acceleration additionally
    # includes the parent's, making the parent an effective inertial anchor
    frame: str | None = None

    def __post_init__(self):
        if self.mass < 0:
            raise ValueError(f"body {self.name!r}: mass must be >= 0")
        if self.name in self.attractors:
            raise ValueError(f"body {self.name!r} cannot attract itself")


@dataclass(frozen=True)
class PhysicalSystem:
    bodies: tuple[BodySpec, ...]
    G: float = 1.0
    external: tuple["ExternalForce", ...] = ()

    def __post_init__(self):
        names = [b.name for b in self.bodies]
        if len(set(names)) != len(names):
            raise ValueError("duplicate body names")
        for b in self.bodies:
            for a in b.attractors:
                if a not in names:
                    raise ValueError(f"body {b.name!r}: unknown attractor {a!r}")
            if b.frame is not None and b.frame not in names:
                raise ValueError(f"body {b.name!r}: unknown frame parent {b.frame!r}")
        if self.n < 1:
            raise ValueError("system needs at least one movable body")

    @property
    def movable(self) -> tuple[BodySpec, ...]:
        return tuple(b for b in self.bodies if not b.fixed)

    @property
    def n(self) -> int:
        """Coordinate count: 3 Cartesian slots per movable body, in listed order."""
        return 3 * len(self.movable)

    def slots(self, name: str) -> slice:
        """Coordinate slots of a movable body."""
        idx = [b.name for b in self.movable].index(name)
        return slice(3 * idx, 3 * idx + 3)

    def body(self, name: str) -> BodySpec:
        for b in self.bodies:
            if b.name == name:
                return b
        raise KeyError(name)

    def with_external(self, forces) -> "PhysicalSystem":
        return replace(self, external=tuple(forces))


@dataclass(frozen=True)
class State:
    t: float
    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "qdot", np.asarray(self.qdot, dtype=float))
        if self.q.shape != self.qdot.shape or self.q.ndim != 1:
            raise ValueError("q and qdot must be 1-d vectors of equal length")


@dataclass(frozen=True)
class ExternalForce:
    """Either an impulse (dp at t_imp) or a constant force over a window."""

    target: str
    kind: str  # "impulse" | "window"
    vector: tuple[float, float, float]
    t_imp: float = 0.0
    t_on: float = 0.0
    t_off: float = 0.0

    def __post_init__(self):
        if self.kind not in ("impulse", "window"):
            raise ValueError(f"unknown force kind {self.kind!r}")
        if not np.all(np.isfinite(self.vector)):
            raise ValueError("force vector must be finite")
        if self.kind == "window" and not self.t_on < self.t_off:
            raise ValueError("window force needs t_on < t_off")


@dataclass
class Trajectory:
    times: np.ndarray
    qs: np.ndarray      # (len(times), n)
    qdots: np.ndarray   # (len(times), n)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def state(self, k: int) -> State:
        return State(self.times[k], self.qs[k].copy(), self.qdots[k].copy())


def _positions(system: PhysicalSystem, q: np.ndarray) -> dict[str, np.ndarray]:
    pos = {}
    for b in system.bodies:
        if b.fixed:
            pos[b.name] = np.asarray(b.position, dtype=float)
        else:
            pos[b.name] = q[system.slots(b.name)]
    return pos


def gravitational_accel(
    system: PhysicalSystem,
    state: State,
    extra_force: np.ndarray | None = None,
) -> np.ndarray:
    """Acceleration vector of all movable coordinates.

    Each movable body feels G*m_a*(r_a - r_b)/|r_a - r_b|^3 summed over its
    attractors, plus its frame parent's acceleration if it has one, plus any
    per-coordinate external force divided by its mass.
    """
    if state.q.shape[0] != system.n:
        raise ValueError("state dimension does not match system")
    pos = _positions(system, state.q)
    acc: dict[str, np.ndarray] = {b.name: np.zeros(3) for b in system.bodies}
    for b in system.movable:
        a = np.zeros(3)
        rb = pos[b.name]
        for aname in b.attractors:
            att = system.body(aname)
            d = pos[aname] - rb
            r = np.sqrt(d @ d)
            if r < SINGULARITY_SEPARATION:
                raise SingularityError(b.name, aname, state.t)
            a += system.G * att.mass * d / r**3
        acc[b.name] = a
    # carried-frame contributions, resolved along the parent chain
    def total_acc(name: str, seen=()) -> np.ndarray:
        b = system.body(name)
        if b.fixed:
            return np.zeros(3)
        if name in seen:
            raise ValueError(f"cyclic frame chain through {name!r}")
        a = acc[name]
        if b.frame is not None:
            a = a + total_acc(b.frame, seen + (name,))
        return a

    out = np.zeros(system.n)
    for b in system.movable:
        out[system.slots(b.name)] = total_acc(b.name)
    if extra_force is not None:
        for b in system.movable:
            if b.mass > 0:
                sl = system.slots(b.name)
                out[sl] += extra_force[sl] / b.mass
    return out


def _window_force(system: PhysicalSystem, t: float) -> np.ndarray | None:
    """Sum of active window forces at time t, as a length-n force vector."""
    f = None
    for ext in system.external:
        if ext.kind == "window" and ext.t_on <= t < ext.t_off:
            if f is None:
                f = np.zeros(system.n)
            f[system.slots(ext.target)] += np.asarray(ext.vector)
    return f


def step(system: PhysicalSystem, state: State, dt: float, method: str = "rk4") -> State:
    """Advance one step with rk4 or kick-drift-kick leapfrog.

    Window forces are evaluated inside the step; impulses are handled by
    `simulate` between steps.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    t, q, v = state.t, state.q, state.qdot

    def acc(tt, qq):
        return gravitational_accel(system, State(tt, qq, v), _window_force(system, tt))

    if method == "rk4":
        a1 = acc(t, q)
        k1q, k1v = v, a1
        k2q = v + 0.5 * dt * k1v
        k2v = acc(t + 0.5 * dt, q + 0.5 * dt * k1q)
        k3q = v + 0.5 * dt * k2v
        k3v = acc(t + 0.5 * dt, q + 0.5 * dt * k2q)
        k4q = v + dt * k3v
        k4v = acc(t + dt, q + dt * k3q)
        qn = q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        vn = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    elif method == "leapfrog":
        a0 = acc(t, q)
        vh = v + 0.5 * dt * a0
        qn = q + dt * vh
        a1 = acc(t + dt, qn)
        vn = vh + 0.5 * dt * a1
    else:
        raise ValueError(f"unknown integrator {method!r}")
    if not (np.all(np.isfinite(qn)) and np.all(np.isfinite(vn))):
        raise FloatingPointError(f"non-finite state after step at t={t}")
    return State(t + dt, qn, vn)


def apply_impulse(system: PhysicalSystem, state: State, ext: ExternalForce) -> State:
    body = system.body(ext.target)
    if body.fixed:
        raise ValueError(f"cannot apply impulse to fixed body {ext.target!r}")
    v = state.qdot.copy()
    v[system.slots(ext.target)] += np.asarray(ext.vector) / body.mass
    return State(state.t, state.q, v)


def simulate(
    system: PhysicalSystem,
    init: State,
    duration: float,
    dt: float,
    method: str = "rk4",
) -> Trajectory:
    """Integrate from init over [t0, t0+duration], sampling every dt.

    A final shortened step lands exactly on t0+duration.  Each impulse in the
    system's external schedule is applied to qdot at the first sample time
    >= its t_imp, exactly once.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if dt <= 0:
        raise ValueError("dt must be positive")
    t0 = init.t
    n_full = int(np.floor(duration / dt + 1e-12))
    times = [t0 + k * dt for k in range(n_full + 1)]
    if times[-1] < t0 + duration - 1e-12 * max(1.0, abs(duration)):
        times.append(t0 + duration)
    pending = sorted(
        (e for e in system.external if e.kind == "impulse"), key=lambda e: e.t_imp
    )
    state = init
    out_t, out_q, out_v = [], [], []

    def record(s: State) -> State:
        nonlocal pending
        while pending and s.t >= pending[0].t_imp:
            s = apply_impulse(system, s, pending[0])
            pending = pending[1:]
        out_t.append(s.t)
        out_q.append(s.q.copy())
        out_v.append(s.qdot.copy())
        return s

    state = record(state)
    for k in range(1, len(times)):
        h = times[k] - times[k - 1]
        try:
            state = step(system, state, h, method)
        except FloatingPointError:
            aborted_at = len(out_t) - 1
            return Trajectory(
                np.array(out_t),
                np.array(out_q),
                np.array(out_v),
                meta={
                    "dt": dt,
                    "method": method,
                    "bodies": [b.name for b in system.movable],
                    "aborted_at": aborted_at,
                },
            )
        state = State(times[k], state.q, state.qdot)  # pin time against drift
        state = record(state)
    return Trajectory(
        np.array(out_t),
        np.array(out_q),
        np.array(out_v),
        meta={"dt": dt, "method": method, "bodies": [b.name for b in system.movable]},
    )


def total_energy(system: PhysicalSystem, state: State) -> float:
    """Kinetic plus potential energy over the directed attractor graph.

    Potential is counted once per directed attractor edge (couplings are
    non-reciprocal in the restricted model).  The kinetic term of a
    frame-carried body uses its velocity relative to the parent, which is the
    quantity the carried-frame dynamics actually conserves.
    """
    pos = _positions(system, state.q)
    e = 0.0
    for b in system.movable:
        v = state.qdot[system.slots(b.name)]
        if b.frame is not None:
            parent = system.body(b.frame)
            if not parent.fixed:
                v = v - state.qdot[system.slots(parent.name)]
        e += 0.5 * b.mass * float(v @ v)
        for aname in b.attractors:
            att = system.body(aname)
            d = pos[aname] - pos[b.name]
            r = np.sqrt(d @ d)
            if r < SINGULARITY_SEPARATION:
                raise SingularityError(b.name, aname, state.t)
            e -= system.G * att.mass * b.mass / r
    return e


# --- bundled canonical scenario -------------------------------------------

#: Nondimensional Sun-Earth-Moon numbers used throughout the docs and tests.
#: The source material fixes no masses or distances; these are our choices,
#: picked so every period is analytic: Earth angular rate 1, Moon relative
#: angular rate sqrt(8).
SEM_EARTH_MASS = 1e-3
SEM_MOON_MASS = 1e-5
SEM_EARTH_RADIUS = 1.0
SEM_MOON_RADIUS = 0.05
SEM_EARTH_OMEGA = 1.0                      # sqrt(G*M_sun/R^3)
SEM_MOON_OMEGA = np.sqrt(SEM_EARTH_MASS / SEM_MOON_RADIUS**3)  # sqrt(8)
SEM_EARTH_PERIOD = 2 * np.pi / SEM_EARTH_OMEGA
SEM_MOON_PERIOD = 2 * np.pi / SEM_MOON_OMEGA


def sun_earth_moon() -> tuple[PhysicalSystem, State]:
    """Sun fixed at the origin, Earth on a unit circle, Moon carried by Earth.

    The Moon is attracted only by the Earth and rides in the Earth's frame,
    so both circles are exact and the periods are 2*pi and 2*pi/sqrt(8).
    """
    sun = BodySpec("sun", mass=1.0, fixed=True)
    earth = BodySpec("earth", mass=SEM_EARTH_MASS, attractors=("sun",))
    moon = BodySpec(
        "moon", mass=SEM_MOON_MASS, attractors=("earth",), frame="earth"
    )
    system = PhysicalSystem(bodies=(sun, earth, moon), G=1.0)
    q = np.array([
        SEM_EARTH_RADIUS, 0.0, 0.0,
        SEM_EARTH_RADIUS + SEM_MOON_RADIUS, 0.0, 0.0,
    ])
    v_e = SEM_EARTH_OMEGA * SEM_EARTH_RADIUS
    v_m_rel = SEM_MOON_OMEGA * SEM_MOON_RADIUS
    qdot = np.array([0.0, v_e, 0.0, 0.0, v_e + v_m_rel, 0.0])
    return system, State(0.0, q, qdot)
