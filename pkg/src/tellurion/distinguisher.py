"""Force-injection distinguishing trials.

A candidate system that looks identical to the reference at the observer's
resolution is probed with an external force.  The observer, who knows the
scenario's physics, initial conditions, and the force they injected,
integrates the gravitational model forward and compares the candidate's
measured trajectory against that expectation.  A candidate with fewer
degrees of freedom than the reference can only slide along its recorded
curve, so the post-force deviation exposes it.

Note on the expectation baseline: a velocity estimate differenced from two
adjacent position readings carries noise ~eps_q/eps_t, which propagated over
a post-force window swamps the pass threshold for *every* candidate,
including the exact copy.  The observer here therefore predicts from the
known initial conditions and injected force (they are stipulated to know
both); the two-point differencing is still available as
`estimate_velocity` for callers that want the instrument-only estimate.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

import numpy as np

from tellurion.dynamics import (
    ExternalForce,
    PhysicalSystem,
    State,
    Trajectory,
    simulate,
)
from tellurion.observer import MeasurementSeries, Resolution, measure, observably_equal, quantize
from tellurion.reduction import (
    ReducedModel,
    apply_reduced_impulse,
    build_reduced,
    clone_copy,
    detect_drive_coordinate,
    playback,
)

__all__ = [
    "Candidate",
    "Protocol",
    "Verdict",
    "DistinguisherReport",
    "predict_newtonian",
    "estimate_velocity",
    "run_protocol",
    "dof_criterion",
    "make_candidate",
]


class Verdict(enum.Enum):
    INDISTINGUISHABLE = "INDISTINGUISHABLE"
    DISTINGUISHABLE_NONPHYSICAL = "DISTINGUISHABLE_NONPHYSICAL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Candidate:
    kind: str  # real | copy | padded | reduced_kinematic | reduced_interactive
    system: PhysicalSystem | None = None       # for real/copy/padded
    init: State | None = None
    model: ReducedModel | None = None          # for reduced_*
    p: int = 0                                 # degrees of freedom

    def __post_init__(self):
        kinds = ("real", "copy", "padded", "reduced_kinematic", "reduced_interactive")
        if self.kind not in kinds:
            raise ValueError(f"unknown candidate kind {self.kind!r}")
        if self.kind.startswith("reduced"):
            if self.model is None:
                raise ValueError("reduced candidate needs a model")
            if self.p != 1:
                raise ValueError("reduced candidates have exactly one degree of freedom")
        else:
            if self.system is None or self.init is None:
                raise ValueError(f"{self.kind} candidate needs a system and init")
            if self.p < self.system.n:
                raise ValueError("copy/padded candidates must report p >= n of their system")


@dataclass(frozen=True)
class Protocol:
    system: PhysicalSystem        # the reference reality
    init: State
    t_f: float                    # force injection time
    force: ExternalForce
    pre_window: float
    post_window: float
    resolution: Resolution
    dt: float
    method: str = "rk4"
    pass_mult: float = 2.0
    fail_mult: float = 10.0

    def __post_init__(self):
        if self.pre_window <= 0 or self.post_window <= 0:
            raise ValueError("pre and post windows must be positive")
        if not self.pass_mult < self.fail_mult:
            raise ValueError("pass_mult must be below fail_mult")
        if self.t_f < self.pre_window:
            raise ValueError("force time must not precede the pre window")


@dataclass
class DistinguisherReport:
    pre_equal: bool
    times: np.ndarray            # post-force comparison times
    deviation: np.ndarray        # D(t) in eps_q units, max-norm over coordinates
    D_max: float
    verdict: Verdict
    pass_mult: float
    fail_mult: float
    pre_phase_failed: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pre_equal": bool(self.pre_equal),
            "times": [float(t) for t in self.times],
            "deviation": [float(d) for d in self.deviation],
            "D_max": float(self.D_max),
            "verdict": self.verdict.value,
            "pass_mult": self.pass_mult,
            "fail_mult": self.fail_mult,
            "pre_phase_failed": self.pre_phase_failed,
        }


def predict_newtonian(
    system: PhysicalSystem,
    state: State,
    duration: float,
    dt: float,
    forces=(),
    method: str = "rk4",
) -> Trajectory:
    """The observer's theoretical expectation: true physics from a given state."""
    model = clone_copy(system).with_external(forces)
    if duration == 0:
        return Trajectory(
            np.array([state.t]), state.q[None, :], state.qdot[None, :],
            meta={"bodies": [b.name for b in system.movable]},
        )
    return simulate(model, state, duration, dt, method)


def estimate_velocity(series: MeasurementSeries, k: int) -> np.ndarray:
    """Two-point finite difference over the instrument's time quantum."""
    if not 0 <= k < len(series) - 1:
        raise ValueError("need two consecutive measurement rows")
    dt = series.times[k + 1] - series.times[k]
    if dt <= 0:
        raise ValueError("repeated measurement time; cannot difference")
    return (series.values[k + 1] - series.values[k]) / dt


def _candidate_positions(
    candidate: Candidate, protocol: Protocol, times: np.ndarray
) -> np.ndarray:
    """Candidate coordinate samples over the trial, force applied at t_f.

    Kinematic reduced candidates ignore the force entirely; interactive ones
    route it through the virtual-work projection into their single DOF.
    Returns (len(times), n) positions projected on the reference coordinates.
    """
    n = protocol.system.n
    force = dataclasses.replace(protocol.force, t_imp=protocol.t_f)
    if candidate.kind in ("real", "copy", "padded"):
        sys_ = candidate.system.with_external(
            candidate.system.external + (force,)
        )
        traj = simulate(sys_, candidate.init, times[-1] - times[0], protocol.dt, protocol.method)
        return traj.qs[:, :n]
    model = candidate.model
    if candidate.kind == "reduced_kinematic":
        return playback(model, times).qs
    # reduced_interactive: step the drive DOF, kick at the first boundary >= t_f
    s = float(model.knot_s[0])
    sdot = float(model.drive_law(model.knot_t[0], 1))
    out = np.empty((len(times), n))
    hi = model.s_range[1]
    out[0] = model.slaves(min(s, hi))
    kicked = False
    from tellurion.reduction import reduced_step_interactive

    for k in range(1, len(times)):
        h = times[k] - times[k - 1]
        s, sdot = reduced_step_interactive(model, s, sdot, 0.0, h)
        if not kicked and times[k] >= protocol.t_f:
            sdot = apply_reduced_impulse(model, s, sdot, force.target, force.vector)
            kicked = True
        out[k] = model.slaves(min(s, hi))
    return out


def run_protocol(candidate: Candidate, protocol: Protocol) -> DistinguisherReport:
    """Full trial: observe, inject the force, compare against the physics model."""
    res = protocol.resolution
    eps = res.eps_q
    total = protocol.t_f + protocol.post_window
    n_steps = int(round(total / protocol.dt))
    times = np.array([k * protocol.dt for k in range(n_steps + 1)]) + protocol.init.t

    # reference reality, unperturbed, for the pre-phase bookkeeping
    ref = simulate(protocol.system, protocol.init, total, protocol.dt, protocol.method)
    cand_q = _candidate_positions(candidate, protocol, times)

    pre_mask = times <= protocol.init.t + protocol.pre_window
    pre_ref = measure(
        Trajectory(times[pre_mask], ref.qs[pre_mask], np.zeros_like(ref.qs[pre_mask])),
        res, source="reference",
    )
    pre_cand = measure(
        Trajectory(times[pre_mask], cand_q[pre_mask], np.zeros_like(cand_q[pre_mask])),
        res, source="candidate",
    )
    pre_equal = observably_equal(pre_ref, pre_cand)

    # the observer's Newtonian expectation: known init, known injected force
    force = dataclasses.replace(protocol.force, t_imp=protocol.t_f)
    pred = predict_newtonian(
        protocol.system, protocol.init, total, protocol.dt, [force], protocol.method
    )

    post_mask = times >= protocol.t_f
    post_t = times[post_mask]
    dq = quantize(cand_q[post_mask], eps) - quantize(pred.qs[post_mask][:, : protocol.system.n], eps)
    D = np.max(np.abs(dq), axis=1) / eps
    D_max = float(np.max(D)) if len(D) else 0.0

    if not pre_equal:
        verdict = Verdict.INCONCLUSIVE
    elif D_max <= protocol.pass_mult:
        verdict = Verdict.INDISTINGUISHABLE
    elif D_max >= protocol.fail_mult:
        verdict = Verdict.DISTINGUISHABLE_NONPHYSICAL
    else:
        verdict = Verdict.INCONCLUSIVE

    return DistinguisherReport(
        pre_equal=pre_equal,
        times=post_t,
        deviation=D,
        D_max=D_max,
        verdict=verdict,
        pass_mult=protocol.pass_mult,
        fail_mult=protocol.fail_mult,
        pre_phase_failed=not pre_equal,
        extra={"candidate": candidate.kind},
    )


def dof_criterion(p: int, n: int) -> bool:
    """Necessary condition for an interactive simulation: p >= n."""
    if p < 0 or n < 1:
        raise ValueError("need p >= 0 and n >= 1")
    return p >= n


def make_candidate(
    kind: str,
    system: PhysicalSystem,
    init: State,
    record_duration: float,
    dt: float,
    extras=(),
    extra_q=(),
    extra_qdot=(),
    method: str = "rk4",
) -> Candidate:
    """Build a trial candidate from the reference scenario.

    copy/padded candidates re-run the physics; reduced ones are built from a
    recording of length record_duration (which must cover the whole trial).
    """
    from tellurion.reduction import pad_noninteracting, pad_state

    if kind in ("real", "copy"):
        sys_ = system if kind == "real" else clone_copy(system)
        return Candidate(kind, system=sys_, init=init, p=sys_.n)
    if kind == "padded":
        padded = pad_noninteracting(clone_copy(system), extras)
        pinit = pad_state(padded, init, extra_q, extra_qdot)
        return Candidate(kind, system=padded.system, init=pinit, p=padded.m)
    if kind in ("reduced_kinematic", "reduced_interactive"):
        traj = simulate(system, init, record_duration, dt, method)
        drive = detect_drive_coordinate(traj)
        masses = [b.mass for b in system.movable]
        model = build_reduced(traj, drive, masses)
        return Candidate(kind, model=model, p=1)
    raise ValueError(f"unknown candidate kind {kind!r}")
