"""Live blind-trial sessions.

A session hides one of two candidates behind the wire protocol: the real
physics ("real") or the single-degree-of-freedom reduced model
("simulation"), drawn from a seeded RNG.  The client streams states and
frames, may inject impulses, and finally guesses which candidate it watched;
the reveal includes a distinguisher report over the session's recorded force
history.

The core here is transport-agnostic and deterministic: advancing happens in
simulation time per tick, forces take effect at the next integrator step
boundary, and identical (config, seed, scripted inputs) produce identical
outbound message sequences.  Transports live in tellurion.server.

Wire schemas (UTF-8 JSON, one message per line / WS frame):
  inbound:  {"type":"apply_force","body":str,"dp":[f,f,f]}
            {"type":"guess","value":"real"|"simulation"}
            {"type":"ping"}
  outbound: {"type":"state","t":f,"bodies":[{"name":str,"q":[f,f,f]},...]}
            {"type":"frame","t":f,"R":int,"C":int,"data":base64-PGM}
            {"type":"ack","force_id":int,"applies_at":f}
            {"type":"reveal","hidden":str,"correct":bool,"report":{...}}
            {"type":"error","msg":str}
"""

from __future__ import annotations

import base64
import math
import random
import uuid

import numpy as np

from tellurion.config import ConfigError, ScenarioConfig
from tellurion.distinguisher import (
    Candidate,
    Protocol,
    Verdict,
    run_protocol,
)
from tellurion.dynamics import SingularityError, State, simulate, step
from tellurion.observer import make_impulse
from tellurion.reduction import (
    apply_reduced_impulse,
    build_reduced,
    detect_drive_coordinate,
    reduced_step_interactive,
)
from tellurion.vrpipe import RegisterMatrix, WorldWindow, encode_pgm, render

__all__ = ["Session", "start_session"]

HIDDEN_KINDS = ("real", "simulation")


class Session:
    def __init__(self, config: ScenarioConfig, seed: int, session_id: str | None = None):
        self.id = session_id or uuid.uuid4().hex
        self.config = config
        self.system, self.init = config.system_and_init()
        self.dt = config.dt
        self.method = config.integrator
        sess = config.session_params()
        self.sim_per_tick = sess["sim_seconds_per_tick"]
        self.frame_every = sess["frame_every"]
        self.substeps = max(1, round(self.sim_per_tick / self.dt))
        if not math.isclose(self.substeps * self.dt, self.sim_per_tick, rel_tol=1e-9):
            raise ConfigError(
                "session.sim_seconds_per_tick: must be an integer multiple of dt"
            )
        rp = config.render_params()
        self.window = WorldWindow(*rp["window"])
        self.R, self.C = rp["R"], rp["C"]
        self.registers = RegisterMatrix(self.R, self.C)

        self.rng = random.Random(seed)
        self.hidden = self.rng.choice(HIDDEN_KINDS)
        self.phase = "running"
        self.failed = False
        self.clock = float(self.init.t)
        self.history: list[dict] = []
        self._queued: list[dict] = []
        self._next_force_id = 1
        self._tick_count = 0

        if self.hidden == "simulation":
            recording = simulate(
                self.system, self.init, config.duration, self.dt, self.method
            )
            drive = detect_drive_coordinate(recording)
            masses = [b.mass for b in self.system.movable]
            self.model = build_reduced(recording, drive, masses)
            self._s = float(self.model.knot_s[0])
            self._sdot = float(self.model.drive_law(self.model.knot_t[0], 1))
        else:
            self.model = None
            self._state = self.init

    # --- observation ------------------------------------------------------

    def _positions(self) -> State:
        if self.hidden == "simulation":
            s = min(self._s, self.model.s_range[1])
            q = self.model.slaves(s)
            qdot = self.model.slaves(s, 1) * self._sdot
            return State(self.clock, q, qdot)
        return self._state

    def state_message(self) -> dict:
        st = self._positions()
        bodies = []
        for b in self.system.bodies:
            q = list(b.position) if b.fixed else list(st.q[self.system.slots(b.name)])
            bodies.append({"name": b.name, "q": [float(x) for x in q]})
        return {"type": "state", "t": self.clock, "bodies": bodies}

    def frame_message(self) -> dict:
        frame = render(
            self.system, self._positions(), self.registers, self.window, self.R, self.C
        )
        data = base64.b64encode(encode_pgm(frame)).decode("ascii")
        return {"type": "frame", "t": self.clock, "R": self.R, "C": self.C, "data": data}

    # --- simulation -------------------------------------------------------

    def _apply_due_forces(self, t: float) -> None:
        due = [f for f in self._queued if f["applies_at"] <= t + 1e-12]
        self._queued = [f for f in self._queued if f not in due]
        for f in due:
            if self.hidden == "simulation":
                self._sdot = apply_reduced_impulse(
                    self.model, self._s, self._sdot, f["body"], f["dp"]
                )
            else:
                imp = make_impulse(f["body"], f["dp"], f["applies_at"])
                from tellurion.dynamics import apply_impulse

                self._state = apply_impulse(self.system, self._state, imp)

    def advance(self) -> list[dict]:
        """One server tick: advance sim time, emit state (and maybe a frame)."""
        if self.phase != "running" or self.failed:
            return [{"type": "error", "msg": "session is not running"}]
        try:
            for _ in range(self.substeps):
                t_next = self.clock + self.dt
                if self.hidden == "simulation":
                    self._s, self._sdot = reduced_step_interactive(
                        self.model, self._s, self._sdot, 0.0, self.dt
                    )
                else:
                    self._state = step(self.system, self._state, self.dt, self.method)
                self.clock = t_next
                self._apply_due_forces(self.clock)
        except (SingularityError, FloatingPointError) as e:
            self.failed = True
            return [{"type": "error", "msg": f"simulation failed: {e}"}]
        self._tick_count += 1
        out = [self.state_message()]
        if self._tick_count % self.frame_every == 0:
            out.append(self.frame_message())
        return out

    # --- inbound ----------------------------------------------------------

    def handle_force(self, body: str, dp) -> dict:
        if self.phase != "running":
            return {"type": "error", "msg": "session is not running"}
        try:
            spec = self.system.body(body)
        except KeyError:
            return {"type": "error", "msg": f"unknown body {body!r}"}
        if spec.fixed:
            return {"type": "error", "msg": f"body {body!r} is fixed and accepts no force"}
        dp = list(dp) if hasattr(dp, "__len__") else None
        if dp is None or len(dp) != 3 or not all(
            isinstance(x, (int, float)) and math.isfinite(x) for x in dp
        ):
            return {"type": "error", "msg": "dp must be a finite 3-vector"}
        applies_at = self.clock + self.dt  # next integrator step boundary
        force_id = self._next_force_id
        self._next_force_id += 1
        rec = {
            "force_id": force_id,
            "body": body,
            "dp": [float(x) for x in dp],
            "applies_at": applies_at,
        }
        self._queued.append(dict(rec))
        self.history.append(rec)
        return {"type": "ack", "force_id": force_id, "applies_at": applies_at}

    def handle_guess(self, value: str) -> dict:
        if self.phase != "running":
            return {"type": "error", "msg": "session already revealed"}
        if value not in HIDDEN_KINDS:
            return {"type": "error", "msg": f"guess must be one of {HIDDEN_KINDS}"}
        self.phase = "revealed"
        report = self._adjudicate()
        return {
            "type": "reveal",
            "hidden": self.hidden,
            "correct": value == self.hidden,
            "report": report,
        }

    def handle_message(self, msg: dict) -> dict | None:
        """Dispatch one validated inbound wire message."""
        if not isinstance(msg, dict) or "type" not in msg:
            return {"type": "error", "msg": "message needs a type field"}
        t = msg["type"]
        if t == "ping":
            return None
        if t == "apply_force":
            return self.handle_force(msg.get("body", ""), msg.get("dp"))
        if t == "guess":
            return self.handle_guess(msg.get("value", ""))
        return {"type": "error", "msg": f"unknown message type {t!r}"}

    # --- adjudication -----------------------------------------------------

    def _candidate(self) -> Candidate:
        if self.hidden == "simulation":
            return Candidate("reduced_interactive", model=self.model, p=1)
        return Candidate("real", system=self.system, init=self.init, p=self.system.n)

    def _adjudicate(self) -> dict:
        """Distinguisher report over the recorded force history.

        Uses the first recorded force as the injection event (later ones are
        noted but not re-adjudicated).  Without any effective force history
        the candidates are observably equivalent, so the verdict is
        INDISTINGUISHABLE by construction.
        """
        elapsed = self.clock - self.init.t
        res = self.config.resolution()
        applied = [f for f in self.history if any(f["dp"])]
        if not applied or self.clock - applied[0]["applies_at"] < self.dt:
            return {
                "pre_equal": True,
                "times": [],
                "deviation": [],
                "D_max": 0.0,
                "verdict": Verdict.INDISTINGUISHABLE.value,
                "pass_mult": 2.0,
                "fail_mult": 10.0,
                "pre_phase_failed": False,
                "note": "no force applied; observation alone cannot separate",
            }
        f0 = applied[0]
        t_f = f0["applies_at"] - self.init.t
        proto = Protocol(
            system=self.system,
            init=self.init,
            t_f=t_f,
            force=make_impulse(f0["body"], f0["dp"], t_f),
            pre_window=t_f,
            post_window=elapsed - t_f,
            resolution=res,
            dt=self.dt,
            method=self.method,
        )
        report = run_protocol(self._candidate(), proto)
        d = report.to_dict()
        if len(applied) > 1:
            d["note"] = f"{len(applied)} forces recorded; adjudicated on the first"
        return d


def start_session(config: ScenarioConfig, seed: int) -> Session:
    """Validate the config, draw the hidden candidate, initialize the clock."""
    return Session(config, seed)
