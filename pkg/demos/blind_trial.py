"""Run the force-injection trial against three candidate systems.

An observer who can only *watch* cannot tell the reduced one-degree-of-
freedom model from the real thing (that's the point of the reduction).  An
observer who may also *push* can: inject a tangential impulse at the Moon
and compare the response against the Newtonian prediction.  A faithful copy
(and even a copy padded with an extra non-interacting body) absorbs the
impulse exactly as real physics would; the reduced model can only speed up
or slow down along its frozen orbit, and the deviation explodes.

Run:  python3 demos/blind_trial.py
"""

from tellurion import SEM_MOON_PERIOD, sun_earth_moon
from tellurion.config import load_config
from tellurion.distinguisher import (
    Protocol,
    dof_criterion,
    make_candidate,
    run_protocol,
)
from tellurion.dynamics import BodySpec
from tellurion.observer import Resolution

TM = SEM_MOON_PERIOD


def main():
    system, init = sun_earth_moon()
    cfg = load_config("sem")
    dt = TM / 1000
    protocol = Protocol(
        system=system,
        init=init,
        t_f=TM,
        force=cfg.build_impulse(system, init),
        pre_window=TM,
        post_window=TM,
        resolution=Resolution(1e-3, dt),
        dt=dt,
    )
    record = protocol.t_f + protocol.post_window

    candidates = {
        "copy": make_candidate("copy", system, init, record, dt),
        "padded": make_candidate(
            "padded", system, init, record, dt,
            extras=[BodySpec("drifter", mass=0.1)],
            extra_q=[5.0, 5.0, 5.0], extra_qdot=[0.0, 0.05, 0.0],
        ),
        "reduced": make_candidate("reduced_interactive", system, init, record, dt),
    }

    print(f"impulse: 10% of the Moon's orbital momentum, tangential, at t = {TM:.4f}")
    print(f"{'candidate':<10} {'dof':>4} {'p>=n':>5} {'D_max':>8}  verdict")
    for name, cand in candidates.items():
        report = run_protocol(cand, protocol)
        print(f"{name:<10} {cand.p:>4} {str(dof_criterion(cand.p, system.n)):>5} "
              f"{report.D_max:>8.2f}  {report.verdict.value}")


if __name__ == "__main__":
    main()
