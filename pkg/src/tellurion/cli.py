"""Batch command line: simulate | reduce | distinguish | render | serve.

Exit codes: 0 success, 2 config error, 3 monotone-drive hypothesis failure,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from tellurion.config import ConfigError, load_config
from tellurion.distinguisher import make_candidate, run_protocol, Protocol
from tellurion.dynamics import (
    BodySpec,
    SingularityError,
    State,
    Trajectory,
    simulate,
)
from tellurion.reduction import (
    DriveCoordinate,
    NoMonotoneCoordinate,
    ReducedModel,
    build_reduced,
    detect_drive_coordinate,
    playback,
)
from tellurion.vrpipe import RegisterMatrix, WorldWindow, encode_pgm, render

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_NUMERIC = 4

MODEL_FORMAT = "tellurion-reduced-model/1"

log = logging.getLogger("tellurion")


# --- trajectory CSV --------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    names = traj.meta["bodies"]
    cols = ["t"]
    for n in names:
        cols += [f"{n}_x", f"{n}_y", f"{n}_z"]
    for n in names:
        cols += [f"{n}_vx", f"{n}_vy", f"{n}_vz"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(len(traj)):
            row = [traj.times[k], *traj.qs[k], *traj.qdots[k]]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_trajectory_csv(path: Path) -> Trajectory:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.array(
            [[float(v) for v in line.split(",")] for line in fh if line.strip()]
        )
    if header[0] != "t" or (len(header) - 1) % 6 != 0:
        raise ValueError(f"{path}: not a trajectory CSV")
    n = (len(header) - 1) // 2
    names = [h[:-2] for h in header[1 : 1 + n : 3]]
    if data.ndim != 2:
        data = data.reshape(1, -1)
    return Trajectory(
        data[:, 0], data[:, 1 : 1 + n], data[:, 1 + n :], meta={"bodies": names}
    )


# --- reduced model artifact -------------------------------------------------

def model_to_dict(model: ReducedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "drive": {
            "chart": model.drive.chart,
            "index": model.drive.index,
            "body": model.drive.body,
            "direction": model.drive.direction,
            "margin": model.drive.margin,
        },
        "bodies": list(model.bodies),
        "masses": list(model.masses),
        "knot_t": model.knot_t.tolist(),
        "knot_s": model.knot_s.tolist(),
        "knot_q": model.knot_q.tolist(),
        "knot_dqds": model.knot_dqds.tolist(),
    }


def model_from_dict(d: dict) -> ReducedModel:
    if d.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {d.get('format')!r}")
    from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

    drive = DriveCoordinate(**d["drive"])
    t = np.array(d["knot_t"])
    s = np.array(d["knot_s"])
    q = np.array(d["knot_q"])
    dqds = np.array(d["knot_dqds"])
    return ReducedModel(
        drive=drive,
        knot_t=t,
        knot_s=s,
        knot_q=q,
        knot_dqds=dqds,
        bodies=tuple(d["bodies"]),
        masses=tuple(d["masses"]),
        drive_law=PchipInterpolator(t, s),
        slaves=CubicHermiteSpline(s, q, dqds),
    )


# --- commands ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    system, init = cfg.system_and_init()
    duration = args.duration if args.duration is not None else cfg.duration
    traj = simulate(system, init, duration, cfg.dt, cfg.integrator)
    out = Path(args.out or "trajectory.csv")
    write_trajectory_csv(traj, out)
    print(f"wrote {len(traj)} samples to {out}")
    if "aborted_at" in traj.meta:
        print(f"integration aborted at sample {traj.meta['aborted_at']}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_reduce(args) -> int:
    cfg = load_config(args.config)
    traj = read_trajectory_csv(Path(args.trajectory))
    stride = cfg.knot_stride
    knots = Trajectory(
        traj.times[::stride], traj.qs[::stride], traj.qdots[::stride], meta=traj.meta
    )
    charts = []
    if "cartesian" in cfg.reduction_charts():
        charts += [DriveCoordinate("cartesian", index=i) for i in range(knots.qs.shape[1])]
    if "cylindrical" in cfg.reduction_charts():
        charts += [DriveCoordinate("cylindrical", body=b) for b in knots.meta["bodies"]]
    drive = detect_drive_coordinate(knots, charts)
    system, _ = cfg.system_and_init()
    masses = [b.mass for b in system.movable]
    model = build_reduced(knots, drive, masses)
    residual = float(np.max(np.abs(playback(model, knots.times).qs - knots.qs)))
    out = Path(args.out or "model.json")
    out.write_text(json.dumps(model_to_dict(model)))
    summary = {
        "drive": drive.label,
        "chart": drive.chart,
        "direction": drive.direction,
        "margin": drive.margin,
        "knots": len(knots),
        "dof": model.p,
        "max_knot_residual": residual,
        "valid": list(model.valid),
    }
    Path(str(out) + ".summary.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_distinguish(args) -> int:
    cfg = load_config(args.config)
    system, init = cfg.system_and_init()
    params = cfg.protocol_params()
    force = cfg.build_impulse(system, init)
    total = params["t_f"] + params["post_window"]
    record = max(cfg.duration, total)
    kind = {"copy": "copy", "padded": "padded", "reduced": "reduced_interactive"}[
        args.candidate
    ]
    extras = {}
    if kind == "padded":
        extras = dict(
            extras=[BodySpec("drifter", mass=0.1)],
            extra_q=[5.0, 5.0, 5.0],
            extra_qdot=[0.0, 0.05, 0.0],
        )
    candidate = make_candidate(
        kind, system, init, record, cfg.dt, method=cfg.integrator, **extras
    )
    protocol = Protocol(
        system=system,
        init=init,
        t_f=params["t_f"],
        force=force,
        pre_window=params["pre_window"],
        post_window=params["post_window"],
        resolution=cfg.resolution(),
        dt=cfg.dt,
        method=cfg.integrator,
        pass_mult=params["pass_mult"],
        fail_mult=params["fail_mult"],
    )
    report = run_protocol(candidate, protocol)
    payload = report.to_dict()
    payload["candidate"] = args.candidate
    payload["dof"] = candidate.p
    payload["n"] = system.n
    out = Path(args.out or "report.json")
    out.write_text(json.dumps(payload, indent=2))
    print(f"candidate={args.candidate} D_max={report.D_max:.3f} verdict={report.verdict.value}")
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = load_config(args.config)
    system, _ = cfg.system_and_init()
    rp = cfg.render_params()
    traj = read_trajectory_csv(Path(args.trajectory))
    outdir = Path(args.out or "frames")
    outdir.mkdir(parents=True, exist_ok=True)
    regs = RegisterMatrix(rp["R"], rp["C"])
    window = WorldWindow(*rp["window"])
    count = 0
    for k in range(0, len(traj), args.every):
        frame = render(
            system, traj.state(k), regs, window, rp["R"], rp["C"], rp["intensities"]
        )
        if not np.array_equal(frame.values, regs.block(rp["R"], rp["C"])):
            print(f"frame {k}: pixel/register identity violated", file=sys.stderr)
            return EXIT_NUMERIC
        data = encode_pgm(frame)
        (outdir / f"frame_{count:06d}.pgm").write_bytes(data)
        checksum = hashlib.sha256(data).hexdigest()[:16]
        print(f"frame {count} t={frame.t:.6f} V==C ok sha256={checksum}")
        count += 1
    print(f"wrote {count} frames to {outdir}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from tellurion.server import run_server

    cfg = load_config(args.config)
    cfg.system_and_init()  # validate before binding the port
    print(f"serving ws://{args.host}:{args.port}/ws (tcp fallback on {args.port + 1})")
    run_server(cfg, args.port, args.seed, args.tick_ms, host=args.host)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tellurion")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="scenario YAML or bundled name (e.g. sem)")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("simulate", help="integrate a scenario to a trajectory CSV")
    common(sp)
    sp.add_argument("--duration", type=float, help="override config duration")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reduce", help="build a single-DOF reduced model from a trajectory")
    common(sp)
    sp.add_argument("trajectory", help="input trajectory CSV")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("distinguish", help="run the force-injection trial")
    common(sp)
    sp.add_argument(
        "--candidate", choices=["copy", "padded", "reduced"], required=True
    )
    sp.set_defaults(func=cmd_distinguish)

    sp = sub.add_parser("render", help="rasterize a trajectory to PGM frames")
    common(sp)
    sp.add_argument("trajectory", help="input trajectory CSV")
    sp.add_argument("--every", type=int, default=1, help="render every k-th sample")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("serve", help="run the blind-trial session server")
    common(sp)
    sp.add_argument("--port", type=int, default=8600)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--tick-ms", type=float, default=50.0)
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NoMonotoneCoordinate as e:
        print(f"hypothesis failure: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (SingularityError, FloatingPointError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
