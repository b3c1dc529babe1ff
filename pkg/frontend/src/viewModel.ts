/**
 * Console view-model: a pure state machine over wire messages and user
 * gestures. All rendering reads from here; no client-side physics.
 *
 * The model mirrors the server's phase machine (running -> revealed) and by
 * construction cannot display the hidden assignment early: the only field
 * that ever holds it is populated from a reveal message.
 */

import {
  ApplyForceMessage,
  GuessMessage,
  RevealMessage,
  ServerMessage,
  StateMessage,
  applyForce,
  guess,
} from "./protocol.js";
import { PgmImage, base64ToBytes, decodePgm } from "./pgm.js";

export type ConnectionState = "connecting" | "open" | "closed";
export type TrialPhase = "running" | "revealed";
export type ViewKind = "vector" | "pixels";

export interface ForceControls {
  body: string;
  /** direction dial, degrees counter-clockwise from +x, in the orbit plane */
  angleDeg: number;
  magnitude: number;
}

/** Nondimensional Moon orbital momentum: m * omega * r = 1e-5 * sqrt(8) * 0.05 */
export const MOON_ORBITAL_MOMENTUM = 1e-5 * Math.sqrt(8) * 0.05;

export class ConsoleViewModel {
  connection: ConnectionState = "connecting";
  phase: TrialPhase = "running";
  view: ViewKind = "vector";

  latestState: StateMessage | null = null;
  latestFrame: PgmImage | null = null;
  frameTime = 0;
  reveal: RevealMessage | null = null;
  lastAckId = 0;
  lastError = "";

  controls: ForceControls = { body: "moon", angleDeg: 90, magnitude: 0 };

  private sentGuess = false;

  handleOpen(): void {
    this.connection = "open";
  }

  handleClose(): void {
    this.connection = "closed";
  }

  handleMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case "state":
        this.latestState = msg;
        break;
      case "frame":
        this.latestFrame = decodePgm(base64ToBytes(msg.data));
        this.frameTime = msg.t;
        break;
      case "ack":
        this.lastAckId = msg.force_id;
        break;
      case "reveal":
        this.reveal = msg;
        this.phase = "revealed";
        break;
      case "error":
        this.lastError = msg.msg;
        break;
    }
  }

  body(name: string): [number, number, number] | null {
    const b = this.latestState?.bodies.find((x) => x.name === name);
    return b ? b.q : null;
  }

  /**
   * One fire gesture -> exactly one message, or null if firing is not
   * currently possible (no connection, trial over). The dial angle is
   * interpreted in the orbit plane.
   */
  fireForce(): ApplyForceMessage | null {
    if (this.connection !== "open" || this.phase !== "running") return null;
    const a = (this.controls.angleDeg * Math.PI) / 180;
    const m = this.controls.magnitude;
    return applyForce(this.controls.body, [m * Math.cos(a), m * Math.sin(a), 0]);
  }

  /**
   * Preset: impulse perpendicular to the target's position relative to its
   * primary (i.e. along the orbit), with the given magnitude. Returns null
   * until a state has arrived.
   */
  fireTangential(
    body: string,
    primary: string,
    magnitude: number,
  ): ApplyForceMessage | null {
    if (this.connection !== "open" || this.phase !== "running") return null;
    const b = this.body(body);
    const p = this.body(primary);
    if (!b || !p) return null;
    const rx = b[0] - p[0];
    const ry = b[1] - p[1];
    const norm = Math.hypot(rx, ry);
    if (norm === 0) return null;
    return applyForce(body, [
      (-ry / norm) * magnitude,
      (rx / norm) * magnitude,
      0,
    ]);
  }

  /** One guess gesture -> one message; repeated gestures are swallowed. */
  sendGuess(value: "real" | "simulation"): GuessMessage | null {
    if (this.connection !== "open" || this.phase !== "running") return null;
    if (this.sentGuess) return null;
    this.sentGuess = true;
    return guess(value);
  }

  toggleView(): void {
    this.view = this.view === "vector" ? "pixels" : "vector";
  }
}
