/**
 * Wire protocol spoken by the session server.
 *
 * One JSON document per WebSocket frame (or per newline on the TCP
 * fallback). The console never interprets anything beyond these schemas,
 * and the server never discloses the hidden candidate before a reveal.
 */

export interface BodyState {
  name: string;
  q: [number, number, number];
}

export interface StateMessage {
  type: "state";
  t: number;
  bodies: BodyState[];
}

export interface FrameMessage {
  type: "frame";
  t: number;
  R: number;
  C: number;
  /** base64-encoded binary PGM (P5) */
  data: string;
}

export interface AckMessage {
  type: "ack";
  force_id: number;
  applies_at: number;
}

export interface RevealMessage {
  type: "reveal";
  hidden: "real" | "simulation";
  correct: boolean;
  report: {
    verdict: string;
    D_max: number;
    [key: string]: unknown;
  };
}

export interface ErrorMessage {
  type: "error";
  msg: string;
}

export type ServerMessage =
  | StateMessage
  | FrameMessage
  | AckMessage
  | RevealMessage
  | ErrorMessage;

export interface ApplyForceMessage {
  type: "apply_force";
  body: string;
  dp: [number, number, number];
}

export interface GuessMessage {
  type: "guess";
  value: "real" | "simulation";
}

export interface PingMessage {
  type: "ping";
}

export type ClientMessage = ApplyForceMessage | GuessMessage | PingMessage;

const isVec3 = (v: unknown): v is [number, number, number] =>
  Array.isArray(v) && v.length === 3 && v.every((x) => typeof x === "number");

/** Parse one inbound document; null for anything malformed or unknown. */
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const m = raw as Record<string, unknown>;
  switch (m.type) {
    case "state":
      if (
        typeof m.t === "number" &&
        Array.isArray(m.bodies) &&
        m.bodies.every(
          (b: unknown) =>
            typeof b === "object" &&
            b !== null &&
            typeof (b as BodyState).name === "string" &&
            isVec3((b as BodyState).q),
        )
      )
        return m as unknown as StateMessage;
      return null;
    case "frame":
      if (
        typeof m.t === "number" &&
        typeof m.R === "number" &&
        typeof m.C === "number" &&
        typeof m.data === "string"
      )
        return m as unknown as FrameMessage;
      return null;
    case "ack":
      if (typeof m.force_id === "number" && typeof m.applies_at === "number")
        return m as unknown as AckMessage;
      return null;
    case "reveal":
      if (
        (m.hidden === "real" || m.hidden === "simulation") &&
        typeof m.correct === "boolean" &&
        typeof m.report === "object" &&
        m.report !== null
      )
        return m as unknown as RevealMessage;
      return null;
    case "error":
      if (typeof m.msg === "string") return m as unknown as ErrorMessage;
      return null;
    default:
      return null;
  }
}

export const applyForce = (
  body: string,
  dp: [number, number, number],
): ApplyForceMessage => ({ type: "apply_force", body, dp });

export const guess = (value: "real" | "simulation"): GuessMessage => ({
  type: "guess",
  value,
});

export const serialize = (msg: ClientMessage): string => JSON.stringify(msg);

/**
 * Incremental splitter for the newline-delimited TCP framing. Feeding it
 * arbitrary chunk boundaries yields exactly the complete lines.
 */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const parts = this.buffer.split("\n");
    this.buffer = parts.pop() ?? "";
    return parts.filter((p) => p.length > 0);
  }
}
