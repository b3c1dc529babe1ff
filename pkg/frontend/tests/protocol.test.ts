import { describe, expect, it } from "vitest";

import {
  LineSplitter,
  applyForce,
  guess,
  parseServerMessage,
  serialize,
} from "../src/protocol.js";

describe("parseServerMessage", () => {
  it("accepts each valid message type", () => {
    const state = parseServerMessage(
      JSON.stringify({
        type: "state",
        t: 1.5,
        bodies: [{ name: "moon", q: [1.05, 0, 0] }],
      }),
    );
    expect(state?.type).toBe("state");

    const frame = parseServerMessage(
      JSON.stringify({ type: "frame", t: 0, R: 64, C: 64, data: "UDU=" }),
    );
    expect(frame?.type).toBe("frame");

    const ack = parseServerMessage(
      JSON.stringify({ type: "ack", force_id: 3, applies_at: 2.2 }),
    );
    expect(ack?.type).toBe("ack");

    const reveal = parseServerMessage(
      JSON.stringify({
        type: "reveal",
        hidden: "simulation",
        correct: true,
        report: { verdict: "DISTINGUISHABLE_NONPHYSICAL", D_max: 103 },
      }),
    );
    expect(reveal?.type).toBe("reveal");

    const err = parseServerMessage(JSON.stringify({ type: "error", msg: "x" }));
    expect(err?.type).toBe("error");
  });

  it("rejects malformed documents", () => {
    expect(parseServerMessage("{nope")).toBeNull();
    expect(parseServerMessage("42")).toBeNull();
    expect(parseServerMessage(JSON.stringify({ type: "warp" }))).toBeNull();
    expect(
      parseServerMessage(JSON.stringify({ type: "state", t: "soon", bodies: [] })),
    ).toBeNull();
    expect(
      parseServerMessage(
        JSON.stringify({ type: "state", t: 0, bodies: [{ name: "m", q: [1, 2] }] }),
      ),
    ).toBeNull();
    expect(
      parseServerMessage(JSON.stringify({ type: "reveal", hidden: "maybe" })),
    ).toBeNull();
  });
});

describe("client message builders", () => {
  it("serialize to the wire schema", () => {
    expect(JSON.parse(serialize(applyForce("moon", [0, 1e-7, 0])))).toEqual({
      type: "apply_force",
      body: "moon",
      dp: [0, 1e-7, 0],
    });
    expect(JSON.parse(serialize(guess("real")))).toEqual({
      type: "guess",
      value: "real",
    });
  });
});

describe("LineSplitter", () => {
  it("reassembles lines across arbitrary chunk boundaries", () => {
    const s = new LineSplitter();
    expect(s.push('{"a":')).toEqual([]);
    expect(s.push('1}\n{"b":2}\n{"c"')).toEqual(['{"a":1}', '{"b":2}']);
    expect(s.push(":3}\n")).toEqual(['{"c":3}']);
  });

  it("ignores empty lines", () => {
    const s = new LineSplitter();
    expect(s.push("\n\n{\"x\":1}\n\n")).toEqual(['{"x":1}']);
  });
});
