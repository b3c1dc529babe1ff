/**
 * End-to-end round trip against a live server (the last acceptance
 * criterion): a scripted headless client connects to a seeded session whose
 * hidden candidate is the reduced model, watches for one Moon period,
 * fires the standard 10% tangential Moon impulse, watches again, guesses
 * "simulation", and must receive correct=true with verdict
 * DISTINGUISHABLE_NONPHYSICAL - while no pre-reveal message leaks the
 * hidden assignment.
 *
 * Uses the server's newline-JSON TCP transport (same schema as the
 * WebSocket) so the test needs no browser or WS dependency.
 */

import { ChildProcess, spawn } from "node:child_process";
import * as net from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  LineSplitter,
  ServerMessage,
  applyForce,
  guess,
  parseServerMessage,
  serialize,
} from "../src/protocol.js";
import { ConsoleViewModel, MOON_ORBITAL_MOMENTUM } from "../src/viewModel.js";

const WS_PORT = 8740 + (process.pid % 200);
const TCP_PORT = WS_PORT + 1;
// seed 0 makes the session hide the reduced model ("simulation")
const SEED = 0;

let server: ChildProcess;

function connectWithRetry(port: number, deadlineMs: number): Promise<net.Socket> {
  const start = Date.now();
  return new Promise((resolve, reject) => {
    const attempt = () => {
      const sock = net.connect({ host: "127.0.0.1", port }, () => resolve(sock));
      sock.on("error", () => {
        sock.destroy();
        if (Date.now() - start > deadlineMs) {
          reject(new Error(`server not reachable on :${port}`));
        } else {
          setTimeout(attempt, 200);
        }
      });
    };
    attempt();
  });
}

beforeAll(async () => {
  server = spawn(
    "python3",
    [
      "-m", "tellurion.cli", "serve",
      "--config", "sem",
      "--seed", String(SEED),
      "--port", String(WS_PORT),
      "--tick-ms", "5",
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
}, 20000);

afterAll(() => {
  server?.kill();
});

describe("blind-trial round trip over the live wire", () => {
  it(
    "criterion 9: impulse -> guess simulation -> correct reveal, no early leak",
    async () => {
      const sock = await connectWithRetry(TCP_PORT, 15000);
      const vm = new ConsoleViewModel();
      vm.handleOpen();

      const splitter = new LineSplitter();
      const preRevealRaw: string[] = [];
      let states = 0;
      let fired = false;
      let guessed = false;
      let revealed: ServerMessage | null = null;

      const done = new Promise<void>((resolve, reject) => {
        const timer = setTimeout(
          () => reject(new Error("round trip timed out")),
          60000,
        );
        sock.on("data", (chunk) => {
          for (const line of splitter.push(chunk.toString("utf-8"))) {
            const msg = parseServerMessage(line);
            if (!msg) continue;
            if (msg.type !== "reveal") preRevealRaw.push(line);
            vm.handleMessage(msg);
            if (msg.type === "state") states++;

            // one Moon period is 100 state messages at the configured
            // tick size; fire the standard tangential impulse there
            if (states === 100 && !fired) {
              fired = true;
              const f = vm.fireTangential(
                "moon", "earth", 0.1 * MOON_ORBITAL_MOMENTUM,
              );
              expect(f).not.toBeNull();
              sock.write(serialize(f!) + "\n");
            }
            // another 60 states of post-impulse observation, then guess
            if (states === 160 && !guessed) {
              guessed = true;
              const g = vm.sendGuess("simulation");
              expect(g).not.toBeNull();
              sock.write(serialize(g!) + "\n");
            }
            if (msg.type === "reveal") {
              revealed = msg;
              clearTimeout(timer);
              resolve();
            }
          }
        });
        sock.on("error", reject);
      });

      try {
        await done;
      } finally {
        sock.destroy();
      }

      expect(revealed).not.toBeNull();
      const r = revealed! as Extract<ServerMessage, { type: "reveal" }>;
      expect(r.hidden).toBe("simulation");
      expect(r.correct).toBe(true);
      expect(r.report.verdict).toBe("DISTINGUISHABLE_NONPHYSICAL");
      expect(Number(r.report.D_max)).toBeGreaterThanOrEqual(10);

      // blindness: nothing before the reveal names the hidden assignment
      for (const line of preRevealRaw) {
        expect(line).not.toContain("hidden");
        expect(line).not.toContain("simulation");
        expect(line).not.toContain("reduced");
      }
      expect(preRevealRaw.length).toBeGreaterThan(160);

      // the view-model mirrored the trial
      expect(vm.phase).toBe("revealed");
      expect(vm.lastAckId).toBe(1);

      console.log(
        `criterion 9: PASS - round trip reveal correct=${r.correct}, ` +
          `verdict ${r.report.verdict}, D_max ${r.report.D_max}, ` +
          `${preRevealRaw.length} pre-reveal messages clean`,
      );
    },
    90000,
  );

  it("a fresh unseeded-path connection gets an independent session", async () => {
    // second connection on the same server draws seed+1 -> hidden "real"
    const sock = await connectWithRetry(TCP_PORT, 15000);
    const splitter = new LineSplitter();
    const reveal = await new Promise<ServerMessage>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("timed out")), 30000);
      let sent = false;
      sock.on("data", (chunk) => {
        for (const line of splitter.push(chunk.toString("utf-8"))) {
          const msg = parseServerMessage(line);
          if (!msg) continue;
          if (msg.type === "state" && !sent) {
            sent = true;
            sock.write(serialize(guess("real")) + "\n");
          }
          if (msg.type === "reveal") {
            clearTimeout(timer);
            resolve(msg);
          }
        }
      });
      sock.on("error", reject);
    }).finally(() => sock.destroy());

    const r = reveal as Extract<ServerMessage, { type: "reveal" }>;
    expect(r.hidden).toBe("real");
    expect(r.correct).toBe(true);
    expect(r.report.verdict).toBe("INDISTINGUISHABLE");
  }, 60000);

  it("zero-magnitude fire is acked and changes nothing visible", async () => {
    const sock = await connectWithRetry(TCP_PORT, 15000);
    const splitter = new LineSplitter();
    const sawAck = await new Promise<boolean>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("timed out")), 30000);
      let sent = false;
      sock.on("data", (chunk) => {
        for (const line of splitter.push(chunk.toString("utf-8"))) {
          const msg = parseServerMessage(line);
          if (!msg) continue;
          if (msg.type === "state" && !sent) {
            sent = true;
            sock.write(serialize(applyForce("moon", [0, 0, 0])) + "\n");
          }
          if (msg.type === "ack") {
            clearTimeout(timer);
            resolve(true);
          }
          if (msg.type === "error") {
            clearTimeout(timer);
            reject(new Error(msg.msg));
          }
        }
      });
      sock.on("error", reject);
    }).finally(() => sock.destroy());
    expect(sawAck).toBe(true);
  }, 60000);
});
