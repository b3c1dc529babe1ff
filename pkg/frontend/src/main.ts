/**
 * Browser bootstrap: wires the view-model to a WebSocket session and the
 * DOM controls in index.html. All logic lives in the view-model; this file
 * is plumbing only.
 */

import { parseServerMessage, serialize, ClientMessage } from "./protocol.js";
import {
  ConsoleViewModel,
  MOON_ORBITAL_MOMENTUM,
} from "./viewModel.js";
import { Surface, renderPixels, renderVector } from "./render.js";

function canvasSurface(canvas: HTMLCanvasElement): Surface {
  const ctx = canvas.getContext("2d")!;
  return {
    width: canvas.width,
    height: canvas.height,
    clear() {
      ctx.fillStyle = "#000000";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
    },
    circle(x, y, radius, color, fill) {
      ctx.beginPath();
      ctx.arc(x, y, radius, 0, 2 * Math.PI);
      if (fill) {
        ctx.fillStyle = color;
        ctx.fill();
      } else {
        ctx.strokeStyle = color;
        ctx.stroke();
      }
    },
    rect(x, y, w, h, color) {
      ctx.fillStyle = color;
      ctx.fillRect(x, y, w, h);
    },
    text(x, y, s, color) {
      ctx.fillStyle = color;
      ctx.fillText(s, x, y);
    },
  };
}

function start(): void {
  const vm = new ConsoleViewModel();
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const surface = canvasSurface(canvas);
  const banner = document.getElementById("banner")!;
  const revealPanel = document.getElementById("reveal")!;
  const controls = document.querySelectorAll<HTMLButtonElement>("button");

  const url = new URLSearchParams(location.search).get("server") ??
    `ws://${location.hostname}:8600/ws`;
  const ws = new WebSocket(url);

  const send = (msg: ClientMessage | null) => {
    if (msg) ws.send(serialize(msg));
  };

  ws.onopen = () => {
    vm.handleOpen();
    banner.textContent = "connected";
  };
  ws.onclose = () => {
    vm.handleClose();
    banner.textContent = "connection lost - reload to reconnect";
    controls.forEach((b) => (b.disabled = true));
  };
  ws.onmessage = (ev) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg) vm.handleMessage(msg);
    if (vm.reveal) {
      const r = vm.reveal;
      revealPanel.textContent =
        `hidden: ${r.hidden} - guess ${r.correct ? "correct" : "wrong"} - ` +
        `verdict ${r.report.verdict} (D_max ${Number(r.report.D_max).toFixed(1)})`;
    }
  };

  (document.getElementById("body") as HTMLSelectElement).onchange = (e) => {
    vm.controls.body = (e.target as HTMLSelectElement).value;
  };
  (document.getElementById("angle") as HTMLInputElement).oninput = (e) => {
    vm.controls.angleDeg = Number((e.target as HTMLInputElement).value);
  };
  (document.getElementById("magnitude") as HTMLInputElement).oninput = (e) => {
    // slider is in units of 1% Moon orbital momentum
    vm.controls.magnitude =
      Number((e.target as HTMLInputElement).value) * 0.01 * MOON_ORBITAL_MOMENTUM;
  };
  document.getElementById("fire")!.onclick = () => send(vm.fireForce());
  document.getElementById("fire-tangential")!.onclick = () =>
    send(vm.fireTangential("moon", "earth", 0.1 * MOON_ORBITAL_MOMENTUM));
  document.getElementById("guess-real")!.onclick = () => send(vm.sendGuess("real"));
  document.getElementById("guess-sim")!.onclick = () =>
    send(vm.sendGuess("simulation"));
  document.getElementById("toggle-view")!.onclick = () => vm.toggleView();

  const draw = () => {
    if (vm.view === "pixels" && vm.latestFrame) {
      renderPixels(surface, vm.latestFrame);
    } else if (vm.latestState) {
      renderVector(surface, vm.latestState);
    }
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
