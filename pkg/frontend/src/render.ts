/**
 * Read-only renderers over the view-model. Drawing goes through a minimal
 * 2D surface interface so tests can use a recording fake instead of a
 * canvas.
 */

import { PgmImage } from "./pgm.js";
import { StateMessage } from "./protocol.js";

export interface Surface {
  readonly width: number;
  readonly height: number;
  clear(): void;
  circle(x: number, y: number, radius: number, color: string, fill: boolean): void;
  rect(x: number, y: number, w: number, h: number, color: string): void;
  text(x: number, y: number, s: string, color: string): void;
}

export interface WorldWindow {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export const DEFAULT_WINDOW: WorldWindow = {
  xMin: -1.2,
  xMax: 1.2,
  yMin: -1.2,
  yMax: 1.2,
};

const BODY_STYLE: Record<string, { color: string; radius: number }> = {
  sun: { color: "#f5c542", radius: 8 },
  earth: { color: "#4287f5", radius: 4 },
  moon: { color: "#c0c0c0", radius: 2 },
};

export function worldToScreen(
  x: number,
  y: number,
  win: WorldWindow,
  surface: Surface,
): [number, number] {
  const sx = ((x - win.xMin) / (win.xMax - win.xMin)) * surface.width;
  // screen y grows downward
  const sy = ((win.yMax - y) / (win.yMax - win.yMin)) * surface.height;
  return [sx, sy];
}

/** Vector view: orbit guide circles plus one dot per body. */
export function renderVector(
  surface: Surface,
  state: StateMessage,
  win: WorldWindow = DEFAULT_WINDOW,
): void {
  surface.clear();
  const [cx, cy] = worldToScreen(0, 0, win, surface);
  const unit = surface.width / (win.xMax - win.xMin);
  surface.circle(cx, cy, unit * 1.0, "#333333", false); // earth orbit guide
  for (const b of state.bodies) {
    const style = BODY_STYLE[b.name] ?? { color: "#ffffff", radius: 3 };
    const [sx, sy] = worldToScreen(b.q[0], b.q[1], win, surface);
    surface.circle(sx, sy, style.radius, style.color, true);
  }
  surface.text(4, 12, `t = ${state.t.toFixed(3)}`, "#888888");
}

/** Pixel view: the streamed register/pixel frame, scaled to the surface. */
export function renderPixels(surface: Surface, frame: PgmImage): void {
  surface.clear();
  const cellW = surface.width / frame.cols;
  const cellH = surface.height / frame.rows;
  for (let r = 0; r < frame.rows; r++) {
    for (let c = 0; c < frame.cols; c++) {
      const v = frame.pixels[r * frame.cols + c];
      if (v === 0) continue;
      const hex = v.toString(16).padStart(2, "0");
      surface.rect(c * cellW, r * cellH, cellW, cellH, `#${hex}${hex}${hex}`);
    }
  }
}
