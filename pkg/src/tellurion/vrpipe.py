"""Register/pixel rendering pipe.

Memory is a fixed-size matrix of bit-backed cells; the headset screen is an
R x C pixel lattice whose published values must equal the bound register
cells exactly.  Pixels and registers are addressed 1-indexed with the flat
index i = (r-1)*C + c; external byte formats (PGM) stay 0-indexed row-major.

Rasterization is deliberately minimal: each body becomes a nearest-pixel
point mark with a fixed per-body intensity (defaults: sun 255, earth 170,
moon 85), background 0, half-open pixel cells [k, k+1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tellurion.dynamics import ExternalForce, PhysicalSystem, State

__all__ = [
    "RegisterMatrix",
    "PixelFrame",
    "ControllerState",
    "WorldWindow",
    "flat_index",
    "unflat_index",
    "render",
    "controller_to_force",
    "encode_pgm",
    "decode_pgm",
    "DEFAULT_INTENSITIES",
]

DEFAULT_INTENSITIES = (255, 170, 85, 212, 128, 42)


class RegisterMatrix:
    """N x M grid of fixed-width cells (each conceptually a row of bits)."""

    def __init__(self, N: int, M: int, bits: int = 8):
        if N < 1 or M < 1:
            raise ValueError("register matrix needs positive dimensions")
        if bits < 1:
            raise ValueError("cells need at least one bit")
        self._cells = np.zeros((N, M), dtype=np.int64)
        self.bits = bits

    @property
    def N(self) -> int:
        return self._cells.shape[0]

    @property
    def M(self) -> int:
        return self._cells.shape[1]

    def get(self, r: int, c: int) -> int:
        """1-indexed cell read."""
        self._check(r, c)
        return int(self._cells[r - 1, c - 1])

    def set(self, r: int, c: int, value: int) -> None:
        """1-indexed cell write; the value must fit the declared bit width."""
        self._check(r, c)
        if not 0 <= value < 2**self.bits:
            raise ValueError(f"value {value} does not fit in {self.bits} bits")
        self._cells[r - 1, c - 1] = value

    def block(self, R: int, C: int) -> np.ndarray:
        """Copy of the top-left R x C cells (0-indexed array)."""
        return self._cells[:R, :C].copy()

    def write_block(self, values: np.ndarray) -> None:
        v = np.asarray(values)
        if np.any(v < 0) or np.any(v >= 2**self.bits):
            raise ValueError(f"values do not fit in {self.bits} bits")
        R, C = v.shape
        if R > self.N or C > self.M:
            raise ValueError("block exceeds register matrix dimensions")
        self._cells[:R, :C] = v

    def snapshot(self) -> np.ndarray:
        return self._cells.copy()

    def _check(self, r: int, c: int) -> None:
        if not (1 <= r <= self.N and 1 <= c <= self.M):
            raise IndexError(f"register ({r},{c}) outside {self.N}x{self.M}")


@dataclass(frozen=True)
class PixelFrame:
    values: np.ndarray   # (R, C) intensities, published snapshot
    t: float

    @property
    def R(self) -> int:
        return self.values.shape[0]

    @property
    def C(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ControllerState:
    """Handheld pose (3 position + 3 orientation), buttons, analog trigger.

    Orientation is yaw/pitch/roll in radians (intrinsic z-y'-x''); the
    forward axis is +x rotated accordingly.
    """

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    orientation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    buttons: tuple[int, ...] = ()
    trigger: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.trigger <= 1.0:
            raise ValueError("trigger must lie in [0, 1]")
        if any(b not in (0, 1) for b in self.buttons):
            raise ValueError("buttons are bits")

    @property
    def forward(self) -> np.ndarray:
        yaw, pitch, _ = self.orientation
        cy, sy = np.cos(yaw), np.sin(yaw)
        cp, sp = np.cos(pitch), np.sin(pitch)
        return np.array([cy * cp, sy * cp, -sp])


@dataclass(frozen=True)
class WorldWindow:
    """Axis-aligned world rectangle mapped onto the pixel lattice."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("degenerate world window")

    def to_pixel(self, x: float, y: float, R: int, C: int):
        """1-indexed (row, col) of a world point, or None when clipped.

        Half-open cells: pixel (r, c) covers [edge_k, edge_{k+1}).  Rows run
        top-down (larger y is a smaller row number).
        """
        fx = (x - self.x_min) / (self.x_max - self.x_min) * C
        fy = (self.y_max - y) / (self.y_max - self.y_min) * R
        c = int(np.floor(fx)) + 1
        r = int(np.floor(fy)) + 1
        if 1 <= r <= R and 1 <= c <= C:
            return r, c
        return None


def flat_index(r: int, c: int, C: int) -> int:
    """1-indexed flat cell index i = (r-1)*C + c."""
    if r < 1 or not 1 <= c <= C:
        raise ValueError(f"indices ({r},{c}) out of range for C={C}")
    return (r - 1) * C + c

def unflat_index(i: int, C: int) -> tuple[int, int]:
    """Inverse of flat_index for 1 <= i."""
    if i < 1:
        raise ValueError("flat index starts at 1")
    return (i - 1) // C + 1, (i - 1) % C + 1


def render(
    system: PhysicalSystem,
    state: State,
    registers: RegisterMatrix,
    window: WorldWindow,
    R: int,
    C: int,
    intensities: dict[str, int] | None = None,
) -> PixelFrame:
    """Rasterize body positions into the registers, then publish the frame.

    Every body (fixed ones included) inside the window becomes one intensity
    mark; bodies outside are clipped silently.  Only the top-left R x C
    register cells are touched, and the published frame equals them exactly.
    """
    if R > registers.N or C > registers.M:
        raise ValueError("frame does not fit into the register matrix")
    if intensities is None:
        intensities = {
            b.name: DEFAULT_INTENSITIES[i % len(DEFAULT_INTENSITIES)]
            for i, b in enumerate(system.bodies)
        }
    cells = np.zeros((R, C), dtype=np.int64)
    for b in system.bodies:
        pos = np.asarray(b.position) if b.fixed else state.q[system.slots(b.name)]
        hit = window.to_pixel(pos[0], pos[1], R, C)
        if hit is not None:
            r, c = hit
            cells[r - 1, c - 1] = intensities[b.name]
    registers.write_block(cells)
    return PixelFrame(values=registers.block(R, C), t=state.t)


def controller_to_force(
    ctrl: ControllerState,
    F_max: float,
    target: str | None,
    t: float,
) -> ExternalForce:
    """Map a controller gesture to an impulse on the aimed body."""
    if not target:
        raise ValueError("no body aimed by the controller mapping")
    dp = ctrl.trigger * F_max * ctrl.forward
    return ExternalForce(target, "impulse", tuple(float(c) for c in dp), t_imp=t)


def encode_pgm(frame: PixelFrame, maxval: int = 255) -> bytes:
    """Binary PGM (P5), row-major, one byte per pixel."""
    v = frame.values
    if np.any(v < 0) or np.any(v > maxval):
        raise ValueError(f"intensity outside [0, {maxval}]")
    header = f"P5\n{frame.C} {frame.R}\n{maxval}\n".encode("ascii")
    return header + v.astype(np.uint8).tobytes()


def decode_pgm(data: bytes, t: float = 0.0) -> PixelFrame:
    """Inverse of encode_pgm for maxval <= 255."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5" or len(parts) != 4:
        raise ValueError("not a binary PGM stream")
    C, R = (int(x) for x in parts[1].split())
    maxval = int(parts[2])
    if maxval > 255:
        raise ValueError("only single-byte PGM supported")
    raw = np.frombuffer(parts[3][: R * C], dtype=np.uint8)
    if raw.size != R * C:
        raise ValueError("truncated PGM payload")
    return PixelFrame(values=raw.reshape(R, C).astype(np.int64), t=t)
