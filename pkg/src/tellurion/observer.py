"""Resolution-limited observation.

The observer owns a meter with length quantum ``eps_q`` and a clock with time
quantum ``eps_t``.  Every reading is snapped to the instrument grid, and two
systems are "observably equal" when their collapsed reading sequences are
identical — an all-or-nothing predicate rather than a tolerance band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tellurion.dynamics import ExternalForce, Trajectory

__all__ = [
    "Resolution",
    "MeasurementSeries",
    "quantize",
    "measure",
    "observably_equal",
    "make_impulse",
]


@dataclass(frozen=True)
class Resolution:
    eps_q: float
    eps_t: float

    def __post_init__(self):
        if self.eps_q <= 0 or self.eps_t <= 0:
            raise ValueError("resolution quanta must be positive")


@dataclass(frozen=True)
class MeasurementSeries:
    resolution: Resolution
    times: np.ndarray       # quantized, non-decreasing
    values: np.ndarray      # (len(times), n_coords), quantized
    source: str = ""

    def __len__(self):
        return len(self.times)


def quantize(x, eps: float):
    """Snap to the nearest multiple of eps; exact halves round away from zero."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    k = np.sign(x) * np.floor(np.abs(x) / eps + 0.5)
    out = k * eps
    return float(out) if out.ndim == 0 else out


def _collapse(times: np.ndarray, values: np.ndarray):
    """Drop consecutive rows whose time and values repeat the previous row."""
    if len(times) == 0:
        return times, values
    keep = [0]
    for k in range(1, len(times)):
        if times[k] != times[keep[-1]] or not np.array_equal(values[k], values[keep[-1]]):
            keep.append(k)
    return times[keep], values[keep]


def measure(traj: Trajectory, res: Resolution, source: str = "") -> MeasurementSeries:
    """Read off a trajectory with a finite-resolution meter and clock."""
    if len(traj) == 0:
        raise ValueError("cannot measure an empty trajectory")
    t = quantize(traj.times, res.eps_t)
    q = quantize(traj.qs, res.eps_q)
    t, q = _collapse(t, q)
    return MeasurementSeries(res, t, q, source)


def measure_series(times, values, res: Resolution, source: str = "") -> MeasurementSeries:
    """Like `measure`, for raw (times, values) arrays instead of a Trajectory."""
    t = quantize(np.asarray(times, float), res.eps_t)
    q = quantize(np.asarray(values, float), res.eps_q)
    t, q = _collapse(t, q)
    return MeasurementSeries(res, t, q, source)


def observably_equal(a: MeasurementSeries, b: MeasurementSeries) -> bool:
    """True iff the two collapsed reading sequences are identical.

    Comparing across different instruments is undefined and raises.
    Callers must project both series to the same coordinate arity first.
    """
    if a.resolution != b.resolution:
        raise ValueError("cannot compare series taken at different resolutions")
    if a.values.shape[1:] != b.values.shape[1:]:
        raise ValueError("coordinate arity mismatch; project the richer series first")
    return (
        len(a) == len(b)
        and np.array_equal(a.times, b.times)
        and np.array_equal(a.values, b.values)
    )


def make_impulse(target: str, dp, t_imp: float) -> ExternalForce:
    """Momentum kick the observer injects into the observed system."""
    dp = tuple(float(c) for c in np.asarray(dp, float))
    return ExternalForce(target, "impulse", dp, t_imp=float(t_imp))
