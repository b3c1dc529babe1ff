"""Observable-simulation laboratory.

Restricted N-body dynamics, single-degree-of-freedom reduced models built
from recorded trajectories, resolution-limited observation, force-injection
distinguishing trials, a register/pixel rendering pipe, and a blind-trial
session server.
"""

from tellurion.dynamics import (
    SEM_MOON_PERIOD,
    BodySpec,
    ExternalForce,
    PhysicalSystem,
    State,
    Trajectory,
    simulate,
    sun_earth_moon,
)

__all__ = [
    "SEM_MOON_PERIOD",
    "BodySpec",
    "ExternalForce",
    "PhysicalSystem",
    "State",
    "Trajectory",
    "simulate",
    "sun_earth_moon",
]
