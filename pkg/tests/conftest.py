"""Shared scenario builders for the test suite."""

from tellurion.config import ScenarioConfig

TM = 2.221441469079183
DT_FAST = TM / 200


def fast_config(**overrides) -> ScenarioConfig:
    """A coarse Sun-Earth-Moon scenario sized for quick session tests."""
    raw = {
        "G": 1.0,
        "bodies": [
            {"name": "sun", "mass": 1.0, "fixed": True, "position": [0, 0, 0]},
            {"name": "earth", "mass": 1e-3, "attractors": ["sun"],
             "q": [1.0, 0.0, 0.0], "qdot": [0.0, 1.0, 0.0]},
            {"name": "moon", "mass": 1e-5, "attractors": ["earth"], "frame": "earth",
             "q": [1.05, 0.0, 0.0], "qdot": [0.0, 1.1414213562373094, 0.0]},
        ],
        "integrator": "rk4",
        "dt": DT_FAST,
        "duration": 2.5 * TM,
        "observer": {"eps_q": 1e-3, "eps_t": DT_FAST},
        "protocol": {
            "t_f": TM, "pre_window": TM, "post_window": TM,
            "impulse": {"body": "moon", "tangential_frac": 0.1},
        },
        "render": {"R": 32, "C": 32, "window": [-1.2, 1.2, -1.2, 1.2]},
        "session": {"sim_seconds_per_tick": TM / 20, "frame_every": 2},
    }
    raw.update(overrides)
    return ScenarioConfig(raw=raw)
